import pytest
from listings import LISTING_4, listing_1_file, listing_2_file, listing_3_file, listing_4_file

from smellfix.detectors import AR, DA, SmellInstance, detect, group_key, normalize_arg
from smellfix.errors import (
    AlreadyDocumented,
    MissingDeclaration,
    NonExtractable,
    OverlappingEdits,
    ReparseFailure,
)
from smellfix.lexer import lex
from smellfix.model import Span
from smellfix.parser import extract_assertions, parse_test_file
from smellfix.refactoring import (
    DEFAULT_MESSAGE,
    EXTRACTED_COMMENT,
    Edit,
    FixPlanner,
    Patch,
    apply_patches,
    partition_patches,
    plan_ar_fix,
    plan_da_fix,
    plan_group_fix,
    render_extraction,
    render_message,
    rewrite_file,
)


def significant(text):
    return [t.text for t in lex(text) if t.kind.value != "whitespace"]


def model_of(src, path="T.java"):
    return parse_test_file(path, src)


def call_in(expr):
    model = model_of(f"class T {{ @Test public void t() {{ {expr}; }} }}")
    return model, extract_assertions(model.classes[0].methods[0])[0]


def fix_all(src, kinds=(AR, DA), template=DEFAULT_MESSAGE):
    model = model_of(src)
    planner = FixPlanner(model, template)
    patches = [p for inst in detect(model, kinds) for p in planner.plan(inst)]
    return apply_patches(src, patches)


def da_group(model, key=None):
    groups = [i for i in detect(model, {DA}) if key is None or i.group_key == key]
    assert len(groups) == 1
    inst = groups[0]
    method = next(m for c, m in model.iter_methods() if (c.name, m.name) == (inst.class_name, inst.method_name))
    return method, inst


class TestArFix:
    def test_listing_one_line_93_placeholder(self):
        src = listing_1_file()
        model = model_of(src)
        call = extract_assertions(model.classes[0].methods[0])[0]
        out = apply_patches(src, [plan_ar_fix(call)])
        assert out.splitlines()[92].strip() == f'assertEquals("{DEFAULT_MESSAGE}", 2, vals.length);'

    def test_already_documented(self):
        _, call = call_in('assertEquals("Vals size 2", 2, vals.length)')
        with pytest.raises(AlreadyDocumented):
            plan_ar_fix(call)

    def test_blank_message_is_replaced(self):
        model, call = call_in('assertEquals(" ", 2, x)')
        out = apply_patches(model.raw_text, [plan_ar_fix(call)])
        (fixed,) = extract_assertions(model_of(out).classes[0].methods[0])
        assert fixed.arity == 3
        assert fixed.args[0].text == f'"{DEFAULT_MESSAGE}"'
        assert fixed.has_message

    def test_bare_fail_gets_single_argument(self):
        model, call = call_in("fail()")
        out = apply_patches(model.raw_text, [plan_ar_fix(call, "why")])
        assert 'fail("why");' in out

    def test_message_is_escaped(self):
        model, call = call_in("assertTrue(x)")
        out = apply_patches(model.raw_text, [plan_ar_fix(call, 'say "hi"\n')])
        assert 'assertTrue("say \\"hi\\"\\n", x);' in out

    def test_listing_one_to_two_with_messages(self):
        src = listing_1_file()
        calls = extract_assertions(model_of(src).classes[0].methods[0])
        msgs = ["Vals size 2", "Year Equal 1970", "Month 1"]
        out = apply_patches(src, [plan_ar_fix(c, m) for c, m in zip(calls, msgs)])
        assert significant(out) == significant(listing_2_file())

    def test_template_substitution(self):
        assert render_message("check {method} at {line}", "testX", 12) == "check testX at 12"
        out = fix_all(listing_1_file(), {AR}, "{method}:{line}")
        assert '"testGetValues:93", 2' in out and '"testGetValues:95", 1' in out

    def test_idempotent_planning(self):
        _, call = call_in("assertTrue(x)")
        assert plan_ar_fix(call) == plan_ar_fix(call)


class TestDaFix:
    def test_listing_three_plan(self):
        model = model_of(listing_3_file())
        method, group = da_group(model)
        plan = plan_da_fix(method, group, 2)
        assert [s.text for s in plan.moved_statements] == [
            "period = f.parsePeriod(twoDays.toUpperCase(Locale.ENGLISH));",
            "assertEquals(Period.days(2), period);",
        ]
        assert [s.declared_var[0] for s in plan.copied_declarations] == ["f", "twoDays"]
        assert [(s.text.split(" =")[0], t) for s, t in plan.converted_assignments] == [("period", "Period")]
        assert plan.new_method_name == "testPluralAffixParseOrderExtracted"
        assert plan.insert_after.start == method.span.end

    def test_listing_three_renders_listing_four(self):
        out = fix_all(listing_3_file(), {DA})
        assert significant(out) == significant(listing_4_file())
        assert EXTRACTED_COMMENT in out
        assert "\n\n    /*  Extracted Method  */\n    public void testPluralAffixParseOrderExtracted() {" in out

    def test_original_keeps_first_half(self):
        out = fix_all(listing_3_file(), {DA})
        model = model_of(out)
        original = next(m for _, m in model.iter_methods() if m.name == "testPluralAffixParseOrder")
        assert [s.span.start_line for s in original.statements] == [357, 359, 360, 361]

    def test_small_hand_example(self):
        model = model_of("class T { void testA(){int x=1; assertTrue(x>0); assertTrue(x>0);} }")
        method = model.classes[0].methods[0]
        assert not method.is_test  # package-private, so the group is built by hand
        calls = tuple(s.assertion for s in method.statements if s.assertion)
        group = SmellInstance(DA, "T.java", "T", "testA", (1,), calls, group_key(calls[0]))
        plan = plan_da_fix(method, group, 2)
        assert [s.text for s in plan.moved_statements] == ["assertTrue(x>0);"]
        assert [s.text for s in plan.copied_declarations] == ["int x=1;"]
        assert plan.converted_assignments == ()
        out = apply_patches(model.raw_text, [render_extraction(plan, method, model.raw_text)])
        extracted = next(m for _, m in model_of(out).iter_methods() if m.name == "testAExtracted")
        assert [s.text for s in extracted.statements] == ["int x=1;", "assertTrue(x>0);"]

    def test_group_of_three(self):
        src = (
            "class T {\n    @Test public void t() {\n"
            + "        assertTrue(a);\n" * 3
            + "    }\n}\n"
        )
        model = model_of(src)
        method, group = da_group(model)
        patches = plan_group_fix(model, method, group)
        assert [p.description.rsplit(" ", 1)[1] for p in patches] == ["tExtracted", "tExtracted2"]
        out = apply_patches(src, patches)
        names = [m.name for _, m in model_of(out).iter_methods()]
        assert names == ["t", "tExtracted", "tExtracted2"]
        assert detect(model_of(out), {DA}) == []

    def test_name_collision(self):
        src = "class T { @Test public void t() { assertTrue(a); assertTrue(a); } public void tExtracted() {} }"
        model = model_of(src)
        method, group = da_group(model)
        (patch,) = FixPlanner(model).plan(group)
        assert patch.description.endswith("tExtracted2")

    def test_unique_names_across_groups(self):
        src = "class T { @Test public void t() { assertTrue(a); assertTrue(a); assertNull(b); assertNull(b); } }"
        model = model_of(src)
        planner = FixPlanner(model)
        names = [p.description.rsplit(" ", 1)[1] for inst in detect(model, {DA}) for p in planner.plan(inst)]
        assert names == ["tExtracted", "tExtracted2"]

    def test_annotations_are_copied(self):
        src = (
            "class T {\n    @Test(timeout = 5)\n    public void t() {\n"
            + "        assertTrue(a);\n" * 2
            + "    }\n}\n"
        )
        out = fix_all(src, {DA})
        extracted = next(m for _, m in model_of(out).iter_methods() if m.name == "tExtracted")
        assert extracted.is_test
        assert extracted.annotations == ("@Test(timeout = 5)",)

    def test_no_copied_declarations(self):
        out = fix_all("class T { @Test public void t() { assertTrue(a); assertTrue(a); } }", {DA})
        extracted = next(m for _, m in model_of(out).iter_methods() if m.name == "tExtracted")
        assert [s.text for s in extracted.statements] == ["assertTrue(a);"]

    def test_nested_copy_stays_out_of_top_level_group(self):
        src = "class T { @Test public void t() { assertTrue(a); assertTrue(a); if (c) { assertTrue(a); } } }"
        model = model_of(src)
        method, group = da_group(model)
        assert len(group.assertions) == 2
        plan_da_fix(method, group, 2)

    def test_missing_declaration_when_mutated_outside(self):
        src = """class T { @Test public void t() {
            List<Integer> xs = new ArrayList<>();
            xs.add(1);
            assertEquals(1, xs.size());
            assertEquals(1, xs.size());
        } }"""
        model = model_of(src)
        method, group = da_group(model)
        with pytest.raises(MissingDeclaration):
            plan_da_fix(method, group, 2)

    def test_missing_declaration_on_reassignment(self):
        src = "class T { @Test public void t() { int x = 1; x = 2; assertTrue(x > 0); assertTrue(x > 0); } }"
        model = model_of(src)
        method, group = da_group(model)
        with pytest.raises(MissingDeclaration):
            plan_da_fix(method, group, 2)

    def test_non_extractable_when_later_code_depends(self):
        src = "class T { @Test public void t() { assertTrue(a); int y = 2; assertTrue(a); use(y); } }"
        model = model_of(src)
        method, group = da_group(model)
        with pytest.raises(NonExtractable):
            plan_da_fix(method, group, 2)

    def test_planner_failure_is_all_or_nothing(self):
        src = "class T { @Test public void t() { assertTrue(a); assertTrue(a); int y = 1; assertTrue(a); use(y); } }"
        model = model_of(src)
        method, group = da_group(model)
        with pytest.raises(NonExtractable):
            FixPlanner(model).plan(group)

    def test_parameters_are_not_declarations(self):
        src = "class T { public void testP() { int n = 1; assertTrue(n > 0); n = 5; assertTrue(n > 0); } }"
        model = model_of(src)
        method, group = da_group(model)
        plan = plan_da_fix(method, group, 2)
        assert plan.copied_declarations == ()
        assert [t for _, t in plan.converted_assignments] == ["int"]

    def test_crlf_is_preserved(self):
        src = listing_3_file().replace("\n", "\r\n")
        out = fix_all(src, {DA})
        assert "\n" not in out.replace("\r\n", "")
        assert significant(out) == significant(listing_4_file())


class TestApply:
    def test_identity(self):
        src = listing_1_file()
        assert apply_patches(src, []) == src

    def test_untouched_bytes_identical(self):
        src = listing_1_file()
        out = fix_all(src, {AR})
        assert out.replace(f'"{DEFAULT_MESSAGE}", ', "") == src

    def test_ar_and_da_on_disjoint_methods(self):
        src = (
            "class T {\n"
            "    @Test public void a() {\n        assertTrue(x);\n        assertTrue(y);\n    }\n"
            '    @Test public void b() {\n        assertTrue("m", z);\n        assertTrue("m", z);\n    }\n'
            "}\n"
        )
        out = fix_all(src)
        assert detect(model_of(out)) == []

    def test_overlap_earlier_wins(self):
        model = model_of(listing_3_file())
        planner = FixPlanner(model)
        insts = detect(model)
        patches = [p for i in insts for p in planner.plan(i)]
        accepted, rejected = partition_patches(patches)
        assert [p.smell.kind for p in accepted] == [AR, DA]
        assert [p.smell.lines for p in rejected] == [(363,)]
        out = apply_patches(model.raw_text, patches)
        assert f'assertEquals("{DEFAULT_MESSAGE}", Period.days(2), period);\n    }}' in out

    def test_overlapping_edits_in_one_patch(self):
        with pytest.raises(OverlappingEdits):
            Patch("f", (Edit(Span(0, 4, 1, 1), "a"), Edit(Span(2, 6, 1, 1), "b")), "bad")

    def test_degenerate_edit(self):
        with pytest.raises(ValueError):
            Edit(Span(3, 3, 1, 1), "")

    def test_reparse_failure(self):
        src = listing_1_file()
        patch = Patch("f", (Edit(Span(0, 0, 1, 1), "{"),), "break it")
        with pytest.raises(ReparseFailure):
            apply_patches(src, [patch])
        assert apply_patches(src, [patch], check=False).startswith("{")

    def test_rewrite_file_restores_on_post_write_failure(self, tmp_path, monkeypatch):
        path = tmp_path / "TestAbstractPartial.java"
        path.write_bytes(listing_1_file().encode())
        model = model_of(listing_1_file(), str(path))
        patches = [p for inst in detect(model) for p in FixPlanner(model).plan(inst)]
        import smellfix.refactoring as refactoring

        real = refactoring.parse_test_file
        calls = []

        def flaky(p, s):
            calls.append(p)
            if len(calls) == 2:
                raise refactoring.UnbalancedDelimiters(p, 1, "injected")
            return real(p, s)

        monkeypatch.setattr(refactoring, "parse_test_file", flaky)
        with pytest.raises(ReparseFailure):
            rewrite_file(path, patches)
        assert path.read_bytes() == listing_1_file().encode()
        assert not [p for p in tmp_path.iterdir() if p.name != path.name]

    def test_rewrite_file_writes(self, tmp_path):
        path = tmp_path / "T.java"
        path.write_bytes(listing_3_file().encode())
        model = model_of(listing_3_file(), str(path))
        patches = [p for inst in detect(model, {DA}) for p in FixPlanner(model).plan(inst)]
        text = rewrite_file(path, patches)
        assert path.read_text() == text
        assert "testPluralAffixParseOrderExtracted" in text


def test_listing_four_fixture_is_consistent():
    assert LISTING_4.count("assertEquals") == 2
    assert [normalize_arg(a) for a in ("Period.days(2)", "period")] == ["Period.days(2)", "period"]
