import io
import json
import subprocess
import sys

import pytest
from listings import listing_1_file, listing_2_file, listing_3_file

from smellfix.cli import RunConfig, cmd_review, main
from smellfix.detectors import AR, detect
from smellfix.lexer import lex
from smellfix.parser import parse_test_file
from smellfix.refactoring import DEFAULT_MESSAGE


def significant(text):
    return [t.text for t in lex(text) if not t.is_trivia or t.kind.value == "comment"]


@pytest.fixture
def l1(tmp_path):
    path = tmp_path / "TestAbstractPartial.java"
    path.write_text(listing_1_file())
    return path


@pytest.fixture
def l3(tmp_path):
    path = tmp_path / "TestPeriodFormatterBuilder.java"
    path.write_text(listing_3_file())
    return path


def scripted(*answers):
    it = iter(answers)

    def read(prompt):
        try:
            return next(it)
        except StopIteration:
            raise EOFError from None

    return read


def review(path, *answers, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = cmd_review(RunConfig("review", [str(path)], **kw), scripted(*answers), out, err)
    return code, out.getvalue()


class TestDetect:
    def test_listing_one(self, l1, capsys):
        assert main(["detect", str(l1), "--smell", "ar"]) == 1
        out = capsys.readouterr().out.splitlines()
        assert len(out) == 3
        assert [line.split(": ")[0].rsplit(":", 1)[1] for line in out] == ["93", "94", "95"]

    def test_clean_file(self, tmp_path, capsys):
        path = tmp_path / "TestClean.java"
        path.write_text(listing_2_file())
        assert main(["detect", str(path)]) == 0
        assert capsys.readouterr().out == ""

    def test_missing_path(self, tmp_path, capsys):
        assert main(["detect", str(tmp_path / "nope")]) == 2
        assert "no such file" in capsys.readouterr().err

    def test_json_format(self, l3, capsys):
        assert main(["detect", str(l3), "--smell", "da", "--format", "json"]) == 1
        (record,) = json.loads(capsys.readouterr().out)
        assert record["lines"] == [361, 363]
        assert record["group_key"] == "assertEquals(Period.days(2),period)"

    def test_csv_format(self, l1, capsys):
        main(["detect", str(l1), "--format", "csv"])
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "kind,file,class,method,lines,group_key"
        assert len(lines) == 4

    def test_directory_and_unparsable_file(self, tmp_path, l1, capsys):
        (tmp_path / "BrokenTest.java").write_text("class BrokenTest { void t() {")
        assert main(["detect", str(tmp_path)]) == 1
        captured = capsys.readouterr()
        assert "BrokenTest.java" in captured.err
        assert len(captured.out.splitlines()) == 3

    def test_bad_flag_exits_2(self, l1):
        with pytest.raises(SystemExit) as info:
            main(["detect", str(l1), "--smell", "zz"])
        assert info.value.code == 2


class TestFix:
    def test_dry_run_is_pure(self, l1, l3, capsys):
        before = {p: p.read_bytes() for p in (l1, l3)}
        assert main(["fix", str(l1), str(l3)]) == 1
        out = capsys.readouterr().out
        assert f'+        assertEquals("{DEFAULT_MESSAGE}", 2, vals.length);' in out
        assert "+    public void testPluralAffixParseOrderExtracted() {" in out
        assert {p: p.read_bytes() for p in (l1, l3)} == before

    def test_write_then_clean(self, l1, capsys):
        assert main(["fix", str(l1), "--smell", "ar", "--write"]) == 1
        text = l1.read_text()
        expected = listing_2_file()
        for msg in ("Vals size 2", "Year Equal 1970", "Month 1"):
            expected = expected.replace(msg, DEFAULT_MESSAGE)
        assert text == expected
        assert main(["fix", str(l1), "--smell", "ar", "--write"]) == 0
        assert main(["detect", str(l1)]) == 0

    def test_da_write(self, l3):
        assert main(["fix", str(l3), "--smell", "da", "--write"]) == 1
        assert "testPluralAffixParseOrderExtracted" in l3.read_text()
        assert main(["detect", str(l3), "--smell", "da"]) == 0

    def test_overlapping_change_is_left_for_later(self, l3, capsys):
        assert main(["fix", str(l3), "--write"]) == 1
        assert "1 left" in capsys.readouterr().out
        # the extracted method now holds a single bare assertion, which is below the AR threshold
        assert main(["fix", str(l3), "--write"]) == 0

    def test_custom_message_flag(self, l1):
        main(["fix", str(l1), "--smell", "ar", "--write", "--message", "{method} line {line}"])
        assert '"testGetValues line 94", 1970' in l1.read_text()

    def test_env_override(self, l1, monkeypatch):
        monkeypatch.setenv("SMELLFIX_MESSAGE", "from env")
        main(["fix", str(l1), "--write"])
        assert l1.read_text().count('"from env"') == 3

    def test_flag_beats_env(self, l1, monkeypatch):
        monkeypatch.setenv("SMELLFIX_MESSAGE", "from env")
        main(["fix", str(l1), "--write", "--message", "from flag"])
        assert l1.read_text().count('"from flag"') == 3

    def test_skipped_plans_are_listed(self, tmp_path, capsys):
        path = tmp_path / "FooTest.java"
        path.write_text(
            "class FooTest {\n  @Test public void t() {\n    int x = 1;\n    x = 2;\n"
            '    assertTrue("m", x > 0);\n    assertTrue("m", x > 0);\n  }\n}\n'
        )
        assert main(["fix", str(path), "--write"]) == 1
        captured = capsys.readouterr()
        assert "skipped" in captured.err and "1 left" in captured.out
        assert main(["detect", str(path)]) == 1

    def test_reparse_failure_reports_and_restores(self, l1, monkeypatch, capsys):
        import smellfix.refactoring as refactoring

        real = refactoring.parse_test_file
        state = {"n": 0}

        def flaky(path, source):
            state["n"] += 1
            if state["n"] == 2:
                raise refactoring.UnbalancedDelimiters(path, 1, "injected")
            return real(path, source)

        monkeypatch.setattr(refactoring, "parse_test_file", flaky)
        assert main(["fix", str(l1), "--write"]) == 2
        assert l1.read_text() == listing_1_file()
        assert "original restored" in capsys.readouterr().err


class TestReview:
    def test_listing_two_messages(self, l1):
        code, out = review(l1, "y", "Vals size 2", "y", "Year Equal 1970", "y", "Month 1")
        assert code == 0
        assert l1.read_text() == listing_2_file()
        assert significant(l1.read_text()) == significant(listing_2_file())
        assert "> " in out and "Apply?" not in out  # prompts go through input_fn

    def test_accept_all_uses_default_message(self, l1):
        review(l1, "a")
        assert l1.read_text().count(f'"{DEFAULT_MESSAGE}"') == 3

    def test_accept_one_of_three(self, l1):
        review(l1, "n", "y", "Year Equal 1970", "n")
        remaining = detect(parse_test_file(str(l1), l1.read_text()), {AR})
        assert [i.lines for i in remaining] == [(93,), (95,)]
        assert l1.read_text().count('"Year Equal 1970"') == 1

    def test_skip_all(self, l1):
        review(l1, "n", "n", "n")
        assert l1.read_text() == listing_1_file()

    def test_quit_and_eof(self, l1):
        review(l1, "y", "", "q")
        assert l1.read_text().count(f'"{DEFAULT_MESSAGE}"') == 1
        l1.write_text(listing_1_file())
        review(l1)
        assert l1.read_text() == listing_1_file()

    def test_accept_all_matches_fix_write(self, tmp_path, l1, l3):
        copies = tmp_path / "copies"
        copies.mkdir()
        for p in (l1, l3):
            (copies / p.name).write_bytes(p.read_bytes())
        review(l1, "a")
        review(l3, "a")
        main(["fix", str(copies / l1.name), str(copies / l3.name), "--write"])
        for p in (l1, l3):
            assert (copies / p.name).read_bytes() == p.read_bytes()

    def test_shows_context_and_diff(self, l3):
        _, out = review(l3, "n", "n", "n")
        assert ">   361 |" in out and "+++" in out

    def test_needs_a_terminal(self, l1, monkeypatch):
        monkeypatch.setattr(sys, "stdin", io.StringIO(""))
        err = io.StringIO()
        assert cmd_review(RunConfig("review", [str(l1)]), None, io.StringIO(), err) == 2
        assert "fix --write" in err.getvalue()


class TestPipeline:
    def test_artifacts(self, tmp_path, l1, l3, capsys):
        out = tmp_path / "out"
        assert main(["pipeline", str(tmp_path), "--out-dir", str(out)]) == 0
        assert sorted(p.name for p in out.iterdir()) == ["classes.csv", "results.csv", "smells.json", "tests.csv"]
        assert '"AssertionRoulette": 5' in capsys.readouterr().out

    def test_csv_line_report(self, tmp_path, l1):
        out = tmp_path / "out"
        assert main(["pipeline", str(tmp_path), "--out-dir", str(out), "--format", "csv"]) == 0
        assert (out / "smells.csv").read_text().startswith("kind,file,class,method,lines,group_key\n")

    def test_empty_project(self, tmp_path):
        project = tmp_path / "empty"
        project.mkdir()
        assert main(["pipeline", str(project), "--out-dir", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "tests.csv").read_text() == ""
        assert (tmp_path / "o" / "smells.json").read_text() == "[]\n"

    def test_unwritable_out_dir(self, tmp_path, l1, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["pipeline", str(tmp_path), "--out-dir", str(blocker / "sub")]) == 2
        assert "cannot write" in capsys.readouterr().err

    def test_needs_a_directory(self, l1):
        assert main(["pipeline", str(l1), "--out-dir", "x"]) == 2


def test_module_entry_point(l1):
    proc = subprocess.run([sys.executable, "-m", "smellfix", "detect", str(l1)], capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.count("AssertionRoulette") == 3
