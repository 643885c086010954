import sys

from smellfix.cli import main

sys.exit(main())
