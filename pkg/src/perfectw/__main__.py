import sys

from perfectw.cli import main

sys.exit(main())
