import sys

from orchsim.cli import main

sys.exit(main())
