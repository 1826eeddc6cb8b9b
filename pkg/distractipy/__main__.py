import sys

from distractipy.cli.main import main

sys.exit(main())
