import sys

from netmemo.cli import main

sys.exit(main())
