import sys

from cpucopula.cli import main

sys.exit(main())
