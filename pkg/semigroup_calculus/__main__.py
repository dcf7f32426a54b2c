import sys

from semigroup_calculus.cli import main

sys.exit(main())
