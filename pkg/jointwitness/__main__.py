import sys

from jointwitness.main import main

sys.exit(main())
