import sys

from starkchain.app import main

sys.exit(main())
