import sys

from panolayout.main import main

sys.exit(main())
