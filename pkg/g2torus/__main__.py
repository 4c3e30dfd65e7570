import sys

from g2torus.main import main

sys.exit(main())
