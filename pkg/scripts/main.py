import sys, os

sys.path.append(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))

from pltvsar.cli import main

if __name__ == "__main__":
    sys.exit(main())
