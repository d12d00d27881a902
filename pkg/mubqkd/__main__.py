import sys
from mubqkd.cli import main


sys.exit(main(sys.argv[1:]))
