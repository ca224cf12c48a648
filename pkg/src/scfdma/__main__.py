from scfdma.cli import main
import sys
sys.exit(main())
