from linserre.cli import main

raise SystemExit(main())
