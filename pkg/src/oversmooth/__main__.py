from oversmooth.cli import main

raise SystemExit(main())
