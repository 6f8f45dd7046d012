"""Entry point for python -m mcp_cfrit_crunchtools."""

from . import main

if __name__ == "__main__":
    main()
