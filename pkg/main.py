"""
Main entry point for polarfuse.

This file simply hands the command line to the polarfuse CLI.
"""

import sys

from src.app.polarfuse_cli import main

if __name__ == "__main__":
    sys.exit(main())
