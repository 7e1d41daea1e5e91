#!/usr/bin/env python
"""
Wrapper script to run the main module with the correct Python path.
"""
import sys
from pathlib import Path

# Get the project root directory
project_root = str(Path(__file__).resolve().parent)

# Add to Python path if not already there
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
