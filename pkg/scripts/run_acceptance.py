#!/usr/bin/env python3
"""Run the acceptance suite and show its PASS/FAIL lines."""

import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    tests = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.exit(pytest.main([str(tests), "-s", "-q", "-p", "no:cacheprovider"]))
