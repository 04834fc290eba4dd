"""Run the acceptance suite and print its per-criterion summary."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    cmd = [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    sys.exit(subprocess.call(cmd, cwd=ROOT))
