"""ctest entry: run the Python tests, or report a skip when the module is not installed."""

import subprocess
import sys
from pathlib import Path

try:
    import ergcount  # noqa: F401
except ImportError:
    print("ergcount Python module not installed (pip install --no-build-isolation -e .); skipping")
    sys.exit(77)

sys.exit(subprocess.call([sys.executable, "-m", "pytest", "-q", str(Path(__file__).parent)]))
