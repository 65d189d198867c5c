import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).resolve().parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("script", DEMOS, ids=lambda p: p.name)
def test_demo_runs(script):
    out = subprocess.run([sys.executable, str(script)], check=True, capture_output=True, text=True)
    assert out.stdout.strip()
