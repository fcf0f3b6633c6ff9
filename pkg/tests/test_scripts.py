import csv
import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


@pytest.mark.parametrize(
    "script,args",
    [
        ("sharpness_sweep.py", ["--depths", "2-3", "--iters", "50", "--restarts", "2", "--strategies", "random,hybrid"]),
        ("bellman_family_scan.py", ["--points", "9"]),
        ("lemma_tightness.py", ["--pairs", "20", "--depth", "4"]),
        ("lemma_tightness.py", ["--pairs", "10", "--dim", "2", "--depth", "2"]),
    ],
)
def test_script_runs(tmp_path, script, args):
    out = tmp_path / "out.csv"
    proc = subprocess.run([sys.executable, str(SCRIPTS / script), *args, "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    rows = list(csv.reader(out.open()))
    assert len(rows) > 1
