"""The whole workflow on the bundled fixture, from Python instead of the shell.

Equivalent to ``riskpath pipeline --config bundled:fixture_config.yaml --out <dir>``.
"""
import sys
import tempfile
from pathlib import Path

from riskpath.pipeline import load_config, run_pipeline

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="riskpath-"))
manifest = run_pipeline(load_config("bundled:fixture_config.yaml", out=out))
print("wrote", len(manifest["artifacts"]), "artifacts to", out)
print((out / "table6.md").read_text())
print((out / "table4.csv").read_text())
