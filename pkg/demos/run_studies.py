"""Run every study config and print the fitted rates.

Reports land in ./study_reports as CSV files with JSON sidecars.  The same
runs are available from the shell as ``barronlab study --config <file>``.
"""
import json
from pathlib import Path

from barronlab.cli import run_cli

configs = Path(__file__).resolve().parents[1] / "configs"
out = Path("study_reports")
out.mkdir(exist_ok=True)
for cfg in sorted(configs.glob("*.toml")):
    csv_path = out / (cfg.stem + ".csv")
    code = run_cli(["study", "--config", str(cfg), "--out", str(csv_path)])
    side = json.loads(csv_path.with_suffix(".json").read_text())
    print(f"{cfg.stem:<24} exit {code}  slope {side['slope']}  {side['fit_note']}")
