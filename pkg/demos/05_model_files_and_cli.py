"""Model serialization round trips and the command line, end to end.

Run with: python demos/05_model_files_and_cli.py
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from vecboost import BoosterConfig, load_model, save_model, train
from vecboost.synth import generate

workdir = Path(tempfile.mkdtemp(prefix="vecboost_demo_"))
print("working in", workdir)

# In-process: train, save, reload; predictions are preserved exactly.
ds = generate("friedman1", 500, seed=3)
res = train(ds, BoosterConfig(max_rounds=10))
model_path = workdir / "model.txt"
save_model(res.ensemble, model_path)
reloaded = load_model(model_path)
same = np.array_equal(res.ensemble.predict_raw(ds.features),
                      reloaded.predict_raw(ds.features))
print("round-trip predictions identical:", same)
print("model file starts with:")
print("\n".join(model_path.read_text().splitlines()[:8]))

# The same flow through the CLI.
def cli(*args):
    cmd = [sys.executable, "-m", "vecboost.cli", *args]
    out = subprocess.run(cmd, capture_output=True, text=True)
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return out.stdout

data_csv = workdir / "train.csv"
cli("synth", "--kind", "random_projection", "--n", "800", "--seed", "1",
    "--out", str(data_csv))
print(cli("train", "--data", str(data_csv), "--labels", "8",
          "--model", str(workdir / "cli_model.txt"), "--rounds", "15"), end="")
cli("predict", "--data", str(data_csv),
    "--model", str(workdir / "cli_model.txt"), "--out", str(workdir / "pred.csv"))
pred_lines = (workdir / "pred.csv").read_text().splitlines()
print("predictions header:", pred_lines[0])
print("first prediction:  ", pred_lines[1])
