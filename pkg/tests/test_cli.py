import json
import os
import subprocess
import sys

import pytest

from levybridge.cli import EXIT_OK, EXIT_USAGE, load_manifest, main, step_seeds
from levybridge.exceptions import ManifestError
from levybridge.experiments import CATALOG, ENV_OUT, ExperimentManifest, list_experiments

VERVAAT = """\
# classical Vervaat identity
kind = BrownianWithDrift
sigma = 1.0
experiment = vervaat
seed = 42
n_steps = 128
n_paths = 4000
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_list_catalog(capsys):
    names = [n for n, _, _ in list_experiments()]
    assert len(names) == 10
    assert "vervaat" in names and "dim-limit" in names
    assert names == list(CATALOG)
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) == 10


def test_unknown_experiment_is_usage_error(tmp_path, capsys):
    cfg = write(tmp_path, VERVAAT.replace("vervaat", "no-such-experiment"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert "invalid config" in capsys.readouterr().err


@pytest.mark.parametrize("bad", ["seed = 42\n", "experiment = vervaat\nseed = x\n",
                                 "experiment = vervaat\nseed = 1\nwhatever = 3\n",
                                 "experiment = vervaat\nseed = 1\nkind = SymmetricStable\n"
                                 "alpha = 2.5\n"])
def test_bad_configs(tmp_path, bad):
    with pytest.raises(ManifestError):
        load_manifest(write(tmp_path, bad))


def test_missing_file_and_bad_arguments(tmp_path):
    assert main(["validate-config", str(tmp_path / "none.cfg")]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_validate_config_round_trip(tmp_path, capsys):
    cfg = write(tmp_path, VERVAAT)
    assert main(["validate-config", str(cfg)]) == EXIT_OK
    normalized = capsys.readouterr().out
    again = write(tmp_path, normalized, "norm.cfg")
    assert load_manifest(again) == load_manifest(cfg)


def test_manifest_overrides(tmp_path):
    m = load_manifest(write(tmp_path, VERVAAT), seed=7, n_paths=100, out="x")
    assert (m.seed, m.n_paths, m.out) == (7, 100, "x")
    assert isinstance(m, ExperimentManifest)


def test_step_seeds_deterministic():
    assert step_seeds(42, 3) == step_seeds(42, 3)
    assert len(set(step_seeds(42, 5))) == 5


def test_run_vervaat_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, VERVAAT)
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["run", str(cfg), "--out", str(out), "--quiet"]) == EXIT_OK
        outs.append(out / "vervaat")
    summary = capsys.readouterr().out
    assert "vervaat: PASS" in summary
    a, b = ((o / "reports.jsonl").read_bytes() for o in outs)
    assert a == b
    recs = [json.loads(line) for line in a.decode().splitlines()]
    assert any(r.get("control") for r in recs)
    assert (outs[0] / "manifest.json").exists() and (outs[0] / "summary.txt").exists()


def test_env_out_dir_and_progress_on_stderr(tmp_path):
    cfg = write(tmp_path, VERVAAT.replace("n_paths = 4000", "n_paths = 2000"))
    env = dict(os.environ, **{ENV_OUT: str(tmp_path / "envout")})
    proc = subprocess.run([sys.executable, "-m", "levybridge", "run", str(cfg)],
                          capture_output=True, text=True, env=env, cwd=tmp_path)
    assert proc.returncode in (0, 1)
    assert (tmp_path / "envout" / "vervaat" / "reports.jsonl").exists()
    assert "vervaat:" in proc.stdout
    assert "step" in proc.stderr  # tqdm progress bar with rate/ETA
