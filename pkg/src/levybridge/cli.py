"""Command-line entry point: ``levybridge {run,list,validate-config}``.

Exit status: 0 when every bundle passes (and every negative control
rejects), 1 when an experiment fails or raises, 2 for usage and
configuration errors.  Progress with an ETA goes to standard error; the
plain-text summary goes to standard output.  The output directory defaults
to ``$LEVYBRIDGE_OUT`` (or ``./levybridge-out``) and receives
``<experiment>/reports.jsonl``, ``manifest.json``, ``summary.txt`` and the
CSV data tables.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
from tqdm import tqdm

from .charfn import parse_flat_config
from .exceptions import LevyBridgeError, ManifestError
from .experiments import (CATALOG, ENV_OUT, ExperimentManifest, StepResult,
                          list_experiments)
from .io import dump_json, write_csv
from .stats import jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levybridge", description="Lévy bridge and excursion verification runs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config", help="flat 'key = value' config file")
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--n-paths", type=int, dest="n_paths", help="override the Monte Carlo budget")
    r.add_argument("--out", help=f"output directory (default: ${ENV_OUT} or ./levybridge-out)")
    r.add_argument("--quiet", action="store_true", help="no progress output")
    sub.add_parser("list", help="list the experiment catalog")
    v = sub.add_parser("validate-config", help="check a config file and print it normalized")
    v.add_argument("config")
    return p


def load_manifest(path, seed=None, n_paths=None, out=None) -> ExperimentManifest:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc}") from None
    try:
        return ExperimentManifest.from_config(
            parse_flat_config(text), {"seed": seed, "n_paths": n_paths, "out": out})
    except ManifestError:
        raise
    except ValueError as exc:  # includes ModelRejectedError and bad numbers
        raise ManifestError(str(exc)) from None


def step_seeds(seed: int, n: int) -> list[int]:
    """Independent 63-bit seeds for the steps of one run."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(2, np.uint64)[0] >> np.uint64(1)) for c in children]


def _error_bundle_line(name: str, exc: Exception) -> str:
    return json.dumps({"bundle": name, "pass": False, "error": type(exc).__name__,
                       "message": str(exc)}, sort_keys=True)


def run(man: ExperimentManifest, quiet: bool = False, stream=None) -> int:
    """Run one experiment, write its artifacts and return the exit status."""
    stream = stream or sys.stdout
    exp = CATALOG[man.experiment]
    out = Path(man.out) / man.experiment
    out.mkdir(parents=True, exist_ok=True)
    dump_json(man.record(), out / "manifest.json")
    steps = exp.steps(man)
    seeds = step_seeds(man.seed, len(steps))
    lines, summary, ok = [], [], True
    tables = []
    t0 = time.monotonic()
    bar = tqdm(total=len(steps), desc=man.experiment, unit="step", file=sys.stderr,
               disable=quiet, dynamic_ncols=True)
    for (label, fn), seed in zip(steps, seeds):
        bar.set_postfix_str(label)
        try:
            res: StepResult = fn(seed)
        except (LevyBridgeError, ValueError, FloatingPointError) as exc:
            ok = False
            lines.append(_error_bundle_line(f"{man.experiment}/{label}", exc))
            summary.append(f"{man.experiment}/{label}: ERROR {type(exc).__name__}: {exc}")
            bar.update(1)
            continue
        for b in res.bundles:
            ok &= b.passed
            lines.extend(b.to_json_lines())
            summary.append(b.summary())
        for b in res.controls:
            rejected = not b.passed
            ok &= rejected
            head = b.to_json_lines()
            rec = json.loads(head[0])
            rec.update(control=True, control_rejected=rejected)
            lines.append(json.dumps(jsonable(rec), sort_keys=True))
            lines.extend(head[1:])
            summary.append(f"[negative control, must reject: "
                           f"{'rejected' if rejected else 'NOT REJECTED'}]\n" + b.summary())
        tables.extend(res.data)
        bar.update(1)
    bar.close()
    (out / "reports.jsonl").write_text("".join(line + "\n" for line in lines))
    for tab in tables:
        write_csv(out / f"{tab.name}.csv", tab.header, tab.columns, tab.meta or None)
    status = EXIT_OK if ok else EXIT_FAIL
    text = "\n".join(summary + [f"{man.experiment}: {'PASS' if ok else 'FAIL'}"]) + "\n"
    (out / "summary.txt").write_text(text)
    stream.write(text)
    if not quiet:
        print(f"[levybridge] {man.experiment} finished in {time.monotonic() - t0:.1f}s; "
              f"artifacts in {out}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc, result in list_experiments():
            print(f"{name:<15s} {desc}  [checks: {result}]")
        return EXIT_OK
    try:
        if args.command == "validate-config":
            man = load_manifest(args.config)
            cfg = man.to_config()
            print("".join(f"{k} = {v}\n" for k, v in cfg.items()), end="")
            return EXIT_OK
        man = load_manifest(args.config, args.seed, args.n_paths, args.out)
    except ManifestError as exc:
        print(f"levybridge: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(man, quiet=args.quiet)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
