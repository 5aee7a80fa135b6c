"""
Command-line front end.

    irsnet --config scenario.cfg --command sweep --axis N=10:10:150 --out rate.csv

Commands: analytic, simulate, validate, sweep, figure. Every CSV starts
with ``#`` metadata lines followed by one header row. The ``# generated``
line carries a wall-clock timestamp and is the only line that changes
between identical runs; ``# content_sha256`` hashes everything else.

Exit codes: 0 ok, 1 runtime failure, 2 config or usage error,
3 a validation tolerance failed.
"""

import argparse
import datetime
import hashlib
import io
import math
import platform
import sys

import numpy as np
import scipy

from . import __version__, figures, metrics, montecarlo
from .config import _KEYS, ConfigError, ScenarioConfig, load_config

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2, 3
COMMANDS = ("analytic", "simulate", "validate", "sweep", "figure")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def render_csv(header, rows, meta):
    """CSV text with the metadata block; the timestamp line is last in the block."""
    body = io.StringIO()
    for k, v in meta.items():
        body.write(f"# {k}: {_fmt(v)}\n")
    body.write(",".join(header) + "\n")
    for r in rows:
        if len(r) != len(header):
            raise ValueError("row length does not match header")
        body.write(",".join(_fmt(v) for v in r) + "\n")
    text = body.getvalue()
    digest = hashlib.sha256(text.encode()).hexdigest()
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# content_sha256: {digest}\n# generated: {stamp}\n" + text


def strip_timestamp(text):
    return "".join(l for l in text.splitlines(True) if not l.startswith("# generated:"))


def _base_meta(cfg, command, seed=None):
    return {"irsnet": __version__, "command": command, "scenario_hash": cfg.digest(),
            "seed": cfg.seed if seed is None else seed, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# sweep axes
# ---------------------------------------------------------------------------

_FIELDS = set(ScenarioConfig.__dataclass_fields__)


def parse_axis(text):
    """NAME=start:step:stop (stop inclusive) -> (name, values).

    NAME is a config field (N, M, P_hat, ...) or a file key
    (elements, sinr_threshold_db, ...); file keys go through their
    unit conversion.
    """
    if "=" not in text:
        raise UsageError(f"axis {text!r}: expected NAME=start:step:stop")
    name, rng = (x.strip() for x in text.split("=", 1))
    parts = rng.split(":")
    if len(parts) != 3:
        raise UsageError(f"axis {text!r}: expected start:step:stop")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"axis {text!r}: non-numeric range") from None
    if step == 0 or (stop - start) / step < 0:
        raise UsageError(f"axis {text!r}: step does not reach stop")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    raw = [start + k * step for k in range(n)]
    if name in _KEYS:
        field_name, conv = _KEYS[name]
        if type(getattr(ScenarioConfig(), field_name)) not in (int, float):
            raise UsageError(f"axis {name!r} is not numeric")
    elif name in _FIELDS:
        field_name = name
        kind = type(getattr(ScenarioConfig(), name))
        if kind not in (int, float):
            raise UsageError(f"axis {name!r} is not numeric")
        conv = kind
    else:
        raise UsageError(f"unknown axis {name!r}")
    vals = []
    for x in raw:
        x = round(x, 12)
        v = conv(str(int(x)) if float(x).is_integer() else repr(x))
        vals.append(v)
    return name, field_name, raw, vals


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cond(cfg):
    return metrics.median_conditioning(cfg) if cfg.conditioning == "median" else None


def _metric_row(cfg):
    cond = _cond(cfg)
    rep = metrics.overall_metrics(cfg, cond=cond)
    pm = metrics.PowerModel.from_config(cfg)
    row = rep.as_row()
    row.update(p_ID=pm.p_ID, p_D=pm.p_D)
    return row, cond


def cmd_analytic(cfg, args):
    row, cond = _metric_row(cfg)
    meta = _base_meta(cfg, "analytic")
    meta["conditioning"] = cfg.conditioning
    if cond is not None:
        meta.update(r00=cond.r00, d0=cond.d0, t0=cond.t0)
    meta["tau_dB"] = 10 * math.log10(cfg.tau)
    meta["rate_units"] = "bits/s/Hz"
    return list(row), [list(row.values())], meta, EXIT_OK


def _batch(cfg, args):
    if args.batch:
        b = montecarlo.TrialBatch.load(args.batch)
        if b.scenario_hash != cfg.digest():
            raise UsageError(f"batch {args.batch} was drawn for scenario {b.scenario_hash}, "
                             f"not {cfg.digest()}")
        return b
    b = montecarlo.simulate_batch(cfg, args.trials, args.seed, cond=_cond(cfg) or "marginal",
                                  phase_mode=cfg.interferer_phases)
    if args.save_batch:
        b.save(args.save_batch)
    return b


def cmd_simulate(cfg, args):
    b = _batch(cfg, args)
    tau_db = np.asarray(cfg.tau_grid_db, dtype=float)
    tau = 10 ** (tau_db / 10)
    header, cols = ["tau_dB"], [tau_db]
    for tag, mode in (("ID", "indirect"), ("D", "direct")):
        cv = montecarlo.empirical_coverage(cfg, tau, mode=mode, batch=b)
        header += [f"C_{tag}_empirical", f"C_{tag}_stderr", f"C_{tag}_wilson_lo", f"C_{tag}_wilson_hi"]
        cols += [cv.p, cv.stderr, cv.lo, cv.hi]
    meta = _base_meta(cfg, "simulate", b.seed)
    meta.update(trials=b.n_trials, tail_fraction=b.tail_fraction, **b.meta)
    meta["R_ID_empirical"] = montecarlo.empirical_rate(b, "indirect", cfg.noise)
    meta["R_D_empirical"] = montecarlo.empirical_rate(b, "direct", cfg.noise)
    for k in montecarlo.COLUMNS:
        meta[f"mean_{k}"] = math.fsum(b[k].tolist()) / b.n_trials
    return header, np.column_stack(cols).tolist(), meta, EXIT_OK


def cmd_validate(cfg, args):
    cond = _cond(cfg) or metrics.median_conditioning(cfg)
    b = args.batch and montecarlo.TrialBatch.load(args.batch)
    if b and b.scenario_hash != cfg.digest():
        raise UsageError(f"batch {args.batch} does not match the scenario")
    if not b:
        b = montecarlo.simulate_batch(cfg, args.trials, args.seed, cond=cond,
                                      phase_mode=cfg.interferer_phases)
        if args.save_batch:
            b.save(args.save_batch)
    rep = montecarlo.validation_report(cfg, montecarlo.default_checks(cfg, cond), batch=b)
    header = ["check", "x", "analytic", "empirical", "stderr", "gap", "tol", "passed"]
    rows = []
    for r in rep.results:
        for x, a, e, se in zip(r.grid, r.analytic, r.empirical, r.stderr):
            rows.append([r.name, x, a, e, se, a - e, r.tol, r.passed])
    meta = _base_meta(cfg, "validate", b.seed)
    meta.update(trials=b.n_trials, tail_fraction=b.tail_fraction, passed=rep.passed)
    for r in rep.results:
        meta[f"max_gap_{r.name}"] = r.max_abs_gap
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: max gap {r.max_abs_gap:.4g} "
              f"(tol {r.tol:g})", file=sys.stderr)
    return header, rows, meta, EXIT_OK if rep.passed else EXIT_TOLERANCE


def cmd_sweep(cfg, args):
    if not args.axis:
        raise UsageError("sweep needs --axis NAME=start:step:stop")
    name, field_name, raw, vals = parse_axis(args.axis)
    header, rows = None, []
    for x, v in zip(raw, vals):
        try:
            c = cfg.replace(**{field_name: v})
        except ConfigError as exc:
            raise UsageError(f"axis {name}={x:g}: {exc}") from None
        row, _ = _metric_row(c)
        if header is None:
            header = [name] + list(row)
        rows.append([int(x) if float(x).is_integer() else x] + list(row.values()))
    meta = _base_meta(cfg, "sweep")
    meta.update(axis=args.axis, conditioning=cfg.conditioning, rate_units="bits/s/Hz")
    return header, rows, meta, EXIT_OK


def cmd_figure(cfg, args):
    if not args.figure:
        raise UsageError("figure needs --figure " + "|".join(figures.FIGURES))
    try:
        data = figures.emit_figure_data(args.figure, cfg, trials=args.trials, seed=args.seed)
    except ValueError as exc:
        if args.figure not in figures.FIGURES:
            raise UsageError(str(exc)) from None
        raise
    meta = _base_meta(cfg, "figure", data.meta.get("seed"))
    meta["figure"] = data.figure
    meta.update({k: v for k, v in data.meta.items() if k != "seed"})
    return data.header, data.rows, meta, EXIT_OK


_COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "validate": cmd_validate,
             "sweep": cmd_sweep, "figure": cmd_figure}


def build_parser():
    p = argparse.ArgumentParser(prog="irsnet", description=__doc__.split("\n\n")[0].strip(),
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="exit codes: 0 ok, 1 runtime failure, 2 config/usage error, "
                                       "3 tolerance failure. IRSNET_THREADS sets simulation threads.")
    p.add_argument("--config", help="scenario file (key = value); defaults when omitted")
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.add_argument("--command", choices=COMMANDS, default="analytic")
    p.add_argument("--figure", choices=figures.FIGURES)
    p.add_argument("--trials", type=int, help="Monte-Carlo trial count")
    p.add_argument("--seed", type=int, help="base seed for the random streams")
    p.add_argument("--axis", help="sweep axis NAME=start:step:stop, stop inclusive")
    p.add_argument("--save-batch", help="write the simulated trial batch to this binary file")
    p.add_argument("--batch", help="reuse a saved trial batch instead of simulating")
    return p


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        if args.trials is not None:
            if args.trials < 0:
                raise UsageError("--trials must be >= 0")
            if args.command in ("simulate", "validate") and args.trials < 1:
                raise UsageError("--trials must be >= 1 for simulate and validate")
        montecarlo.thread_count()       # reject a malformed IRSNET_THREADS early
        header, rows, meta, status = _COMMANDS[args.command](cfg, args)
        _write(render_csv(header, rows, meta), args.out)
        return status
    except ConfigError as exc:
        print(f"config error: {args.config or '<defaults>'}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        if isinstance(exc, ValueError) and "IRSNET_THREADS" in str(exc):
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:        # noqa: BLE001 - report, never traceback to the user
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(run())
