"""Command line entry point: ``qcorr analyze|scan|sweep|verify``.

Exit codes: 0 success, 2 input error, 3 unphysical state, 4 verification
failure.
"""
import argparse
import csv
import math
import os
import sys

import numba
import numpy as np

from . import __version__
from .degeneracy import AMBIGUITY_THRESHOLD, ambiguity_witness, scan_degenerate_directions
from .frameworks import (
    FRAMEWORKS,
    OptimizerSettings,
    c_at,
    closed_form_bell,
    evaluate_all_frameworks,
    q_at,
)
from .measurement import direction_from_angles
from .reports import StateFileError, format_json, format_text, load_state_file
from .states import UnphysicalStateError, build_bell_diagonal
from .verification import run_verification

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNPHYSICAL = 3
EXIT_VERIFY = 4

SWEEP_COLUMNS = ("c", "n_z", "Q_numeric", "C_numeric", "C_analytic", "C_prime_analytic")
SWEEP_SELF_CHECK_TOL = 1e-9


class InputError(Exception):
    pass


def _settings_dict(settings, tol):
    return {
        "grid_points": settings.grid_points,
        "refine_tol": settings.refine_tol,
        "refine_max_iters": settings.refine_max_iters,
        "n_starts": settings.n_starts,
        "seed": settings.seed,
        "degeneracy_tol": tol,
    }


def build_report(loaded, settings, tol):
    """Full analysis report for a loaded state file."""
    state = loaded.state
    triples = evaluate_all_frameworks(state, settings)
    witness = ambiguity_witness(state, settings, tol)
    c_vec = state.bell_vector
    closed = None
    if c_vec is not None:
        ref = closed_form_bell(c_vec)
        closed = {"q": ref.q, "c": ref.c, "c_prime": ref.c_prime, "a_n": ref.a_n,
                  "b_n": ref.b_n, "axis": ref.axis}
    frameworks = {}
    for t in triples:
        d = t.as_dict()
        d.pop("framework")
        if t.tie_break_sensitive:
            d["note"] = "ambiguous under degeneracy"
        frameworks[t.framework] = d
    return {
        "version": f"qcorr {__version__}",
        "input": dict(loaded.echo, tag=state.tag),
        "settings": _settings_dict(settings, tol),
        "frameworks": frameworks,
        "closed_form": closed,
        "degeneracy": witness.report.as_dict(),
        "ambiguity": {"is_ambiguous": witness.is_ambiguous, "summary": witness.summary},
    }


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load(path):
    try:
        return load_state_file(path)
    except StateFileError as exc:
        raise InputError(str(exc)) from exc


def cmd_analyze(args):
    loaded = _load(args.file)
    settings = OptimizerSettings(grid_points=args.grid, seed=args.seed)
    report = build_report(loaded, settings, args.tol)
    _emit(format_json(report) if args.json else format_text(report), args.out)
    return EXIT_OK


def cmd_scan(args):
    loaded = _load(args.file)
    settings = OptimizerSettings(grid_points=args.grid, seed=args.seed)
    report = scan_degenerate_directions(loaded.state, settings, tol=args.tol,
                                        ambiguity_threshold=args.threshold)
    doc = {
        "version": f"qcorr {__version__}",
        "input": dict(loaded.echo, tag=loaded.state.tag),
        "settings": _settings_dict(settings, args.tol),
        "degeneracy": report.as_dict(),
    }
    _emit(format_json(doc) if args.json else format_text(doc), args.out)
    return EXIT_OK


def parse_range(text):
    """``lo:hi:steps`` with ``0 <= lo <= hi <= 1`` and ``steps >= 1``."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            lo = hi = float(parts[0])
            steps = 1
        elif len(parts) == 3:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError:
        raise InputError(f"--c: expected lo:hi:steps, got {text!r}") from None
    if not (0.0 <= lo <= hi <= 1.0) or steps < 1 or (steps == 1 and lo != hi):
        raise InputError(f"--c: need 0 <= lo <= hi <= 1 and steps >= 1 (steps = 1 only if lo = hi), got {text!r}")
    return np.linspace(lo, hi, steps)


def parse_nz(text):
    """Either a sample count over [-1, 1] or a comma-separated list of values."""
    try:
        if "," in text or "." in text:
            nz = np.array([float(v) for v in text.split(",") if v.strip()])
        else:
            count = int(text)
            if count < 2:
                raise InputError(f"--nz: need at least 2 samples, got {count}")
            nz = np.linspace(-1.0, 1.0, count)
    except ValueError:
        raise InputError(f"--nz: expected a count or a list of values, got {text!r}") from None
    if nz.size == 0 or np.any(np.abs(nz) > 1.0):
        raise InputError("--nz: values must lie in [-1, 1]")
    return nz


def _parse_axis(text):
    try:
        w = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"--axis: expected three comma-separated numbers, got {text!r}") from None
    if w.shape != (3,):
        raise InputError(f"--axis: expected three components, got {text!r}")
    return w


def sweep_rows(weights, c_values, nz_values):
    """Rows of the classical-correlation profile along the xz meridian.

    The Bell vector is ``c * weights``; ``weights = (1, 1, 0)`` is the
    degenerate ``(c, c, 0)`` family.
    """
    dirs = direction_from_angles(np.arccos(nz_values), np.zeros_like(nz_values))
    rows = []
    for c in c_values:
        cvec = c * np.asarray(weights, dtype=float)
        rho = build_bell_diagonal(cvec)
        q = np.atleast_1d(q_at(rho, dirs))
        cn = np.atleast_1d(c_at(rho, dirs))
        c_an = np.sqrt(np.sum(cvec**2 * dirs**2, axis=1))
        cp_an = 2.0 * (np.sqrt(1.0 + c_an) - 1.0)
        for k, nz in enumerate(nz_values):
            rows.append((float(c), float(nz), float(q[k]), float(cn[k]), float(c_an[k]), float(cp_an[k])))
    return rows


def write_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([f"{v:.17g}" for v in row])


def cmd_sweep(args):
    c_values = parse_range(args.c)
    nz = parse_nz(args.nz)
    weights = np.array([1.0, 1.0, 0.0]) if args.family == "rho-star" else _parse_axis(args.axis)
    rows = sweep_rows(weights, c_values, nz)
    if args.out in (None, "-"):
        write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    worst = max(abs(r[3] - r[4]) for r in rows)
    if worst > SWEEP_SELF_CHECK_TOL:
        print(f"sweep self-check failed: max |C_numeric - C_analytic| = {worst:.3e}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args):
    if args.n < 1:
        raise InputError(f"--n must be >= 1, got {args.n}")
    settings = OptimizerSettings(grid_points=args.grid, seed=args.seed)
    result = run_verification(args.n, args.seed, settings=settings, restarts=args.restarts)
    for failure in result.failures:
        print(failure)
    print(result.summary())
    return EXIT_OK if result.passed else EXIT_VERIFY


def _configure_threads():
    value = os.environ.get("QCORR_THREADS")
    if not value:
        return
    try:
        n = int(value)
    except ValueError:
        raise InputError(f"QCORR_THREADS must be an integer, got {value!r}") from None
    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def build_parser():
    p = argparse.ArgumentParser(
        prog="qcorr",
        description="Trace-norm quantum/classical/total correlations of two-qubit states.",
    )
    p.add_argument("--version", action="version", version=f"qcorr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def optimizer_flags(sp):
        sp.add_argument("--grid", type=int, default=2000, help="hemisphere lattice size (default 2000)")
        sp.add_argument("--seed", type=int, default=0, help="optimizer seed (default 0)")

    a = sub.add_parser("analyze", help="all frameworks plus the degeneracy witness")
    a.add_argument("file", help="state file (JSON)")
    optimizer_flags(a)
    a.add_argument("--tol", type=float, default=1e-7, help="degeneracy tolerance on Q (default 1e-7)")
    a.add_argument("--json", action="store_true", help="emit JSON instead of key: value text")
    a.add_argument("--out", default="-", help="output path (default stdout)")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("scan", help="degenerate Q-optimal directions and the spread of C")
    s.add_argument("file", help="state file (JSON)")
    optimizer_flags(s)
    s.add_argument("--tol", type=float, default=1e-7, help="degeneracy tolerance on Q (default 1e-7)")
    s.add_argument("--threshold", type=float, default=AMBIGUITY_THRESHOLD,
                   help="spread above which C is ambiguous (default 1e-4)")
    s.add_argument("--json", action="store_true")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_scan)

    w = sub.add_parser("sweep", help="C along the xz meridian for a family of Bell states (CSV)")
    w.add_argument("--family", choices=("rho-star", "custom-axis"), default="rho-star")
    w.add_argument("--axis", default="1,1,0", help="weights w for custom-axis: c_vec = c * w")
    w.add_argument("--c", required=True, help="lo:hi:steps")
    w.add_argument("--nz", required=True, help="sample count over [-1, 1] or comma-separated n_z values")
    w.add_argument("--out", default="-", help="CSV path (default stdout)")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="closed forms against numerics on random Bell states")
    v.add_argument("--n", type=int, default=500)
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--grid", type=int, default=2000)
    v.add_argument("--restarts", type=int, default=6, help="product-search restarts per state")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _configure_threads()
        return args.func(args)
    except InputError as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnphysicalStateError as exc:
        print(f"qcorr: unphysical state: {exc}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except ValueError as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
