"""Degenerate optimal measurements and the spread of classical correlation they induce.

Minimizing Q over measurement directions need not have a unique solution.
When several directions reach the minimum, the classical correlation read off
at "the" optimal measurement depends on which one the optimizer returns. The
scan below samples the whole optimal set and reports the range of C over it.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .frameworks import (
    OptimizerSettings,
    _refine,
    c_at,
    canonical_direction,
    fibonacci_hemisphere,
    minimize_q,
    q_at,
)
from .measurement import direction_from_angles
from .states import as_state, build_rho_star

__all__ = [
    "AmbiguityWitness",
    "DegeneracyReport",
    "ambiguity_witness",
    "c_profile",
    "scan_degenerate_directions",
]

AMBIGUITY_THRESHOLD = 1e-4
SCAN_FACTOR = 4
N_DESCENTS = 32
PENALTY = 10.0


@dataclass(frozen=True, eq=False)
class DegeneracyReport:
    """Directions within ``tolerance`` of the minimal Q and the C values there.

    ``directions`` is ``(K, 3)`` and ``c_values`` ``(K,)``; ``c_min`` and
    ``c_max`` may come from refined points not on the scan lattice, in which
    case those points are included in ``directions`` too.
    """

    q_optimum: float
    tolerance: float
    directions: np.ndarray
    c_values: np.ndarray
    c_min: float
    c_max: float
    c_min_direction: np.ndarray
    c_max_direction: np.ndarray
    ambiguity_threshold: float
    lattice_size: int

    @property
    def c_spread(self):
        return self.c_max - self.c_min

    @property
    def is_ambiguous(self):
        return self.c_spread > self.ambiguity_threshold

    @property
    def degenerate_directions(self):
        return list(self.directions)

    @property
    def sampled_pairs(self):
        return list(zip(self.directions, self.c_values.tolist()))

    def as_dict(self):
        return {
            "q_optimum": self.q_optimum,
            "tolerance": self.tolerance,
            "n_degenerate": int(len(self.directions)),
            "lattice_size": self.lattice_size,
            "c_min": self.c_min,
            "c_max": self.c_max,
            "c_spread": self.c_spread,
            "c_min_direction": [float(v) for v in self.c_min_direction],
            "c_max_direction": [float(v) for v in self.c_max_direction],
            "ambiguity_threshold": self.ambiguity_threshold,
            "is_ambiguous": self.is_ambiguous,
        }


def _spread_out(indices, k):
    if len(indices) <= k:
        return indices
    picks = np.linspace(0, len(indices) - 1, k).round().astype(int)
    return indices[picks]


def scan_degenerate_directions(
    rho,
    settings=None,
    tol=1e-7,
    ambiguity_threshold=AMBIGUITY_THRESHOLD,
    scan_factor=SCAN_FACTOR,
    n_descents=N_DESCENTS,
    subsystem="A",
):
    """Sample the set of Q-optimal directions and the classical correlation on it.

    The optimal set can be the whole sphere, a curve or isolated points, so it
    is represented by samples: lattice nodes within ``tol`` of the minimum,
    the end points of local Q descents started across the low-Q region, and
    the C extremes refined along the set with an exact penalty on Q.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    rho = as_state(rho)
    settings = settings or OptimizerSettings()
    lattice = fibonacci_hemisphere(int(scan_factor * settings.grid_points))
    q_lat = np.asarray(q_at(rho, lattice, subsystem))
    opt = minimize_q(rho, settings, subsystem)

    def q_fn(n):
        return float(q_at(rho, n, subsystem))

    def c_fn(n):
        return float(c_at(rho, n, subsystem))

    step = math.sqrt(2.0 * math.pi / len(lattice))
    rng = np.random.default_rng(settings.seed)

    # descend from nodes spread across the lowest-Q tenth of the lattice
    order = np.argsort(q_lat, kind="stable")
    low = np.sort(order[: max(n_descents, len(order) // 10)])
    landings = []
    for i in _spread_out(low, n_descents):
        val, n, _ = _refine(q_fn, lattice[i], step, settings, rng.uniform(0.0, 2.0 * math.pi))
        landings.append((val, n))

    q_opt = min(opt.value, float(q_lat.min()), min(v for v, _ in landings))
    members = [lattice[q_lat <= q_opt + tol]]
    extra = [opt.direction] + [n for v, n in landings if v <= q_opt + tol]
    extra = [canonical_direction(n) for n in extra if q_fn(n) <= q_opt + tol]
    if extra:
        members.append(np.array(extra))
    directions = np.vstack(members)
    c_values = np.asarray(c_at(rho, directions, subsystem), dtype=float)

    refined = []
    for sense, idx in ((+1, int(np.argmin(c_values))), (-1, int(np.argmax(c_values)))):
        if len(directions) < 2:
            break

        def penalized(n, sense=sense):
            return sense * c_fn(n) + PENALTY * max(0.0, q_fn(n) - q_opt)

        _, n, _ = _refine(penalized, directions[idx], step, settings, rng.uniform(0.0, 2.0 * math.pi))
        if q_fn(n) <= q_opt + tol:
            refined.append(canonical_direction(n))
    if refined:
        directions = np.vstack([directions, refined])
        c_values = np.concatenate([c_values, [c_fn(n) for n in refined]])

    i_min, i_max = int(np.argmin(c_values)), int(np.argmax(c_values))
    return DegeneracyReport(
        q_optimum=float(q_opt),
        tolerance=float(tol),
        directions=directions,
        c_values=c_values,
        c_min=float(c_values[i_min]),
        c_max=float(c_values[i_max]),
        c_min_direction=directions[i_min],
        c_max_direction=directions[i_max],
        ambiguity_threshold=float(ambiguity_threshold),
        lattice_size=len(lattice),
    )


def c_profile(rho_star_c, n_z_samples):
    """Classical correlation of the ``(c, c, 0)`` state along the xz meridian.

    ``n_z_samples`` is either a count (evenly spaced over [-1, 1]) or explicit
    ``n_z`` values. Returns a list of ``(n_z, C)`` pairs.
    """
    if np.ndim(n_z_samples) == 0:
        if int(n_z_samples) < 2:
            raise ValueError("need at least two samples")
        nz = np.linspace(-1.0, 1.0, int(n_z_samples))
    else:
        nz = np.asarray(n_z_samples, dtype=float)
        if np.any(np.abs(nz) > 1):
            raise ValueError("n_z values must lie in [-1, 1]")
    rho = build_rho_star(rho_star_c)
    dirs = direction_from_angles(np.arccos(nz), np.zeros_like(nz))
    values = np.atleast_1d(c_at(rho, dirs))
    return list(zip(nz.tolist(), values.tolist()))


class AmbiguityWitness(NamedTuple):
    is_ambiguous: bool
    summary: str
    report: DegeneracyReport


def _fmt_dir(n):
    return "(" + ", ".join(f"{v:+.4f}" for v in n) + ")"


def ambiguity_witness(rho, settings=None, tol=1e-7, ambiguity_threshold=AMBIGUITY_THRESHOLD):
    """Whether degenerate Q-optimal measurements give different classical correlations."""
    report = scan_degenerate_directions(rho, settings, tol, ambiguity_threshold)
    summary = (
        f"Q = {report.q_optimum:.6g} on {len(report.directions)} sampled directions; "
        f"C ranges from {report.c_min:.6g} at {_fmt_dir(report.c_min_direction)} "
        f"to {report.c_max:.6g} at {_fmt_dir(report.c_max_direction)} "
        f"(spread {report.c_spread:.6g}, threshold {report.ambiguity_threshold:.1e})"
    )
    return AmbiguityWitness(report.is_ambiguous, summary, report)
