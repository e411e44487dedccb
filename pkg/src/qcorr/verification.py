"""Closed form against numerics over random Bell-diagonal states."""
from dataclasses import dataclass, field

import numpy as np

from .frameworks import (
    OptimizerSettings,
    closed_form_bell,
    closest_product_search,
    maximize_c,
    minimize_q,
)
from .measurement import local_measure
from .states import AXES, UnphysicalStateError, build_bell_diagonal

__all__ = ["VerificationFailure", "VerificationResult", "run_verification", "sample_bell_vectors"]

Q_TOL = 1e-6
C_TOL = 1e-6
C_PRIME_TOL = 1e-4


def sample_bell_vectors(n, seed):
    """``n`` physical Bell vectors, uniform over the valid tetrahedron.

    Rejection sampling from the cube ``[-1, 1]^3``.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        c = rng.uniform(-1.0, 1.0, 3)
        try:
            build_bell_diagonal(c)
        except UnphysicalStateError:
            continue
        out.append(c)
    return np.array(out).reshape(n, 3)


@dataclass(frozen=True)
class VerificationFailure:
    vector: tuple
    check: str
    got: float
    expected: float
    tol: float

    def __str__(self):
        vec = ", ".join(f"{v:.17g}" for v in self.vector)
        return (
            f"FAIL {self.check} at c=({vec}): got {self.got:.17g}, "
            f"expected {self.expected:.17g} (|diff| = {abs(self.got - self.expected):.3e} > {self.tol:g})"
        )


@dataclass
class VerificationResult:
    n_states: int
    seed: int
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}: {self.n_states} states, seed {self.seed}, {len(self.failures)} failures"


def run_verification(
    n_states=500,
    seed=7,
    vectors=None,
    closed_form=closed_form_bell,
    settings=None,
    restarts=6,
):
    """Check optimizer and product-search results against the closed forms.

    For each vector: minimized Q against the intermediate ``|c_k|``, maximized
    C against the largest, and the closed-form C' against a numeric search
    for the product state closest to the optimally measured state.

    ``vectors`` overrides the random sample; ``closed_form`` may be swapped
    for a deliberately wrong one to confirm failures are reported.
    """
    settings = settings or OptimizerSettings(seed=seed)
    if vectors is None:
        vectors = sample_bell_vectors(n_states, seed)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    result = VerificationResult(len(vectors), seed)
    for c in vectors:
        rho = build_bell_diagonal(c)
        ref = closed_form(c)
        q = minimize_q(rho, settings).value
        cc = maximize_c(rho, settings).value
        axis = np.eye(3)[AXES.index(ref.axis)]
        chi = local_measure(rho, axis)
        oracle = closest_product_search(chi, restarts=restarts, seed=seed).distance
        for check, got, expected, tol in (
            ("Q''", q, ref.q, Q_TOL),
            ("C''", cc, ref.c, C_TOL),
            ("C'", oracle, ref.c_prime, C_PRIME_TOL),
        ):
            if not abs(got - expected) <= tol:
                result.failures.append(VerificationFailure(tuple(c), check, got, expected, tol))
    return result
