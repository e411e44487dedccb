"""Input checks shared by the estimators and the command line."""
import numpy as np

from .states import TwoQubitState, as_state, build_bell_diagonal

__all__ = ["check_bell_vectors", "check_states"]


def check_bell_vectors(X):
    """Validate one ``(3,)`` or many ``(n, 3)`` physical Bell vectors.

    Returns:
        ndarray: float array of shape ``(n, 3)``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError(f"expected Bell vectors of shape (n, 3), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("Bell vectors must be finite")
    for c in X:
        build_bell_diagonal(c)
    return X


def check_states(X):
    """Coerce input to a list of validated :class:`TwoQubitState`.

    Accepts a single state, a sequence of states, a ``(4, 4)`` or ``(n, 4, 4)``
    array of density matrices, or a ``(3,)`` / ``(n, 3)`` array of Bell
    vectors.
    """
    if isinstance(X, TwoQubitState):
        return [X]
    if isinstance(X, (list, tuple)) and X and all(isinstance(x, TwoQubitState) for x in X):
        return list(X)
    arr = np.asarray(X)
    if arr.shape[-1:] == (3,) and arr.ndim in (1, 2):
        return [build_bell_diagonal(c) for c in check_bell_vectors(arr)]
    if arr.shape[-2:] == (4, 4) and arr.ndim in (2, 3):
        arr = arr.reshape((-1, 4, 4))
        return [as_state(m) for m in arr]
    raise ValueError(
        f"cannot interpret input of shape {arr.shape} as two-qubit states; "
        "expected (n, 4, 4) density matrices or (n, 3) Bell vectors"
    )
