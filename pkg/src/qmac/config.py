"""Runtime limits for dense-matrix materialization.

Everything in this package works with dense complex matrices, so block
states of an n-letter channel grow like d**n.  The caps below make such
computations fail fast with a clear message instead of exhausting memory.
"""

from __future__ import annotations

import os

# Largest dense matrix dimension (rows) we agree to materialize.
DEFAULT_MAX_DIM = 4096

# Exhaustive decoding enumerates |M_1| * ... * |M_s| message tuples.
DEFAULT_MAX_MESSAGES = 4096

# Corner enumeration runs over s! permutations.
DEFAULT_MAX_PERM_SENDERS = 6

# Prior sweeps enumerate a product grid over sender simplices.
DEFAULT_MAX_GRID_POINTS = 100_000

ENV_MAX_DIM = "QMAC_MAX_DIM"


class CapExceeded(RuntimeError):
    """A computation would exceed a configured size cap."""


def max_dim(override: int | None = None) -> int:
    """Effective dense-dimension cap: explicit override, else QMAX env, else default."""
    if override is not None:
        return int(override)
    env = os.environ.get(ENV_MAX_DIM)
    if env is not None:
        return int(env)
    return DEFAULT_MAX_DIM


def require_dim(dim: int, cap: int | None = None, what: str = "matrix") -> None:
    limit = max_dim(cap)
    if dim > limit:
        raise CapExceeded(
            f"{what} needs dimension {dim}, configured cap is {limit} "
            f"(raise via {ENV_MAX_DIM} or the max-dim option)"
        )
