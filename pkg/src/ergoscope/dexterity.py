"""Joint-limit-penalized manipulability.

    Dex = sqrt(det(J J^T)) * (1 - exp(-K * prod_j (q_j - lo_j)(hi_j - q_j) / (hi_j - lo_j)^2))

The penalty vanishes at any joint limit and saturates towards 1 near the
middle of the joint ranges; ``K`` sets how sharply it decays.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWorkspaceError, InvalidInputError, NumericalFailureError
from .kinematics import geometric_jacobian, jacobian_batch


@dataclass(frozen=True)
class DexterityConfig:
    K: float = 1e5

    def __post_init__(self):
        if not self.K > 0:
            raise InvalidInputError(f"K must be positive, got {self.K}")


def manipulability_batch(J):
    """sqrt(det(J J^T)) for a stack of square Jacobians.

    Evaluated as |det(J)|, which is equal for square J and keeps round-off
    near singularities at ~1e-18 instead of ~1e-9.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 3 or J.shape[1:] != (6, 6):
        raise InvalidInputError(f"expected a stack of 6x6 Jacobians, got shape {J.shape}")
    if not np.all(np.isfinite(J)):
        raise NumericalFailureError("Jacobian contains non-finite entries")
    return np.abs(np.linalg.det(J))


def manipulability(J):
    """Yoshikawa measure sqrt(det(J J^T)) of a 6x6 Jacobian."""
    J = np.asarray(J, dtype=float)
    if J.shape != (6, 6):
        raise InvalidInputError(f"expected a 6x6 Jacobian, got shape {J.shape}")
    return float(manipulability_batch(J[None])[0])


def joint_limit_penalty_batch(Q, model, cfg):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    lo, hi = model.lower, model.upper
    if np.any(Q < lo) or np.any(Q > hi):
        raise InvalidInputError("joint angle outside its limits")
    span = hi - lo
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(span > 0, (Q - lo) * (hi - Q) / np.where(span > 0, span, 1.0) ** 2, 0.0)
    return -np.expm1(-cfg.K * np.prod(factors, axis=1))


def joint_limit_penalty(q, model, cfg):
    """Penalty factor in [0, 1); exactly 0 when any joint sits on a limit."""
    return float(joint_limit_penalty_batch(q, model, cfg)[0])


def dexterity_batch(model, Q, cfg):
    return manipulability_batch(jacobian_batch(model, Q)) * joint_limit_penalty_batch(Q, model, cfg)


def dexterity(model, q, cfg):
    """Raw (unnormalized) penalized dexterity of one configuration."""
    return manipulability(geometric_jacobian(model, q)) * joint_limit_penalty(q, model, cfg)


def normalize_dexterity(raw):
    """Divide by the maximum so the largest value is exactly 1.

    Raises
    ------
    InvalidInputError
        empty input.
    DegenerateWorkspaceError
        every value is zero (the design is singular everywhere it was sampled).
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise InvalidInputError("cannot normalize an empty dexterity sequence")
    peak = raw.max()
    if not peak > 0:
        raise DegenerateWorkspaceError("all sampled dexterities are zero")
    return raw / peak
