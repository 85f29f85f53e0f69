"""Dual-arm composition, ergonomic interaction score and the design index F."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateErgonomicModelError, InvalidInputError
from .workspace import VoxelGrid, grid_volume


@dataclass(frozen=True)
class DualArmLayout:
    """Placement of the two manipulators in the operator frame.

    ``R`` translates the robot base frame into the operator frame; the second
    arm sits ``D`` further along ``-x``. ``alpha`` scales the summed volumes.
    """

    R: tuple = (0.10, 0.60, 0.0)
    D: float = 0.20
    alpha: float = 0.5

    def __post_init__(self):
        R = tuple(float(v) for v in self.R)
        if len(R) != 3:
            raise InvalidInputError("R must be a 3-vector")
        object.__setattr__(self, "R", R)
        if self.D < 0:
            raise InvalidInputError(f"D must be >= 0, got {self.D}")
        if not 0 < self.alpha <= 1:
            raise InvalidInputError(f"alpha must lie in (0, 1], got {self.alpha}")

    def index_shifts(self, r):
        """Voxel-index shifts of the two copies: ``round(R/r)`` and ``round(R/r) - (round(D/r), 0, 0)``."""
        s1 = np.rint(np.asarray(self.R) / r).astype(np.int64)
        s2 = s1.copy()
        s2[0] -= int(np.rint(self.D / r))
        return s1, s2


def combine_dual_arm(left_grid, layout, binarize=False):
    """Sum two shifted copies of a single-arm grid.

    ``V_dual(i) = alpha * (V(i - s1) + V(i - s2))`` over an enlarged lattice
    holding both copies; lookups outside the source read as 0 and the result
    is clipped to [0, 1]. With ``binarize`` the source is first reduced to
    occupancy (1 where positive).
    """
    src = (left_grid.values > 0).astype(float) if binarize else left_grid.values
    s1, s2 = layout.index_shifts(left_grid.r)
    lo = np.minimum(s1, s2)
    dims = np.array(left_grid.dims) + np.abs(s1 - s2)
    out = np.zeros(tuple(dims))
    ni, nj, nk = left_grid.dims
    for s in (s1, s2):
        o = s - lo
        out[o[0]:o[0] + ni, o[1]:o[1] + nj, o[2]:o[2] + nk] += src
    out = np.clip(layout.alpha * out, 0.0, 1.0)
    return VoxelGrid(left_grid.centers(lo), left_grid.r, out)


def _check_lattice(*grids):
    ref = grids[0]
    for g in grids[1:]:
        if not ref.same_lattice(g):
            raise InvalidInputError("grids are not co-registered (origin, r or dims differ)")


def ergonomic_interaction_score(e_left, e_right, v_dual):
    """Sum over voxels of (E_left + E_right) * V_dual."""
    _check_lattice(e_left.grid, e_right.grid, v_dual)
    return float(np.sum((e_left.grid.values + e_right.grid.values) * v_dual.values))


def interaction_workspace(e_left, e_right, v_dual, tau=0.0):
    """Dual-arm values where V_dual >= tau and either EHEM is occupied; zero elsewhere."""
    _check_lattice(e_left.grid, e_right.grid, v_dual)
    keep = v_dual.occupied(tau) & ((e_left.grid.values + e_right.grid.values) > 0)
    return v_dual.with_values(np.where(keep, v_dual.values, 0.0))


def ergonomic_union(e_left, e_right):
    _check_lattice(e_left.grid, e_right.grid)
    return e_left.grid.with_values(((e_left.grid.values > 0) | (e_right.grid.values > 0)).astype(float))


def optimization_index(v_interaction, e_left, e_right):
    """F = V_I / V_R, with V_R the volume of the union of both EHEM fields."""
    _check_lattice(v_interaction, e_left.grid, e_right.grid)
    v_r = grid_volume(ergonomic_union(e_left, e_right))
    if v_r <= 0:
        raise DegenerateErgonomicModelError("human ergonomic workspace volume is zero")
    return grid_volume(v_interaction) / v_r


@dataclass(frozen=True, eq=False)
class InteractionResult:
    v_dual: VoxelGrid = field(repr=False)
    v_interaction: VoxelGrid = field(repr=False)
    score: float
    V_I: float
    V_R: float
    F: float
    counts: dict = field(default_factory=dict)
