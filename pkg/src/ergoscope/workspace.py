"""Monte Carlo dexterous workspace, voxel grids and isosurfaces.

Voxel indices are 1-based in the API (``voxel_index``) and 0-based in the
underlying arrays. A sample at ``x`` falls in voxel
``floor((x - P_min) / r) + 1``; the grid origin is the *center* of voxel
``(1, 1, 1)``, i.e. ``P_min + r/2``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .dexterity import DexterityConfig, dexterity_batch, normalize_dexterity
from .errors import DegenerateWorkspaceError, InvalidInputError
from .kinematics import forward_kinematics_batch, sample_joint_configs
from .rng import CounterStream, chunk_ranges

log = logging.getLogger(__name__)

ROBOT_STREAM = 0
CHUNK_SIZE = 16384
MAX_VOXELS = 200_000_000


@dataclass(frozen=True)
class DexSample:
    q: np.ndarray
    position: np.ndarray
    orientation: np.ndarray
    dex_raw: float
    dex_norm: float


@dataclass(frozen=True, eq=False)
class ScatterField:
    """Columnar store of Monte Carlo samples.

    ``dex_scale`` is the raw dexterity that maps to 1.0 after normalization;
    it is kept so separately sampled fields can be compared.
    """

    q: np.ndarray
    positions: np.ndarray
    orientations: np.ndarray
    dex_raw: np.ndarray
    dex_norm: np.ndarray
    bounds_lower: np.ndarray
    bounds_upper: np.ndarray
    dex_scale: float = 1.0

    def __len__(self):
        return len(self.dex_norm)

    def __getitem__(self, i):
        return DexSample(self.q[i], self.positions[i], self.orientations[i],
                         float(self.dex_raw[i]), float(self.dex_norm[i]))

    def subset(self, mask):
        if not np.any(mask):
            raise DegenerateWorkspaceError("no samples left in the scatter field")
        pos = self.positions[mask]
        return ScatterField(self.q[mask], pos, self.orientations[mask], self.dex_raw[mask],
                            self.dex_norm[mask], pos.min(axis=0), pos.max(axis=0), self.dex_scale)


def scatter_from_points(positions, dex_norm, dex_raw=None):
    """Build a field from bare positions and normalized values (no kinematics)."""
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    dn = np.asarray(dex_norm, dtype=float).reshape(len(pos))
    if len(pos) == 0:
        raise InvalidInputError("scatter field needs at least one sample")
    raw = dn.copy() if dex_raw is None else np.asarray(dex_raw, dtype=float)
    n = len(pos)
    return ScatterField(np.zeros((n, 6)), pos, np.broadcast_to(np.eye(3), (n, 3, 3)).copy(),
                        raw, dn, pos.min(axis=0), pos.max(axis=0))


def _sample_chunk(model, stream, cfg, start, count):
    Q = sample_joint_configs(model, stream, start, count)
    pos, rot = forward_kinematics_batch(model, Q)
    return Q, pos, rot, dexterity_batch(model, Q, cfg)


def sample_workspace(model, n_samples, seed, cfg=None, workers=1, chunk_size=CHUNK_SIZE):
    """Draw ``n_samples`` configurations and evaluate pose and dexterity for each.

    Sample ``i`` always uses the deviates addressed by ``(seed, i)``; chunks are
    concatenated in index order, so the result does not depend on ``workers``.
    """
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    cfg = cfg or DexterityConfig()
    stream = CounterStream(seed, ROBOT_STREAM, width=6)
    chunks = chunk_ranges(int(n_samples), chunk_size)
    run = lambda c: _sample_chunk(model, stream, cfg, *c)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    Q, pos, rot, raw = (np.concatenate(x) for x in zip(*parts))
    norm = normalize_dexterity(raw)
    return ScatterField(Q, pos, rot, raw, norm, pos.min(axis=0), pos.max(axis=0), float(raw.max()))


def threshold_filter(field, tau):
    """Keep samples whose normalized dexterity is at least ``tau`` (no renormalization)."""
    if not 0.0 <= tau <= 1.0:
        raise InvalidInputError(f"threshold must lie in [0, 1], got {tau}")
    return field.subset(field.dex_norm >= tau)


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    origin: np.ndarray
    r: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 3:
            raise InvalidInputError("voxel values must be a 3-D array")
        if not self.r > 0:
            raise InvalidInputError(f"voxel size must be positive, got {self.r}")

    @property
    def dims(self):
        return tuple(int(n) for n in self.values.shape)

    def centers(self, index0):
        """World coordinates of voxel centers for 0-based indices."""
        return self.origin + np.asarray(index0, dtype=float) * self.r

    @property
    def upper(self):
        return self.centers(np.array(self.dims) - 1)

    def occupied(self, tau=0.0):
        return (self.values >= tau) & (self.values > 0)

    def same_lattice(self, other, tol=1e-9):
        return (self.dims == other.dims and math.isclose(self.r, other.r, rel_tol=0, abs_tol=1e-15)
                and np.allclose(self.origin, other.origin, rtol=0, atol=tol * self.r))

    def with_values(self, values):
        return VoxelGrid(self.origin, self.r, values)

    def lattice_index(self, points):
        """0-based indices of the voxels containing ``points`` (may be out of range)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.floor((pts - self.origin) / self.r + 0.5).astype(np.int64)

    def in_bounds(self, idx):
        return np.all((idx >= 0) & (idx < np.array(self.dims)), axis=1)


def empty_like(grid):
    return VoxelGrid(grid.origin, grid.r, np.zeros(grid.dims))


def voxel_index(field, r):
    """1-based voxel indices of every sample, shape ``(n, 3)``."""
    return np.floor((field.positions - field.bounds_lower) / r).astype(np.int64) + 1


def voxelize(field, r):
    """Bin samples into cubes of side ``r``; each voxel keeps its largest ``dex_norm``."""
    if not r > 0:
        raise InvalidInputError(f"voxel size must be positive, got {r}")
    if len(field) == 0:
        raise InvalidInputError("cannot voxelize an empty field")
    dims = np.floor((field.bounds_upper - field.bounds_lower) / r).astype(np.int64) + 1
    if np.prod(dims.astype(float)) > MAX_VOXELS:
        raise InvalidInputError(f"grid of {tuple(dims)} voxels is too large; increase r")
    idx = voxel_index(field, r) - 1
    flat = np.ravel_multi_index(idx.T, tuple(dims))
    values = np.zeros(int(np.prod(dims)))
    np.maximum.at(values, flat, field.dex_norm)
    return VoxelGrid(field.bounds_lower + 0.5 * r, float(r), values.reshape(tuple(dims)))


def minimum_pair_distance(field):
    """Smallest nonzero distance between two sample positions."""
    from scipy.spatial import cKDTree

    pos = np.unique(field.positions, axis=0)
    if len(pos) < 2:
        raise DegenerateWorkspaceError("need two distinct sample positions to infer voxel size")
    dist, _ = cKDTree(pos).query(pos, k=2)
    return float(dist[:, 1].min())


def grid_volume(grid, tau=0.0):
    """Volume (m^3) of voxels with value >= tau (and > 0)."""
    return int(np.count_nonzero(grid.occupied(tau))) * grid.r ** 3


def expand_lattice(grid, lower, upper):
    """Re-embed ``grid`` in a larger lattice (same alignment) covering ``[lower, upper]``."""
    lo_idx = np.minimum(grid.lattice_index(lower)[0], 0)
    hi_idx = np.maximum(grid.lattice_index(upper)[0], np.array(grid.dims) - 1)
    dims = tuple(int(n) for n in hi_idx - lo_idx + 1)
    if np.prod(np.array(dims, dtype=float)) > MAX_VOXELS:
        raise InvalidInputError(f"grid of {dims} voxels is too large; increase r")
    values = np.zeros(dims)
    off = -lo_idx
    ni, nj, nk = grid.dims
    values[off[0]:off[0] + ni, off[1]:off[1] + nj, off[2]:off[2] + nk] = grid.values
    return VoxelGrid(grid.centers(lo_idx), grid.r, values)


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise InvalidInputError("triangle index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    def __len__(self):
        return len(self.triangles)

    def area(self):
        if not len(self.triangles):
            return 0.0
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        return float(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1).sum())

    def is_watertight(self):
        """True when every undirected edge belongs to exactly two triangles."""
        if not len(self.triangles):
            return False
        t = self.triangles
        edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return bool(np.all(counts == 2))


def extract_isosurface(grid, isovalue):
    """Marching-cubes surface at ``isovalue``, vertices in world coordinates.

    The field is padded with a layer of zeros, so regions touching the grid
    boundary are capped and the surface is closed.
    """
    from skimage.measure import marching_cubes

    if not 0.0 < isovalue < 1.0:
        raise InvalidInputError(f"isovalue must lie in (0, 1), got {isovalue}")
    empty = TriangleMesh(np.empty((0, 3)), np.empty((0, 3), dtype=np.int64))
    if grid.values.max(initial=0.0) <= isovalue:
        return empty
    padded = np.pad(grid.values, 1)
    level = isovalue
    # grid values sitting exactly on the level collapse triangles; nudge the level off them
    if np.any(padded == level):
        level = float(np.nextafter(level, np.inf))
    verts, faces, _, _ = marching_cubes(padded, level=level, spacing=(grid.r,) * 3,
                                        allow_degenerate=True, method="lewiner")
    faces = faces[(faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])]
    return TriangleMesh(verts + grid.origin - grid.r, faces)
