"""Equivalent human ergonomic model (EHEM).

A kinematic stand-in for a forearm resting on an armrest. Operator frame:
``x`` runs along the desk edge (to the operator's right), ``y`` points
forward, away from the operator, ``z`` points up.

Hand point::

    fulcrum + slide * x + reach * y + Rz(roll) Rx(pitch) (forearm_length * y) + w

``pitch`` lifts the forearm (``pi/2`` points it straight up), ``roll`` swings
it about the vertical through the fulcrum (positive towards ``-x``), and ``w``
is a wrist offset inside a ball of radius ``wrist_radius``. A mirrored model
reflects every hand point across the plane ``x = mirror_plane``.

Occupied voxels carry the constant ergonomic index 0.5.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .errors import InvalidInputError
from .rng import CounterStream, chunk_ranges
from .workspace import CHUNK_SIZE, VoxelGrid

log = logging.getLogger(__name__)

ERGONOMIC_INDEX = 0.5
EHEM_STREAM = 1
_DEG30 = math.radians(30.0)


def _interval(name, value):
    lo, hi = (float(v) for v in value)
    if lo > hi:
        raise InvalidInputError(f"{name}: lower bound {lo} exceeds upper bound {hi}")
    return (lo, hi)


@dataclass(frozen=True)
class EhemModel:
    fulcrum: tuple = (-0.20, 0.0, 0.0)
    desk_slide_range: tuple = (-0.10, 0.10)
    reach_range: tuple = (-0.10, 0.10)
    pitch_range: tuple = (-_DEG30, _DEG30)
    roll_range: tuple = (-_DEG30, _DEG30)
    forearm_length: float = 0.25
    wrist_radius: float = 0.08
    mirror_plane: float = None

    def __post_init__(self):
        f = tuple(float(v) for v in self.fulcrum)
        if len(f) != 3:
            raise InvalidInputError("fulcrum must be a 3-vector")
        object.__setattr__(self, "fulcrum", f)
        for name in ("desk_slide_range", "reach_range", "pitch_range", "roll_range"):
            object.__setattr__(self, name, _interval(name, getattr(self, name)))
        if not self.forearm_length > 0:
            raise InvalidInputError("forearm_length must be positive")
        if self.wrist_radius < 0:
            raise InvalidInputError("wrist_radius must be >= 0")

    def bounds(self):
        """Axis-aligned box guaranteed to contain every hand point."""
        reach = (max(map(abs, self.desk_slide_range)) + max(map(abs, self.reach_range))
                 + self.forearm_length + self.wrist_radius)
        f = np.array(self.fulcrum)
        lo, hi = f - reach, f + reach
        if self.mirror_plane is not None:
            lo[0], hi[0] = 2 * self.mirror_plane - hi[0], 2 * self.mirror_plane - lo[0]
        return lo, hi


def mirror_ehem(model, plane):
    """Reflect the model across the vertical plane ``x = plane``.

    Mirroring twice across the same plane returns the original model.
    """
    if model.mirror_plane is None:
        return replace(model, mirror_plane=float(plane))
    if model.mirror_plane == plane:
        return replace(model, mirror_plane=None)
    # two reflections compose to a translation along x
    f = list(model.fulcrum)
    f[0] += 2.0 * (plane - model.mirror_plane)
    return replace(model, fulcrum=tuple(f), mirror_plane=None)


def _hand_points(model, slide, reach, pitch, roll, wrist):
    cp = np.cos(pitch)
    fwd = np.stack([-np.sin(roll) * cp, np.cos(roll) * cp, np.sin(pitch)], axis=-1)
    p = np.asarray(model.fulcrum) + model.forearm_length * fwd + wrist
    p[..., 0] += slide
    p[..., 1] += reach
    if model.mirror_plane is not None:
        p[..., 0] = 2.0 * model.mirror_plane - p[..., 0]
    return p


def ehem_hand_position(model, u):
    """Hand point for generalized coordinates ``u = (slide, reach, pitch, roll, wrist_offset)``.

    ``wrist_offset`` is a 3-vector with norm at most ``wrist_radius``.
    """
    slide, reach, pitch, roll, wrist = u
    wrist = np.asarray(wrist, dtype=float).reshape(3)
    checks = (("slide", slide, model.desk_slide_range), ("reach", reach, model.reach_range),
              ("pitch", pitch, model.pitch_range), ("roll", roll, model.roll_range))
    for name, v, (lo, hi) in checks:
        if not lo <= v <= hi:
            raise InvalidInputError(f"{name}={v} outside [{lo}, {hi}]")
    if np.linalg.norm(wrist) > model.wrist_radius * (1 + 1e-12):
        raise InvalidInputError("wrist offset exceeds wrist_radius")
    return _hand_points(model, float(slide), float(reach), float(pitch), float(roll), wrist)


def hand_samples(model, U):
    """Map deviates ``U`` of shape ``(m, 7)`` to hand points.

    Every coordinate is its interval's lower bound plus the width times a
    deviate, so widening a range stretches the same underlying draw.
    """
    def scale(rng, u):
        lo, hi = rng
        return lo + (hi - lo) * u

    slide = scale(model.desk_slide_range, U[:, 0])
    reach = scale(model.reach_range, U[:, 1])
    pitch = scale(model.pitch_range, U[:, 2])
    roll = scale(model.roll_range, U[:, 3])
    # uniform point in the ball: radius ~ cbrt(u), direction from (cos polar, azimuth)
    rad = model.wrist_radius * np.cbrt(U[:, 4])
    cz = 1.0 - 2.0 * U[:, 5]
    sz = np.sqrt(np.clip(1.0 - cz * cz, 0.0, None))
    az = 2.0 * math.pi * U[:, 6]
    wrist = rad[:, None] * np.stack([sz * np.cos(az), sz * np.sin(az), cz], axis=1)
    return _hand_points(model, slide, reach, pitch, roll, wrist)


@dataclass(frozen=True, eq=False)
class EhemField:
    grid: VoxelGrid
    n_samples: int = 0
    n_outside: int = 0

    def occupied(self):
        return self.grid.values > 0


def _chunk_hits(model, stream, template, start, count):
    pts = hand_samples(model, stream.uniforms(start, count))
    idx = template.lattice_index(pts)
    inside = template.in_bounds(idx)
    return np.ravel_multi_index(idx[inside].T, template.dims), int(count - inside.sum())


def sample_ehem(model, n_samples, seed, grid_template, workers=1, chunk_size=CHUNK_SIZE):
    """Occupancy field of the model on the lattice of ``grid_template``.

    Voxels hit at least once hold 0.5; hand points outside the template are
    discarded and counted in ``n_outside``.
    """
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    stream = CounterStream(seed, EHEM_STREAM, width=7)
    chunks = chunk_ranges(int(n_samples), chunk_size)
    run = lambda c: _chunk_hits(model, stream, grid_template, *c)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    values = np.zeros(int(np.prod(grid_template.dims)))
    outside = 0
    for flat, n_out in parts:
        values[flat] = ERGONOMIC_INDEX
        outside += n_out
    if outside:
        log.info("EHEM: %d of %d hand samples fell outside the grid", outside, n_samples)
    if not values.any():
        log.warning("EHEM field is empty on this grid")
    grid = VoxelGrid(grid_template.origin, grid_template.r, values.reshape(grid_template.dims))
    return EhemField(grid, int(n_samples), outside)
