"""Denavit-Hartenberg serial chains: forward kinematics and geometric Jacobian.

Two DH conventions are supported:

``"modified"`` (Craig, proximal, the default)
    Row ``j`` of the table carries ``alpha_{j-1}``, ``a_{j-1}``, ``d_j`` and
    ``theta_j``; the link transform is ``RotX(alpha) TransX(a) RotZ(theta) TransZ(d)``
    and joint ``j`` turns about ``z_j``.

``"standard"`` (distal)
    Row ``j`` carries ``alpha_j``, ``a_j``, ``d_j``, ``theta_j``; the link transform
    is ``RotZ(theta) TransZ(d) TransX(a) RotX(alpha)`` and joint ``j`` turns about
    ``z_{j-1}``.

The master-manipulator table (twists ``0, pi/2, -pi/2, 0, -pi/2, pi/2``) only
describes a non-degenerate arm when read in the modified convention: read as
standard DH its first two joint axes coincide and the Jacobian is singular
everywhere. Both readings give the same zero-configuration position.

All quantities are SI: radians and meters.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import InvalidInputError

N_JOINTS = 6
CONVENTIONS = ("modified", "standard")

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class Pose:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        R = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        if np.abs(R @ R.T - np.eye(3)).max() > 1e-9 or abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise InvalidInputError("pose orientation must be a proper rotation matrix")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", R)

    def matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.orientation
        T[:3, 3] = self.position
        return T


@dataclass(frozen=True)
class DhLink:
    alpha: float
    a: float
    d: float = 0.0
    theta_offset: float = 0.0
    theta_down: float = -HALF_PI
    theta_up: float = HALF_PI

    def __post_init__(self):
        if self.a < 0:
            raise InvalidInputError(f"link length a must be >= 0, got {self.a}")
        if self.theta_down > self.theta_up:
            raise InvalidInputError(
                f"theta_down ({self.theta_down}) exceeds theta_up ({self.theta_up})"
            )


@dataclass(frozen=True)
class ManipulatorModel:
    links: tuple
    base_pose: Pose = field(default_factory=Pose)
    convention: str = "modified"

    def __post_init__(self):
        links = tuple(self.links)
        if len(links) != N_JOINTS:
            raise InvalidInputError(f"expected {N_JOINTS} links, got {len(links)}")
        if self.convention not in CONVENTIONS:
            raise InvalidInputError(f"unknown DH convention {self.convention!r}")
        object.__setattr__(self, "links", links)

    @property
    def lower(self):
        return np.array([l.theta_down for l in self.links])

    @property
    def upper(self):
        return np.array([l.theta_up for l in self.links])

    def with_lengths(self, a3, a4):
        """Copy with the two arm-segment lengths (rows 3 and 4) replaced."""
        links = list(self.links)
        links[2] = replace(links[2], a=float(a3))
        links[3] = replace(links[3], a=float(a4))
        return replace(self, links=tuple(links))

    def reach(self):
        """Upper bound on the distance from the base to the end-effector."""
        return sum(abs(l.a) + abs(l.d) for l in self.links)


LINK_TWISTS = (0.0, HALF_PI, -HALF_PI, 0.0, -HALF_PI, HALF_PI)
DEFAULT_LIMITS = ((-HALF_PI, HALF_PI),) * 4 + ((-math.pi, math.pi),) * 2


def master_manipulator(a3=0.26, a4=0.18, limits=DEFAULT_LIMITS, convention="modified"):
    """The 6-DoF master manipulator: only rows 3 and 4 have nonzero length."""
    links = []
    for j in range(N_JOINTS):
        a = {2: a3, 3: a4}.get(j, 0.0)
        lo, hi = limits[j]
        links.append(DhLink(alpha=LINK_TWISTS[j], a=float(a), d=0.0, theta_down=lo, theta_up=hi))
    return ManipulatorModel(links=tuple(links), convention=convention)


def _as_batch(model, q):
    Q = np.asarray(q, dtype=float)
    single = Q.ndim == 1
    Q = np.atleast_2d(Q)
    if Q.ndim != 2 or Q.shape[1] != N_JOINTS:
        raise InvalidInputError(f"joint vector must have {N_JOINTS} entries, got shape {np.shape(q)}")
    return Q, single


def _link_transforms(model, Q):
    """Per-link homogeneous transforms, shape ``(m, 6, 4, 4)``."""
    m = Q.shape[0]
    A = np.zeros((m, N_JOINTS, 4, 4))
    A[:, :, 3, 3] = 1.0
    alpha = np.array([l.alpha for l in model.links])
    a = np.array([l.a for l in model.links])
    d = np.array([l.d for l in model.links])
    th = Q + np.array([l.theta_offset for l in model.links])
    ct, st = np.cos(th), np.sin(th)
    ca, sa = np.cos(alpha), np.sin(alpha)
    if model.convention == "standard":
        A[..., 0, 0] = ct
        A[..., 0, 1] = -st * ca
        A[..., 0, 2] = st * sa
        A[..., 0, 3] = a * ct
        A[..., 1, 0] = st
        A[..., 1, 1] = ct * ca
        A[..., 1, 2] = -ct * sa
        A[..., 1, 3] = a * st
        A[..., 2, 1] = sa
        A[..., 2, 2] = ca
        A[..., 2, 3] = d
    else:
        A[..., 0, 0] = ct
        A[..., 0, 1] = -st
        A[..., 0, 3] = a
        A[..., 1, 0] = st * ca
        A[..., 1, 1] = ct * ca
        A[..., 1, 2] = -sa
        A[..., 1, 3] = -sa * d
        A[..., 2, 0] = st * sa
        A[..., 2, 1] = ct * sa
        A[..., 2, 2] = ca
        A[..., 2, 3] = ca * d
    return A


def chain_frames(model, q):
    """Cumulative frames ``T_0 .. T_6`` in the world frame, shape ``(m, 7, 4, 4)``.

    ``T_0`` is the base pose; ``T_6`` is the end-effector.
    """
    Q, _ = _as_batch(model, q)
    A = _link_transforms(model, Q)
    T = np.empty((Q.shape[0], N_JOINTS + 1, 4, 4))
    T[:, 0] = model.base_pose.matrix()
    for j in range(N_JOINTS):
        T[:, j + 1] = T[:, j] @ A[:, j]
    return T


def forward_kinematics_batch(model, q):
    """End-effector positions ``(m, 3)`` and orientations ``(m, 3, 3)``."""
    T = chain_frames(model, q)[:, -1]
    return T[:, :3, 3].copy(), T[:, :3, :3].copy()


def forward_kinematics(model, q):
    """End-effector pose for a single joint vector."""
    Q, single = _as_batch(model, q)
    if not single and Q.shape[0] != 1:
        raise InvalidInputError("forward_kinematics takes one joint vector; use forward_kinematics_batch")
    p, R = forward_kinematics_batch(model, Q)
    return Pose(p[0], R[0])


def jacobian_batch(model, q):
    """Geometric Jacobians, shape ``(m, 6, 6)``; rows 0-2 linear, rows 3-5 angular."""
    T = chain_frames(model, q)
    if model.convention == "standard":
        axes = T[:, :-1, :3, 2]
        origins = T[:, :-1, :3, 3]
    else:
        axes = T[:, 1:, :3, 2]
        origins = T[:, 1:, :3, 3]
    p_e = T[:, -1, :3, 3]
    lin = np.cross(axes, p_e[:, None, :] - origins)
    J = np.empty((T.shape[0], 6, N_JOINTS))
    J[:, :3, :] = lin.transpose(0, 2, 1)
    J[:, 3:, :] = axes.transpose(0, 2, 1)
    return J


def geometric_jacobian(model, q):
    """6x6 geometric Jacobian for a single joint vector."""
    Q, single = _as_batch(model, q)
    if not single and Q.shape[0] != 1:
        raise InvalidInputError("geometric_jacobian takes one joint vector; use jacobian_batch")
    return jacobian_batch(model, Q)[0]


def sample_joint_configs(model, stream, start, count):
    """Joint vectors for sample indices ``start .. start+count-1``, uniform within limits.

    Degenerate limits (``theta_down == theta_up``) give the fixed value.
    """
    u = stream.uniforms(start, count)[:, :N_JOINTS]
    lo, hi = model.lower, model.upper
    return lo + (hi - lo) * u


def sample_joint_config(model, stream, index=0):
    return sample_joint_configs(model, stream, index, 1)[0]
