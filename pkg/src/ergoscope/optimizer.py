"""Design evaluation and search over arm lengths and base separation.

Every design is scored with the same seed (common random numbers), which
makes F a deterministic function of ``(a3, a4, D)``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import itertools
import logging

import numpy as np
from scipy.optimize import minimize

from .dexterity import DexterityConfig
from .ehem import EhemModel, mirror_ehem, sample_ehem
from .errors import DegenerateWorkspaceError, InvalidInputError
from .interaction import (DualArmLayout, InteractionResult, combine_dual_arm, ergonomic_interaction_score,
                          ergonomic_union, interaction_workspace, optimization_index)
from .kinematics import Pose, master_manipulator
from .workspace import (expand_lattice, grid_volume, minimum_pair_distance, sample_workspace,
                        threshold_filter, voxelize)

log = logging.getLogger(__name__)

STRATEGIES = ("grid", "nelder_mead", "grid_then_nelder_mead")
PENALTY = 1e-6


def facing_operator():
    """Base pose turning the arm's working direction (+x) towards the operator (-y)."""
    return Pose(np.zeros(3), np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))


def default_template():
    return replace(master_manipulator(), base_pose=facing_operator())


@dataclass(frozen=True)
class DesignPoint:
    a3: float
    a4: float
    D: float

    def as_array(self):
        return np.array([self.a3, self.a4, self.D])

    @classmethod
    def from_array(cls, x):
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class EvalConfig:
    template: object = field(default_factory=default_template)
    dexterity: DexterityConfig = field(default_factory=DexterityConfig)
    n_samples: int = 200_000
    seed: int = 0
    tau: float = 0.3
    r: float = 0.02
    r_auto: bool = False
    ehem: EhemModel = field(default_factory=EhemModel)
    mirror_plane: float = 0.0
    ehem_samples: int = 200_000
    R: tuple = (0.10, 0.60, 0.0)
    alpha: float = 0.5
    binarize: bool = False
    interaction_tau: float = 0.0
    n_seeds: int = 1
    workers: int = 1


def analyze_design(p, cfg, seed=None):
    """Run the full pipeline for one design and return an ``InteractionResult``.

    Raises ``DegenerateWorkspaceError`` if the arm has no dexterous samples.
    """
    seed = cfg.seed if seed is None else seed
    model = cfg.template.with_lengths(p.a3, p.a4)
    scatter = threshold_filter(sample_workspace(model, cfg.n_samples, seed, cfg.dexterity, cfg.workers), cfg.tau)
    r = minimum_pair_distance(scatter) if cfg.r_auto else cfg.r
    layout = DualArmLayout(cfg.R, p.D, cfg.alpha)
    v_dual = combine_dual_arm(voxelize(scatter, r), layout, binarize=cfg.binarize)

    left = cfg.ehem
    right = mirror_ehem(left, cfg.mirror_plane)
    lo_l, hi_l = left.bounds()
    lo_r, hi_r = right.bounds()
    v_dual = expand_lattice(v_dual, np.minimum(lo_l, lo_r), np.maximum(hi_l, hi_r))
    e_left = sample_ehem(left, cfg.ehem_samples, seed, v_dual, cfg.workers)
    e_right = sample_ehem(right, cfg.ehem_samples, seed, v_dual, cfg.workers)

    v_int = interaction_workspace(e_left, e_right, v_dual, cfg.interaction_tau)
    union = ergonomic_union(e_left, e_right)
    return InteractionResult(
        v_dual=v_dual,
        v_interaction=v_int,
        score=ergonomic_interaction_score(e_left, e_right, v_dual),
        V_I=grid_volume(v_int),
        V_R=grid_volume(union),
        F=optimization_index(v_int, e_left, e_right),
        counts={
            "samples": int(cfg.n_samples),
            "dexterous_samples": len(scatter),
            "dex_scale": scatter.dex_scale,
            "r": float(r),
            "dual_voxels": int(np.count_nonzero(v_dual.occupied())),
            "interaction_voxels": int(np.count_nonzero(v_int.occupied())),
            "ehem_voxels": int(np.count_nonzero(union.values)),
            "ehem_outside": e_left.n_outside + e_right.n_outside,
        },
    )


def evaluate_design(p, cfg):
    """F for one design; 0 (with a warning) when the arm has no usable workspace."""
    values = []
    for s in range(cfg.n_seeds):
        try:
            values.append(analyze_design(p, cfg, seed=cfg.seed + s).F)
        except DegenerateWorkspaceError as exc:
            log.warning("design %s is degenerate (%s); scoring F = 0", p, exc)
            values.append(0.0)
    return float(np.mean(values))


@dataclass(frozen=True)
class OptimizationProblem:
    bounds: tuple = ((0.05, 0.40), (0.05, 0.40), (0.05, 0.50))
    eval_config: EvalConfig = field(default_factory=EvalConfig)
    strategy: str = "grid_then_nelder_mead"
    budget: int = 1000
    grid_points: int = 9
    xatol: float = 1e-4
    fatol: float = 1e-10

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) != 3:
            raise InvalidInputError("bounds must give three intervals (a3, a4, D)")
        for lo, hi in b:
            if lo > hi or lo < 0:
                raise InvalidInputError(f"invalid bound interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", b)
        if self.strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {self.strategy!r}")
        if self.budget < 1:
            raise InvalidInputError("budget must be >= 1")
        if self.grid_points < 1:
            raise InvalidInputError("grid_points must be >= 1")

    @property
    def lower(self):
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self):
        return np.array([hi for _, hi in self.bounds])


@dataclass
class OptimizationResult:
    best: DesignPoint
    best_F: float
    history: list
    evaluations: int
    truncated: bool = False


class _BudgetExhausted(Exception):
    pass


def _rank(entry):
    p, F = entry
    return (-F, p.a3 + p.a4, p.D)


class _Evaluator:
    """Memoized objective that records history and enforces the budget."""

    def __init__(self, objective, budget):
        self.objective = objective
        self.budget = budget
        self.cache = {}
        self.history = []

    def __call__(self, p):
        key = (p.a3, p.a4, p.D)
        if key not in self.cache:
            if len(self.history) >= self.budget:
                raise _BudgetExhausted
            F = float(self.objective(p))
            self.cache[key] = F
            self.history.append((p, F))
        return self.cache[key]

    def record_many(self, points, workers):
        fresh = []
        for p in points:
            key = (p.a3, p.a4, p.D)
            if key not in self.cache and key not in {(q.a3, q.a4, q.D) for q in fresh}:
                fresh.append(p)
        truncated = len(self.history) + len(fresh) > self.budget
        fresh = fresh[: self.budget - len(self.history)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(self.objective, fresh))
        else:
            values = [self.objective(p) for p in fresh]
        for p, F in zip(fresh, values):
            self.cache[(p.a3, p.a4, p.D)] = float(F)
            self.history.append((p, float(F)))
        return truncated

    def best(self):
        return min(self.history, key=_rank)


def lattice_points(problem):
    axes = [np.unique(np.linspace(lo, hi, problem.grid_points)) for lo, hi in problem.bounds]
    return [DesignPoint.from_array(x) for x in itertools.product(*axes)]


def _nelder_mead(problem, ev, start):
    lo, hi = problem.lower, problem.upper
    free = hi > lo
    if not free.any():
        ev(DesignPoint.from_array(start))
        return
    x0 = np.asarray(start, dtype=float)[free]
    step = (hi - lo)[free] / (2 * max(problem.grid_points - 1, 1))
    simplex = np.vstack([x0] + [x0 + np.eye(len(x0))[i] * np.where(x0[i] + step[i] > hi[free][i], -step[i], step[i])
                                for i in range(len(x0))])

    def negF(xf):
        x = np.asarray(start, dtype=float).copy()
        x[free] = xf
        clipped = np.clip(x, lo, hi)
        violation = float(np.abs(x - clipped).sum())
        return -(ev(DesignPoint.from_array(clipped)) - PENALTY * violation)

    minimize(negF, x0, method="Nelder-Mead",
             options={"initial_simplex": simplex, "xatol": problem.xatol, "fatol": problem.fatol,
                      "maxfev": 20 * problem.budget, "maxiter": 20 * problem.budget})


def optimize(problem, objective=None, workers=None):
    """Maximize F over the design box.

    ``objective`` replaces the full-pipeline ``evaluate_design`` (useful for
    surrogates). Ties in F go to the smallest ``a3 + a4``, then smallest ``D``.
    """
    cfg = problem.eval_config
    if objective is None:
        objective = lambda p: evaluate_design(p, cfg)
    workers = cfg.workers if workers is None else workers
    ev = _Evaluator(objective, problem.budget)
    truncated = False
    try:
        if problem.strategy in ("grid", "grid_then_nelder_mead"):
            truncated = ev.record_many(lattice_points(problem), workers)
            if truncated:
                raise _BudgetExhausted
            start = ev.best()[0].as_array()
        else:
            start = 0.5 * (problem.lower + problem.upper)
        if problem.strategy != "grid":
            _nelder_mead(problem, ev, start)
    except _BudgetExhausted:
        truncated = True
        log.warning("evaluation budget of %d exhausted; returning best so far", problem.budget)
    best, best_F = ev.best()
    return OptimizationResult(best, best_F, list(ev.history), len(ev.history), truncated)
