"""Box-constrained continuous metaheuristics over [0,1]^dim.

Five population algorithms (particle swarm, grey wolf, ant colony for
continuous domains, cuckoo search with Levy flights, firefly) maximize an
arbitrary scalar score. They know nothing about precoding: the problem is
just a dimension plus an evaluation callback (optionally batched, which the
harness uses to score a whole population in one vectorized call).

Every stochastic draw comes from a single per-run generator consumed in a
fixed order (populations drawn agent-major, dimension-minor), so a run is
reproducible from its seed regardless of how evaluations are executed.
Best-ever score and point are tracked across the whole history; ties never
displace an earlier incumbent, which keeps argmax selections deterministic.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

# Hyperparameter defaults per algorithm.
DEFAULT_HYPERPARAMS = {
    "pso": {"vel_min": -0.2, "vel_max": 0.2},
    "gwo": {},
    "aco": {"kappa1": 10, "kappa2": 0.5},
    "cs": {"kappa1": 0.25, "kappa2": 1.5},
    "fa": {"kappa1": 0.1, "kappa2": 0.97},
}

ALGORITHMS = tuple(DEFAULT_HYPERPARAMS)


@dataclass
class BoxProblem:
    """A maximization problem on the unit box.

    ``evaluate`` maps one point (dim,) to a scalar score and must be
    deterministic; ``evaluate_batch``, when given, maps (n, dim) to (n,)
    and lets population scoring happen in one call.
    """

    dim: int
    evaluate: Callable[[np.ndarray], float]
    evaluate_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str
    n_agents: int = 100
    iterations: int = 10
    seed: int = 0
    hyperparams: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OptimizationTrace:
    """Outcome of one run: best point/score and the per-iteration best curve.

    ``per_iteration_best`` has iterations+1 entries; entry 0 is the best of
    the initial population and the sequence is non-decreasing.
    """

    best_point: np.ndarray
    best_score: float
    per_iteration_best: np.ndarray
    evaluations_used: int


def clip(x, lo=0.0, hi=1.0) -> np.ndarray:
    """Componentwise clamp of x into [lo, hi]."""
    return np.clip(np.asarray(x, dtype=float), lo, hi)


class _Tracker:
    """Counts evaluations and keeps the best point ever scored."""

    def __init__(self, problem: BoxProblem):
        self._problem = problem
        self.evaluations = 0
        self.best_score = -math.inf
        self.best_point = None

    def score(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self._problem.evaluate_batch is not None:
            scores = np.asarray(self._problem.evaluate_batch(points), dtype=float)
        else:
            scores = np.array([self._problem.evaluate(p) for p in points], dtype=float)
        self.evaluations += len(points)
        i = int(np.argmax(scores))
        if scores[i] > self.best_score:
            self.best_score = float(scores[i])
            self.best_point = points[i].copy()
        return scores

    def trace(self, per_iteration) -> OptimizationTrace:
        return OptimizationTrace(
            best_point=self.best_point.copy(),
            best_score=self.best_score,
            per_iteration_best=np.asarray(per_iteration, dtype=float),
            evaluations_used=self.evaluations,
        )


def _hyper(cfg: OptimizerConfig) -> dict:
    defaults = DEFAULT_HYPERPARAMS[cfg.algorithm]
    merged = dict(defaults)
    for key, value in cfg.hyperparams.items():
        if key not in defaults:
            raise ConfigError(f"unknown {cfg.algorithm} hyperparameter {key!r}")
        merged[key] = value
    return merged


def _initial(rng, n: int, dim: int, initial) -> np.ndarray:
    if initial is None:
        return rng.random((n, dim))
    initial = np.atleast_2d(np.asarray(initial, dtype=float))
    if initial.shape != (n, dim):
        raise ConfigError(f"initial population must be {(n, dim)}, got {initial.shape}")
    return clip(initial)


def _stable_top(pos, scores, extra_pos, extra_scores, count):
    """Best ``count`` of incumbents then newcomers; stable, so ties keep elders."""
    allp = np.concatenate([pos, extra_pos])
    alls = np.concatenate([scores, extra_scores])
    order = np.argsort(-alls, kind="stable")[:count]
    return allp[order].copy(), alls[order].copy()


def pso(problem: BoxProblem, cfg: OptimizerConfig, rng, initial=None) -> OptimizationTrace:
    """Particle swarm: inertia decays linearly, pulls toward personal and
    global bests with uniform [0,2] weights, velocity and position clipped."""
    hp = _hyper(cfg)
    n, dim, q_max = cfg.n_agents, problem.dim, cfg.iterations
    track = _Tracker(problem)
    pos = _initial(rng, n, dim, initial)
    vel = np.zeros_like(pos)
    scores = track.score(pos)
    pbest, pbest_scores = pos.copy(), scores.copy()
    g = int(np.argmax(pbest_scores))
    gbest, gbest_score = pbest[g].copy(), float(pbest_scores[g])
    curve = [track.best_score]
    for q in range(1, q_max + 1):
        inertia = 1.0 - (q - 1) / q_max
        w1 = rng.uniform(0.0, 2.0, (n, dim))
        w2 = rng.uniform(0.0, 2.0, (n, dim))
        vel = clip(inertia * vel + w1 * (gbest - pos) + w2 * (pbest - pos),
                   hp["vel_min"], hp["vel_max"])
        pos = clip(pos + vel)
        scores = track.score(pos)
        improved = scores > pbest_scores
        pbest[improved] = pos[improved]
        pbest_scores[improved] = scores[improved]
        g = int(np.argmax(pbest_scores))
        if pbest_scores[g] > gbest_score:
            gbest, gbest_score = pbest[g].copy(), float(pbest_scores[g])
        curve.append(track.best_score)
    return track.trace(curve)


def gwo(problem: BoxProblem, cfg: OptimizerConfig, rng, initial=None) -> OptimizationTrace:
    """Grey wolf: everyone averages three pulls toward the best-ever trio,
    with exploration range shrinking from 2 toward 0 over the iterations."""
    _hyper(cfg)
    n, dim, q_max = cfg.n_agents, problem.dim, cfg.iterations
    track = _Tracker(problem)
    pos = _initial(rng, n, dim, initial)
    scores = track.score(pos)
    order = np.argsort(-scores, kind="stable")[:3]
    leaders, leader_scores = pos[order].copy(), scores[order].copy()
    while len(leaders) < 3:  # degenerate tiny swarms: repeat the weakest leader
        leaders = np.vstack([leaders, leaders[-1]])
        leader_scores = np.append(leader_scores, leader_scores[-1])
    curve = [track.best_score]
    for q in range(1, q_max + 1):
        span = 2.0 - (2.0 * q - 2.0) / q_max
        w1 = rng.uniform(-span, span, (n, 3, dim))
        w2 = rng.uniform(0.0, 2.0, (n, 3, dim))
        pulls = leaders[None] - w1 * np.abs(w2 * leaders[None] - pos[:, None, :])
        pos = clip(pulls.mean(axis=1))
        scores = track.score(pos)
        leaders, leader_scores = _stable_top(leaders, leader_scores, pos, scores, 3)
        curve.append(track.best_score)
    return track.trace(curve)


def aco(problem: BoxProblem, cfg: OptimizerConfig, rng, initial=None) -> OptimizationTrace:
    """Continuous ant colony: an archive of the kappa1 best-ever solutions is
    sampled rank-wise through a Gaussian kernel; each ant resamples every
    coordinate around an archive entry with the archive's own spread."""
    hp = _hyper(cfg)
    k1 = int(hp["kappa1"])
    if k1 < 2:
        raise ConfigError("aco needs an archive of at least 2 entries")
    if k1 > cfg.n_agents:
        raise ConfigError(f"archive size {k1} exceeds population {cfg.n_agents}")
    n, dim, q_max = cfg.n_agents, problem.dim, cfg.iterations
    track = _Tracker(problem)
    pos = _initial(rng, n, dim, initial)
    scores = track.score(pos)
    order = np.argsort(-scores, kind="stable")[:k1]
    archive, archive_scores = pos[order].copy(), scores[order].copy()
    # rank-based pheromone weights; the common prefactor cancels in the ratio
    ranks = np.arange(k1, dtype=float)
    weights = np.exp(-0.5 * (ranks / (k1 * hp["kappa2"])) ** 2)
    probs = weights / weights.sum()
    cols = np.arange(dim)[None, :]
    curve = [track.best_score]
    for _ in range(1, q_max + 1):
        chosen = rng.choice(k1, size=(n, dim), p=probs)
        w = rng.standard_normal((n, dim))
        spread = np.abs(archive[:, None, :] - archive[None, :, :]).sum(axis=1) / (k1 - 1)
        pos = clip(archive[chosen, cols] + w * spread[chosen, cols])
        scores = track.score(pos)
        archive, archive_scores = _stable_top(archive, archive_scores, pos, scores, k1)
        curve.append(track.best_score)
    return track.trace(curve)


def cs(problem: BoxProblem, cfg: OptimizerConfig, rng, initial=None) -> OptimizationTrace:
    """Cuckoo search: a Levy-flight move (Mantegna step lengths), greedy keep
    of the better nest, then per-coordinate Bernoulli mixing with a random
    nest; the best of the three candidates survives."""
    hp = _hyper(cfg)
    pa, beta = hp["kappa1"], hp["kappa2"]
    n, dim, q_max = cfg.n_agents, problem.dim, cfg.iterations
    levy_scale = beta / math.pi * math.gamma(beta) * math.sin(math.pi * beta / 2.0)
    sigma = (math.gamma(1.0 + beta) * math.sin(math.pi * beta / 2.0)
             / (beta * math.gamma((1.0 + beta) / 2.0) * 2.0 ** ((beta - 1.0) / 2.0))
             ) ** (1.0 / beta)
    track = _Tracker(problem)
    pos = _initial(rng, n, dim, initial)
    scores = track.score(pos)
    curve = [track.best_score]
    for _ in range(1, q_max + 1):
        w2 = rng.normal(0.0, sigma, (n, dim))
        w3 = rng.standard_normal((n, dim))
        with np.errstate(divide="ignore", over="ignore"):
            w1 = w2 / np.abs(w3) ** (1.0 / beta)
            step = levy_scale / np.abs(w1) ** (1.0 + beta)
        flown = clip(pos + step)
        flown_scores = track.score(flown)
        keep = flown_scores > scores
        kept = np.where(keep[:, None], flown, pos)
        kept_scores = np.where(keep, flown_scores, scores)
        partners = rng.integers(0, n, size=n)
        mix = rng.random((n, dim)) < pa
        mixed = clip(np.where(mix, kept[partners], kept))
        mixed_scores = track.score(mixed)
        # first-listed candidate wins ties: flown, then kept, then mixed
        pos, scores = flown.copy(), flown_scores.copy()
        better = kept_scores > scores
        pos[better], scores[better] = kept[better], kept_scores[better]
        better = mixed_scores > scores
        pos[better], scores[better] = mixed[better], mixed_scores[better]
        curve.append(track.best_score)
    return track.trace(curve)


def fa(problem: BoxProblem, cfg: OptimizerConfig, rng, initial=None) -> OptimizationTrace:
    """Firefly: floor(sqrt(N)) fireflies; each scores one candidate move per
    possible partner (attraction decays with squared distance, random walk
    decays geometrically) and jumps to the best candidate."""
    hp = _hyper(cfg)
    if cfg.n_agents < 4:
        raise ConfigError("fa needs n_agents >= 4 for at least two fireflies")
    n_f = math.isqrt(cfg.n_agents)
    dim, q_max = problem.dim, cfg.iterations
    track = _Tracker(problem)
    pos = _initial(rng, n_f, dim, initial)
    track.score(pos)
    rows = np.arange(n_f)
    curve = [track.best_score]
    for q in range(1, q_max + 1):
        w = rng.uniform(-0.5, 0.5, (n_f, n_f, dim))
        diff = pos[None, :, :] - pos[:, None, :]
        attraction = np.exp(-hp["kappa1"] * (diff**2).sum(axis=-1))
        candidates = clip(pos[:, None, :] + attraction[..., None] * diff
                          + hp["kappa2"] ** q * w)
        cand_scores = track.score(candidates.reshape(-1, dim)).reshape(n_f, n_f)
        best_j = np.argmax(cand_scores, axis=1)
        pos = candidates[rows, best_j]
        curve.append(track.best_score)
    return track.trace(curve)


_DISPATCH = {"pso": pso, "gwo": gwo, "aco": aco, "cs": cs, "fa": fa}


def run(problem: BoxProblem, cfg: OptimizerConfig, rng=None,
        initial=None) -> OptimizationTrace:
    """Run the configured algorithm; same (cfg, problem, seed) -> same trace."""
    if cfg.algorithm not in _DISPATCH:
        raise ConfigError(f"unknown algorithm {cfg.algorithm!r}; "
                          f"expected one of {', '.join(ALGORITHMS)}")
    if cfg.n_agents < 2:
        raise ConfigError("population size must be at least 2")
    if cfg.iterations < 0:
        raise ConfigError("iteration count must be non-negative")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return _DISPATCH[cfg.algorithm](problem, cfg, rng, initial)
