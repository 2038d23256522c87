"""Real-valued genetic algorithm over unit-norm weight vectors."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig:
    """Genetic-algorithm settings.

    ``mutation_prob=None`` means ``1/d``. ``refine`` turns on a finite-difference
    hill climb seeded with the GA's best vector.
    """

    population: int = 60
    generations: int = 120
    tournament_size: int = 3
    crossover_prob: float = 0.9
    blend_alpha: float = 0.5
    mutation_sigma: float = 0.15
    mutation_prob: float | None = None
    elites: int = 2
    restarts: int = 3
    refine: bool = False
    refine_iters: int = 50

    def __post_init__(self):
        if self.population < 1 or self.generations < 0 or self.restarts < 1:
            raise ValueError("population and restarts must be positive, generations nonnegative")
        if self.tournament_size < 2 or self.tournament_size > self.population:
            raise ValueError("tournament_size must lie in [2, population]")
        if not 0 <= self.elites < self.population:
            raise ValueError("elites must be in [0, population)")
        if not 0 <= self.crossover_prob <= 1:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if self.mutation_prob is not None and not 0 <= self.mutation_prob <= 1:
            raise ValueError("mutation_prob must lie in [0, 1]")
        if self.blend_alpha <= 0 or self.mutation_sigma <= 0:
            raise ValueError("blend_alpha and mutation_sigma must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GaResult:
    vector: np.ndarray
    fitness: float
    initial_best: float
    evaluations: int
    best_per_generation: list[float] = field(default_factory=list)


def _normalize_rows(P: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    norms = np.linalg.norm(P, axis=1)
    bad = ~(norms > 1e-12)
    while np.any(bad):
        P[bad] = rng.standard_normal((int(bad.sum()), P.shape[1]))
        norms = np.linalg.norm(P, axis=1)
        bad = ~(norms > 1e-12)
    return P / norms[:, None]


def random_unit(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """``m`` points uniform on the unit sphere in R^d."""
    return _normalize_rows(rng.standard_normal((m, d)), rng)


def ga_optimize(fitness: Callable, d: int, ga: GaConfig = GaConfig(), seed: int = 0,
                batch: bool = False) -> GaResult:
    """Maximize ``fitness`` over directions in R^d.

    With ``batch=True`` the callable maps an (m, d) array of unit vectors to m
    scores; otherwise it is called once per vector. Every candidate is
    normalized before evaluation. All random draws happen in this loop, so the
    result depends only on ``seed`` and the fitness values.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if batch:
        evaluate = lambda P: np.asarray(fitness(P), dtype=np.float64)
    else:
        evaluate = lambda P: np.array([float(fitness(p)) for p in P])

    pm = ga.mutation_prob if ga.mutation_prob is not None else 1.0 / d
    pop_size, n_elite = ga.population, ga.elites
    n_child = pop_size - n_elite
    alpha = ga.blend_alpha

    best_w, best_f = None, -np.inf
    initial_best = -np.inf
    n_eval = 0
    history: list[float] = []
    for rseed in np.random.SeedSequence(seed).spawn(ga.restarts):
        rng = np.random.default_rng(rseed)
        pop = random_unit(rng, pop_size, d)
        if best_w is None:
            # first restart: also try every coordinate axis
            m = min(d, pop_size)
            pop[:m] = np.eye(d)[:m]
        fit = evaluate(pop)
        n_eval += pop_size
        initial_best = max(initial_best, float(fit.max()))
        i = int(np.argmax(fit))
        if fit[i] > best_f:
            best_w, best_f = pop[i].copy(), float(fit[i])

        for _ in range(ga.generations):
            order = np.argsort(-fit, kind="stable")
            contenders = rng.integers(0, pop_size, size=(n_child, 2, ga.tournament_size))
            winners = np.take_along_axis(
                contenders, np.argmax(fit[contenders], axis=2)[..., None], axis=2)[..., 0]
            p1, p2 = pop[winners[:, 0]], pop[winners[:, 1]]
            lo, hi = np.minimum(p1, p2), np.maximum(p1, p2)
            span = hi - lo
            u = rng.random((n_child, d))
            blended = lo - alpha * span + u * (1 + 2 * alpha) * span
            cross = rng.random(n_child) < ga.crossover_prob
            children = np.where(cross[:, None], blended, p1)
            mut = rng.random((n_child, d)) < pm
            children = children + mut * rng.normal(0.0, ga.mutation_sigma, (n_child, d))
            children = _normalize_rows(children, rng)

            elite_idx = order[:n_elite]
            child_fit = evaluate(children) if n_child else np.empty(0)
            n_eval += n_child
            pop = np.vstack([pop[elite_idx], children])
            fit = np.concatenate([fit[elite_idx], child_fit])
            i = int(np.argmax(fit))
            if fit[i] > best_f:
                best_w, best_f = pop[i].copy(), float(fit[i])
            history.append(best_f)

    if ga.refine:
        best_w, best_f, extra = hill_climb(evaluate, best_w, best_f, ga.refine_iters)
        n_eval += extra
    log.debug("ga: best %.6f (initial %.6f) after %d evaluations", best_f, initial_best, n_eval)
    return GaResult(best_w / np.linalg.norm(best_w), best_f, initial_best, n_eval, history)


def hill_climb(evaluate, w: np.ndarray, f: float, iters: int = 50, step: float = 0.05,
               min_step: float = 1e-4) -> tuple[np.ndarray, float, int]:
    """Central-difference ascent on the sphere; only improving moves are kept."""
    d = w.size
    n_eval = 0
    eye = np.eye(d)
    for _ in range(iters):
        if step < min_step:
            break
        probes = np.vstack([w + step * eye, w - step * eye])
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        pf = evaluate(probes)
        n_eval += 2 * d
        grad = (pf[:d] - pf[d:]) / (2 * step)
        grad -= grad.dot(w) * w
        gn = np.linalg.norm(grad)
        if gn == 0:
            step /= 2
            continue
        cand = w + step * grad / gn
        cand /= np.linalg.norm(cand)
        cf = float(evaluate(cand[None])[0])
        n_eval += 1
        if cf > f:
            w, f = cand, cf
        else:
            step /= 2
    return w, f, n_eval
