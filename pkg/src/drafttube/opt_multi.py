"""Multi-objective optimizers: NSGA-II, SPEA2 and MOEA/D, plus Pareto
utilities and indicator functions used for verification.

All algorithms minimize a two-objective vector F(x) = (f1, f2); for the
draft-tube problem that is (-Cp, Cd).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MoProblem",
    "NsgaConfig",
    "SpeaConfig",
    "MoeadConfig",
    "ParetoArchive",
    "dominates",
    "nondominated_sort",
    "nondominated_mask",
    "crowding_distance",
    "sbx",
    "polynomial_mutation",
    "run_nsga2",
    "run_spea2",
    "run_moead",
    "hypervolume2d",
    "additive_epsilon",
    "uniform_weights",
]


@dataclass(frozen=True)
class MoProblem:
    objectives: callable  # x -> (f1, f2)
    lb: np.ndarray
    ub: np.ndarray
    generations: int = 500
    seed: int = 0

    def __post_init__(self):
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        if lb.shape != ub.shape or np.any(lb >= ub):
            raise ValueError("need lb < ub per dimension")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.lb)


@dataclass(frozen=True)
class NsgaConfig:
    pop_size: int = 200
    p_c: float = 0.9
    p_m: float = 0.1
    eta: float = 20.0


SpeaConfig = NsgaConfig  # same parameter set; SPEA2 archive size = pop size


@dataclass(frozen=True)
class MoeadConfig:
    pop_size: int = 200
    p_m: float = 0.1
    eta: float = 20.0
    cr: float = 1.0
    f: float = 0.5
    n_r: int = 2
    t_neighbors: int = 20
    delta: float = 0.9


class ParetoArchive:
    """Mutually non-dominated (x, f) pairs; insertion keeps the invariant.

    Two objectives only; the batch update is an O(n log n) sweep. Exact
    objective duplicates are kept (they do not dominate each other).
    """

    def __init__(self):
        self.X = None  # (n, d)
        self.F = np.empty((0, 2))

    def __len__(self):
        return len(self.F)

    def add_many(self, X, F):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F = np.atleast_2d(np.asarray(F, dtype=float))
        if self.X is not None:
            X = np.vstack([self.X, X])
            F = np.vstack([self.F, F])
        order = np.lexsort((F[:, 1], F[:, 0]))
        keep = []
        min_f2 = np.inf
        min_f2_f1 = np.inf
        for idx in order:
            f1, f2 = F[idx]
            if f2 < min_f2:
                keep.append(idx)
                min_f2, min_f2_f1 = f2, f1
            elif f2 == min_f2 and f1 == min_f2_f1:
                keep.append(idx)
        keep = np.sort(np.array(keep))
        self.X, self.F = X[keep], F[keep]

    def add(self, x, f):
        self.add_many(np.atleast_2d(x), np.atleast_2d(f))

    def front(self) -> np.ndarray:
        return self.F.copy()

    def points(self) -> np.ndarray:
        return self.X.copy() if self.X is not None else np.empty((0, 0))


# ---------------------------------------------------------------------------
# Dominance utilities
# ---------------------------------------------------------------------------

def dominates(a, b) -> bool:
    """Pareto dominance for minimization: <= everywhere and < somewhere."""
    a = np.asarray(a)
    b = np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def _dominance_matrix(F: np.ndarray) -> np.ndarray:
    """dom[i, j] is True when point i dominates point j."""
    le = np.all(F[:, None, :] <= F[None, :, :], axis=-1)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=-1)
    return le & lt


def nondominated_sort(F: np.ndarray) -> list:
    """Fast non-dominated sorting; returns index arrays, rank 0 first."""
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise ValueError("objectives must be finite")
    dom = _dominance_matrix(F)
    n_dominators = dom.sum(axis=0)
    fronts = []
    remaining = n_dominators.copy()
    assigned = np.zeros(len(F), dtype=bool)
    while not assigned.all():
        current = np.flatnonzero((remaining == 0) & ~assigned)
        fronts.append(current)
        assigned[current] = True
        remaining = remaining - dom[current].sum(axis=0)
    return fronts


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    return _dominance_matrix(F).sum(axis=0) == 0


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """NSGA-II crowding distance of one front; boundary points are infinite."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    d = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        span = F[order[-1], j] - F[order[0], j]
        d[order[0]] = d[order[-1]] = np.inf
        if span <= 0:
            continue
        d[order[1:-1]] += (F[order[2:], j] - F[order[:-2], j]) / span
    return d


# ---------------------------------------------------------------------------
# Variation operators
# ---------------------------------------------------------------------------

def sbx(p1, p2, lb, ub, eta: float = 20.0, p_c: float = 0.9,
        rng: np.random.Generator | None = None):
    """Bounded simulated binary crossover returning two children."""
    rng = rng or np.random.Generator(np.random.PCG64(0))
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() > p_c:
        return c1, c2
    for j in range(len(p1)):
        if rng.random() > 0.5 or abs(p1[j] - p2[j]) < 1e-14:
            continue
        y1, y2 = sorted((p1[j], p2[j]))
        u = rng.random()
        for child, y_ref in ((c1, y1), (c2, y2)):
            if y_ref == y1:
                beta = 1.0 + 2.0 * (y1 - lb[j]) / (y2 - y1)
            else:
                beta = 1.0 + 2.0 * (ub[j] - y2) / (y2 - y1)
            alpha = 2.0 - beta ** -(eta + 1.0)
            if u <= 1.0 / alpha:
                betaq = (u * alpha) ** (1.0 / (eta + 1.0))
            else:
                betaq = (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
            if y_ref == y1:
                val = 0.5 * ((y1 + y2) - betaq * (y2 - y1))
            else:
                val = 0.5 * ((y1 + y2) + betaq * (y2 - y1))
            child[j] = min(max(val, lb[j]), ub[j])
        if rng.random() < 0.5:
            c1[j], c2[j] = c2[j], c1[j]
    return c1, c2


def polynomial_mutation(x, lb, ub, eta: float = 20.0, p_m: float = 0.1,
                        rng: np.random.Generator | None = None):
    """Bounded polynomial mutation applied per variable with probability p_m."""
    rng = rng or np.random.Generator(np.random.PCG64(0))
    x = np.asarray(x, dtype=float).copy()
    for j in range(len(x)):
        if rng.random() >= p_m:
            continue
        y = x[j]
        span = ub[j] - lb[j]
        d1 = (y - lb[j]) / span
        d2 = (ub[j] - y) / span
        u = rng.random()
        mut_pow = 1.0 / (eta + 1.0)
        if u < 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
            deltaq = val ** mut_pow - 1.0
        else:
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            deltaq = 1.0 - val ** mut_pow
        x[j] = min(max(y + deltaq * span, lb[j]), ub[j])
    return x


def _eval_all(objectives, X) -> np.ndarray:
    return np.array([objectives(x) for x in X], dtype=float)


# ---------------------------------------------------------------------------
# NSGA-II
# ---------------------------------------------------------------------------

def _nsga2_rank_crowd(F):
    fronts = nondominated_sort(F)
    rank = np.empty(len(F), dtype=int)
    crowd = np.empty(len(F))
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd, fronts


def _tournament(rng, rank, crowd):
    i, j = rng.integers(len(rank)), rng.integers(len(rank))
    if rank[i] < rank[j] or (rank[i] == rank[j] and crowd[i] > crowd[j]):
        return i
    return j


def run_nsga2(problem: MoProblem, config: NsgaConfig = NsgaConfig()) -> ParetoArchive:
    """Elitist NSGA-II with binary tournament, SBX and polynomial mutation."""
    rng = np.random.Generator(np.random.PCG64(problem.seed))
    lb, ub, d = problem.lb, problem.ub, problem.dim
    N = config.pop_size
    X = lb + rng.random((N, d)) * (ub - lb)
    F = _eval_all(problem.objectives, X)
    archive = ParetoArchive()
    archive.add_many(X, F)
    for _ in range(problem.generations):
        rank, crowd, _ = _nsga2_rank_crowd(F)
        children = []
        while len(children) < N:
            a = _tournament(rng, rank, crowd)
            b = _tournament(rng, rank, crowd)
            c1, c2 = sbx(X[a], X[b], lb, ub, config.eta, config.p_c, rng)
            children.append(polynomial_mutation(c1, lb, ub, config.eta,
                                                config.p_m, rng))
            if len(children) < N:
                children.append(polynomial_mutation(c2, lb, ub, config.eta,
                                                    config.p_m, rng))
        CX = np.array(children)
        CF = _eval_all(problem.objectives, CX)
        archive.add_many(CX, CF)
        UX = np.vstack([X, CX])
        UF = np.vstack([F, CF])
        _, ucrowd, ufronts = _nsga2_rank_crowd(UF)
        keep = []
        for front in ufronts:
            if len(keep) + len(front) <= N:
                keep.extend(front.tolist())
            else:
                order = front[np.argsort(-ucrowd[front], kind="stable")]
                keep.extend(order[:N - len(keep)].tolist())
                break
        X, F = UX[keep], UF[keep]
    return archive


# ---------------------------------------------------------------------------
# SPEA2
# ---------------------------------------------------------------------------

def spea2_fitness(F: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SPEA2 strength, raw fitness and density over a combined population.

    Strength S(i) counts the points i dominates; raw fitness R(i) sums the
    strengths of i's dominators; density D(i) = 1/(sigma_k + 2) with the
    k-th nearest objective-space neighbor, k = sqrt(n).
    """
    F = np.asarray(F, dtype=float)
    dom = _dominance_matrix(F)
    S = dom.sum(axis=1)
    R = np.array([S[dom[:, i]].sum() for i in range(len(F))], dtype=float)
    n = len(F)
    k = max(1, min(n - 1, int(round(math.sqrt(n)))))
    diff = F[:, None, :] - F[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=-1))
    np.fill_diagonal(dist, np.inf)
    sigma_k = np.sort(dist, axis=1)[:, k - 1]
    D = 1.0 / (sigma_k + 2.0)
    return S, R, D


def _spea2_truncate(F: np.ndarray, target: int) -> np.ndarray:
    """Iteratively drop the member with the smallest nearest-neighbor distance."""
    alive = list(range(len(F)))
    diff = F[:, None, :] - F[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=-1))
    np.fill_diagonal(dist, np.inf)
    while len(alive) > target:
        sub = dist[np.ix_(alive, alive)]
        ordered = np.sort(sub, axis=1)
        # lexicographic comparison of sorted neighbor distances
        worst = min(range(len(alive)), key=lambda i: tuple(ordered[i]))
        alive.pop(worst)
    return np.array(alive)


def run_spea2(problem: MoProblem, config: NsgaConfig = NsgaConfig()) -> ParetoArchive:
    """SPEA2 with archive size equal to the population size."""
    rng = np.random.Generator(np.random.PCG64(problem.seed))
    lb, ub, d = problem.lb, problem.ub, problem.dim
    N = config.pop_size
    X = lb + rng.random((N, d)) * (ub - lb)
    F = _eval_all(problem.objectives, X)
    AX = np.empty((0, d))
    AF = np.empty((0, 2))
    result = ParetoArchive()
    result.add_many(X, F)
    for _ in range(problem.generations):
        UX = np.vstack([X, AX])
        UF = np.vstack([F, AF])
        _, R, D = spea2_fitness(UF)
        fit = R + D
        nd = np.flatnonzero(R == 0)
        if len(nd) > N:
            keep = nd[_spea2_truncate(UF[nd], N)]
        elif len(nd) < N:
            dominated = np.flatnonzero(R > 0)
            fill = dominated[np.argsort(fit[dominated], kind="stable")]
            keep = np.concatenate([nd, fill[:N - len(nd)]])
        else:
            keep = nd
        AX, AF = UX[keep], UF[keep]
        afit = fit[keep]
        children = []
        while len(children) < N:
            a, b = rng.integers(N), rng.integers(N)
            a = a if afit[a] <= afit[b] else b
            a2, b2 = rng.integers(N), rng.integers(N)
            a2 = a2 if afit[a2] <= afit[b2] else b2
            c1, c2 = sbx(AX[a], AX[a2], lb, ub, config.eta, config.p_c, rng)
            children.append(polynomial_mutation(c1, lb, ub, config.eta,
                                                config.p_m, rng))
            if len(children) < N:
                children.append(polynomial_mutation(c2, lb, ub, config.eta,
                                                    config.p_m, rng))
        X = np.array(children)
        F = _eval_all(problem.objectives, X)
        result.add_many(X, F)
    return result


# ---------------------------------------------------------------------------
# MOEA/D
# ---------------------------------------------------------------------------

def uniform_weights(n: int) -> np.ndarray:
    """Uniform two-objective weight vectors with spacing 1/(n-1)."""
    a = np.linspace(0.0, 1.0, n)
    return np.column_stack([a, 1.0 - a])


def tchebycheff(f, weight, z_star) -> float:
    return float(np.max(weight * np.abs(np.asarray(f) - z_star)))


def run_moead(problem: MoProblem, config: MoeadConfig = MoeadConfig()) -> ParetoArchive:
    """MOEA/D with Tchebycheff decomposition and DE/rand/1 variation."""
    rng = np.random.Generator(np.random.PCG64(problem.seed))
    lb, ub, d = problem.lb, problem.ub, problem.dim
    N = config.pop_size
    W = uniform_weights(N)
    wdist = np.sqrt(np.sum((W[:, None, :] - W[None, :, :]) ** 2, axis=-1))
    T = min(config.t_neighbors, N)
    neigh = np.argsort(wdist, axis=1, kind="stable")[:, :T]
    X = lb + rng.random((N, d)) * (ub - lb)
    F = _eval_all(problem.objectives, X)
    z_star = F.min(axis=0)
    archive = ParetoArchive()
    archive.add_many(X, F)
    for _ in range(problem.generations):
        gen_X, gen_F = [], []
        for i in range(N):
            if rng.random() < config.delta:
                pool = neigh[i]
            else:
                pool = np.arange(N)
            r = rng.choice(pool, size=3, replace=False)
            v = X[r[0]] + config.f * (X[r[1]] - X[r[2]])
            cross = rng.random(d) < config.cr
            cross[int(rng.integers(d))] = True
            y = np.where(cross, v, X[i])
            y = polynomial_mutation(y, lb, ub, config.eta, config.p_m, rng)
            y = np.clip(y, lb, ub)
            fy = np.asarray(problem.objectives(y), dtype=float)
            z_star = np.minimum(z_star, fy)
            gen_X.append(y)
            gen_F.append(fy)
            replaced = 0
            for j in rng.permutation(pool):
                if replaced >= config.n_r:
                    break
                if tchebycheff(fy, W[j], z_star) <= tchebycheff(F[j], W[j], z_star):
                    X[j] = y
                    F[j] = fy
                    replaced += 1
        archive.add_many(np.array(gen_X), np.array(gen_F))
    return archive


# ---------------------------------------------------------------------------
# Indicators
# ---------------------------------------------------------------------------

def hypervolume2d(front: np.ndarray, ref_point) -> float:
    """Exact 2-D hypervolume of the region dominated by ``front`` w.r.t. ref."""
    F = np.asarray(front, dtype=float)
    ref = np.asarray(ref_point, dtype=float)
    if len(F) == 0:
        return 0.0
    # Points at or beyond the reference enclose no volume.
    F = F[np.all(F < ref, axis=1)]
    if len(F) == 0:
        return 0.0
    F = F[nondominated_mask(F)]
    order = np.lexsort((F[:, 1], F[:, 0]))
    F = F[order]
    hv = 0.0
    prev_f2 = ref[1]
    for f1, f2 in F:
        hv += (ref[0] - f1) * (prev_f2 - f2)
        prev_f2 = f2
    return hv


def additive_epsilon(A: np.ndarray, B: np.ndarray) -> float:
    """Additive epsilon indicator eps(A, B): how far A must shift to cover B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    shifts = np.max(A[:, None, :] - B[None, :, :], axis=-1)
    return float(np.max(np.min(shifts, axis=0)))
