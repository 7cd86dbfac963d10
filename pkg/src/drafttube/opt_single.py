"""Single-objective optimizers over box-bounded continuous vectors.

PSO, the fireworks algorithm and L-SHADE, all minimizing; maximization is
realized by negating the objective. Every algorithm keeps all iterates inside
the box and reports a monotone best-so-far trace per generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SoProblem",
    "SoResult",
    "PsoConfig",
    "FwaConfig",
    "LshadeConfig",
    "run_pso",
    "run_fwa",
    "run_lshade",
    "negate_for_max",
    "linear_inertia",
    "lshade_population_schedule",
]


@dataclass(frozen=True)
class SoProblem:
    objective: callable
    lb: np.ndarray
    ub: np.ndarray
    budget: int = 500  # generations
    seed: int = 0

    def __post_init__(self):
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        if lb.shape != ub.shape or np.any(lb >= ub):
            raise ValueError("need lb < ub per dimension")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.lb)


@dataclass
class SoResult:
    best_x: np.ndarray
    best_f: float
    trace: np.ndarray  # best-so-far per generation
    n_evals: int


def negate_for_max(f):
    """Wrap a to-be-maximized objective for the minimizers."""
    def neg(x):
        return -f(x)
    return neg


def _eval_all(objective, X) -> np.ndarray:
    return np.array([float(objective(x)) for x in X])


# ---------------------------------------------------------------------------
# PSO
# ---------------------------------------------------------------------------

def linear_inertia(iteration: int, total: int, w_start: float = 0.9,
                   w_end: float = 0.4) -> float:
    """Default inertia schedule: linear decrease over the run."""
    if total <= 1:
        return w_end
    return w_start + (w_end - w_start) * iteration / (total - 1)


@dataclass(frozen=True)
class PsoConfig:
    n_particles: int = 20
    c1: float = 2.0
    c2: float = 2.0
    inertia: callable = linear_inertia
    v_max: float = 0.2  # velocity clamp as a fraction of the box span

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("need at least two particles")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")


def run_pso(problem: SoProblem, config: PsoConfig = PsoConfig()) -> SoResult:
    """Global-best PSO with clamped positions and reflected velocities."""
    rng = np.random.Generator(np.random.PCG64(problem.seed))
    lb, ub, d = problem.lb, problem.ub, problem.dim
    span = ub - lb
    n = config.n_particles
    v_max = config.v_max * span
    X = lb + rng.random((n, d)) * span
    V = (rng.random((n, d)) - 0.5) * 2.0 * v_max
    F = _eval_all(problem.objective, X)
    n_evals = n
    pbest_x, pbest_f = X.copy(), F.copy()
    g = int(np.argmin(F))
    gbest_x, gbest_f = X[g].copy(), float(F[g])
    trace = [gbest_f]
    for it in range(problem.budget):
        w = config.inertia(it, problem.budget)
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        V = (w * V + config.c1 * r1 * (pbest_x - X)
             + config.c2 * r2 * (gbest_x - X))
        V = np.clip(V, -v_max, v_max)
        X = X + V
        low = X < lb
        high = X > ub
        X = np.clip(X, lb, ub)
        V = np.where(low | high, -V, V)
        F = _eval_all(problem.objective, X)
        n_evals += n
        improved = F < pbest_f
        pbest_x[improved] = X[improved]
        pbest_f[improved] = F[improved]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest_f = float(pbest_f[g])
            gbest_x = pbest_x[g].copy()
        trace.append(gbest_f)
    return SoResult(gbest_x, gbest_f, np.array(trace), n_evals)


# ---------------------------------------------------------------------------
# Fireworks algorithm (original formulation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FwaConfig:
    n_fireworks: int = 20
    m1: int = 10            # explosion sparks budget
    m2: int = 10            # Gaussian sparks
    amplitude: float = 0.4  # max amplitude as a fraction of the box span
    spark_lo: float = 0.04  # per-firework spark-count bounds as fractions of m1
    spark_hi: float = 0.8

    def __post_init__(self):
        if min(self.n_fireworks, self.m1, self.m2) < 1:
            raise ValueError("counts must be positive")


def _map_into_box(X, lb, ub):
    """Standard mapping rule: out-of-bound coordinates re-enter via modulo."""
    span = ub - lb
    out = (X < lb) | (X > ub)
    if np.any(out):
        wrapped = lb + np.mod(np.abs(X - lb), span)
        X = np.where(out, wrapped, X)
    return X


def run_fwa(problem: SoProblem, config: FwaConfig = FwaConfig()) -> SoResult:
    """Fireworks algorithm: rank-dependent explosion amplitudes, Gaussian
    sparks and distance-based roulette selection keeping the best."""
    rng = np.random.Generator(np.random.PCG64(problem.seed))
    lb, ub, d = problem.lb, problem.ub, problem.dim
    span = ub - lb
    eps = 1e-12
    n = config.n_fireworks
    X = lb + rng.random((n, d)) * span
    F = _eval_all(problem.objective, X)
    n_evals = n
    best_i = int(np.argmin(F))
    best_x, best_f = X[best_i].copy(), float(F[best_i])
    trace = [best_f]
    a_hat = config.amplitude * span
    for _ in range(problem.budget):
        f_min, f_max = F.min(), F.max()
        # Better fireworks explode with smaller amplitude and more sparks.
        amps = (F - f_min + eps) / (np.sum(F - f_min) + eps)
        counts_raw = config.m1 * (f_max - F + eps) / (np.sum(f_max - F) + eps)
        lo = max(1, int(round(config.spark_lo * config.m1)))
        hi = max(lo, int(round(config.spark_hi * config.m1)))
        counts = np.clip(np.round(counts_raw), lo, hi).astype(int)
        sparks = []
        for i in range(n):
            for _ in range(counts[i]):
                s = X[i].copy()
                n_dims = int(rng.integers(1, d + 1))
                dims = rng.choice(d, size=n_dims, replace=False)
                h = float(rng.uniform(-1.0, 1.0))
                s[dims] += amps[i] * a_hat[dims] * h
                sparks.append(s)
        for _ in range(config.m2):
            i = int(rng.integers(n))
            s = X[i].copy()
            n_dims = int(rng.integers(1, d + 1))
            dims = rng.choice(d, size=n_dims, replace=False)
            g = float(rng.normal(1.0, 1.0))
            s[dims] = s[dims] * g
            sparks.append(s)
        cand = _map_into_box(np.vstack([X] + [np.array(sparks)]), lb, ub)
        f_cand = np.concatenate([F, _eval_all(problem.objective, cand[n:])])
        n_evals += len(cand) - n
        b = int(np.argmin(f_cand))
        if f_cand[b] < best_f:
            best_f = float(f_cand[b])
            best_x = cand[b].copy()
        # Keep the best; fill the rest by distance-based roulette.
        keep = [b]
        rest = np.delete(np.arange(len(cand)), b)
        diff = cand[rest, None, :] - cand[None, rest, :] if len(rest) <= 512 else None
        if diff is not None:
            dists = np.sqrt(np.sum(diff ** 2, axis=-1)).sum(axis=1)
        else:
            dists = np.array([np.sum(np.linalg.norm(cand[rest] - c, axis=1))
                              for c in cand[rest]])
        probs = dists / dists.sum() if dists.sum() > 0 else None
        picks = rng.choice(len(rest), size=n - 1, replace=False, p=probs)
        keep.extend(rest[picks])
        X = cand[keep]
        F = f_cand[keep]
        trace.append(best_f)
    return SoResult(best_x, best_f, np.array(trace), n_evals)


# ---------------------------------------------------------------------------
# L-SHADE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LshadeConfig:
    n_init: int = 200
    history_size: int = 6
    archive_ratio: float = 2.6
    p_best: float = 0.11
    n_min: int = 4

    def __post_init__(self):
        if self.n_init <= self.n_min:
            raise ValueError("n_init must exceed n_min")
        if not 0 < self.p_best <= 1:
            raise ValueError("p_best must be in (0, 1]")


def lshade_population_schedule(gen: int, total: int, n_init: int,
                               n_min: int) -> int:
    """Linear population size reduction; equals n_min at the final generation."""
    return int(round(n_init + (n_min - n_init) * gen / total))


def run_lshade(problem: SoProblem,
               config: LshadeConfig = LshadeConfig()) -> SoResult:
    """Success-history adaptive DE with linear population size reduction.

    current-to-pbest/1 mutation with an external archive, success-history
    memories updated by weighted Lehmer means and midpoint-to-bound repair.
    """
    rng = np.random.Generator(np.random.PCG64(problem.seed))
    lb, ub, d = problem.lb, problem.ub, problem.dim
    cfg = config
    N = cfg.n_init
    X = lb + rng.random((N, d)) * (ub - lb)
    F_pop = _eval_all(problem.objective, X)
    n_evals = N
    archive = []
    M_CR = np.full(cfg.history_size, 0.5)
    M_F = np.full(cfg.history_size, 0.5)
    hist_k = 0
    b = int(np.argmin(F_pop))
    best_x, best_f = X[b].copy(), float(F_pop[b])
    trace = [best_f]
    for gen in range(1, problem.budget + 1):
        S_CR, S_F, S_w = [], [], []
        order = np.argsort(F_pop)
        n_pbest = max(2, int(round(cfg.p_best * N)))
        U = np.empty_like(X)
        CRs = np.empty(N)
        Fs = np.empty(N)
        for i in range(N):
            r = int(rng.integers(cfg.history_size))
            cr = float(np.clip(rng.normal(M_CR[r], 0.1), 0.0, 1.0))
            f = 0.0
            while f <= 0.0:
                f = M_F[r] + 0.1 * math.tan(math.pi * (rng.random() - 0.5))
            f = min(f, 1.0)
            CRs[i], Fs[i] = cr, f
            pb = X[order[int(rng.integers(n_pbest))]]
            r1 = i
            while r1 == i:
                r1 = int(rng.integers(N))
            pool = N + len(archive)
            r2 = i
            while r2 == i or r2 == r1:
                r2 = int(rng.integers(pool))
            x_r2 = X[r2] if r2 < N else archive[r2 - N]
            v = X[i] + f * (pb - X[i]) + f * (X[r1] - x_r2)
            # midpoint-to-bound repair
            v = np.where(v < lb, (lb + X[i]) / 2.0, v)
            v = np.where(v > ub, (ub + X[i]) / 2.0, v)
            cross = rng.random(d) < cr
            cross[int(rng.integers(d))] = True
            U[i] = np.where(cross, v, X[i])
        F_new = _eval_all(problem.objective, U)
        n_evals += N
        for i in range(N):
            if F_new[i] <= F_pop[i]:
                if F_new[i] < F_pop[i]:
                    archive.append(X[i].copy())
                    S_CR.append(CRs[i])
                    S_F.append(Fs[i])
                    S_w.append(F_pop[i] - F_new[i])
                X[i] = U[i]
                F_pop[i] = F_new[i]
        if S_CR:
            w = np.array(S_w)
            w = w / w.sum()
            scr = np.array(S_CR)
            sf = np.array(S_F)
            M_CR[hist_k] = (np.sum(w * scr ** 2) / np.sum(w * scr)
                            if np.sum(w * scr) > 0 else 0.0)
            M_F[hist_k] = np.sum(w * sf ** 2) / np.sum(w * sf)
            hist_k = (hist_k + 1) % cfg.history_size
        # trim archive to r_arc * N
        max_arc = int(round(cfg.archive_ratio * N))
        while len(archive) > max_arc:
            archive.pop(int(rng.integers(len(archive))))
        b = int(np.argmin(F_pop))
        if F_pop[b] < best_f:
            best_f = float(F_pop[b])
            best_x = X[b].copy()
        trace.append(best_f)
        # linear population size reduction
        N_next = lshade_population_schedule(gen, problem.budget,
                                            cfg.n_init, cfg.n_min)
        if N_next < N:
            keep = np.argsort(F_pop)[:N_next]
            X = X[keep]
            F_pop = F_pop[keep]
            N = N_next
            max_arc = int(round(cfg.archive_ratio * N))
            while len(archive) > max_arc:
                archive.pop(int(rng.integers(len(archive))))
    return SoResult(best_x, best_f, np.array(trace), n_evals)
