"""Multilevel driver: per-level estimators, adaptive allocation, rate fits.

The estimator at level 0 is a plain mean of single-path payoffs; at level
l >= 1 it is the mean of antithetic corrections ``1/2 (P(X^f) + P(X^a)) -
P(X^c)`` (or of plain fine-coarse differences for the Euler control
scheme).  The adaptive loop targets a root-mean-square error ``eps`` by
splitting the budget evenly between variance (``eps^2 / 2``) and squared
bias, using the standard constrained-minimisation sample allocation

    N_l = ceil( 2 * eps^-2 * sqrt(V_l / C_l) * sum_k sqrt(V_k C_k) )

and extending levels until the extrapolated remaining bias
``max(|Y_L|, 2^-alpha |Y_{L-1}|) / (2^alpha - 1)`` drops below
``eps / sqrt(2)``, with ``alpha`` refitted on the fly and floored at 1/2.

Sampling is organised in fixed-size batches keyed by global sample index,
merged in batch order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .models import ModelSpec
from .payoffs import PayoffSpec, member_payoffs
from .schemes import (
    euler_pair_cost_per_sample,
    simulate_euler_pair,
    simulate_single_path,
    simulate_triple_path,
    single_cost_per_sample,
    triple_cost_per_sample,
)
from .stats import MomentAccumulator, log2_slope
from . import stats as _stats

__all__ = [
    "SCHEMES",
    "BATCH_SIZE",
    "LevelStats",
    "MlmcResult",
    "RateFit",
    "ConsistencyRow",
    "ConsistencyReport",
    "run_fixed",
    "run_adaptive",
    "fit_rates",
    "consistency_check",
    "level_cost",
]

SCHEMES = ("antithetic_milstein", "euler_coupled")

# Samples per simulation batch.  Fixed (not derived from the worker count)
# so that accumulator merge order, and hence every reported digit, is
# independent of parallelism.
BATCH_SIZE = 20_000

# Kurtosis above this at the top level makes the variance estimate suspect.
KURTOSIS_WARN = 100.0


@dataclass(frozen=True)
class LevelStats:
    """Finalised per-level summary of correction and payoff samples."""

    level: int
    n_samples: int
    mean_y: float
    var_y: float
    kurtosis_y: float
    mean_p: float            # fine-member payoff at this level
    var_p: float
    cost_per_sample: float
    mean_p_coarse: Optional[float] = None   # coarse member (levels >= 1)
    var_p_coarse: Optional[float] = None
    var_unreliable: bool = False

    @property
    def stderr_y(self):
        return math.sqrt(self.var_y / self.n_samples)


@dataclass(frozen=True)
class RateFit:
    alpha: float
    beta: float
    gamma: float
    beta_infinite: bool = False   # some level had exactly zero variance
    alpha_infinite: bool = False  # some level had exactly zero mean


@dataclass
class MlmcResult:
    """Outcome of a multilevel run; a plain data record."""

    estimate: float
    final_level: int
    levels: list
    alpha: float
    beta: float
    gamma: float
    total_cost: float
    epsilon: Optional[float]
    converged: bool = True
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def std_error(self):
        return math.sqrt(sum(s.var_y / s.n_samples for s in self.levels))


def level_cost(level, n0, scheme):
    """Cost of one sample at a level, in fine-timestep units."""
    if level == 0:
        return single_cost_per_sample(0, n0)
    if scheme == "euler_coupled":
        return euler_pair_cost_per_sample(level, n0)
    return triple_cost_per_sample(level, n0)


class _LevelAccumulator:
    """Streaming moments of Y, the fine member and the coarse member."""

    def __init__(self, level):
        self.level = level
        self.n = 0
        self.acc_y = MomentAccumulator()
        self.acc_pf = MomentAccumulator()
        self.acc_pc = MomentAccumulator() if level > 0 else None

    def absorb(self, n, acc_y, acc_pf, acc_pc):
        self.n += n
        self.acc_y = self.acc_y.merge(acc_y)
        self.acc_pf = self.acc_pf.merge(acc_pf)
        if self.acc_pc is not None and acc_pc is not None:
            self.acc_pc = self.acc_pc.merge(acc_pc)

    def snapshot(self, cost) -> LevelStats:
        y = self.acc_y.finalize()
        pf = self.acc_pf.finalize()
        if self.acc_pc is not None:
            pc = self.acc_pc.finalize()
            pc_mean, pc_var = pc.mean, pc.variance
        else:
            pc_mean = pc_var = None
        return LevelStats(
            level=self.level, n_samples=self.n,
            mean_y=y.mean, var_y=y.variance, kurtosis_y=y.kurtosis,
            mean_p=pf.mean, var_p=pf.variance,
            cost_per_sample=cost,
            mean_p_coarse=pc_mean, var_p_coarse=pc_var,
            var_unreliable=bool(y.kurtosis > KURTOSIS_WARN))


def _simulate_batch(model, payoff, scheme, level, start, count, seed, n0,
                    horizon):
    """Simulate samples [start, start+count) of one level; return moments."""
    samples = np.arange(start, start + count, dtype=np.uint64)
    acc_y, acc_pf = MomentAccumulator(), MomentAccumulator()
    acc_pc = None
    if level == 0:
        path_scheme = ("euler" if scheme == "euler_coupled"
                       else "truncated_milstein")
        res = simulate_single_path(model, 0, samples, seed,
                                   scheme=path_scheme, n0=n0, horizon=horizon)
        values = res.asian if payoff.kind == "asian" else res.x
        p = payoff.evaluator(values)
        acc_y.push_many(p)
        acc_pf.push_many(p)
    elif scheme == "euler_coupled":
        pair = simulate_euler_pair(model, level, samples, seed, n0=n0,
                                   horizon=horizon)
        if payoff.kind == "asian":
            fine, coarse = payoff.evaluator(pair.asian_f), payoff.evaluator(pair.asian_c)
        else:
            fine, coarse = payoff.evaluator(pair.xf), payoff.evaluator(pair.xc)
        acc_pc = MomentAccumulator()
        acc_y.push_many(fine - coarse)
        acc_pf.push_many(fine)
        acc_pc.push_many(coarse)
    else:
        path = simulate_triple_path(model, level, samples, seed, n0=n0,
                                    horizon=horizon)
        fine, coarse = member_payoffs(payoff, path)
        acc_pc = MomentAccumulator()
        acc_y.push_many(fine - coarse)
        acc_pf.push_many(fine)
        acc_pc.push_many(coarse)
    return count, acc_y, acc_pf, acc_pc


def _batch_task(args):
    return _simulate_batch(*args)


class _Sampler:
    """Runs level batches, optionally on a process pool, merging in order."""

    def __init__(self, model, payoff, scheme, seed, n0, horizon, workers):
        if scheme not in SCHEMES:
            raise ValueError(
                f"unknown scheme {scheme!r}; valid: {', '.join(SCHEMES)}")
        self.model = model
        self.payoff = payoff
        self.scheme = scheme
        self.seed = seed
        self.n0 = n0
        self.horizon = horizon
        self.workers = max(1, int(workers))
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(max_workers=self.workers)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def extend(self, acc: _LevelAccumulator, target_n):
        """Grow a level to target_n samples (global indices continue)."""
        start = acc.n
        if target_n <= start:
            return
        tasks = []
        while start < target_n:
            count = min(BATCH_SIZE, target_n - start)
            tasks.append((self.model, self.payoff, self.scheme, acc.level,
                          start, count, self.seed, self.n0, self.horizon))
            start += count
        if self._pool is None:
            results = [_batch_task(t) for t in tasks]
        else:
            # map preserves task order, so merging is schedule-independent
            results = list(self._pool.map(_batch_task, tasks))
        for res in results:
            acc.absorb(*res)


def _finalise(accs, scheme, n0, epsilon, converged, warnings, diagnostics):
    levels = sorted(accs)
    stats = [accs[l].snapshot(level_cost(l, n0, scheme)) for l in levels]
    total_cost = sum(s.n_samples * s.cost_per_sample for s in stats)
    top = stats[-1]
    if top.var_unreliable:
        warnings.append(
            f"kurtosis {top.kurtosis_y:.1f} at level {top.level} exceeds "
            f"{KURTOSIS_WARN:g}; variance estimate may be unreliable")
    try:
        fit = fit_rates(stats)
        alpha, beta, gamma = fit.alpha, fit.beta, fit.gamma
    except ValueError:
        alpha = beta = gamma = float("nan")
    estimate = math.fsum(s.mean_y for s in stats) if converged else float("nan")
    if not converged:
        diagnostics["partial_estimate"] = math.fsum(s.mean_y for s in stats)
    return MlmcResult(
        estimate=estimate, final_level=levels[-1], levels=stats,
        alpha=alpha, beta=beta, gamma=gamma, total_cost=total_cost,
        epsilon=epsilon, converged=converged, warnings=warnings,
        diagnostics=diagnostics)


def run_fixed(levels, n_samples, model: ModelSpec, payoff: PayoffSpec, *,
              seed, scheme="antithetic_milstein", n0=1, horizon=1.0,
              workers=1) -> MlmcResult:
    """Estimate the requested levels with exactly the given sample counts.

    ``n_samples`` is either one count for all levels or a sequence matching
    ``levels``.  Deterministic in ``seed``.
    """
    levels = list(levels)
    if np.isscalar(n_samples):
        counts = {l: int(n_samples) for l in levels}
    else:
        counts = dict(zip(levels, (int(n) for n in n_samples)))
    if any(c < 2 for c in counts.values()):
        raise ValueError("need at least 2 samples per level")
    accs = {l: _LevelAccumulator(l) for l in levels}
    with _Sampler(model, payoff, scheme, seed, n0, horizon, workers) as sampler:
        for l in levels:
            sampler.extend(accs[l], counts[l])
    return _finalise(accs, scheme, n0, None, True, [], {})


def run_adaptive(epsilon, model: ModelSpec, payoff: PayoffSpec, *,
                 seed, scheme="antithetic_milstein", n0=1, horizon=1.0,
                 initial_samples=10_000, max_level=14, workers=1) -> MlmcResult:
    """Adaptive multilevel estimation targeting root-mean-square error ``epsilon``.

    Returns a result with ``converged=False`` (and a NaN estimate) if the
    bias test still fails at ``max_level``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if initial_samples < 100:
        raise ValueError("initial_samples must be at least 100")
    warnings, diagnostics = [], {}
    top = min(2, max_level)
    accs = {l: _LevelAccumulator(l) for l in range(top + 1)}
    with _Sampler(model, payoff, scheme, seed, n0, horizon, workers) as sampler:
        for l in accs:
            sampler.extend(accs[l], initial_samples)
        while True:
            levels = sorted(accs)
            variances = {l: accs[l].acc_y.variance for l in levels}
            costs = {l: level_cost(l, n0, scheme) for l in levels}
            budget = sum(math.sqrt(variances[l] * costs[l]) for l in levels)
            extended = False
            for l in levels:
                target = math.ceil(2.0 / epsilon ** 2
                                   * math.sqrt(variances[l] / costs[l])
                                   * budget) if variances[l] > 0 else 0
                target = max(target, initial_samples)
                if target > accs[l].n:
                    sampler.extend(accs[l], target)
                    extended = True
            if extended:
                continue
            alpha = _bias_alpha(accs)
            bias = _bias_estimate(accs, alpha)
            diagnostics["bias_estimate"] = bias
            diagnostics["alpha_used"] = alpha
            if bias < epsilon / math.sqrt(2.0):
                return _finalise(accs, scheme, n0, epsilon, True,
                                 warnings, diagnostics)
            top += 1
            if top > max_level:
                warnings.append(
                    f"bias test unmet at max_level={max_level}: remaining "
                    f"bias estimate {bias:.3e} >= {epsilon / math.sqrt(2):.3e}")
                return _finalise(accs, scheme, n0, epsilon, False,
                                 warnings, diagnostics)
            accs[top] = _LevelAccumulator(top)
            sampler.extend(accs[top], initial_samples)


def _bias_alpha(accs):
    # on-the-fly decay-rate fit from correction means, floored at 1/2
    pts = [(l, abs(accs[l].acc_y.mean)) for l in sorted(accs) if l >= 1]
    pts = [(l, m) for l, m in pts if m > 0.0]
    if len(pts) < 2:
        return 0.5
    slope = _stats.ols_slope([p[0] for p in pts],
                             np.log2([p[1] for p in pts]))
    return max(0.5, -slope)


def _bias_estimate(accs, alpha):
    levels = sorted(accs)
    top = levels[-1]
    y_top = abs(accs[top].acc_y.mean)
    proxy = y_top
    if top - 1 in accs and top - 1 >= 1:
        proxy = max(proxy, abs(accs[top - 1].acc_y.mean) * 2.0 ** (-alpha))
    return proxy / (2.0 ** alpha - 1.0)


def fit_rates(stats, level_range=None) -> RateFit:
    """Least-squares decay/growth exponents from per-level summaries.

    alpha = -slope of log2 |mean Y_l|, beta = -slope of log2 Var Y_l,
    gamma = +slope of log2 C_l, fitted over levels >= 1 (level 0 is the
    plain estimator, not a correction).  Needs at least three levels.
    Exactly-zero variances (or means) make the corresponding exponent
    +inf, flagged on the result.
    """
    chosen = [s for s in stats if s.level >= 1]
    if level_range is not None:
        lo, hi = level_range
        chosen = [s for s in chosen if lo <= s.level <= hi]
    if len(chosen) < 3:
        raise ValueError("rate fitting needs at least three levels >= 1")
    ls = [s.level for s in chosen]
    gamma = _stats.ols_slope(ls, np.log2([s.cost_per_sample for s in chosen]))
    means = np.array([abs(s.mean_y) for s in chosen])
    variances = np.array([s.var_y for s in chosen])
    alpha_inf = bool(np.any(means == 0.0))
    beta_inf = bool(np.any(variances == 0.0))
    alpha = float("inf") if alpha_inf else -_stats.ols_slope(ls, np.log2(means))
    beta = float("inf") if beta_inf else -_stats.ols_slope(ls, np.log2(variances))
    return RateFit(alpha=alpha, beta=beta, gamma=gamma,
                   beta_infinite=beta_inf, alpha_infinite=alpha_inf)


@dataclass(frozen=True)
class ConsistencyRow:
    level: int
    mean_fine: float
    mean_coarse_above: float
    stderr: float
    passed: bool


@dataclass(frozen=True)
class ConsistencyReport:
    rows: list
    passed: bool


def consistency_check(stats) -> ConsistencyReport:
    """Telescoping diagnostic: fine member at l vs coarse member at l+1.

    The two estimate the same expectation; flags any level where they
    differ by more than three combined standard errors.
    """
    by_level = {s.level: s for s in stats}
    rows = []
    for l in sorted(by_level):
        above = by_level.get(l + 1)
        if above is None or above.mean_p_coarse is None:
            continue
        s = by_level[l]
        diff = s.mean_p - above.mean_p_coarse
        se = math.sqrt(s.var_p / s.n_samples
                       + above.var_p_coarse / above.n_samples)
        passed = abs(diff) <= 3.0 * se if se > 0 else diff == 0.0
        rows.append(ConsistencyRow(
            level=l, mean_fine=s.mean_p, mean_coarse_above=above.mean_p_coarse,
            stderr=se, passed=passed))
    return ConsistencyReport(rows=rows, passed=all(r.passed for r in rows))
