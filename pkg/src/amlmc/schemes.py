"""Path discretisations: truncated Milstein triple coupling, Euler pairs.

The production scheme is the Milstein discretisation with the iterated-area
term dropped:

    X[i, n+1] = X[i, n] + f_i dt + sum_j g[i,j] dw_j
                + sum_{j,k} h[i,j,k] (dw_j dw_k - Omega[j,k] dt)

The compensator ``Omega[j,k] dt`` is applied for every (j, k) pair,
including j = k.  At each level a coarse path takes one such step per
coarse interval while the fine path takes two half-steps; the antithetic
twin repeats the fine path with the two half-increments swapped.  All
steppers are pure functions of (model, state, increments) and operate on
sample batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec, _h_from_diffusion
from .randomness import (
    ORACLE_STREAM,
    BrownianSlice,
    antithetic_swap,
    coarse_increment,
    draw_slices,
    standard_normals,
)

__all__ = [
    "PathDivergenceError",
    "StepBudget",
    "TripleState",
    "TriplePathResult",
    "SinglePathResult",
    "EulerPairResult",
    "truncated_milstein_step",
    "euler_step",
    "coupled_coarse_step",
    "simulate_triple_path",
    "simulate_single_path",
    "simulate_euler_pair",
    "clark_cameron_oracle",
    "triple_cost_per_sample",
    "single_cost_per_sample",
    "euler_pair_cost_per_sample",
]


class PathDivergenceError(RuntimeError):
    """A path state became non-finite; carries the offending key."""

    def __init__(self, message, level=None, sample_index=None, step_index=None):
        super().__init__(message)
        self.level = level
        self.sample_index = sample_index
        self.step_index = step_index


@dataclass(frozen=True)
class StepBudget:
    """Grid geometry for one level: step count and step size."""

    level: int
    n_coarse_steps: int
    dt: float

    @classmethod
    def _make(cls, level, n, horizon):
        dt = horizon / n
        if abs(dt * n - horizon) > 4 * np.spacing(horizon):
            raise ValueError(
                f"dt * n_coarse_steps = {dt * n!r} does not reproduce the "
                f"horizon {horizon!r} to within 4 ulp")
        return cls(level, n, dt)

    @classmethod
    def pair_grid(cls, level, n0, horizon):
        """Coarse grid of the (level, level-1) coupled pair."""
        if level < 1:
            raise ValueError("coupled pairs exist for level >= 1 only")
        return cls._make(level, n0 * 2 ** (level - 1), horizon)

    @classmethod
    def single_grid(cls, level, n0, horizon):
        """Plain single-resolution grid of a level."""
        if level < 0:
            raise ValueError("level must be >= 0")
        return cls._make(level, n0 * 2 ** level, horizon)


@dataclass
class TripleState:
    """Coupled coarse/fine/antithetic states plus running path integrals.

    ``asian_*`` hold running time-integrals of the piecewise-linear path
    interpolants (units: state x time); divide by the horizon for averages.
    """

    xc: np.ndarray
    xf: np.ndarray
    xa: np.ndarray
    xf_mid: np.ndarray
    xa_mid: np.ndarray
    asian_c: np.ndarray
    asian_f: np.ndarray
    asian_a: np.ndarray

    @classmethod
    def initial(cls, model: ModelSpec, n_samples: int):
        x = np.broadcast_to(model.x0, (n_samples, model.d)).copy()
        zero = np.zeros_like(x)
        return cls(x.copy(), x.copy(), x.copy(), x.copy(), x.copy(),
                   zero.copy(), zero.copy(), zero.copy())


def _milstein_increment(model, x, dw, dt):
    f = np.asarray(model.drift(x), dtype=np.float64)
    g = np.asarray(model.diffusion(x), dtype=np.float64)
    h = _h_from_diffusion(model, x, g)
    quad = dw[:, :, None] * dw[:, None, :] - model.omega * dt
    n, d, D = g.shape
    diffusion_term = (g @ dw[:, :, None])[:, :, 0]
    second_order = (h.reshape(n, d, D * D) @ quad.reshape(n, D * D, 1))[:, :, 0]
    return f * dt + diffusion_term + second_order


def truncated_milstein_step(model: ModelSpec, x, dw, dt):
    """One step of the area-free Milstein scheme.

    ``x`` may be ``(d,)`` or ``(n, d)``; ``dw`` must match with last axis D.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=np.float64)
    dw = np.asarray(dw, dtype=np.float64)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    dwb = dw[None, :] if single else dw
    out = xb + _milstein_increment(model, xb, dwb, dt)
    if not np.all(np.isfinite(out)):
        bad = int(np.argwhere(~np.isfinite(out))[0, 0])
        raise PathDivergenceError(
            f"model {model.name!r}: non-finite state after a Milstein step",
            sample_index=bad)
    return out[0] if single else out


def euler_step(model: ModelSpec, x, dw, dt):
    """One Euler-Maruyama step (no second-order term)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=np.float64)
    dw = np.asarray(dw, dtype=np.float64)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    dwb = dw[None, :] if single else dw
    f = np.asarray(model.drift(xb), dtype=np.float64)
    g = np.asarray(model.diffusion(xb), dtype=np.float64)
    out = xb + f * dt + (g @ dwb[:, :, None])[:, :, 0]
    if not np.all(np.isfinite(out)):
        bad = int(np.argwhere(~np.isfinite(out))[0, 0])
        raise PathDivergenceError(
            f"model {model.name!r}: non-finite state after an Euler step",
            sample_index=bad)
    return out[0] if single else out


def coupled_coarse_step(model: ModelSpec, state: TripleState,
                        slice_: BrownianSlice, dt) -> TripleState:
    """Advance the coupled triple over one coarse step of size ``dt``.

    The coarse path takes one step with the full increment; the fine path
    takes two half-steps with (first, second); the antithetic path takes two
    half-steps with (second, first).  The trapezoidal / composite-trapezoid
    integral accumulators are updated from the piecewise-linear interpolants.
    """
    swapped = antithetic_swap(slice_)
    dw = coarse_increment(slice_)
    half = dt / 2.0

    xc_new = truncated_milstein_step(model, state.xc, dw, dt)
    xf_mid = truncated_milstein_step(model, state.xf, slice_.delta_first, half)
    xf_new = truncated_milstein_step(model, xf_mid, slice_.delta_second, half)
    xa_mid = truncated_milstein_step(model, state.xa, swapped.delta_first, half)
    xa_new = truncated_milstein_step(model, xa_mid, swapped.delta_second, half)

    return TripleState(
        xc=xc_new, xf=xf_new, xa=xa_new, xf_mid=xf_mid, xa_mid=xa_mid,
        asian_c=state.asian_c + 0.5 * (state.xc + xc_new) * dt,
        asian_f=state.asian_f + 0.25 * (state.xf + 2.0 * xf_mid + xf_new) * dt,
        asian_a=state.asian_a + 0.25 * (state.xa + 2.0 * xa_mid + xa_new) * dt,
    )


def triple_cost_per_sample(level, n0):
    # documented convention: one fine timestep = 1 unit; a level-l coupled
    # sample is charged 3 * n0 * 2^l (two fine paths + the coarse path)
    return 3.0 * n0 * 2 ** level


def single_cost_per_sample(level, n0):
    return float(n0 * 2 ** level)


def euler_pair_cost_per_sample(level, n0):
    # fine path n0*2^l steps + coarse path at half that
    return 1.5 * n0 * 2 ** level


@dataclass
class TriplePathResult:
    """Terminal outputs of a batch of coupled triple paths."""

    level: int
    sample_indices: np.ndarray
    xc: np.ndarray
    xf: np.ndarray
    xa: np.ndarray
    xf_mid: np.ndarray          # fine midpoint of the last coarse step
    xa_mid: np.ndarray
    xc_before_last: np.ndarray  # coarse state entering the last step
    asian_c: np.ndarray         # time-averages over [0, T]
    asian_f: np.ndarray
    asian_a: np.ndarray
    cost_per_sample: float


@dataclass
class SinglePathResult:
    level: int
    sample_indices: np.ndarray
    x: np.ndarray
    asian: np.ndarray
    cost_per_sample: float


@dataclass
class EulerPairResult:
    level: int
    sample_indices: np.ndarray
    xf: np.ndarray
    xc: np.ndarray
    asian_f: np.ndarray
    asian_c: np.ndarray
    cost_per_sample: float


def _rekeyed_divergence(exc, level, sample_indices, step):
    # steppers report the batch-local offender; translate to the global key
    local = exc.sample_index if exc.sample_index is not None else 0
    global_index = int(sample_indices[local])
    return PathDivergenceError(
        f"path diverged at level {level}, sample {global_index}, "
        f"coarse step {step}",
        level=level, sample_index=global_index, step_index=step)


def simulate_triple_path(model: ModelSpec, level, sample_indices, seed, *,
                         n0=1, horizon=1.0) -> TriplePathResult:
    """Simulate coupled (coarse, fine, antithetic) paths for a batch.

    Deterministic in ``(seed, level, sample_index)`` for every sample,
    independent of batch composition.
    """
    budget = StepBudget.pair_grid(level, n0, horizon)
    samples = np.atleast_1d(np.asarray(sample_indices, dtype=np.uint64))
    state = TripleState.initial(model, samples.size)
    xc_prev = state.xc
    for n in range(budget.n_coarse_steps):
        slice_ = draw_slices(seed, level, samples, n, budget.dt,
                             model.omega_chol)
        xc_prev = state.xc
        try:
            state = coupled_coarse_step(model, state, slice_, budget.dt)
        except PathDivergenceError as exc:
            raise _rekeyed_divergence(exc, level, samples, n) from None
    return TriplePathResult(
        level=level, sample_indices=samples,
        xc=state.xc, xf=state.xf, xa=state.xa,
        xf_mid=state.xf_mid, xa_mid=state.xa_mid, xc_before_last=xc_prev,
        asian_c=state.asian_c / horizon,
        asian_f=state.asian_f / horizon,
        asian_a=state.asian_a / horizon,
        cost_per_sample=triple_cost_per_sample(level, n0),
    )


def simulate_single_path(model: ModelSpec, level, sample_indices, seed, *,
                         scheme="truncated_milstein", n0=1,
                         horizon=1.0) -> SinglePathResult:
    """Plain single-resolution paths on ``n0 * 2^level`` steps."""
    if scheme not in ("truncated_milstein", "euler"):
        raise ValueError(f"unknown scheme {scheme!r}")
    budget = StepBudget.single_grid(level, n0, horizon)
    samples = np.atleast_1d(np.asarray(sample_indices, dtype=np.uint64))
    step = truncated_milstein_step if scheme == "truncated_milstein" else euler_step
    x = np.broadcast_to(model.x0, (samples.size, model.d)).copy()
    asian = np.zeros_like(x)
    for n in range(budget.n_coarse_steps):
        slice_ = draw_slices(seed, level, samples, n, budget.dt,
                             model.omega_chol)
        dw = coarse_increment(slice_)
        try:
            x_new = step(model, x, dw, budget.dt)
        except PathDivergenceError as exc:
            raise _rekeyed_divergence(exc, level, samples, n) from None
        asian += 0.5 * (x + x_new) * budget.dt
        x = x_new
    return SinglePathResult(
        level=level, sample_indices=samples, x=x, asian=asian / horizon,
        cost_per_sample=single_cost_per_sample(level, n0))


def simulate_euler_pair(model: ModelSpec, level, sample_indices, seed, *,
                        n0=1, horizon=1.0) -> EulerPairResult:
    """Coupled Euler fine/coarse pair (the non-antithetic control).

    Consumes the same half-increment stream as the triple simulation: the
    fine path takes two Euler half-steps per coarse step, the coarse path
    one full step with the summed increment.
    """
    budget = StepBudget.pair_grid(level, n0, horizon)
    samples = np.atleast_1d(np.asarray(sample_indices, dtype=np.uint64))
    xf = np.broadcast_to(model.x0, (samples.size, model.d)).copy()
    xc = xf.copy()
    asian_f = np.zeros_like(xf)
    asian_c = np.zeros_like(xf)
    half = budget.dt / 2.0
    for n in range(budget.n_coarse_steps):
        slice_ = draw_slices(seed, level, samples, n, budget.dt,
                             model.omega_chol)
        try:
            xf_mid = euler_step(model, xf, slice_.delta_first, half)
            xf_new = euler_step(model, xf_mid, slice_.delta_second, half)
            xc_new = euler_step(model, xc, coarse_increment(slice_), budget.dt)
        except PathDivergenceError as exc:
            raise _rekeyed_divergence(exc, level, samples, n) from None
        asian_f += 0.25 * (xf + 2.0 * xf_mid + xf_new) * budget.dt
        asian_c += 0.5 * (xc + xc_new) * budget.dt
        xf, xc = xf_new, xc_new
    return EulerPairResult(
        level=level, sample_indices=samples, xf=xf, xc=xc,
        asian_f=asian_f / horizon, asian_c=asian_c / horizon,
        cost_per_sample=euler_pair_cost_per_sample(level, n0))


def clark_cameron_oracle(sample_indices, seed, *, level, substeps, n0=1,
                         horizon=1.0):
    """Reference terminal values for the 2-D ``dx1 = dw1, dx2 = x1 dw2`` system.

    Rides the same per-step increment slices as
    :func:`simulate_single_path` at the given (seed, level), and refines
    each half-step into ``substeps/2`` bridge-conditioned sub-increments to
    approximate the iterated-integral correction.  As ``substeps`` grows the
    output converges to a draw from the exact conditional law given the
    slice increments.  Test-only; cost is ignored.
    """
    if substeps < 2 or substeps % 2:
        raise ValueError("substeps must be an even integer >= 2")
    budget = StepBudget.single_grid(level, n0, horizon)
    samples = np.atleast_1d(np.asarray(sample_indices, dtype=np.uint64))
    nb = samples.size
    mh = substeps // 2
    h_sub = budget.dt / substeps
    x = np.zeros((nb, 2))
    eye = np.eye(2)
    for n in range(budget.n_coarse_steps):
        slice_ = draw_slices(seed, level, samples, n, budget.dt, eye)
        halves = (slice_.delta_first, slice_.delta_second)
        if mh == 1:
            subs = np.stack(halves, axis=1)          # (nb, 2, D)
        else:
            z = standard_normals(seed, level, samples, n, 2 * mh * 2,
                                 stream=ORACLE_STREAM)
            z = z.reshape(nb, 2, mh, 2)
            parts = []
            for side, total in enumerate(halves):
                zc = z[:, side] - z[:, side].mean(axis=1, keepdims=True)
                parts.append(total[:, None, :] / mh + np.sqrt(h_sub) * zc)
            subs = np.concatenate(parts, axis=1)     # (nb, substeps, D)
        dw = coarse_increment(slice_)
        cum = np.cumsum(subs, axis=1) - subs         # path value before each sub-step
        area = np.sum(cum[:, :, 0] * subs[:, :, 1]
                      - cum[:, :, 1] * subs[:, :, 0], axis=1)
        x2 = (x[:, 1] + x[:, 0] * dw[:, 1]
              + 0.5 * dw[:, 0] * dw[:, 1] + 0.5 * area)
        x = np.stack([x[:, 0] + dw[:, 0], x2], axis=1)
    return x
