"""SDE problem definitions.

A model is the data of ``dx = f(x) dt + g(x) dw`` together with the driving
correlation, dimensions and initial state.  The second-order interaction
tensor

    h[i, j, k](x) = 1/2 * sum_l g[l, k](x) * d g[i, j] / d x_l (x)

is always derived from ``g`` - from the analytic Jacobian when the model
provides one, otherwise by central finite differences - rather than supplied
by hand.

All coefficient callables are vectorised over a leading batch axis:
``drift(x)`` maps ``(n, d) -> (n, d)``, ``diffusion(x)`` maps ``(n, d) ->
(n, d, D)`` and ``diffusion_jacobian(x)`` maps ``(n, d) -> (n, d, D, d)``
with the last axis indexing the state component of the derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ModelSpec",
    "ModelError",
    "ModelEvaluationError",
    "compute_h",
    "builtin",
    "builtin_names",
    "check_commutativity",
    "finite_difference_jacobian",
]

# relative step for the finite-difference Jacobian fallback
_FD_SCALE = 1.0e-6
# tolerance used by the commutativity classifier
_COMMUTE_TOL = 1.0e-10


class ModelError(ValueError):
    """Invalid model definition or unknown builtin name."""


class ModelEvaluationError(RuntimeError):
    """A model coefficient produced a non-finite value."""


def _as_batch(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


@dataclass(frozen=True)
class ModelSpec:
    """Immutable SDE definition; shareable across workers.

    ``bounded_derivatives`` documents whether the coefficients have globally
    bounded first/second derivatives (the regime in which the antithetic
    coupling rates are guaranteed); it is not enforced at runtime.
    """

    name: str
    d: int
    D: int
    x0: np.ndarray
    omega: np.ndarray
    drift: Callable[[np.ndarray], np.ndarray]
    diffusion: Callable[[np.ndarray], np.ndarray]
    diffusion_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    bounded_derivatives: bool = True
    omega_chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=np.float64).reshape(self.d)
        omega = np.asarray(self.omega, dtype=np.float64).reshape(self.D, self.D)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "omega", omega)
        _validate_correlation(omega)
        object.__setattr__(self, "omega_chol", _correlation_factor(omega))
        probe = x0[None, :]
        f = np.asarray(self.drift(probe), dtype=np.float64)
        g = np.asarray(self.diffusion(probe), dtype=np.float64)
        if f.shape != (1, self.d):
            raise ModelError(f"drift must map (n, d) -> (n, d); got {f.shape}")
        if g.shape != (1, self.d, self.D):
            raise ModelError(f"diffusion must map (n, d) -> (n, d, D); got {g.shape}")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise ModelError("drift/diffusion non-finite at the initial state")


def _validate_correlation(omega):
    if not np.allclose(omega, omega.T, rtol=0.0, atol=1e-12):
        raise ModelError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(omega), 1.0, rtol=0.0, atol=1e-12):
        raise ModelError("correlation matrix must have unit diagonal")
    eigvals = np.linalg.eigvalsh(omega)
    if eigvals.min() < -1e-10:
        raise ModelError(
            f"correlation matrix must be positive semidefinite "
            f"(min eigenvalue {eigvals.min():.3e})")


def _correlation_factor(omega):
    # Cholesky when positive definite; eigenvalue square root for the
    # semidefinite boundary (any factor L with L @ L.T = omega works).
    try:
        return np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(omega)
        return v * np.sqrt(np.clip(w, 0.0, None))


def finite_difference_jacobian(diffusion, x):
    """Central-difference Jacobian of ``g``; ``(n, d) -> (n, d, D, d)``.

    The step in component ``l`` is ``max(1, |x_l|) * 1e-6`` per sample.
    """
    x, _ = _as_batch(x)
    n, d = x.shape
    g0 = np.asarray(diffusion(x), dtype=np.float64)
    jac = np.empty(g0.shape + (d,), dtype=np.float64)
    for l in range(d):
        step = _FD_SCALE * np.maximum(1.0, np.abs(x[:, l]))
        xp = x.copy()
        xm = x.copy()
        xp[:, l] += step
        xm[:, l] -= step
        gp = np.asarray(diffusion(xp), dtype=np.float64)
        gm = np.asarray(diffusion(xm), dtype=np.float64)
        jac[..., l] = (gp - gm) / (2.0 * step)[:, None, None]
    return jac


def compute_h(model: ModelSpec, x):
    """Evaluate the interaction tensor ``h`` at ``x``.

    Accepts a single state ``(d,)`` or a batch ``(n, d)`` and returns
    ``(d, D, D)`` or ``(n, d, D, D)`` accordingly.  Uses the analytic
    Jacobian when the model provides one, otherwise central differences.
    """
    xb, single = _as_batch(x)
    g = np.asarray(model.diffusion(xb), dtype=np.float64)
    h = _h_from_diffusion(model, xb, g)
    return h[0] if single else h


def _h_from_diffusion(model, xb, g):
    # internal fast path for steppers that already evaluated g
    if model.diffusion_jacobian is not None:
        jac = np.asarray(model.diffusion_jacobian(xb), dtype=np.float64)
    else:
        jac = finite_difference_jacobian(model.diffusion, xb)
    if not np.all(np.isfinite(jac)):
        b, i, j, l = np.argwhere(~np.isfinite(jac))[0]
        raise ModelEvaluationError(
            f"model {model.name!r}: non-finite Jacobian entry "
            f"dg[{i},{j}]/dx[{l}] at sample {b}")
    n, d, D = g.shape
    # h[n,i,j,k] = 1/2 sum_l jac[n,i,j,l] g[n,l,k], as a batched matmul
    return 0.5 * (jac.reshape(n, d * D, d) @ g).reshape(n, d, D, D)


def check_commutativity(model: ModelSpec, sample_states):
    """True iff ``h`` is symmetric in its two driver indices at all states.

    The test is ``max |h[i,j,k] - h[i,k,j]| <= 1e-10 * (1 + max |h|)`` over
    the supplied states.
    """
    states = np.asarray(sample_states, dtype=np.float64)
    if states.ndim == 1:
        states = states[None, :]
    if states.size == 0:
        raise ValueError("sample_states must be nonempty")
    h = compute_h(model, states)
    asym = np.max(np.abs(h - np.swapaxes(h, 2, 3)))
    return bool(asym <= _COMMUTE_TOL * (1.0 + np.max(np.abs(h))))


# ---------------------------------------------------------------------------
# builtin models
# ---------------------------------------------------------------------------

def _zero_drift(x):
    return np.zeros_like(x)


def _cc_diffusion(x):
    g = np.zeros((x.shape[0], 2, 2))
    g[:, 0, 0] = 1.0
    g[:, 1, 1] = x[:, 0]
    return g


def _cc_diffusion_jacobian(x):
    jac = np.zeros((x.shape[0], 2, 2, 2))
    jac[:, 1, 1, 0] = 1.0
    return jac


def _linear_drift(x, rate, target):
    return rate * (target - x)


def _geometric_drift(x, mu):
    return mu * x


def _geometric_diffusion(x, sigma):
    n, d = x.shape
    g = np.zeros((n, d, d))
    idx = np.arange(d)
    g[:, idx, idx] = sigma * x
    return g


def _geometric_diffusion_jacobian(x, sigma):
    n, d = x.shape
    jac = np.zeros((n, d, d, d))
    idx = np.arange(d)
    jac[:, idx, idx, idx] = sigma
    return jac


def _bounded_mix_diffusion(x, a, b, c, e, q):
    g = np.empty((x.shape[0], 2, 2))
    g[:, 0, 0] = a
    g[:, 0, 1] = b * np.tanh(x[:, 1])
    g[:, 1, 0] = c * np.tanh(x[:, 0])
    g[:, 1, 1] = e + q * np.tanh(x[:, 1])
    return g


def _bounded_mix_diffusion_jacobian(x, a, b, c, e, q):
    jac = np.zeros((x.shape[0], 2, 2, 2))
    sech2_0 = 1.0 - np.tanh(x[:, 0]) ** 2
    sech2_1 = 1.0 - np.tanh(x[:, 1]) ** 2
    jac[:, 0, 1, 1] = b * sech2_1
    jac[:, 1, 0, 0] = c * sech2_0
    jac[:, 1, 1, 1] = q * sech2_1
    return jac


def _constant_diffusion(x, matrix):
    return np.broadcast_to(matrix, (x.shape[0],) + matrix.shape).copy()


def _constant_diffusion_jacobian(x, d, D):
    return np.zeros((x.shape[0], d, D, d))


def _make_clark_cameron():
    """2-D system: dx1 = dw1, dx2 = x1 dw2, started at the origin."""
    return ModelSpec(
        name="clark_cameron",
        d=2, D=2,
        x0=np.zeros(2),
        omega=np.eye(2),
        drift=_zero_drift,
        diffusion=_cc_diffusion,
        diffusion_jacobian=_cc_diffusion_jacobian,
        bounded_derivatives=True,
    )


def _make_geometric_multi(sigma=(0.2, 0.3), mu=(0.05, 0.05), x0=(1.0, 1.0),
                          omega=None):
    """Independent geometric assets; diagonal diffusion, so commutative."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=np.float64))
    d = sigma.size
    mu = np.broadcast_to(np.asarray(mu, dtype=np.float64), (d,)).copy()
    x0 = np.broadcast_to(np.asarray(x0, dtype=np.float64), (d,)).copy()
    omega = np.eye(d) if omega is None else np.asarray(omega, dtype=np.float64)
    return ModelSpec(
        name="geometric_multi",
        d=d, D=d,
        x0=x0,
        omega=omega,
        drift=partial(_geometric_drift, mu=mu),
        diffusion=partial(_geometric_diffusion, sigma=sigma),
        diffusion_jacobian=partial(_geometric_diffusion_jacobian, sigma=sigma),
        bounded_derivatives=True,
    )


def _make_noncommutative_test(a=0.5, b=0.3, c=0.3, e=0.5, q=0.2,
                              rate=0.25, target=1.0, x0=(1.0, 1.0)):
    """2-D stress model with cross-coupled, saturating diffusion.

    Row 2 of ``g`` depends on both state components, so ``h`` is genuinely
    asymmetric in the driver indices.  All coefficient derivatives are
    globally bounded (tanh saturation, linear drift).
    """
    return ModelSpec(
        name="noncommutative_test",
        d=2, D=2,
        x0=np.asarray(x0, dtype=np.float64),
        omega=np.eye(2),
        drift=partial(_linear_drift, rate=rate, target=target),
        diffusion=partial(_bounded_mix_diffusion, a=a, b=b, c=c, e=e, q=q),
        diffusion_jacobian=partial(_bounded_mix_diffusion_jacobian,
                                   a=a, b=b, c=c, e=e, q=q),
        bounded_derivatives=True,
    )


def _make_constant_diffusion(matrix=((1.0, 0.3), (0.3, 1.0)), x0=None):
    """Driftless additive noise; ``h`` vanishes identically."""
    matrix = np.asarray(matrix, dtype=np.float64)
    d, D = matrix.shape
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=np.float64)
    return ModelSpec(
        name="constant_diffusion",
        d=d, D=D,
        x0=x0,
        omega=np.eye(D),
        drift=_zero_drift,
        diffusion=partial(_constant_diffusion, matrix=matrix),
        diffusion_jacobian=partial(_constant_diffusion_jacobian, d=d, D=D),
        bounded_derivatives=True,
    )


_BUILTINS = {
    "clark_cameron": _make_clark_cameron,
    "geometric_multi": _make_geometric_multi,
    "noncommutative_test": _make_noncommutative_test,
    "constant_diffusion": _make_constant_diffusion,
}


def builtin_names():
    return sorted(_BUILTINS)


def builtin(name, **params) -> ModelSpec:
    """Construct a builtin model by name with optional parameter overrides."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ModelError(
            f"unknown model {name!r}; valid names: {', '.join(builtin_names())}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for model {name!r}: {exc}") from None
