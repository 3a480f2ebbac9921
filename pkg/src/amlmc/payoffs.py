"""Payoff functions over terminal states or path averages.

Payoffs are classified by smoothness: ``smooth`` means twice continuously
differentiable with bounded derivatives (and the bounds are declared), while
``lipschitz_piecewise`` means globally Lipschitz with kinks on a measure-zero
set.  Evaluators are vectorised: ``(n, d) -> (n,)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

__all__ = [
    "PayoffSpec",
    "PayoffError",
    "builtin_payoff",
    "payoff_names",
    "correction_sample",
    "member_payoffs",
]


class PayoffError(ValueError):
    """Unknown payoff name or invalid parameters."""


@dataclass(frozen=True)
class PayoffSpec:
    name: str
    kind: str                 # "european" (terminal state) or "asian" (average)
    smoothness: str           # "smooth" or "lipschitz_piecewise"
    evaluator: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: Optional[float] = None
    hessian_bound: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("european", "asian"):
            raise PayoffError(f"unknown payoff kind {self.kind!r}")
        if self.smoothness not in ("smooth", "lipschitz_piecewise"):
            raise PayoffError(f"unknown smoothness class {self.smoothness!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            return float(self.evaluator(x[None, :])[0])
        return self.evaluator(x)


def _capped_quadratic(x, center, cap):
    # sum_i cap * (1 - exp(-(x_i - center)^2 / cap)): C^infinity, grows like
    # a quadratic near the center and saturates at cap per component.
    s = np.asarray(x, dtype=np.float64) - center
    return np.sum(cap * (1.0 - np.exp(-s * s / cap)), axis=-1)


def _capped_quadratic_bounds(d, cap):
    # |phi'| peaks at s = sqrt(cap/2) with value sqrt(2 cap) e^{-1/2};
    # |phi''| <= 2 (attained at s = 0). Gradient/Hessian are componentwise,
    # so L1 = sqrt(d) * max|phi'| and L2 = max|phi''|.
    l1 = float(np.sqrt(d) * np.sqrt(2.0 * cap) * np.exp(-0.5))
    return l1, 2.0


def _call_on_component(x, strike, component):
    return np.maximum(np.asarray(x, dtype=np.float64)[..., component] - strike, 0.0)


def _min_of_two_call(x, strike):
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(np.minimum(x[..., 0], x[..., 1]) - strike, 0.0)


def _make_smooth_quadratic_capped(center=1.0, cap=1.0, dim=2):
    l1, l2 = _capped_quadratic_bounds(dim, cap)
    return PayoffSpec(
        name="smooth_quadratic_capped", kind="european", smoothness="smooth",
        evaluator=partial(_capped_quadratic, center=center, cap=cap),
        lipschitz_bound=l1, hessian_bound=l2)


def _make_european_call(strike=1.0, component=0):
    return PayoffSpec(
        name="european_call", kind="european",
        smoothness="lipschitz_piecewise",
        evaluator=partial(_call_on_component, strike=strike,
                          component=component),
        lipschitz_bound=1.0)


def _make_min_of_two_call(strike=1.0):
    return PayoffSpec(
        name="min_of_two_call", kind="european",
        smoothness="lipschitz_piecewise",
        evaluator=partial(_min_of_two_call, strike=strike),
        lipschitz_bound=1.0)


def _make_asian_call(strike=1.0, component=0):
    return PayoffSpec(
        name="asian_call", kind="asian", smoothness="lipschitz_piecewise",
        evaluator=partial(_call_on_component, strike=strike,
                          component=component),
        lipschitz_bound=1.0)


def _make_asian_smooth(center=1.0, cap=1.0, dim=2):
    l1, l2 = _capped_quadratic_bounds(dim, cap)
    return PayoffSpec(
        name="asian_smooth", kind="asian", smoothness="smooth",
        evaluator=partial(_capped_quadratic, center=center, cap=cap),
        lipschitz_bound=l1, hessian_bound=l2)


_BUILTINS = {
    "smooth_quadratic_capped": _make_smooth_quadratic_capped,
    "european_call": _make_european_call,
    "min_of_two_call": _make_min_of_two_call,
    "asian_call": _make_asian_call,
    "asian_smooth": _make_asian_smooth,
}


def payoff_names():
    return sorted(_BUILTINS)


def builtin_payoff(name, **params) -> PayoffSpec:
    """Construct a builtin payoff by name with optional parameters."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise PayoffError(
            f"unknown payoff {name!r}; valid names: {', '.join(payoff_names())}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise PayoffError(f"bad parameters for payoff {name!r}: {exc}") from None


def _triple_inputs(payoff: PayoffSpec, path):
    if payoff.kind == "asian":
        return path.asian_f, path.asian_a, path.asian_c
    return path.xf, path.xa, path.xc


def member_payoffs(payoff: PayoffSpec, path):
    """Fine-member and coarse-member payoff samples for a coupled batch.

    The fine member is the average of the payoff over the antithetic pair;
    the coarse member is the payoff of the coarse path.
    """
    xf, xa, xc = _triple_inputs(payoff, path)
    fine = 0.5 * (payoff.evaluator(xf) + payoff.evaluator(xa))
    return fine, payoff.evaluator(xc)


def correction_sample(payoff: PayoffSpec, path):
    """Antithetic level-correction samples: fine member minus coarse member."""
    fine, coarse = member_payoffs(payoff, path)
    return fine - coarse
