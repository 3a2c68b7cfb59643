"""Fisher information, Cramer-Rao and Barankin bounds, and Gaussian limits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .statmodel import DiscreteModel, DomainError

P_FLOOR = 1e-300


class ZeroInformationError(DomainError):
    """Bound undefined because the (generalized) Fisher information is zero."""


def conjugate_order(beta: float) -> float:
    """Hoelder conjugate ``alpha = beta / (beta - 1)``."""
    if not beta > 1:
        raise DomainError(f"moment order beta must be > 1, got {beta}")
    return beta / (beta - 1.0)


def _score_moment(model: DiscreteModel, params, index: int, alpha: float) -> float:
    p = model.prob_vector(params)
    dp = model.dprob_vector(params, index)
    keep = p >= P_FLOOR
    p, dp = p[keep], dp[keep]
    return float(np.sum(p * np.abs(dp / p) ** alpha))


def fisher_information(model: DiscreteModel, params, index: int = 0) -> float:
    """Classical Fisher information ``sum_k p (d log p)^2`` for one parameter.

    Outcomes with ``p < 1e-300`` are dropped from the sum.
    """
    return _score_moment(model, params, index, 2.0)


def generalized_fisher(model: DiscreteModel, params, index: int = 0, alpha: float = 2.0) -> float:
    """Order-``alpha`` information ``sum_k p |d log p|^alpha`` (alpha > 1)."""
    if not alpha > 1:
        raise DomainError(f"alpha must be > 1, got {alpha}")
    return _score_moment(model, params, index, float(alpha))


def crb(fisher: float, M: int) -> float:
    if fisher <= 0:
        raise ZeroInformationError("bound undefined (zero information)")
    return 1.0 / (M * fisher)


def barankin_bound(f_alpha: float, M: int, beta: float) -> float:
    """Lower bound ``1 / (M**(beta/2) * F_alpha**(beta/alpha))`` on Sigma_beta."""
    alpha = conjugate_order(beta)
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    if not f_alpha > 0:
        raise ZeroInformationError("bound undefined (zero information)")
    return 1.0 / (M ** (beta / 2) * f_alpha ** (beta / alpha))


def xi_beta(sigma_beta: float, M: int, f_alpha: float, beta: float) -> float:
    """Saturation ratio of a measured moment to its Barankin bound."""
    alpha = conjugate_order(beta)
    return sigma_beta * M ** (beta / 2) * f_alpha ** (beta / alpha)


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def _check_integer_order(beta) -> int:
    if int(beta) != beta or beta < 2:
        raise DomainError(f"beta must be an integer >= 2, got {beta}")
    return int(beta)


def _gaussian_factor(beta: int) -> float:
    odd = math.sqrt(2 / math.pi) if beta % 2 else 1.0
    return double_factorial(beta - 1) * odd


def gaussian_abs_moment(variance: float, beta: int) -> float:
    """Central absolute moment ``E|X - mu|^beta`` of a normal with this variance."""
    beta = _check_integer_order(beta)
    if variance < 0:
        raise DomainError(f"variance must be >= 0, got {variance}")
    return variance ** (beta / 2) * _gaussian_factor(beta)


def gaussian_limit_xi(f2: float, f_alpha: float, beta: int) -> float:
    """Large-M value of Xi_beta when the posterior is normal at the CRB width."""
    beta = _check_integer_order(beta)
    alpha = conjugate_order(beta)
    if not (f2 > 0 and f_alpha > 0):
        raise ZeroInformationError("bound undefined (zero information)")
    return f_alpha ** (beta / alpha) / f2 ** (beta / 2) * _gaussian_factor(beta)


@dataclass(frozen=True)
class BoundReport:
    M: int
    beta: float
    alpha: float
    fisher: float
    generalized_fisher: float
    crb: float
    barankin_bound: float
    sigma_beta: float | None
    xi_beta: float | None
    gaussian_limit: float | None

    def as_dict(self):
        return asdict(self)


def bound_report(
    model: DiscreteModel,
    params,
    M: int,
    beta: float,
    sigma_beta: float | None = None,
    index: int = 0,
) -> BoundReport:
    """Collect information and bounds at the true ``params`` for one ``(M, beta)``.

    The Gaussian limit is only defined for integer ``beta`` and is ``None``
    otherwise; ``xi_beta`` is ``None`` unless a measured ``sigma_beta`` is given.
    """
    alpha = conjugate_order(beta)
    f2 = fisher_information(model, params, index)
    fa = generalized_fisher(model, params, index, alpha)
    limit = None
    if float(beta).is_integer() and f2 > 0 and fa > 0:
        limit = gaussian_limit_xi(f2, fa, int(beta))
    return BoundReport(
        M=M,
        beta=beta,
        alpha=alpha,
        fisher=f2,
        generalized_fisher=fa,
        crb=crb(f2, M),
        barankin_bound=barankin_bound(fa, M, beta),
        sigma_beta=sigma_beta,
        xi_beta=None if sigma_beta is None else xi_beta(sigma_beta, M, fa, beta),
        gaussian_limit=limit,
    )
