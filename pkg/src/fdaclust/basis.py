"""B-spline bases and least-squares basis expansions of sampled curves."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .curve_model import SampledCurve
from .errors import BasisMismatchError, ConditioningError, DomainError

GAUSS_NODES = 8
DOMAIN_TOLERANCE = 1e-12


def _safe_div(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    nz = den != 0
    np.divide(num, den, out=out, where=np.broadcast_to(nz, out.shape))
    return out


@dataclass(frozen=True)
class BSplineBasis:
    """Clamped B-spline basis of a given ``order`` (degree + 1).

    Parameters
    ----------
    order : int
        Spline order; 4 gives cubic splines.
    interior_knots : tuple of float
        Strictly increasing knots strictly inside ``domain``.
    domain : tuple of float
        Closed interval the basis lives on.
    """

    order: int
    interior_knots: tuple = ()
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        knots = tuple(float(k) for k in self.interior_knots)
        lo, hi = (float(d) for d in self.domain)
        if int(self.order) != self.order or self.order < 1:
            raise DomainError(f"spline order must be a positive integer, got {self.order!r}")
        if not lo < hi:
            raise DomainError(f"empty domain {self.domain!r}")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise DomainError(f"interior knots must be strictly increasing: {knots}")
        if any(not lo < k < hi for k in knots):
            raise DomainError(f"interior knots must lie strictly inside ({lo}, {hi})")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "interior_knots", knots)
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def n_basis(self) -> int:
        return len(self.interior_knots) + self.order

    @cached_property
    def knots(self) -> np.ndarray:
        lo, hi = self.domain
        return np.array([lo] * self.order + list(self.interior_knots) + [hi] * self.order)

    @cached_property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.domain[0], *self.interior_knots, self.domain[1]])

    def _check(self, t: np.ndarray):
        lo, hi = self.domain
        bad = (t < lo - DOMAIN_TOLERANCE) | (t > hi + DOMAIN_TOLERANCE) | ~np.isfinite(t)
        if np.any(bad):
            raise DomainError(f"t = {t[np.argmax(bad)]!r} outside basis domain [{lo}, {hi}]")

    def _order1(self, t: np.ndarray) -> np.ndarray:
        knots = self.knots
        n_spans = knots.size - 1
        span = np.searchsorted(knots, t, side="right") - 1
        # the closed right endpoint belongs to the last non-degenerate span
        span = np.clip(span, self.order - 1, self.n_basis - 1)
        out = np.zeros((t.size, n_spans))
        out[np.arange(t.size), span] = 1.0
        return out

    def _values(self, t: np.ndarray, order: int) -> np.ndarray:
        """Cox-de Boor recursion up to ``order`` on the full knot vector."""
        knots = self.knots
        b = self._order1(t)
        for k in range(2, order + 1):
            n = knots.size - k
            left = _safe_div(t[:, None] - knots[None, :n], knots[k - 1 : k - 1 + n] - knots[:n])
            right = _safe_div(knots[None, k : k + n] - t[:, None], knots[k : k + n] - knots[1 : 1 + n])
            b = left * b[:, :n] + right * b[:, 1 : n + 1]
        return b

    def _derivative(self, t: np.ndarray, order: int, deriv: int) -> np.ndarray:
        if deriv == 0:
            return self._values(t, order)
        if order == 1:
            return np.zeros((t.size, self.knots.size - 1))
        knots = self.knots
        lower = self._derivative(t, order - 1, deriv - 1)
        n = knots.size - order
        a = _safe_div(order - 1, knots[order - 1 : order - 1 + n] - knots[:n])
        c = _safe_div(order - 1, knots[order : order + n] - knots[1 : 1 + n])
        return a * lower[:, :n] - c * lower[:, 1 : n + 1]

    def evaluate(self, t, derivative: int = 0) -> np.ndarray:
        """Basis values (or derivatives) at ``t``; shape ``(len(t), n_basis)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        self._check(t)
        t = np.clip(t, *self.domain)
        return self._derivative(t, self.order, derivative)

    def _quadrature(self):
        nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
        bp = self.breakpoints
        half = np.diff(bp)[:, None] / 2
        mid = (bp[:-1] + bp[1:])[:, None] / 2
        return (mid + half * nodes).ravel(), (half * weights).ravel()

    @cached_property
    def gram(self) -> np.ndarray:
        """``W[k, l] = integral of beta_k * beta_l`` over the domain."""
        t, w = self._quadrature()
        b = self.evaluate(t)
        g = (b * w[:, None]).T @ b
        return (g + g.T) / 2

    @cached_property
    def roughness(self) -> np.ndarray:
        """``R[k, l] = integral of beta_k'' * beta_l''``."""
        if self.order < 3:
            return np.zeros((self.n_basis, self.n_basis))
        t, w = self._quadrature()
        d2 = self.evaluate(t, derivative=2)
        r = (d2 * w[:, None]).T @ d2
        return (r + r.T) / 2

    def to_record(self) -> dict:
        return {"order": self.order, "interior_knots": list(self.interior_knots), "domain": list(self.domain)}

    @classmethod
    def from_record(cls, rec: dict) -> "BSplineBasis":
        return cls(int(rec["order"]), tuple(rec.get("interior_knots", ())), tuple(rec.get("domain", (0.0, 1.0))))


def make_basis(order: int, interior_knots=(), domain=(0.0, 1.0)) -> BSplineBasis:
    return BSplineBasis(order, tuple(interior_knots), tuple(domain))


def equispaced_basis(order: int = 4, n_interior: int = 9, domain=(0.0, 1.0)) -> BSplineBasis:
    lo, hi = domain
    knots = np.linspace(lo, hi, n_interior + 2)[1:-1]
    return make_basis(order, knots, domain)


def eval_basis(basis: BSplineBasis, t: float) -> np.ndarray:
    return basis.evaluate([t])[0]


def gram_matrix(basis: BSplineBasis) -> np.ndarray:
    return basis.gram.copy()


@dataclass(frozen=True, eq=False)
class FunctionalDatum:
    coeffs: np.ndarray
    basis: BSplineBasis
    id: str = ""

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.n_basis,):
            raise DomainError(
                f"datum {self.id!r}: {coeffs.size} coefficients for a basis of size {self.basis.n_basis}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise DomainError(f"datum {self.id!r} has non-finite coefficients")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, t):
        return self.basis.evaluate(t) @ self.coeffs

    def to_record(self) -> dict:
        return {"id": self.id, "basis": self.basis.to_record(), "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_record(cls, rec: dict) -> "FunctionalDatum":
        return cls(np.array(rec["coeffs"], dtype=float), BSplineBasis.from_record(rec["basis"]), str(rec.get("id", "")))


def eval_function(datum: FunctionalDatum, t: float) -> float:
    return float(datum([t])[0])


def eval_on_grid(datum: FunctionalDatum, grid) -> np.ndarray:
    return datum(grid)


@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. Gaussian observation noise with standard deviation ``sigma``."""

    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DomainError(f"noise sigma must be >= 0, got {self.sigma!r}")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.sigma == 0:
            return np.zeros(shape)
        return rng.normal(0.0, self.sigma, size=shape)

    @classmethod
    def estimate(cls, curve: SampledCurve, datum: FunctionalDatum) -> "NoiseModel":
        """Residual standard deviation of a least-squares fit."""
        dof = len(curve) - datum.basis.n_basis
        if dof <= 0:
            raise DomainError("no residual degrees of freedom to estimate noise")
        resid = curve.values - datum(curve.times)
        return cls(float(np.sqrt(resid @ resid / dof)))


def fit(basis: BSplineBasis, curve: SampledCurve, smoothing_lambda: float = 0.0) -> FunctionalDatum:
    """Least-squares basis coefficients for ``curve``.

    Minimizes ``sum_j (x_j - sum_k a_k beta_k(t_j))**2 + lambda * a' R a``
    where ``R`` integrates squared second derivatives.  The problem is
    solved as a stacked least-squares system via SVD.
    """
    if smoothing_lambda < 0:
        raise DomainError("smoothing_lambda must be >= 0")
    design = basis.evaluate(curve.times)
    y = curve.values
    if smoothing_lambda > 0:
        evals, evecs = np.linalg.eigh(basis.roughness)
        # linear functions span the exact null space; drop round-off there
        evals[evals <= basis.n_basis * np.finfo(float).eps * evals.max()] = 0.0
        root = np.sqrt(evals)[:, None] * evecs.T
        design = np.vstack([design, np.sqrt(smoothing_lambda) * root])
        y = np.concatenate([y, np.zeros(basis.n_basis)])
    coeffs, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < basis.n_basis:
        raise ConditioningError(
            f"curve {curve.id!r}: design has rank {rank} < {basis.n_basis}; "
            "use more samples or a positive smoothing_lambda"
        )
    return FunctionalDatum(coeffs, basis, curve.id)


def fit_many(basis: BSplineBasis, curves, smoothing_lambda: float = 0.0) -> list[FunctionalDatum]:
    return [fit(basis, c, smoothing_lambda) for c in curves]


def coefficient_matrix(data) -> tuple[np.ndarray, BSplineBasis]:
    """Stack coefficients of data sharing one basis into an ``n x K`` matrix."""
    data = list(data)
    if not data:
        raise DomainError("no functional data")
    basis = data[0].basis
    for d in data[1:]:
        if d.basis != basis:
            raise BasisMismatchError(f"datum {d.id!r} uses a different basis")
    return np.vstack([d.coeffs for d in data]), basis
