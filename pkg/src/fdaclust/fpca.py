"""Functional principal component analysis in B-spline coefficient space.

For data ``x_i = sum_k a_ik beta_k`` with Gram matrix ``W`` the covariance
operator acts on coefficient vectors as ``S W`` with ``S`` the sample
covariance of the coefficients.  Its spectrum is obtained from the
symmetric matrix ``W^1/2 S W^1/2``; eigenvectors are mapped back with
``W^-1/2`` so that eigenfunctions are orthonormal in L2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BSplineBasis, FunctionalDatum, coefficient_matrix
from .errors import BasisMismatchError, DegenerateError, DomainError, InsufficientDataError

RELATIVE_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class FpcaModel:
    """Fitted functional PCA.

    ``eigenfunction_coeffs`` has one row per component.  Components whose
    eigenvalue is zero are kept for completeness but excluded from
    ``q_max``.
    """

    basis: BSplineBasis
    mean_coeffs: np.ndarray
    eigenvalues: np.ndarray
    eigenfunction_coeffs: np.ndarray
    n_samples: int = 0

    @property
    def q_max(self) -> int:
        return int(np.count_nonzero(self.eigenvalues > 0))

    @property
    def mean(self) -> FunctionalDatum:
        return FunctionalDatum(self.mean_coeffs, self.basis, "mean")

    def eigenfunction(self, j: int) -> FunctionalDatum:
        return FunctionalDatum(self.eigenfunction_coeffs[j], self.basis, f"pc{j + 1}")

    def to_record(self) -> dict:
        return {
            "basis": self.basis.to_record(),
            "mean_coeffs": self.mean_coeffs.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenfunction_coeffs": self.eigenfunction_coeffs.tolist(),
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "FpcaModel":
        basis = BSplineBasis.from_record(rec["basis"])
        funcs = np.array(rec["eigenfunction_coeffs"], dtype=float).reshape(-1, basis.n_basis)
        return cls(
            basis,
            np.array(rec["mean_coeffs"], dtype=float),
            np.array(rec["eigenvalues"], dtype=float),
            funcs,
            int(rec.get("n_samples", 0)),
        )


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    values: np.ndarray  # (n, q)
    ids: tuple = ()

    @property
    def column_variances(self) -> np.ndarray:
        if self.values.shape[0] < 2:
            return np.zeros(self.values.shape[1])
        return self.values.var(axis=0, ddof=1)


def mean_function(data) -> FunctionalDatum:
    coeffs, basis = coefficient_matrix(data)
    return FunctionalDatum(coeffs.mean(axis=0), basis, "mean")


def _sqrt_gram(gram: np.ndarray):
    w, u = np.linalg.eigh(gram)
    if np.min(w) <= 0:
        raise DegenerateError("Gram matrix is not positive definite")
    root = (u * np.sqrt(w)) @ u.T
    inv_root = (u / np.sqrt(w)) @ u.T
    return root, inv_root


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every row positive."""
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(vectors.shape[0]), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def fit_fpca(data) -> FpcaModel:
    coeffs, basis = coefficient_matrix(data)
    n, k = coeffs.shape
    if n < 2:
        raise InsufficientDataError("FPCA needs at least 2 curves")
    mean = coeffs.mean(axis=0)
    centered = coeffs - mean
    cov = centered.T @ centered / (n - 1)
    root, inv_root = _sqrt_gram(basis.gram)
    op = root @ cov @ root
    op = (op + op.T) / 2
    evals, evecs = np.linalg.eigh(op)
    order = np.argsort(evals)[::-1]
    n_comp = min(n - 1, k)
    evals = evals[order][:n_comp]
    funcs = (inv_root @ evecs[:, order][:, :n_comp]).T
    top = evals[0] if evals.size else 0.0
    # round-off floor: centring identical curves leaves ~eps * |x|^2 behind
    scale = np.finfo(float).eps * float(np.mean(np.einsum("ij,jk,ik->i", coeffs, basis.gram, coeffs)))
    evals = np.where(evals > RELATIVE_CUTOFF * max(top, scale), evals, 0.0)
    return FpcaModel(basis, mean, evals, _fix_signs(funcs), n)


def _check_q(model: FpcaModel, q: int):
    if not 0 <= q <= model.q_max:
        raise DomainError(f"q = {q} outside 0..{model.q_max}")


def scores(data, model: FpcaModel, q: int) -> ScoreMatrix:
    """Projections ``C_ij = <x_i - mean, f_j>`` for the first ``q`` components."""
    _check_q(model, q)
    data = list(data)
    coeffs, basis = coefficient_matrix(data)
    if basis != model.basis:
        raise BasisMismatchError("data and model use different bases")
    values = (coeffs - model.mean_coeffs) @ basis.gram @ model.eigenfunction_coeffs[:q].T
    return ScoreMatrix(values, tuple(d.id for d in data))


def reconstruct(model: FpcaModel, score_row, q: int) -> FunctionalDatum:
    """Truncated expansion ``mean + sum_{j<=q} C_j f_j``."""
    _check_q(model, q)
    score_row = np.asarray(score_row, dtype=float)
    if score_row.size < q:
        raise DomainError(f"score row has {score_row.size} entries, q = {q}")
    coeffs = model.mean_coeffs + score_row[:q] @ model.eigenfunction_coeffs[:q]
    return FunctionalDatum(coeffs, model.basis)


def explained_variance(model: FpcaModel) -> np.ndarray:
    """Cumulative fraction of total variance carried by the leading components."""
    total = float(np.sum(model.eigenvalues))
    if total <= 0:
        raise DegenerateError("all eigenvalues are zero; cohort has no variation")
    return np.cumsum(model.eigenvalues) / total


def choose_q(model: FpcaModel, threshold: float = 0.95) -> int:
    """Smallest number of components whose cumulative fraction reaches ``threshold``."""
    if not 0 < threshold <= 1:
        raise DomainError(f"threshold must be in (0, 1], got {threshold!r}")
    cum = explained_variance(model)
    hit = np.nonzero(cum >= threshold - 1e-12)[0]
    return int(hit[0]) + 1 if hit.size else model.q_max
