"""Gaussian mixture models fitted by expectation-maximization."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, solve_triangular
from scipy.special import logsumexp

from ..errors import DegenerateError, DomainError
from ..rng import make_rng
from .partition import _as_items, kmeanspp_init, sq_distances
from .types import Clustering, GmmModel, canonical_order

COVARIANCES = ("diagonal", "full")
COLLAPSE_THRESHOLD = 1e-12
REG_FRACTION = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)


def _regularize(cov: np.ndarray, full: bool):
    """Add a ridge when the generalized variance (geometric mean of the
    eigenvalues) falls below ``COLLAPSE_THRESHOLD``."""
    eig = np.linalg.eigvalsh(cov) if full else cov
    d = eig.size
    tiny = np.min(eig) <= 0 or np.exp(np.mean(np.log(np.clip(eig, 1e-300, None)))) < COLLAPSE_THRESHOLD
    if not tiny:
        return cov, False
    ridge = max(REG_FRACTION * float(np.sum(eig)) / d, COLLAPSE_THRESHOLD)
    if full:
        return cov + ridge * np.eye(d), True
    return cov + ridge, True


def _m_step(x, resp, full):
    nk = resp.sum(axis=0)
    weights = nk / nk.sum()
    means = (resp.T @ x) / nk[:, None]
    covs = []
    flagged = False
    for c in range(resp.shape[1]):
        diff = x - means[c]
        if full:
            cov = (resp[:, c, None] * diff).T @ diff / nk[c]
            cov = (cov + cov.T) / 2
        else:
            cov = resp[:, c] @ (diff * diff) / nk[c]
        cov, reg = _regularize(cov, full)
        flagged |= reg
        covs.append(cov)
    return weights, means, np.array(covs), flagged


def _log_density(x, means, covs, full):
    n, d = x.shape
    out = np.empty((n, means.shape[0]))
    for c in range(means.shape[0]):
        diff = x - means[c]
        if full:
            chol, _ = cho_factor(covs[c], lower=True)
            sol = solve_triangular(chol, diff.T, lower=True)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            maha = np.sum(sol * sol, axis=0)
        else:
            logdet = np.sum(np.log(covs[c]))
            maha = np.sum(diff * diff / covs[c], axis=1)
        out[:, c] = -0.5 * (d * _LOG_2PI + logdet + maha)
    return out


def n_parameters(k: int, d: int, covariance: str) -> int:
    cov = d * (d + 1) // 2 if covariance == "full" else d
    return (k - 1) + k * d + k * cov


def _run(x, k, full, init_idx, max_iter, tol):
    seeds = x[init_idx]
    hard = np.argmin(sq_distances(x, seeds), axis=1)
    resp = np.zeros((x.shape[0], k))
    resp[np.arange(x.shape[0]), hard] = 1.0
    if np.any(resp.sum(axis=0) == 0):
        return None
    weights, means, covs, flagged = _m_step(x, resp, full)
    trace = []
    for it in range(1, max_iter + 1):
        try:
            logp = np.log(weights) + _log_density(x, means, covs, full)
        except np.linalg.LinAlgError:
            return None
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        resp = np.exp(logp - norm[:, None])
        converged = bool(trace) and abs(ll - trace[-1]) <= tol * max(1.0, abs(ll))
        trace.append(ll)
        if converged:
            break
        if np.any(resp.sum(axis=0) < 1e-10 * x.shape[0]):
            return None
        weights, means, covs, reg = _m_step(x, resp, full)
        flagged |= reg
    return weights, means, covs, resp, trace, flagged, it


def gmm_em(
    items,
    k: int,
    covariance: str = "full",
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-10,
    n_init: int = 5,
) -> tuple[Clustering, GmmModel]:
    """Fit a ``k``-component Gaussian mixture, best of ``n_init`` starts.

    Each start seeds the components from a k-means++ draw.  Items are
    labelled by their largest responsibility.  The clustering objective is
    the final log-likelihood; ``objective_trace`` records it after every
    E-step.  Starts that lose a component are discarded.
    """
    x = _as_items(items)
    n, d = x.shape
    if covariance not in COVARIANCES:
        raise DomainError(f"covariance must be one of {COVARIANCES}")
    if not 1 <= k <= n:
        raise DomainError(f"k = {k} must lie in 1..{n}")
    full = covariance == "full"
    rng = make_rng(seed)
    best = None
    for _ in range(n_init):
        out = _run(x, k, full, kmeanspp_init(x, k, rng), max_iter, tol)
        if out is None:
            continue
        hard = np.argmax(out[3], axis=1)
        if np.unique(hard).size < k:
            continue
        if best is None or out[4][-1] > best[4][-1]:
            best = out
    if best is None:
        raise DegenerateError(f"no EM start produced {k} non-empty components")
    weights, means, covs, resp, trace, flagged, it = best
    hard = np.argmax(resp, axis=1)
    perm = canonical_order(hard, k)
    inv = np.argsort(perm)
    loglik = trace[-1]
    model = GmmModel(
        weights[inv],
        means[inv],
        covs[inv],
        covariance,
        tuple(trace),
        -2.0 * loglik + n_parameters(k, d, covariance) * np.log(n),
        flagged,
    )
    clustering = Clustering(
        perm[hard] + 1,
        k,
        objective=loglik,
        centers=means[inv],
        seed=seed,
        iterations=it,
        objective_trace=trace,
        method=f"gmm-{covariance}",
        params={"covariance": covariance, "n_init": n_init, "bic": model.bic, "regularized": flagged},
    )
    return clustering, model


def gmm_select(items, k: int, covariances=COVARIANCES, **kw):
    """Fit each covariance family and keep the one with the lowest BIC."""
    fits = []
    for cov in covariances:
        try:
            fits.append(gmm_em(items, k, cov, **kw))
        except DegenerateError:
            continue
    if not fits:
        raise DegenerateError("no covariance family produced a valid mixture")
    return min(fits, key=lambda f: f[1].bic)
