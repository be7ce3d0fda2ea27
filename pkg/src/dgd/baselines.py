"""Reference methods the solver is compared against.

unc drops every constraint and prior and alternates exact masked least
squares on the same factorization. cpd fits an unconstrained three-way
canonical decomposition to the zero-imputed tensor at a rank matched by
parameter count. nsdgd is the full solver with the signal coupling turned
off. METHODS exposes all of them behind one adapter signature.
"""

from __future__ import annotations

import warnings

import numpy as np

from .driver import run_dgd
from .model import Decomposition, NumericalAbort, reconstruct
from .tensors import build_flattenings, unstack_latents

RIDGE = 1e-8


def _ridged_solve(grams, rhs, label):
    """Batched SPD solves with a tiny ridge on near-singular blocks."""
    w = np.linalg.eigvalsh(grams)
    bad = w[..., 0] <= 1e-12 * np.maximum(w[..., -1], 1.0)
    n_bad = int(bad.sum())
    if n_bad:
        warnings.warn(
            f"unc: ridged {n_bad} near-singular {label} blocks", RuntimeWarning, stacklevel=3
        )
        eye = np.eye(grams.shape[-1])
        grams = grams.copy()
        grams[bad] += RIDGE * eye
    return np.linalg.solve(grams, rhs[..., None])[..., 0]


def unc_solve(adj, mask, n_latents, iters=50, seed=0):
    """Alternating masked least squares without constraints or priors.

    Returns (Decomposition, fit history); the history records
    0.5 ||M0 * (A0 C' - a_vec)||_F^2 after every half-step, so it is
    non-increasing up to the ridge added on degenerate blocks.
    """
    adj = np.asarray(adj, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    flat = build_flattenings(mask * adj, mask)
    n = adj.shape[1]
    rng = np.random.default_rng(seed)
    a0 = rng.random((n * n, n_latents))
    c = rng.random((adj.shape[0], n_latents))
    target = flat.m0 * flat.a_vec
    fits = []

    def fit():
        return 0.5 * float(np.sum((flat.m0 * (a0 @ c.T) - target) ** 2))

    for _ in range(iters):
        grams = np.einsum("kt,kr,ks->trs", flat.m0, a0, a0)
        rhs = np.einsum("kt,kr->tr", target, a0)
        c = _ridged_solve(grams, rhs, "signature")
        fits.append(fit())
        grams = np.einsum("kt,tr,ts->krs", flat.m0, c, c)
        rhs = np.einsum("kt,tr->kr", target, c)
        a0 = _ridged_solve(grams, rhs, "latent")
        fits.append(fit())
    return Decomposition(unstack_latents(a0, n), c), fits


def nsdgd(adj, mask, signals, h, seed):
    """The full solver with the signal smoothness coupling disabled."""
    return run_dgd(adj, mask, None, h.replace(delta=0.0), seed)


def cpd_rank_for(n_nodes, n_steps, n_latents):
    """Rank that matches the decomposition's parameter count.

    Solves F (2N + T) = R (N(N-1)/2 + T) for F, rounded to the nearest
    integer and floored at 1.
    """
    free = n_latents * (n_nodes * (n_nodes - 1) / 2.0 + n_steps)
    return max(1, int(np.rint(free / (2.0 * n_nodes + n_steps))))


def cpd_als(tensor, rank, iters=60, seed=0, _retry=True):
    """Unconstrained CP decomposition of a (T, N, N) stack by ALS.

    Factor columns of the two node modes are renormalized each iteration with
    the scale pushed into the temporal mode. A non-finite iterate triggers one
    restart from seed + 1, then NumericalAbort. Returns ((u, v, w), fit
    history) with fit = 0.5 ||X - recon||_F^2 per iteration.
    """
    x = np.asarray(tensor, dtype=np.float64)
    t, n = x.shape[0], x.shape[1]
    rng = np.random.default_rng(seed)
    u = rng.random((n, rank))
    v = rng.random((n, rank))
    w = rng.random((t, rank))
    def _solve(g, rhs, like):
        # lstsq chokes on non-finite input (and can fail to converge even on
        # finite input); either way the iterate is dead, signal with NaN
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(rhs))):
            return np.full_like(like, np.nan)
        try:
            return np.linalg.lstsq(g, rhs.T, rcond=None)[0].T
        except np.linalg.LinAlgError:
            return np.full_like(like, np.nan)

    fits = []
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(iters):
            u = _solve((v.T @ v) * (w.T @ w), np.einsum("tij,jf,tf->if", x, v, w), u)
            v = _solve((u.T @ u) * (w.T @ w), np.einsum("tij,if,tf->jf", x, u, w), v)
            w = _solve((u.T @ u) * (v.T @ v), np.einsum("tij,if,jf->tf", x, u, v), w)
            nu = np.linalg.norm(u, axis=0)
            nv = np.linalg.norm(v, axis=0)
            scale_u = np.where(nu > 0, nu, 1.0)
            scale_v = np.where(nv > 0, nv, 1.0)
            u = u / scale_u
            v = v / scale_v
            w = w * (scale_u * scale_v)
            if not (
                np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.all(np.isfinite(w))
            ):
                if _retry:
                    return cpd_als(tensor, rank, iters=iters, seed=seed + 1, _retry=False)
                raise NumericalAbort("cpd: factors went non-finite twice")
            recon = np.einsum("if,jf,tf->tij", u, v, w)
            fits.append(0.5 * float(np.sum((x - recon) ** 2)))
    return (u, v, w), fits


def cpd_to_decomposition(u, v, w):
    """Symmetrize CP factors into latent graphs plus temporal signatures."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    latents = 0.5 * (
        np.einsum("if,jf->fij", u, v) + np.einsum("if,jf->fij", v, u)
    )
    return Decomposition(latents, w.copy())


def _dgd_est(adj, mask, signals, h, seed):
    d, _ = run_dgd(adj, mask, signals, h, seed)
    return reconstruct(d)


def _nsdgd_est(adj, mask, signals, h, seed):
    d, _ = nsdgd(adj, mask, signals, h, seed)
    return reconstruct(d)


def _unc_est(adj, mask, signals, h, seed):
    d, _ = unc_solve(adj, mask, h.n_latents, seed=seed)
    return reconstruct(d)


def _cpd_est(adj, mask, signals, h, seed):
    adj = np.asarray(adj, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    rank = cpd_rank_for(adj.shape[1], adj.shape[0], h.n_latents)
    (u, v, w), _ = cpd_als(mask * adj, rank, seed=seed)
    return reconstruct(cpd_to_decomposition(u, v, w))


METHODS = {
    "dgd": _dgd_est,
    "nsdgd": _nsdgd_est,
    "unc": _unc_est,
    "cpd": _cpd_est,
}
