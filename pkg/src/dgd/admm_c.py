"""ADMM subproblem for the temporal signature matrix C.

With the latents fixed, C is updated by K iterations of projected-gradient
ADMM on

    L(C, Q, Lam) = f(C) + tr(Lam (C Ups' - zeta 11' - Q))
                   + lambda_c/2 ||C Ups' - zeta 11' - Q||_F^2,

where Ups stacks the latent degree vectors A_r 1 as columns, so row t of
C Ups' is the reconstructed degree vector at step t, and Q >= 0 splits the
minimum-degree constraint. f adds the mode-dependent fit, the signal
smoothness coupling, the squared forward-difference penalty and a ridge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NumericalAbort, project_sc
from .priors import diff_operator
from .tensors import stack_latents


@dataclass
class CWorkspace:
    """Per-solve state for the signature update.

    upsilon : (N, R), column r = A_r 1
    q       : (T, N) auxiliary split of the degree constraint
    lam_c   : (N, T) dual variable
    """

    upsilon: np.ndarray
    q: np.ndarray
    lam_c: np.ndarray


def build_upsilon(latents):
    """Stack latent degree vectors: (R, N, N) -> (N, R) with column r = A_r 1."""
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 3 or latents.shape[1] != latents.shape[2]:
        raise ValueError(f"expected (R, N, N) latents, got {latents.shape}")
    return latents.sum(axis=2).T


def build_c_workspace(latents, n_steps, rng=None):
    """Assemble Upsilon; draw Q/Lam as N(0,1) when an rng is given."""
    ups = build_upsilon(latents)
    n = ups.shape[0]
    if rng is not None:
        q = rng.standard_normal((n_steps, n))
        lam = rng.standard_normal((n, n_steps))
    else:
        q = np.zeros((n_steps, n))
        lam = np.zeros((n, n_steps))
    return CWorkspace(upsilon=ups, q=q, lam_c=lam)


def _fit_raw(c, a0, flat):
    # residual A0 C' - a_vec, shape (N^2, T)
    return a0 @ c.T - flat.a_vec


def grad_c_lagrangian(c, ws, a0, flat, cache, h, zbar_a0=None, dtd=None):
    """Gradient of the augmented Lagrangian at c, latents fixed.

    zbar_a0 (T, R) and dtd (T, T) may carry precomputed products of the
    smoothness and difference operators; both are rebuilt when omitted.
    """
    c = np.asarray(c, dtype=np.float64)
    t = c.shape[0]
    raw = _fit_raw(c, a0, flat)
    if h.gradient_mode == "exact_mask":
        g = (flat.m0 * raw).T @ a0
    elif h.gradient_mode == "count_weighted":
        w = flat.f_diag.astype(np.float64)
        g = w[:, None] * (raw.T @ a0)
    else:
        raise ValueError(f"unknown gradient_mode {h.gradient_mode!r}")
    if h.delta != 0.0:
        if zbar_a0 is None:
            zbar_a0 = cache.z_bar @ a0
        g = g + h.delta * zbar_a0
    if h.mu != 0.0:
        if dtd is None:
            dop = diff_operator(t)
            dtd = dop.T @ dop
        g = g + h.mu * (dtd @ c)
    if h.rho != 0.0:
        g = g + h.rho * c
    resid = c @ ws.upsilon.T - h.zeta - ws.q
    g = g + ws.lam_c.T @ ws.upsilon + h.lambda_c * (resid @ ws.upsilon)
    return g


def c_lagrangian_value(c, ws, a0, flat, cache, h, zbar_a0=None, dtd=None):
    """Value of the augmented Lagrangian that grad_c_lagrangian differentiates."""
    c = np.asarray(c, dtype=np.float64)
    t = c.shape[0]
    raw = _fit_raw(c, a0, flat)
    if h.gradient_mode == "exact_mask":
        val = 0.5 * float(np.sum((flat.m0 * raw) ** 2))
    elif h.gradient_mode == "count_weighted":
        w = flat.f_diag.astype(np.float64)
        val = 0.5 * float(np.sum(raw * raw, axis=0) @ w)
    else:
        raise ValueError(f"unknown gradient_mode {h.gradient_mode!r}")
    if h.delta != 0.0:
        if zbar_a0 is None:
            zbar_a0 = cache.z_bar @ a0
        val += h.delta * float(np.sum(c * zbar_a0))
    if h.mu != 0.0:
        if dtd is None:
            dop = diff_operator(t)
            dtd = dop.T @ dop
        val += 0.5 * h.mu * float(np.sum(c * (dtd @ c)))
    if h.rho != 0.0:
        val += 0.5 * h.rho * float(np.sum(c**2))
    resid = c @ ws.upsilon.T - h.zeta - ws.q
    val += float(np.sum(ws.lam_c * resid.T))
    val += 0.5 * h.lambda_c * float(np.sum(resid**2))
    return val


def default_step_c(ws, a0, flat, h, dtd):
    """Inverse curvature bound for the C gradient step.

    count_weighted mode scales the fit Gram by the largest per-slice
    observation count; exact_mask is bounded by the unweighted Gram.
    """
    if h.penalty_as_step:
        return h.lambda_c
    if h.step_c is not None:
        return h.step_c
    gram_norm = float(np.linalg.norm(a0.T @ a0, 2))
    if h.gradient_mode == "count_weighted":
        wmax = float(flat.f_diag.max()) if flat.f_diag.size else 0.0
        curv = gram_norm * wmax
    else:
        curv = gram_norm
    lip = curv + h.rho
    if h.mu != 0.0:
        lip += h.mu * float(np.linalg.norm(dtd, 2))
    ups_norm = float(np.linalg.norm(ws.upsilon, 2))
    lip += h.lambda_c * ups_norm**2
    return 1.0 / max(lip, 1e-8)


def solve_c_subproblem(d, flat, cache, h, rng):
    """Run K ADMM iterations on the signatures; returns (new C, ws, residuals).

    Update order per iteration: gradient step + projection onto the
    nonnegative orthant, clipped closed-form Q update, dual ascent on Lam.
    Residuals record ||C Ups' - zeta 11' - Q||_F after each iteration.
    """
    if h.inner_iters < 1:
        raise ValueError(f"inner_iters must be >= 1, got {h.inner_iters}")
    t = d.n_steps
    ws = build_c_workspace(d.latents, t, rng=rng)
    a0 = stack_latents(d.latents)
    zbar_a0 = cache.z_bar @ a0 if h.delta != 0.0 else None
    dop = diff_operator(t)
    dtd = dop.T @ dop
    step = default_step_c(ws, a0, flat, h, dtd)
    c = d.signatures.copy()
    residuals = []
    for _ in range(h.inner_iters):
        g = grad_c_lagrangian(c, ws, a0, flat, cache, h, zbar_a0=zbar_a0, dtd=dtd)
        c = project_sc(c - step * g)
        if not np.all(np.isfinite(c)):
            raise NumericalAbort(
                f"signatures: iterate went non-finite (step {step:.3e} too large)"
            )
        cu = c @ ws.upsilon.T
        ws.q = np.maximum(ws.lam_c.T / h.lambda_c + cu - h.zeta, 0.0)
        resid = cu - h.zeta - ws.q
        ws.lam_c = ws.lam_c + h.lambda_c * resid.T
        residuals.append(float(np.linalg.norm(resid)))
        if h.admm_early_exit and residuals[-1] < 1e-6 * max(
            h.zeta * np.sqrt(c.shape[0] * ws.q.shape[1]), 1.0
        ):
            break
    return c, ws, residuals
