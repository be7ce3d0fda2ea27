"""Alternating driver for the latent graph decomposition.

Each outer iteration runs the K-step ADMM solve for every latent adjacency
in turn (Gauss-Seidel, each solve sees the freshest blocks) and then the
signature solve. Auxiliary and dual variables are drawn fresh from N(0,1)
at the start of every subproblem solve, all from the single driver rng
stream, so a run is a pure function of (data, hyperparams, seed).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from .admm_a import solve_a_subproblem
from .admm_c import solve_c_subproblem
from .model import Decomposition, NumericalAbort, objective, project_sa
from .priors import build_cache, zero_cache
from .tensors import build_flattenings, check_mask


@dataclass
class RunHistory:
    """Per-outer-iteration trace of a solver run.

    breakdowns holds one ObjectiveBreakdown per outer iteration;
    a_residuals[i][r] and c_residuals[i] are the final ADMM primal residuals
    of iteration i; status is one of running/converged/max_iters/aborted.
    """

    breakdowns: list = field(default_factory=list)
    a_residuals: list = field(default_factory=list)
    c_residuals: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    status: str = "running"
    zero_observation_steps: list = field(default_factory=list)

    @property
    def totals(self):
        return [b.total for b in self.breakdowns]


def initialize(seed, n_nodes, n_steps, n_latents):
    """Draw a feasible starting point: uniform latents pushed into S_A, then
    uniform signatures. Accepts an int seed or a Generator."""
    rng = np.random.default_rng(seed)
    latents = rng.random((n_latents, n_nodes, n_nodes))
    for k in range(n_latents):
        latents[k] = project_sa(latents[k])
    signatures = rng.random((n_steps, n_latents))
    return Decomposition(latents, signatures)


def positive_fit_curvature(signatures, flat):
    """Per-latent check that the fit term curves upward: sum_t C[t,r]^2 1'm_t > 0.

    A False entry means that latent only ever multiplies unobserved slices,
    so the count-weighted fit cannot pin it down.
    """
    c = np.asarray(signatures, dtype=np.float64)
    w = flat.f_diag.astype(np.float64)
    return (c**2).T @ w > 0.0


def run_dgd(adj, mask, signals, h, seed):
    """Recover (latents, signatures) from a partially observed slice stack.

    Parameters
    ----------
    adj : (T, N, N) observed adjacency values; entries where mask is 0 are
        ignored (the driver works on mask * adj throughout).
    mask : (T, N, N) binary symmetric observation mask.
    signals : (T, N, Q) node signals, or None when h.delta == 0.
    h : Hyperparams.
    seed : int seed or np.random.Generator.

    Returns
    -------
    (Decomposition, RunHistory). Raises NumericalAbort (with .history set to
    the partial trace) if an iterate diverges or nothing is observed.
    """
    h.validate()
    adj = np.asarray(adj, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if adj.ndim != 3 or adj.shape[1] != adj.shape[2]:
        raise ValueError(f"expected (T, N, N) adjacency, got {adj.shape}")
    if mask.shape != adj.shape:
        raise ValueError(f"mask shape {mask.shape} != adjacency shape {adj.shape}")
    check_mask(mask)
    n_steps, n = adj.shape[0], adj.shape[1]

    observed = mask * adj
    flat = build_flattenings(observed, mask)
    history = RunHistory()
    zero_steps = np.flatnonzero(flat.f_diag == 0)
    history.zero_observation_steps = [int(s) for s in zero_steps]
    if zero_steps.size == n_steps:
        err = NumericalAbort("no observed entries in any time step")
        history.status = "aborted"
        err.history = history
        raise err
    if zero_steps.size:
        print(
            f"warning: {zero_steps.size} time steps carry no observations: "
            f"{history.zero_observation_steps}",
            file=sys.stderr,
        )

    if h.delta == 0.0:
        cache = zero_cache(n_steps, n)
    else:
        if signals is None:
            raise ValueError("signals are required when delta > 0")
        signals = np.asarray(signals, dtype=np.float64)
        if signals.ndim != 3 or signals.shape[0] != n_steps or signals.shape[1] != n:
            raise ValueError(f"expected ({n_steps}, {n}, Q) signals, got {signals.shape}")
        cache = build_cache(signals)

    rng = np.random.default_rng(seed)
    d = initialize(rng, n, n_steps, h.n_latents)
    prev_total = None
    streak = 0
    for it in range(h.outer_iters):
        t0 = perf_counter()
        try:
            a_res = []
            for r in range(h.n_latents):
                a_new, _, res = solve_a_subproblem(d, r, flat, cache, h, rng)
                d.latents[r] = a_new
                a_res.append(res[-1])
            c_new, _, c_res = solve_c_subproblem(d, flat, cache, h, rng)
            d.signatures = c_new
        except NumericalAbort as err:
            history.status = "aborted"
            err.history = history
            raise
        bd = objective(d, adj, mask, cache, h)
        history.breakdowns.append(bd)
        history.a_residuals.append(a_res)
        history.c_residuals.append(c_res[-1])
        history.seconds.append(perf_counter() - t0)
        if prev_total is None:
            rel = float("inf")
        else:
            rel = abs(bd.total - prev_total) / max(abs(prev_total), 1e-12)
        print(
            f"iter={it} total={bd.total:.6e} fit={bd.fit:.6e} rel_change={rel:.3e}",
            file=sys.stderr,
        )
        streak = streak + 1 if rel < h.tol_outer else 0
        prev_total = bd.total
        if streak >= 3:
            history.status = "converged"
            break
    if history.status == "running":
        history.status = "max_iters"
    return d, history
