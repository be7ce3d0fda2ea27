"""Decomposition model: value types, objective, projections, feasibility.

A dynamic network is modeled as a weighted combination of R latent graphs,

    A_t = sum_r C[t, r] * A_r,

with each A_r in S_A (symmetric, entrywise nonnegative, zero diagonal) and the
signature matrix C in S_C (entrywise nonnegative). The objective combines a
masked least-squares fit with sparsity, signal-smoothness, temporal-variation
and overlap priors.

Two fit conventions are supported. `exact_mask` (the default) scores only the
observed entries, fit = 1/2 ||M o (A - sum_r A_r x c_r)||_F^2. `count_weighted`
replaces the entrywise mask by the per-slice observation count 1'm_t, fit =
1/2 sum_t (1'm_t) ||(M o A)_t - sum_r C[t,r] A_r||_F^2, which is the loss the
closed-form subproblem gradients differentiate. Gradient code in admm_a/admm_c
follows the same pair of conventions so each gradient matches its objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

GRADIENT_MODES = ("exact_mask", "count_weighted")


class NumericalAbort(RuntimeError):
    """Raised when an iterate goes non-finite (diverging step, bad data)."""


@dataclass
class Decomposition:
    """R latent adjacency matrices plus their temporal signatures.

    latents    : (R, N, N), each slice in S_A
    signatures : (T, R) nonnegative, column r is the temporal profile of A_r
    """

    latents: np.ndarray
    signatures: np.ndarray

    def __post_init__(self):
        self.latents = np.asarray(self.latents, dtype=np.float64)
        self.signatures = np.asarray(self.signatures, dtype=np.float64)
        if self.latents.ndim != 3 or self.latents.shape[1] != self.latents.shape[2]:
            raise ValueError(f"latents must be (R, N, N), got {self.latents.shape}")
        if self.signatures.ndim != 2 or self.signatures.shape[1] != self.latents.shape[0]:
            raise ValueError(
                f"signatures must be (T, {self.latents.shape[0]}), got {self.signatures.shape}"
            )

    @property
    def n_latents(self):
        return self.latents.shape[0]

    @property
    def n_nodes(self):
        return self.latents.shape[1]

    @property
    def n_steps(self):
        return self.signatures.shape[0]

    def copy(self):
        return Decomposition(self.latents.copy(), self.signatures.copy())


@dataclass
class Hyperparams:
    """All solver knobs. Config files mirror these fields one-to-one.

    n_latents     : R, number of latent graphs
    gamma         : sparsity weight on sum 1'A_r 1
    delta         : signal smoothness weight
    beta          : overlap penalty between distinct latents
    mu            : temporal-variation weight on ||DC||_F^2
    rho           : ridge on C (strong convexity of the C block)
    zeta          : minimum reconstructed degree per node and time
    eta           : optional ridge on each A_r (0 disables)
    lambda_a/c    : ADMM penalty parameters of the two subproblems
    step_a/c      : gradient step sizes; None selects an inverse-curvature step
    inner_iters   : K, ADMM iterations per subproblem
    outer_iters   : I, alternating passes over all blocks
    gradient_mode : 'exact_mask' or 'count_weighted'
    tol_outer     : relative objective change declaring outer convergence
    penalty_as_step : use lambda_a/lambda_c directly as step sizes
    admm_early_exit : stop inner iterations once the primal residual is tiny
    """

    n_latents: int = 2
    gamma: float = 0.01
    delta: float = 0.001
    beta: float = 0.05
    mu: float = 0.05
    rho: float = 0.01
    zeta: float = 0.05
    eta: float = 0.0
    lambda_a: float = 1.0
    lambda_c: float = 1.0
    step_a: float | None = None
    step_c: float | None = None
    inner_iters: int = 20
    outer_iters: int = 50
    gradient_mode: str = "exact_mask"
    tol_outer: float = 1e-5
    penalty_as_step: bool = False
    admm_early_exit: bool = False

    def validate(self):
        nonneg = ("gamma", "delta", "beta", "mu", "rho", "eta", "tol_outer")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        positive = ("zeta", "lambda_a", "lambda_c")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("step_a", "step_c"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("n_latents", "inner_iters", "outer_iters"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ValueError(f"{name} must be an integer, got {v!r}")
        if self.n_latents < 1:
            raise ValueError(f"n_latents must be >= 1, got {self.n_latents}")
        if self.inner_iters < 1:
            raise ValueError(f"inner_iters must be >= 1, got {self.inner_iters}")
        if self.outer_iters < 0:
            raise ValueError(f"outer_iters must be >= 0, got {self.outer_iters}")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(
                f"gradient_mode must be one of {GRADIENT_MODES}, got {self.gradient_mode!r}"
            )
        return self

    @classmethod
    def from_dict(cls, cfg):
        """Build from a config mapping; unknown keys are errors."""
        known = {f.name for f in fields(cls)}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown config key: {sorted(unknown)[0]}")
        h = cls(**cfg)
        # json numbers may arrive as ints where floats are meant
        for f in fields(cls):
            v = getattr(h, f.name)
            if isinstance(v, bool):
                continue
            if f.name not in ("n_latents", "inner_iters", "outer_iters", "gradient_mode") and isinstance(v, int):
                setattr(h, f.name, float(v))
        return h.validate()

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass
class ObjectiveBreakdown:
    """Objective value split by term, hyperparameter weights applied."""

    fit: float
    sparsity: float
    smoothness: float
    temporal: float
    overlap: float
    ridge_c: float
    ridge_a: float = 0.0
    total: float = field(default=0.0)

    @classmethod
    def build(cls, **terms):
        b = cls(**terms)
        b.total = (
            b.fit + b.sparsity + b.smoothness + b.temporal + b.overlap + b.ridge_c + b.ridge_a
        )
        return b


def reconstruct(d, t=None):
    """Reconstructed tensor sum_r C[t,r] A_r, or a single slice when t is given."""
    if t is None:
        return np.einsum("tr,rij->tij", d.signatures, d.latents)
    n_steps = d.n_steps
    if not -n_steps <= t < n_steps:
        raise IndexError(f"time index {t} out of range for T={n_steps}")
    return np.tensordot(d.signatures[t], d.latents, axes=1)


def objective(d, adj, mask, cache, h):
    """Evaluate the full objective, split by term.

    The fit sees only observed data: adjacency entries are multiplied by the
    mask before use, in both gradient modes.
    """
    adj = np.asarray(adj, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if adj.shape != mask.shape:
        raise ValueError(f"adjacency {adj.shape} and mask {mask.shape} differ in shape")
    if adj.shape[1] != d.n_nodes or adj.shape[0] != d.n_steps:
        raise ValueError(
            f"decomposition ({d.n_steps},{d.n_nodes},{d.n_nodes}) does not match data {adj.shape}"
        )
    recon = reconstruct(d)
    observed = mask * adj
    if h.gradient_mode == "exact_mask":
        fit = 0.5 * float(np.sum((mask * (adj - recon)) ** 2))
    elif h.gradient_mode == "count_weighted":
        w = mask.reshape(mask.shape[0], -1).sum(axis=1)
        fit = 0.5 * float(w @ np.sum((observed - recon) ** 2, axis=(1, 2)))
    else:
        raise ValueError(f"unknown gradient_mode {h.gradient_mode!r}")

    from . import priors  # local import to keep module load order simple

    sparsity = h.gamma * float(d.latents.sum())
    smoothness = h.delta * priors.smoothness_g(d, cache) if h.delta != 0.0 else 0.0
    temporal = h.mu * priors.temporal_pi(d.signatures)
    overlap = h.beta * priors.overlap_h(d.latents)
    ridge_c = 0.5 * h.rho * float(np.sum(d.signatures**2))
    ridge_a = 0.5 * h.eta * float(np.sum(d.latents**2)) if h.eta else 0.0
    return ObjectiveBreakdown.build(
        fit=fit,
        sparsity=sparsity,
        smoothness=smoothness,
        temporal=temporal,
        overlap=overlap,
        ridge_c=ridge_c,
        ridge_a=ridge_a,
    )


def project_sa(x):
    """Euclidean projection onto S_A: symmetrize, clip negatives, zero the diagonal."""
    x = np.asarray(x, dtype=np.float64)
    s = np.maximum(0.5 * (x + x.T), 0.0)
    np.fill_diagonal(s, 0.0)
    return s


def project_sc(x):
    """Euclidean projection onto the nonnegative orthant."""
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def in_sa(m, tol=0.0):
    return (
        bool(np.all(np.abs(m - m.T) <= tol))
        and bool(np.all(m >= -tol))
        and bool(np.all(np.abs(np.diag(m)) <= tol))
    )


def degree_margin(d, zeta):
    """Per (t, i) slack of the minimum-degree constraint.

    Entry (t, i) is the reconstructed degree of node i at time t minus zeta;
    the constraint holds iff all entries are nonnegative.
    """
    return reconstruct(d).sum(axis=2) - zeta
