"""Signal-smoothness structures and the standalone prior terms.

The smoothness prior couples node signals to the recovered topology through
the pairwise squared-distance matrices Z_t: an edge (i, j) is cheap when the
signals at i and j are close. The temporal prior penalizes successive
differences of the signature matrix C.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SmoothCache:
    """Precomputed smoothness structures for one signal tensor.

    z_slices : (T, N, N), Z_t[i, j] = ||X_t[i, :] - X_t[j, :]||_2^2
    z_bar    : (T, N^2), row t = vec(Z_t')'
    """

    z_slices: np.ndarray
    z_bar: np.ndarray

    @property
    def n_steps(self):
        return self.z_slices.shape[0]

    @property
    def n_nodes(self):
        return self.z_slices.shape[1]


def build_cache(x):
    """Build the pairwise squared-distance slices from a (T, N, Q) signal tensor."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"signal tensor must be (T, N, Q), got {x.shape}")
    sq = np.einsum("tnq,tnq->tn", x, x)
    gram = x @ x.transpose(0, 2, 1)
    z = sq[:, :, None] + sq[:, None, :] - 2.0 * gram
    # exact invariants: symmetric, nonnegative, zero diagonal
    z = np.maximum(0.5 * (z + z.transpose(0, 2, 1)), 0.0)
    t, n, _ = z.shape
    z[:, np.arange(n), np.arange(n)] = 0.0
    # vec(Z_t') equals the row-major raveling of Z_t
    z_bar = z.reshape(t, n * n).copy()
    return SmoothCache(z_slices=z, z_bar=z_bar)


def zero_cache(n_steps, n_nodes):
    """All-zero cache, for runs that do not use signals."""
    z = np.zeros((n_steps, n_nodes, n_nodes))
    return SmoothCache(z_slices=z, z_bar=np.zeros((n_steps, n_nodes * n_nodes)))


def diff_operator(n_steps):
    """Forward-difference matrix D of shape (T-1, T): (DC)[t] = C[t+1] - C[t]."""
    d = np.zeros((n_steps - 1, n_steps))
    idx = np.arange(n_steps - 1)
    d[idx, idx] = -1.0
    d[idx, idx + 1] = 1.0
    return d


def xi_matrix(cache, c_r):
    """Xi_r = 1/2 sum_t c_r[t] Z_t, the smoothness weight matrix for one latent."""
    c_r = np.asarray(c_r, dtype=np.float64)
    if c_r.shape != (cache.n_steps,):
        raise ValueError(f"c_r must have length {cache.n_steps}, got {c_r.shape}")
    return 0.5 * np.tensordot(c_r, cache.z_slices, axes=1)


def smoothness_g(d, cache):
    """Unweighted smoothness value sum_t sum_r C[t,r] tr(A_r Z_t)/2."""
    # tr(A_r Z_t) = <A_r, Z_t'> = <A_r, Z_t> for symmetric Z_t
    traces = np.einsum("rij,tij->tr", d.latents, cache.z_slices)
    return 0.5 * float(np.sum(d.signatures * traces))


def overlap_h(latents):
    """Sum of tr(A_r' A_rbar) over ordered pairs r != rbar."""
    latents = np.asarray(latents, dtype=np.float64)
    gram = np.einsum("rij,sij->rs", latents, latents)
    return float(gram.sum() - np.trace(gram))


def temporal_pi(c):
    """||D C||_F^2, the squared temporal variation of the signatures.

    Returns 0 for T < 2 (no differences to take).
    """
    c = np.asarray(c, dtype=np.float64)
    if c.shape[0] < 2:
        return 0.0
    return float(np.sum(np.diff(c, axis=0) ** 2))
