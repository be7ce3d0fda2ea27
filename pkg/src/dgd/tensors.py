"""Dense containers and flattenings for dynamic-network tensors.

Conventions used throughout the package:

* a dynamic adjacency (or mask) tensor is a float64 array of shape (T, N, N),
  slice ``adj[t]`` being the N x N adjacency at time t
* a signal tensor is float64 of shape (T, N, Q), ``x[t]`` holding Q features
  per node at time t
* a stack of latent adjacency matrices is float64 of shape (R, N, N)
* vectorization is column-major (columns stacked), so flattened matrices can
  be compared entry-for-entry with the math

Everything is dense; the target problems have N up to a couple hundred.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def vec_mat(m):
    """Stack the columns of a matrix into one vector.

    vec([[1,3],[2,4]]) = [1,2,3,4].
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"vec_mat expects a matrix, got ndim={m.ndim}")
    return m.reshape(-1, order="F")


def unvec(v, n):
    """Inverse of :func:`vec_mat` for an n x n matrix."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != n * n:
        raise ValueError(f"unvec expects a length-{n * n} vector, got shape {v.shape}")
    return v.reshape(n, n, order="F")


@dataclass
class Flattenings:
    """Matricized views of an adjacency tensor and its mask.

    m0      : (N^2, T) binary, column t = vec(M_t)
    a_vec   : (N^2, T), column t = vec(A_t)
    f_diag  : (T,) int64, f_diag[t] = 1' m_t, the observation count at time t
    """

    m0: np.ndarray
    a_vec: np.ndarray
    f_diag: np.ndarray

    @property
    def n_nodes(self):
        return int(round(np.sqrt(self.m0.shape[0])))

    @property
    def n_steps(self):
        return self.m0.shape[1]


def _flatten_slices(tensor):
    # (T, N, N) -> (N^2, T) with column-major vec per slice:
    # entry [i + N*j, t] = tensor[t, i, j]
    t, n, n2 = tensor.shape
    return tensor.transpose(2, 1, 0).reshape(n * n, t)


def build_flattenings(adj, mask):
    """Build M_0, A_vec and the per-time observation counts.

    Parameters
    ----------
    adj : (T, N, N) adjacency tensor
    mask : (T, N, N) binary mask, 1 = entry observed

    Returns
    -------
    Flattenings
    """
    adj = np.asarray(adj, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if adj.ndim != 3 or adj.shape[1] != adj.shape[2]:
        raise ValueError(f"adjacency tensor must be (T, N, N), got {adj.shape}")
    if adj.shape != mask.shape:
        raise ValueError(f"adjacency {adj.shape} and mask {mask.shape} differ in shape")
    m0 = _flatten_slices(mask)
    a_vec = _flatten_slices(adj)
    f_diag = m0.sum(axis=0).astype(np.int64)
    return Flattenings(m0=m0, a_vec=a_vec, f_diag=f_diag)


def unstack_latents(a0, n_nodes):
    """Invert stack_latents: (N^2, R) columns of vec(A_r) back to (R, N, N)."""
    a0 = np.asarray(a0, dtype=np.float64)
    if a0.ndim != 2 or a0.shape[0] != n_nodes * n_nodes:
        raise ValueError(f"expected ({n_nodes * n_nodes}, R) stack, got {a0.shape}")
    return a0.reshape(n_nodes, n_nodes, -1).transpose(2, 1, 0).copy()


def stack_latents(latents):
    """Stack R latent adjacency matrices into the (N^2, R) matrix A_0.

    Column r is vec(A_r).
    """
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 3 or latents.shape[1] != latents.shape[2]:
        raise ValueError(f"latents must be (R, N, N), got {latents.shape}")
    r, n, _ = latents.shape
    return latents.transpose(2, 1, 0).reshape(n * n, r)


def is_symmetric(m, tol=0.0):
    return bool(np.all(np.abs(m - m.swapaxes(-1, -2)) <= tol))


def is_hollow(m, tol=0.0):
    d = np.diagonal(m, axis1=-2, axis2=-1)
    return bool(np.all(np.abs(d) <= tol))


def check_mask(mask):
    """Validate mask invariants: binary entries, symmetric slices."""
    mask = np.asarray(mask)
    if not np.all((mask == 0.0) | (mask == 1.0)):
        raise ValueError("mask entries must be 0 or 1")
    if not is_symmetric(mask):
        raise ValueError("mask slices must be symmetric")
    return True
