"""Synthetic switching-community dynamic network generator.

Two planted stochastic block model graphs over the same node set, one with a
coarse community split and one with a finer nested split, are blended by a
pair of complementary linear ramps: the blend drifts from the coarse graph at
the first step to the fine graph at the last. Smooth node signals are drawn
per step by low-pass filtering white noise through the blended Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .model import Decomposition


@dataclass
class SwDynSpec:
    """Generator settings.

    Defaults give 40 nodes, 50 steps, 1000 signal channels and an average of
    roughly 130 edges per blended slice. Community counts must both divide
    n_nodes (blocks are equal-sized and contiguous).
    """

    n_nodes: int = 40
    n_steps: int = 50
    n_signals: int = 1000
    communities_start: int = 2
    communities_end: int = 4
    p_in: float = 0.24
    p_out: float = 0.01
    alpha: float = 10.0
    noise_sigma: float = 0.0
    clip_negative: bool = False
    seed: int = 0

    def validate(self):
        if self.n_nodes < 2:
            raise ValueError(f"n_nodes must be >= 2, got {self.n_nodes}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.n_signals < 1:
            raise ValueError(f"n_signals must be >= 1, got {self.n_signals}")
        for name in ("communities_start", "communities_end"):
            k = getattr(self, name)
            if k < 1:
                raise ValueError(f"{name} must be >= 1, got {k}")
            if self.n_nodes % k != 0:
                raise ValueError(
                    f"n_nodes={self.n_nodes} is not divisible by {name}={k}"
                )
        for name in ("p_in", "p_out"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not isinstance(self.clip_negative, bool):
            raise ValueError(f"clip_negative must be a boolean, got {self.clip_negative!r}")

    @classmethod
    def from_dict(cls, cfg):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ValueError(f"unknown generator setting {unknown[0]!r}")
        spec = cls(**cfg)
        spec.validate()
        return spec

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def sbm_graph(block_sizes, p_in, p_out, seed):
    """Sample a symmetric hollow 0/1 stochastic block model adjacency.

    block_sizes lists contiguous community sizes; within-community pairs
    connect with probability p_in, others with p_out.
    """
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, p_in, p_out)
    n = labels.size
    upper = np.triu(rng.random((n, n)) < prob, k=1)
    return (upper | upper.T).astype(np.float64)


def smooth_signals(adjacency, n_signals, alpha, seed):
    """Low-pass filter white noise through one graph's Laplacian.

    Returns (N, Q) with X = (I + alpha L)^{-1} W, W ~ N(0, 1) and
    L = diag(A 1) - A. The system is positive definite for any alpha >= 0.
    """
    adjacency = np.asarray(adjacency, dtype=np.float64)
    n = adjacency.shape[0]
    rng = np.random.default_rng(seed)
    white = rng.standard_normal((n, n_signals))
    lap = np.diag(adjacency.sum(axis=1)) - adjacency
    return np.linalg.solve(np.eye(n) + alpha * lap, white)


def sample_mask(n_nodes, n_steps, observed_frac, seed):
    """Observe each unordered node pair independently per step.

    The mask is symmetric with an all-ones diagonal (the diagonal carries no
    edges either way). observed_frac = 1 gives the full mask.
    """
    if not 0.0 <= observed_frac <= 1.0:
        raise ValueError(f"observed_frac must lie in [0, 1], got {observed_frac}")
    rng = np.random.default_rng(seed)
    draws = rng.random((n_steps, n_nodes, n_nodes))
    upper = np.triu(draws < observed_frac, k=1)
    mask = (upper | upper.transpose(0, 2, 1)).astype(np.float64)
    idx = np.arange(n_nodes)
    mask[:, idx, idx] = 1.0
    return mask


def swdyn(spec):
    """Generate one dataset: (adjacency, signals, truth).

    adjacency : (T, N, N) blended slices, plus symmetric hollow Gaussian
        noise when spec.noise_sigma > 0.
    signals : (T, N, Q) smooth node signals filtered through the clean slices.
    truth : Decomposition holding the two planted graphs and their ramps.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, t = spec.n_nodes, spec.n_steps
    ramp = np.linspace(1.0, 0.0, t)
    signatures = np.stack([ramp, 1.0 - ramp], axis=1)
    k1, k2 = spec.communities_start, spec.communities_end
    latents = np.stack(
        [
            sbm_graph([n // k1] * k1, spec.p_in, spec.p_out, rng),
            sbm_graph([n // k2] * k2, spec.p_in, spec.p_out, rng),
        ]
    )
    clean = np.einsum("tr,rij->tij", signatures, latents)
    signals = np.stack(
        [smooth_signals(clean[k], spec.n_signals, spec.alpha, rng) for k in range(t)]
    )
    if spec.noise_sigma > 0:
        noise = spec.noise_sigma * rng.standard_normal((t, n, n))
        noise = 0.5 * (noise + noise.transpose(0, 2, 1))
        idx = np.arange(n)
        noise[:, idx, idx] = 0.0
        adj = clean + noise
        if spec.clip_negative:
            adj = np.maximum(adj, 0.0)
    else:
        adj = clean.copy()
    return adj, signals, Decomposition(latents, signatures)
