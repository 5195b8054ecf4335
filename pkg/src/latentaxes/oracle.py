"""Synthetic latent world with planted attribute directions.

Stands in for the generator + attribute classifier pair: attributes are
sigmoids of projections onto planted orthonormal directions (optionally
mixed to induce correlations), and a designated orthogonal subspace plays
the role of identity features. Because the planted structure is known
exactly, the whole editing pipeline can be verified closed-loop.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch
from .npyio import read_matrix, write_matrix


@dataclass(frozen=True)
class SyntheticWorld:
    attr_directions: np.ndarray   # (K, m), orthonormal rows
    mix: np.ndarray               # (K, K), unit-diagonal lower-triangular
    identity_basis: np.ndarray    # (m, q), orthonormal, orthogonal to attr rows
    gain: float
    mapping_kind: str             # "linear" or "tanh-mixed"
    mixing_matrix: np.ndarray     # (m, m), used by tanh-mixed sampling
    seed: int

    @property
    def dim(self) -> int:
        return self.attr_directions.shape[1]

    @property
    def n_attributes(self) -> int:
        return self.attr_directions.shape[0]


def make_world(m: int, n_attributes: int, q: int, correlated: bool = False,
               seed: int = 0, gain: float = 2.0,
               mapping_kind: str = "linear") -> SyntheticWorld:
    """Build a seeded world. Attribute directions and the identity basis come
    from one QR factorization, so they are exactly mutually orthogonal."""
    k = n_attributes
    if m <= k + q:
        raise DimensionMismatch(f"need m > K + q, got m={m}, K={k}, q={q}")
    rng = np.random.default_rng(seed)
    full, _ = np.linalg.qr(rng.normal(size=(m, k + q)))
    a = full[:, :k].T
    identity_basis = full[:, k : k + q]
    mix = np.eye(k)
    if correlated:
        # adjacent attributes share signal through the first sub-diagonal
        mix[np.arange(1, k), np.arange(k - 1)] = 0.5
    mixing = rng.normal(size=(m, m)) / np.sqrt(m)
    return SyntheticWorld(attr_directions=a, mix=mix,
                          identity_basis=identity_basis, gain=gain,
                          mapping_kind=mapping_kind, mixing_matrix=mixing,
                          seed=seed)


def sample_w(world: SyntheticWorld, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, world.dim))
    if world.mapping_kind == "tanh-mixed":
        return z + 0.1 * np.tanh(z @ world.mixing_matrix.T)
    return z


def classify(world: SyntheticWorld, w: np.ndarray) -> np.ndarray:
    """Raw attribute outputs in (0, 1): sigmoid(gain * mix * A * w)."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != world.dim:
        raise DimensionMismatch(f"latent dim {w.shape[-1]} != {world.dim}")
    logits = world.gain * (w @ world.attr_directions.T) @ world.mix.T
    return 1.0 / (1.0 + np.exp(-logits))


def embed_identity(world: SyntheticWorld, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != world.dim:
        raise DimensionMismatch(f"latent dim {w.shape[-1]} != {world.dim}")
    return w @ world.identity_basis


def build_dataset(world: SyntheticWorld, n: int, seed: int):
    """Paired (latents, raw attributes) sampled from the world."""
    latents = sample_w(world, n, seed)
    return latents, classify(world, latents)


def save_world(world: SyntheticWorld, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(world.attr_directions, directory / "world_attr_directions.npy")
    write_matrix(world.mix, directory / "world_mix.npy")
    write_matrix(world.identity_basis, directory / "world_identity_basis.npy")
    write_matrix(world.mixing_matrix, directory / "world_mixing.npy")
    meta = {"gain": world.gain, "mapping_kind": world.mapping_kind,
            "seed": world.seed}
    (directory / "world_meta.json").write_text(json.dumps(meta, indent=2))


def load_world(directory) -> SyntheticWorld:
    directory = Path(directory)
    meta = json.loads((directory / "world_meta.json").read_text())
    return SyntheticWorld(
        attr_directions=read_matrix(directory / "world_attr_directions.npy"),
        mix=read_matrix(directory / "world_mix.npy"),
        identity_basis=read_matrix(directory / "world_identity_basis.npy"),
        mixing_matrix=read_matrix(directory / "world_mixing.npy"),
        gain=float(meta["gain"]),
        mapping_kind=meta["mapping_kind"],
        seed=int(meta["seed"]),
    )
