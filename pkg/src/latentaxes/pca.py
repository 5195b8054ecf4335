"""Full-basis PCA of the latent space with a leading/trailing coordinate split.

The model keeps every component: edits operate on the ``split`` leading
coordinates while the trailing ones ride along untouched, so reconstruction
is exact by construction rather than lossy.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateData, DimensionMismatch, NonFinite
from .npyio import read_matrix, write_matrix


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray        # (m,)
    basis: np.ndarray       # (m, m), columns sorted by descending eigenvalue
    eigenvalues: np.ndarray  # (m,), non-increasing
    split: int              # number of leading components kept editable
    n_fit: int = 0

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class PcaSplit:
    top: np.ndarray       # (split,) or (n, split)
    residual: np.ndarray  # (m - split,) or (n, m - split)


def fit_pca(data: np.ndarray, split: int) -> PcaModel:
    """Fit the full orthonormal basis via eigendecomposition of the covariance.

    Sign convention: in each column the entry of largest magnitude is made
    positive, so refits are bit-reproducible.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatch("data must be 2-D (samples x features)")
    n, m = data.shape
    if not (1 <= split <= m):
        raise DimensionMismatch(f"split {split} out of range for dim {m}")
    if n < 2:
        raise DegenerateData("PCA needs at least 2 samples")
    if not np.isfinite(data).all():
        raise NonFinite("data contains NaN or infinity")

    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]

    if eigvals[0] == 0.0:
        # all rows identical: identity basis fallback
        return PcaModel(mean=mean, basis=np.eye(m), eigenvalues=np.zeros(m),
                        split=split, n_fit=n)

    flip = np.sign(eigvecs[np.argmax(np.abs(eigvecs), axis=0), np.arange(m)])
    flip[flip == 0] = 1.0
    eigvecs = eigvecs * flip
    return PcaModel(mean=mean, basis=eigvecs, eigenvalues=eigvals,
                    split=split, n_fit=n)


def _check_vec(model: PcaModel, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != model.dim:
        raise DimensionMismatch(
            f"latent dim {w.shape[-1]} != model dim {model.dim}")
    return w


def project(model: PcaModel, w: np.ndarray) -> PcaSplit:
    """Coordinates of ``w - mean`` in the basis, split into leading/trailing.

    Accepts a single vector or a batch (rows are samples).
    """
    w = _check_vec(model, w)
    t = (w - model.mean) @ model.basis
    return PcaSplit(top=t[..., : model.split], residual=t[..., model.split:])


def reconstruct(model: PcaModel, split: PcaSplit) -> np.ndarray:
    top = np.asarray(split.top, dtype=np.float64)
    residual = np.asarray(split.residual, dtype=np.float64)
    if top.shape[-1] != model.split or residual.shape[-1] != model.dim - model.split:
        raise DimensionMismatch("split dims do not match model")
    t = np.concatenate([top, residual], axis=-1)
    return model.mean + t @ model.basis.T


def explained_variance_fraction(model: PcaModel, d: int) -> float:
    if not (1 <= d <= model.dim):
        raise DimensionMismatch(f"d {d} out of range for dim {model.dim}")
    total = model.eigenvalues.sum()
    if total == 0.0:
        return 1.0
    return float(model.eigenvalues[:d].sum() / total)


def truncate_residual(model: PcaModel, w: np.ndarray) -> np.ndarray:
    """Reconstruct with the trailing coordinates zeroed."""
    s = project(model, w)
    return reconstruct(model, PcaSplit(top=s.top, residual=np.zeros_like(s.residual)))


def save_pca(model: PcaModel, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(model.mean[None, :], directory / "pca_mean.npy")
    write_matrix(model.basis, directory / "pca_basis.npy")
    write_matrix(model.eigenvalues[None, :], directory / "pca_eigenvalues.npy")
    meta = {"d": model.split, "m": model.dim, "n_fit": model.n_fit}
    (directory / "pca_meta.json").write_text(json.dumps(meta, indent=2))


def load_pca(directory) -> PcaModel:
    directory = Path(directory)
    meta = json.loads((directory / "pca_meta.json").read_text())
    return PcaModel(
        mean=read_matrix(directory / "pca_mean.npy")[0],
        basis=read_matrix(directory / "pca_basis.npy"),
        eigenvalues=read_matrix(directory / "pca_eigenvalues.npy")[0],
        split=int(meta["d"]),
        n_fit=int(meta.get("n_fit", 0)),
    )
