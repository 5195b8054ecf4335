"""Quantitative editing protocol.

For every attribute: sample latents, keep the negatives, push each one
positive with an amplitude search, then score the resulting pairs with the
attribute-variation matrix, the well-edited rate, identity cosine, and the
Fréchet distance between pre- and post-edit sets. The classifier and the
identity embedder are pluggable callables, so the synthetic oracle and any
real network share the same code path.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import LatentAxesError, NonPSD, TooFewSamples


class AllZeroEmbeddings(LatentAxesError):
    """Every embedding pair had a zero-norm member."""


@dataclass(frozen=True)
class EditPairs:
    """Successful (negative, edited-positive) latent pairs for one attribute."""

    negatives: np.ndarray   # (n_success, m)
    positives: np.ndarray   # (n_success, m)
    n_negatives: int        # negatives that entered the search
    n_success: int

    @property
    def success_rate(self) -> float:
        if self.n_negatives == 0:
            return float("nan")
        return self.n_success / self.n_negatives


def build_edit_pairs(method, classify_fn, sample_fn, k: int, n: int = 1024,
                     threshold: float = 0.9, seed: int = 0) -> EditPairs:
    """Run the per-attribute protocol for any method exposing
    search_positive(latents, k, classify_fn, threshold)."""
    latents = np.asarray(sample_fn(n, seed), dtype=np.float64)
    raw = np.asarray(classify_fn(latents), dtype=np.float64)
    negatives = latents[raw[:, k] < 0.5]
    if negatives.shape[0] == 0:
        warnings.warn(f"attribute {k}: no negative samples, rate undefined")
        empty = np.empty((0, latents.shape[1]))
        return EditPairs(negatives=empty, positives=empty,
                         n_negatives=0, n_success=0)
    edited, success, _ = method.search_positive(
        negatives, k, classify_fn, threshold)
    return EditPairs(negatives=negatives[success], positives=edited[success],
                     n_negatives=negatives.shape[0],
                     n_success=int(success.sum()))


def variation_matrix(pairs_per_attr, classify_fn) -> np.ndarray:
    """Mat[k, l]: mean raw change of attribute l under an edit of attribute k.
    Rows with no successful pairs are NaN."""
    k_total = len(pairs_per_attr)
    mat = np.full((k_total, k_total), np.nan)
    for k, pairs in enumerate(pairs_per_attr):
        if pairs.n_success == 0:
            continue
        before = np.asarray(classify_fn(pairs.negatives), dtype=np.float64)
        after = np.asarray(classify_fn(pairs.positives), dtype=np.float64)
        mat[k] = (after - before).mean(axis=0)
    return mat


def off_diagonal_sum(mat: np.ndarray, excluded_rows=()) -> float:
    mat = np.asarray(mat, dtype=np.float64)
    total = 0.0
    for k in range(mat.shape[0]):
        if k in excluded_rows:
            continue
        for l in range(mat.shape[1]):
            if l != k:
                total += abs(mat[k, l])
    return total


def identity_similarity(pairs: EditPairs, embed_fn) -> float:
    """Mean cosine between identity embeddings before and after the edit.
    Pairs with a zero-norm embedding are skipped (counted, not scored)."""
    before = np.atleast_2d(np.asarray(embed_fn(pairs.negatives), dtype=np.float64))
    after = np.atleast_2d(np.asarray(embed_fn(pairs.positives), dtype=np.float64))
    nb = np.linalg.norm(before, axis=1)
    na = np.linalg.norm(after, axis=1)
    keep = (nb > 0) & (na > 0)
    if not keep.any():
        raise AllZeroEmbeddings("no pair with nonzero embeddings")
    cos = np.sum(before[keep] * after[keep], axis=1) / (nb[keep] * na[keep])
    return float(cos.mean())


def frechet_distance(set_a: np.ndarray, set_b: np.ndarray) -> float:
    """Gaussian-moment distance between two sample sets:
    ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}).

    The matrix square root goes through the symmetric product
    S_a^{1/2} S_b S_a^{1/2}; tiny negative eigenvalues are clamped.
    """
    a = np.asarray(set_a, dtype=np.float64)
    b = np.asarray(set_b, dtype=np.float64)
    dim = a.shape[1]
    if a.shape[0] <= dim or b.shape[0] <= dim:
        raise TooFewSamples("need more samples than dimensions")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.cov(a, rowvar=False).reshape(dim, dim)
    cov_b = np.cov(b, rowvar=False).reshape(dim, dim)

    vals_a, vecs_a = np.linalg.eigh(cov_a)
    _check_psd(vals_a)
    sqrt_a = vecs_a @ (np.sqrt(np.maximum(vals_a, 0.0))[:, None] * vecs_a.T)
    inner = sqrt_a @ cov_b @ sqrt_a
    inner = (inner + inner.T) / 2.0
    vals = np.linalg.eigvalsh(inner)
    _check_psd(vals)
    trace_sqrt = np.sqrt(np.maximum(vals, 0.0)).sum()

    diff = mu_a - mu_b
    return float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * trace_sqrt)


def _check_psd(eigenvalues, tol: float = 1e-6):
    scale = max(1.0, float(np.max(np.abs(eigenvalues), initial=0.0)))
    if np.min(eigenvalues, initial=0.0) < -tol * scale:
        raise NonPSD("covariance product has significantly negative eigenvalues")


def make_report(config=None, seeds=None, amplitude_grid=None, threshold=None,
                methods=None) -> dict:
    """Assemble the machine-readable evaluation report.

    ``methods`` maps method name -> dict with keys rates, variation_matrix,
    off_diagonal_sum, identity, frechet (any may be missing -> null).
    """
    def clean(value):
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, (list, tuple)):
            return [clean(v) for v in value]
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        if isinstance(value, float) and np.isnan(value):
            return None
        return value

    report = {
        "schema_version": 1,
        "config": config,
        "seeds": seeds,
        "amplitude_grid": list(amplitude_grid) if amplitude_grid else None,
        "threshold": threshold,
        "methods": {},
    }
    for name, metrics in (methods or {}).items():
        report["methods"][name] = {
            "well_edited_rates": clean(metrics.get("rates")),
            "variation_matrix": clean(metrics.get("variation_matrix")),
            "off_diagonal_sum": clean(metrics.get("off_diagonal_sum")),
            "identity_similarity": clean(metrics.get("identity")),
            "frechet_distances": clean(metrics.get("frechet")),
        }
    json.dumps(report)  # guarantee serializability before returning
    return report
