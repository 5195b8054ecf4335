"""End-to-end attribute editing: project, encode, move a code slot, decode,
reattach the untouched trailing coordinates, reconstruct.

Code slots hold gaussianized attribute values, so a slider is linear in code
space; a raw-scale wrapper converts through the attribute transform. The
amplitude search walks targets expressed as quantiles, which makes the
schedule independent of any per-attribute scale.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, LatentAxesError
from .gaussianize import AttributeTransform, gaussianize_value, inv_norm_cdf
from .mlp import mlp_forward
from .pca import PcaModel, PcaSplit, project, reconstruct
from .training import EncoderDecoder

DEFAULT_AMPLITUDE_QUANTILES = (
    0.55, 0.65, 0.75, 0.85, 0.95, 0.975, 0.99, 0.995, 0.999, 0.9995,
)


class OracleFailure(LatentAxesError):
    """Classifier output unusable during the amplitude search."""


@dataclass(frozen=True)
class EditableCode:
    attr_slots: np.ndarray   # (K,) or (n, K), gaussianized scale
    free_slots: np.ndarray   # (dim_c - K,) or (n, dim_c - K)
    residual: np.ndarray     # (m - d,) or (n, m - d)


@dataclass(frozen=True)
class EditPipeline:
    pca: PcaModel
    transform: AttributeTransform
    model: EncoderDecoder

    def __post_init__(self):
        if self.pca.split != self.model.input_dim:
            raise DimensionMismatch("PCA split does not match encoder input")
        if self.transform.n_attributes != self.model.n_attributes:
            raise DimensionMismatch("transform/model attribute counts differ")


def encode(pipeline: EditPipeline, w: np.ndarray) -> EditableCode:
    split = project(pipeline.pca, w)
    codes, _ = mlp_forward(pipeline.model.encoder, split.top,
                           pipeline.model.leaky_slope)
    k = pipeline.model.n_attributes
    return EditableCode(attr_slots=codes[..., :k], free_slots=codes[..., k:],
                        residual=split.residual)


def decode(pipeline: EditPipeline, code: EditableCode) -> np.ndarray:
    full = np.concatenate([code.attr_slots, code.free_slots], axis=-1)
    top, _ = mlp_forward(pipeline.model.decoder, full,
                         pipeline.model.leaky_slope)
    return reconstruct(pipeline.pca, PcaSplit(top=top, residual=code.residual))


def set_attribute(code: EditableCode, k: int, value: float) -> EditableCode:
    """Return a copy with attribute slot k set; everything else untouched."""
    if not 0 <= k < code.attr_slots.shape[-1]:
        raise IndexError(f"attribute index {k} out of range")
    slots = code.attr_slots.copy()
    slots[..., k] = value
    return replace(code, attr_slots=slots)


def set_attribute_raw(pipeline: EditPipeline, code: EditableCode, k: int,
                      raw_value: float) -> EditableCode:
    if not 0.0 <= raw_value <= 1.0:
        raise ValueError(f"raw attribute value {raw_value} outside [0, 1]")
    return set_attribute(code, k, gaussianize_value(pipeline.transform, k, raw_value))


def edit(pipeline: EditPipeline, w: np.ndarray, k: int,
         target_gaussianized: float) -> np.ndarray:
    return decode(pipeline, set_attribute(encode(pipeline, w), k,
                                          target_gaussianized))


def amplitude_search(pipeline: EditPipeline, w: np.ndarray, k: int,
                     classify_fn, threshold: float = 0.9,
                     quantile_grid=DEFAULT_AMPLITUDE_QUANTILES):
    """Walk increasing edit targets until the classifier's output for
    attribute k reaches the threshold.

    Returns (edited latent, success flag, achieved raw value). On failure the
    latent with the highest achieved value is returned.
    """
    current = _classify_checked(classify_fn, w)[k]
    if current >= 0.5:
        raise ValueError("amplitude search expects a k-negative sample")
    best_w, best_val = None, -np.inf
    for q in quantile_grid:
        w_hat = edit(pipeline, w, k, inv_norm_cdf(q))
        val = _classify_checked(classify_fn, w_hat)[k]
        if val >= threshold:
            return w_hat, True, float(val)
        if val > best_val:
            best_w, best_val = w_hat, val
    return best_w, False, float(best_val)


def search_positive(pipeline: EditPipeline, latents: np.ndarray, k: int,
                    classify_fn, threshold: float = 0.9,
                    quantile_grid=DEFAULT_AMPLITUDE_QUANTILES):
    """Vectorized amplitude search over a batch of k-negative latents.

    Semantics match amplitude_search sample by sample: each row gets the
    edit from the first grid target whose classifier output reaches the
    threshold. Returns (edited (n, m), success (n,), achieved (n,)).
    """
    latents = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    n = latents.shape[0]
    code = encode(pipeline, latents)
    edited = np.empty_like(latents)
    achieved = np.full(n, -np.inf)
    success = np.zeros(n, dtype=bool)
    pending = np.ones(n, dtype=bool)
    for q in quantile_grid:
        w_hat = decode(pipeline, set_attribute(code, k, inv_norm_cdf(q)))
        vals = _classify_checked(classify_fn, w_hat)[:, k]
        hit = pending & (vals >= threshold)
        edited[hit] = w_hat[hit]
        achieved[hit] = vals[hit]
        success[hit] = True
        pending &= ~hit
        improve = pending & (vals > achieved)
        edited[improve] = w_hat[improve]
        achieved[improve] = vals[improve]
        if not pending.any():
            break
    return edited, success, achieved


def _classify_checked(classify_fn, w):
    out = np.asarray(classify_fn(w), dtype=np.float64)
    if not np.isfinite(out).all():
        raise OracleFailure("classifier returned non-finite values")
    return out
