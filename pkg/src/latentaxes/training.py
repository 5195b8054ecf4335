"""Training of the reorganizing autoencoder.

The objective has three parts: squared reconstruction error in the
compressed latent coordinates, a squared penalty tying the first K code
dimensions to the (gaussianized) attribute values, and an L1 penalty pulling
the batch Pearson correlation of those K dimensions toward a reference
matrix. Gradients are derived by hand; the optimizer is Adam.
"""

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import (
    BatchTooSmall,
    ConfigInvalid,
    DimensionMismatch,
    NonFinite,
)
from .mlp import (
    AdamState,
    MlpParams,
    adam_init,
    adam_step,
    init_params,
    mlp_backward,
    mlp_forward,
)
from .npyio import read_matrix, write_matrix

VAR_EPS = 1e-8  # variance guard in the correlation denominator

CORR_NONE = "none"          # variant A
CORR_DATABASE = "database"  # variant B
CORR_IDENTITY = "identity"  # variant C

VARIANT_MODES = {"A": CORR_NONE, "B": CORR_DATABASE, "C": CORR_IDENTITY}


@dataclass
class EncoderDecoder:
    encoder: MlpParams
    decoder: MlpParams
    n_attributes: int
    leaky_slope: float = 0.01

    @property
    def dim_c(self) -> int:
        return self.encoder.weights[-1].shape[1]

    @property
    def input_dim(self) -> int:
        return self.encoder.weights[0].shape[0]


@dataclass
class TrainConfig:
    alpha: float = 1e-5
    beta: float = 1e-5
    epochs: int = 150
    batch_size: int = 256
    corr_mode: str = CORR_IDENTITY
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    hidden_size: int = 512
    n_layers: int = 8


def default_layer_sizes(dim: int, hidden: int = 512, n_layers: int = 8):
    """Encoder/decoder layout: dim -> hidden x (n_layers - 1) -> dim."""
    return [dim] + [hidden] * (n_layers - 1) + [dim]


def loss_recons(w: np.ndarray, w_hat: np.ndarray) -> float:
    if w.shape != w_hat.shape:
        raise DimensionMismatch("reconstruction shapes differ")
    diff = w - w_hat
    return float(np.sum(diff * diff) / w.shape[0])


def loss_attr(codes: np.ndarray, attrs: np.ndarray) -> float:
    k = attrs.shape[1]
    if codes.shape[0] != attrs.shape[0] or codes.shape[1] < k:
        raise DimensionMismatch("codes/attributes shapes inconsistent")
    diff = codes[:, :k] - attrs
    return float(np.sum(diff * diff) / codes.shape[0])


def batch_corr(codes_first_k: np.ndarray) -> np.ndarray:
    """Pearson correlation over the batch (covariance divisor = batch size),
    with a small additive variance guard so constant columns stay finite."""
    y = np.asarray(codes_first_k, dtype=np.float64)
    b = y.shape[0]
    if b < 2:
        raise BatchTooSmall("correlation needs at least 2 samples")
    z = y - y.mean(axis=0)
    cov = z.T @ z / b
    s = np.sqrt(np.diag(cov) + VAR_EPS)
    return cov / np.outer(s, s)


def loss_corr(corr: np.ndarray, gamma_ref: np.ndarray) -> float:
    if corr.shape != gamma_ref.shape:
        raise DimensionMismatch("correlation/reference shapes differ")
    return float(np.abs(corr - gamma_ref).sum())


def corr_loss_and_grad(codes_first_k: np.ndarray, gamma_ref: np.ndarray):
    """L1 correlation loss and its gradient w.r.t. the code entries.

    Subgradient of |.| at 0 is taken as 0. Returns (loss, grad (B, K)).
    """
    y = np.asarray(codes_first_k, dtype=np.float64)
    b, k = y.shape
    if b < 2:
        raise BatchTooSmall("correlation needs at least 2 samples")
    z = y - y.mean(axis=0)
    cov = z.T @ z / b
    var = np.diag(cov)
    s = np.sqrt(var + VAR_EPS)
    corr = cov / np.outer(s, s)
    diff = corr - gamma_ref
    loss = float(np.abs(diff).sum())
    g = np.sign(diff)

    # dL/dCov: numerator path, plus the variance path on the diagonal.
    m = g / np.outer(s, s)
    diag_extra = -np.sum(g * corr, axis=1) / (var + VAR_EPS)
    m[np.diag_indices(k)] += diag_extra
    grad_z = z @ (m + m.T) / b
    grad_y = grad_z - grad_z.mean(axis=0)
    return loss, grad_y


def total_loss(w, w_hat, codes, attrs, cfg: TrainConfig, gamma_ref=None):
    """Weighted sum of the three components; the correlation term is dropped
    entirely in variant A. Returns (total, components dict)."""
    comps = {
        "recons": loss_recons(w, w_hat),
        "attr": loss_attr(codes, attrs),
        "corr": 0.0,
    }
    total = comps["recons"] + cfg.alpha * comps["attr"]
    if cfg.corr_mode != CORR_NONE:
        if gamma_ref is None:
            raise ConfigInvalid("corr_mode set but no reference matrix given")
        comps["corr"] = loss_corr(batch_corr(codes[:, : attrs.shape[1]]), gamma_ref)
        total += cfg.beta * comps["corr"]
    return total, comps


def forward_batch(model: EncoderDecoder, x: np.ndarray):
    codes, cache_e = mlp_forward(model.encoder, x, model.leaky_slope)
    w_hat, cache_d = mlp_forward(model.decoder, codes, model.leaky_slope)
    return codes, w_hat, cache_e, cache_d


def backward(model: EncoderDecoder, x: np.ndarray, attrs: np.ndarray,
             cfg: TrainConfig, gamma_ref=None):
    """Gradients of the total loss for every encoder/decoder parameter.

    Returns (enc_grad_w, enc_grad_b, dec_grad_w, dec_grad_b, components).
    """
    b = x.shape[0]
    k = attrs.shape[1]
    codes, w_hat, cache_e, cache_d = forward_batch(model, x)

    comps = {"recons": loss_recons(x, w_hat), "attr": loss_attr(codes, attrs),
             "corr": 0.0}

    grad_w_hat = 2.0 * (w_hat - x) / b
    dec_gw, dec_gb, grad_codes = mlp_backward(
        model.decoder, cache_d, grad_w_hat, model.leaky_slope)

    grad_codes = grad_codes.copy()
    grad_codes[:, :k] += cfg.alpha * 2.0 * (codes[:, :k] - attrs) / b

    if cfg.corr_mode != CORR_NONE and cfg.beta != 0.0:
        if gamma_ref is None:
            raise ConfigInvalid("corr_mode set but no reference matrix given")
        c_loss, c_grad = corr_loss_and_grad(codes[:, :k], gamma_ref)
        comps["corr"] = c_loss
        grad_codes[:, :k] += cfg.beta * c_grad

    enc_gw, enc_gb, _ = mlp_backward(
        model.encoder, cache_e, grad_codes, model.leaky_slope)

    for grads in (enc_gw, enc_gb, dec_gw, dec_gb):
        for g in grads:
            if not np.isfinite(g).all():
                raise NonFinite("non-finite gradient")
    return enc_gw, enc_gb, dec_gw, dec_gb, comps


def train(latents_top: np.ndarray, attrs_gauss: np.ndarray, cfg: TrainConfig,
          dim_c=None, gamma_ref=None):
    """Train the autoencoder on pre-projected latents and gaussianized
    attributes. Deterministic given (config, data).

    Returns (EncoderDecoder, history) where history is one dict of
    sample-weighted component means per epoch.
    """
    x = np.asarray(latents_top, dtype=np.float64)
    a = np.asarray(attrs_gauss, dtype=np.float64)
    if x.ndim != 2 or a.ndim != 2 or x.shape[0] != a.shape[0]:
        raise DimensionMismatch("latents/attributes must be aligned 2-D arrays")
    n, d = x.shape
    k = a.shape[1]
    if n == 0:
        raise ConfigInvalid("empty dataset")
    dim_c = d if dim_c is None else dim_c
    if dim_c <= k:
        raise ConfigInvalid(f"code size {dim_c} must exceed attribute count {k}")
    if cfg.corr_mode != CORR_NONE:
        if cfg.batch_size < 2:
            raise ConfigInvalid("correlation loss needs batch_size >= 2")
        if cfg.batch_size < 32:
            raise ConfigInvalid("correlation estimate unstable below batch 32")

    if cfg.corr_mode == CORR_IDENTITY:
        gamma = np.eye(k)
    elif cfg.corr_mode == CORR_DATABASE:
        gamma = batch_corr(a) if gamma_ref is None else np.asarray(gamma_ref)
    else:
        gamma = None

    enc_sizes = [d] + [cfg.hidden_size] * (cfg.n_layers - 1) + [dim_c]
    dec_sizes = [dim_c] + [cfg.hidden_size] * (cfg.n_layers - 1) + [d]
    model = EncoderDecoder(
        encoder=init_params(cfg.seed, enc_sizes),
        decoder=init_params(cfg.seed + 1, dec_sizes),
        n_attributes=k,
    )
    state_e = adam_init(model.encoder)
    state_d = adam_init(model.decoder)
    rng = np.random.default_rng(cfg.seed)

    history = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        sums = {"recons": 0.0, "attr": 0.0, "corr": 0.0}
        count = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if idx.size < 2:
                continue
            enc_gw, enc_gb, dec_gw, dec_gb, comps = backward(
                model, x[idx], a[idx], cfg, gamma)
            adam_step(model.encoder, enc_gw, enc_gb, state_e,
                      cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                      cfg.adam_eps)
            adam_step(model.decoder, dec_gw, dec_gb, state_d,
                      cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                      cfg.adam_eps)
            for key in sums:
                sums[key] += comps[key] * idx.size
            count += idx.size
        epoch_stats = {key: sums[key] / count for key in sums}
        epoch_stats["total"] = (epoch_stats["recons"]
                                + cfg.alpha * epoch_stats["attr"]
                                + cfg.beta * epoch_stats["corr"])
        history.append(epoch_stats)
    return model, history


def save_model(model: EncoderDecoder, cfg: TrainConfig, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for prefix, net in (("enc", model.encoder), ("dec", model.decoder)):
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            write_matrix(w, directory / f"{prefix}_w{i}.npy")
            write_matrix(b[None, :], directory / f"{prefix}_b{i}.npy")
    manifest = {
        "enc_layer_sizes": model.encoder.layer_sizes,
        "dec_layer_sizes": model.decoder.layer_sizes,
        "K": model.n_attributes,
        "dim_c": model.dim_c,
        "leaky_slope": model.leaky_slope,
        "train_config": asdict(cfg),
    }
    (directory / "model_meta.json").write_text(json.dumps(manifest, indent=2))


def load_model(directory):
    directory = Path(directory)
    manifest = json.loads((directory / "model_meta.json").read_text())
    nets = {}
    for prefix, sizes_key in (("enc", "enc_layer_sizes"), ("dec", "dec_layer_sizes")):
        n_layers = len(manifest[sizes_key]) - 1
        weights = [read_matrix(directory / f"{prefix}_w{i}.npy") for i in range(n_layers)]
        biases = [read_matrix(directory / f"{prefix}_b{i}.npy")[0] for i in range(n_layers)]
        nets[prefix] = MlpParams(weights, biases)
    model = EncoderDecoder(
        encoder=nets["enc"],
        decoder=nets["dec"],
        n_attributes=int(manifest["K"]),
        leaky_slope=float(manifest["leaky_slope"]),
    )
    cfg = TrainConfig(**manifest["train_config"])
    return model, cfg
