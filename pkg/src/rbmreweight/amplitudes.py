"""Wave-function coefficients, Boltzmann weights and phases.

Writing a complex Boltzmann factor as ``exp(-E) = P~ * exp(i phi~)`` with
``P~`` built from the real parts of the parameters and ``phi~`` from the
imaginary parts lets the real part drive sampling while the phase is carried
along as a reweighting factor.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .network import LayeredNetwork, NetworkParams, ShapeError, SpinConfig, all_configs, rbm_energy


class PhaseWeight(NamedTuple):
    log_weight: np.ndarray | float
    phase: np.ndarray | float


def _log2cosh_parts(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``2 cosh(theta)`` into ``exp(scale) * mantissa`` without overflow.

    With ``theta = a + ib``: 2cosh(theta) = e^|a| [(1 + e^-2|a|) cos b + i sgn(a)(1 - e^-2|a|) sin b].
    """
    a, b = theta.real, theta.imag
    t = np.exp(-2.0 * np.abs(a))
    mantissa = (1.0 + t) * np.cos(b) + 1j * np.sign(a) * (1.0 - t) * np.sin(b)
    return np.abs(a), mantissa


def coefficient(v, params: NetworkParams, return_scale: bool = False):
    """Unnormalized coefficient ``c_v`` with the hidden layer summed analytically.

    ``c_v = exp(sum_i d_i v_i) prod_j 2 cosh(sum_i v_i W_ij + b_j)``.  ``v`` may be
    a batch of configurations.  With ``return_scale`` the result is returned as
    ``(mantissa, log_scale)`` such that ``c_v = mantissa * exp(log_scale)``;
    this stays finite when the coefficient itself would overflow.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != params.n_visible:
        raise ShapeError(f"visible config length {v.shape[-1]} != n_visible {params.n_visible}")
    theta = v @ params.weights + params.hidden_bias
    lin = v @ params.visible_bias
    scale, mant = _log2cosh_parts(theta)
    log_scale = lin.real + scale.sum(axis=-1)
    mantissa = np.exp(1j * lin.imag) * mant.prod(axis=-1)
    if return_scale:
        return mantissa, log_scale
    return mantissa * np.exp(log_scale)


def log_abs_coefficient(v, params: NetworkParams) -> np.ndarray:
    mant, scale = coefficient(v, params, return_scale=True)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(mant)) + scale


def phase_weight(config: SpinConfig, real_params: NetworkParams,
                 imag_params: NetworkParams) -> PhaseWeight:
    """Log Boltzmann weight from the real parameters, phase from the imaginary ones."""
    log_w = -rbm_energy(config, real_params).real
    phase = -rbm_energy(config, imag_params).real
    return PhaseWeight(log_w, phase)


def joint_phase(v, h, h_tilde, imag_params: NetworkParams):
    """Phase difference between the bra copy ``h`` and the ket copy ``h_tilde``.

    Terms not involving the hidden layer cancel identically and are skipped.
    """
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    ht = np.asarray(h_tilde, dtype=float)
    if h.shape != ht.shape:
        raise ShapeError(f"hidden copies differ in shape: {h.shape} vs {ht.shape}")
    if v.shape[-1] != imag_params.n_visible or h.shape[-1] != imag_params.n_hidden:
        raise ShapeError("configuration does not match network shape")
    theta = v @ imag_params.weights.real + imag_params.hidden_bias.real
    return np.sum(theta * (h - ht), axis=-1)


def joint_weight(v, h, h_tilde, real_params: NetworkParams, log: bool = False):
    """Product of the bra and ket Boltzmann factors ``P~(v,h) P~(v,h_tilde)``."""
    lw = (-rbm_energy(SpinConfig.rbm(v, h), real_params).real
          - rbm_energy(SpinConfig.rbm(v, h_tilde), real_params).real)
    return lw if log else np.exp(lw)


# --- layered networks ---------------------------------------------------------

def neg_energy(net: LayeredNetwork, layers: list[np.ndarray]):
    """``-E`` for one copy; ``layers`` are +-1 arrays broadcastable against each other."""
    e = 0
    for k, c in enumerate(net.couplings):
        e = e + np.sum((layers[k] @ c) * layers[k + 1], axis=-1)
    for k, b in enumerate(net.biases):
        e = e + layers[k] @ b
    return e


def layered_phase_weight(config: SpinConfig, net: LayeredNetwork) -> PhaseWeight:
    """Joint log-weight and bra/ket phase difference over every duplicated layer."""
    config.check(net)
    re, im = net.split()
    bra = [np.asarray(s, dtype=float) for s in config.layers]
    ket = [np.asarray(s, dtype=float) for s in config.ket().layers]
    log_w = neg_energy(re, bra).real + neg_energy(re, ket).real
    dup = net.duplicated
    phase = 0.0
    for k, c in enumerate(im.couplings):
        if k in dup or k + 1 in dup:
            w = c.real
            phase = phase + np.sum((bra[k] @ w) * bra[k + 1] - (ket[k] @ w) * ket[k + 1], axis=-1)
    for k in sorted(dup):
        phase = phase + (bra[k] - ket[k]) @ im.biases[k].real
    return PhaseWeight(log_w, phase)


def shared_layers(net: LayeredNetwork) -> list[int]:
    return [k for k in range(net.n_layers) if k not in net.duplicated]


def shared_from_sites(net: LayeredNetwork, sites: np.ndarray) -> list[np.ndarray]:
    """Per-layer arrays of the shared layers filled from site-ordered readout values."""
    sites = np.asarray(sites)
    out = {k: np.zeros(sites.shape[:-1] + (net.layers[k],), dtype=float)
           for k in shared_layers(net)}
    covered = {k: np.zeros(net.layers[k], dtype=bool) for k in out}
    for i, (k, u) in enumerate(net.readout):
        out[k][..., u] = sites[..., i]
        covered[k][u] = True
    if not all(c.all() for c in covered.values()):
        raise ValueError("network has shared units that are not read out")
    return [out.get(k) for k in range(net.n_layers)]


def dup_blocks(net: LayeredNetwork) -> list[np.ndarray | None]:
    """Every configuration of the duplicated layers (single copy), split per layer."""
    dup = sorted(net.duplicated)
    sizes = [net.layers[k] for k in dup]
    allc = all_configs(sum(sizes)).astype(float)
    out: list[np.ndarray | None] = [None] * net.n_layers
    start = 0
    for k, n in zip(dup, sizes):
        out[k] = allc[:, start:start + n]
        start += n
    return out


def single_copy_terms(net: LayeredNetwork, site_configs: np.ndarray) -> np.ndarray:
    """``-E`` for every (site config, duplicated config) pair, shape (n_sites_cfg, n_dup_cfg)."""
    shared = shared_from_sites(net, site_configs)
    dup = dup_blocks(net)
    layers = []
    for k in range(net.n_layers):
        if k in net.duplicated:
            layers.append(dup[k][None, :, :])
        else:
            layers.append(shared[k][:, None, :])
    return neg_energy(net, layers)


def layered_amplitude(net: LayeredNetwork, sites=None) -> np.ndarray:
    """Amplitude with all duplicated layers traced out, by explicit summation.

    With ``sites=None`` the full vector over readout configurations is returned
    in the package-wide basis order.
    """
    if sites is None:
        sites = all_configs(net.n_sites)
    sites = np.atleast_2d(np.asarray(sites))
    terms = single_copy_terms(net, sites)
    return np.exp(terms).sum(axis=1)


def rbm_traced_check(v, params: NetworkParams) -> complex:
    """Coefficient by brute-force summation of ``exp(-E)`` over hidden configs."""
    hs = all_configs(params.n_hidden)
    e = rbm_energy(SpinConfig.rbm(np.broadcast_to(v, (len(hs), params.n_visible)), hs), params)
    return np.exp(-e).sum()

