"""Phase-reweighted expectation values and their error bars.

A sample stream of ``(visible, phase)`` records drawn from the real-part
Boltzmann distribution gives

    <O> ~ Re sum_q O(v_q) e^{i phi_q} / Re sum_q e^{i phi_q}

with error propagated from the sample spread of the numerator and denominator
terms.  When the phase factors cancel, the denominator is not resolved by the
samples; that state is reported as ``undersampled``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .amplitudes import neg_energy, shared_from_sites, dup_blocks
from .exact import PauliString
from .network import LayeredNetwork, all_configs
from .rotations import EIGENVALUE_SIGN

#: Absolute floor on |mean phase factor| below which a run is flagged.
UNDERSAMPLED_THRESHOLD = 1e-6
#: A run is also flagged when the mean phase factor is within this many
#: standard errors of zero.
UNDERSAMPLED_Z = 3.0
MAX_ENUM_UNITS = 26


class InfeasibleNetwork(ValueError):
    """Network too large for full enumeration."""


def diagonal_values(op: PauliString, visible: np.ndarray, axes: str) -> np.ndarray:
    """Eigenvalue of ``op`` for readout configurations measured in ``axes``."""
    if len(op) != len(axes):
        raise ValueError(f"operator has {len(op)} sites, samples have {len(axes)}")
    out = np.ones(visible.shape[:-1])
    for i in op.support:
        if op.ops[i] != axes[i]:
            raise ValueError(f"{op} is not diagonal in measurement basis {axes}: site {i + 1} "
                             f"measured along {axes[i]}")
        out = out * (EIGENVALUE_SIGN[axes[i]] * visible[..., i])
    return out


def _observable(diag, axes: str) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(diag, str):
        diag = PauliString.parse(diag, len(axes))
    if isinstance(diag, PauliString):
        return lambda v: diagonal_values(diag, v, axes)
    return lambda v: np.asarray(diag(v), dtype=float)


@dataclass(frozen=True)
class PhaseSums:
    """Running sums of the numerator and denominator terms; merges associatively."""

    n: int = 0
    num: complex = 0j
    den: complex = 0j
    num_sq: float = 0.0
    den_sq: float = 0.0

    @classmethod
    def from_arrays(cls, values: np.ndarray, phase: np.ndarray) -> "PhaseSums":
        f = np.exp(1j * np.asarray(phase, dtype=float))
        o = np.asarray(values, dtype=float) * f
        return cls(int(f.size), complex(o.sum()), complex(f.sum()),
                   float(np.sum(o.real ** 2)), float(np.sum(f.real ** 2)))

    def __add__(self, other: "PhaseSums") -> "PhaseSums":
        return PhaseSums(self.n + other.n, self.num + other.num, self.den + other.den,
                         self.num_sq + other.num_sq, self.den_sq + other.den_sq)


@dataclass(frozen=True)
class EstimateReport:
    value: float
    raw_numerator: complex
    raw_denominator: complex
    std_error: float
    n_samples: int
    seed: int | None = None
    imag_residual: float = 0.0
    mean_phase: float = 0.0
    undersampled: bool = False
    observable: str = ""
    extra: dict = field(default_factory=dict, compare=False)


def eq40_sigma(mean_num: float, sd_num: float, mean_den: float, sd_den: float,
               quadrature: bool = False) -> float:
    """Propagated standard deviation of the ratio estimator (per sample).

    ``|sd_num / mean_den| + |mean_num / mean_den**2 * sd_den|``, or the two terms
    combined in quadrature when ``quadrature`` is set.
    """
    if mean_den == 0:
        return float("inf")
    a = abs(sd_num / mean_den)
    b = abs(mean_num / mean_den ** 2 * sd_den)
    return float(np.hypot(a, b) if quadrature else a + b)


def _sd(sq: float, total: float, n: int) -> float:
    if n < 2:
        return 0.0
    var = (sq - total * total / n) / (n - 1)
    return float(np.sqrt(max(var, 0.0)))


def report_from_sums(s: PhaseSums, seed: int | None = None, observable: str = "",
                     quadrature: bool = False,
                     threshold: float = UNDERSAMPLED_THRESHOLD,
                     z: float = UNDERSAMPLED_Z) -> EstimateReport:
    if s.n < 1:
        raise ValueError("no samples")
    mean_num = s.num.real / s.n
    mean_den = s.den.real / s.n
    sd_num = _sd(s.num_sq, s.num.real, s.n)
    sd_den = _sd(s.den_sq, s.den.real, s.n)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = s.num.real / s.den.real if s.den.real != 0 else float("nan")
        ratio = s.num / s.den if s.den != 0 else complex("nan")
    std_error = eq40_sigma(mean_num, sd_num, mean_den, sd_den, quadrature) / np.sqrt(s.n)
    mean_phase = abs(s.den) / s.n
    undersampled = bool(abs(mean_den) < threshold
                        or (s.n >= 2 and abs(mean_den) < z * sd_den / np.sqrt(s.n)))
    return EstimateReport(
        value=float(value), raw_numerator=s.num, raw_denominator=s.den,
        std_error=float(std_error), n_samples=s.n, seed=seed,
        imag_residual=float(abs(ratio.imag)), mean_phase=float(mean_phase),
        undersampled=undersampled, observable=observable,
    )


def accumulate(records, diag) -> PhaseSums:
    """Fold one batch or an iterable of batches into :class:`PhaseSums`."""
    batches = [records] if hasattr(records, "visible") else records
    total = PhaseSums()
    for b in batches:
        obs = _observable(diag, b.axes)
        total = total + PhaseSums.from_arrays(obs(b.visible), b.phase)
    return total


def reweighted_expectation(records, diag, seed: int | None = None,
                           quadrature: bool = False) -> EstimateReport:
    """Phase-reweighted estimate of a diagonal observable from sample records.

    ``records`` is a :class:`~rbmreweight.sampler.SampleBatch` or an iterable of
    them; ``diag`` a :class:`PauliString` diagonal in the records' basis, its
    text form, or a callable on the ``(Q, N)`` readout array.
    """
    s = accumulate(records, diag)
    if s.n == 0:
        raise ValueError("no records")
    label = str(diag) if isinstance(diag, (str, PauliString)) else getattr(diag, "__name__", "")
    if seed is None and hasattr(records, "seed"):
        seed = records.seed
    return report_from_sums(s, seed=seed, observable=label, quadrature=quadrature)


def sampling_error(records, diag, quadrature: bool = False) -> float:
    s = accumulate(records, diag)
    if s.n < 2:
        raise ValueError("need at least two records for an error estimate")
    return report_from_sums(s, quadrature=quadrature).std_error


# --- exact enumeration --------------------------------------------------------

@dataclass(frozen=True)
class ExactMoments:
    """Exact first and second moments of the per-sample numerator/denominator terms."""

    mean_num: float
    mean_num_sq: float
    mean_den: float
    mean_den_sq: float

    @property
    def value(self) -> float:
        return self.mean_num / self.mean_den

    @property
    def sd_num(self) -> float:
        return float(np.sqrt(max(self.mean_num_sq - self.mean_num ** 2, 0.0)))

    @property
    def sd_den(self) -> float:
        return float(np.sqrt(max(self.mean_den_sq - self.mean_den ** 2, 0.0)))

    def sigma(self, quadrature: bool = False) -> float:
        return eq40_sigma(self.mean_num, self.sd_num, self.mean_den, self.sd_den, quadrature)

    def predicted_error(self, n_samples, quadrature: bool = False):
        return self.sigma(quadrature) / np.sqrt(n_samples)


def enumeration_units(net: LayeredNetwork) -> int:
    """Units enumerated by the factorized moment sums: readout plus one copy of each duplicated layer."""
    return net.n_sites + sum(net.layers[k] for k in net.duplicated)


def _phase_moment_sums(net: LayeredNetwork, chunk: int = 1 << 14):
    """Per readout config ``w``: ``S0 = sum_c P~``, ``S1 = sum_c P~ e^{i phi~}``,
    ``S2 = sum_c P~ e^{2 i phi~}``, over single-copy configs ``c`` of the
    duplicated layers.  Pairs of bra/ket copies factorise as ``S_k conj(S_k)``.
    """
    cost = enumeration_units(net)
    if cost > MAX_ENUM_UNITS:
        raise InfeasibleNetwork(f"enumeration over {cost} units exceeds the limit {MAX_ENUM_UNITS}")
    sites = all_configs(net.n_sites)
    dup = dup_blocks(net)
    step = max(1, chunk >> sum(net.layers[k] for k in net.duplicated))
    s0, s1, s2, shift = [], [], [], []
    for start in range(0, len(sites), step):
        w = sites[start:start + step]
        shared = shared_from_sites(net, w)
        layers = [dup[k][None] if k in net.duplicated else shared[k][:, None]
                  for k in range(net.n_layers)]
        t = neg_energy(net, layers)
        if np.ndim(t) == 1:
            t = t[:, None]
        m = t.real.max(axis=1, keepdims=True)
        p = np.exp(t.real - m)
        e1 = np.exp(1j * t.imag)
        s0.append(p.sum(axis=1))
        s1.append((p * e1).sum(axis=1))
        s2.append((p * e1 * e1).sum(axis=1))
        shift.append(m[:, 0])
    shift = np.concatenate(shift)
    # both copies carry the same shift, so P = P~ P~ is rescaled by exp(2 shift)
    g = 2 * (shift - shift.max())
    scale = np.exp(g)
    return sites, np.concatenate(s0), np.concatenate(s1), np.concatenate(s2), scale


def exact_moments(net: LayeredNetwork, diag) -> ExactMoments:
    """Exact moments of ``Re[O e^{i phi}]`` and ``Re[e^{i phi}]`` under the normalized joint weight."""
    sites, s0, s1, s2, scale = _phase_moment_sums(net)
    o = _observable(diag, net.axes)(sites)
    total = np.sum(scale * s0 ** 2)
    a1 = scale * np.abs(s1) ** 2
    a2 = scale * 0.5 * (s0 ** 2 + np.abs(s2) ** 2)
    return ExactMoments(
        mean_num=float(np.sum(o * a1) / total),
        mean_num_sq=float(np.sum(o ** 2 * a2) / total),
        mean_den=float(np.sum(a1) / total),
        mean_den_sq=float(np.sum(a2) / total),
    )


def exact_reweighted_expectation(net: LayeredNetwork, diag) -> float:
    """Infinite-sample limit of :func:`reweighted_expectation` (full enumeration)."""
    return exact_moments(net, diag).value


def explicit_variance(net: LayeredNetwork, diag, quadrature: bool = False) -> float:
    """Exact per-sample standard deviation of the reweighted estimator.

    Divide by ``sqrt(Q)`` for the expected error at ``Q`` samples.
    """
    return exact_moments(net, diag).sigma(quadrature)


def enumerate_joint(net: LayeredNetwork):
    """Every joint configuration with its normalized weight and phase.

    Returns ``(sites, bra, ket, prob, phase)``; ``bra`` and ``ket`` index the
    single-copy configurations of the duplicated layers in :func:`dup_blocks`
    order.  Brute force over all pairs, meant for small networks.
    """
    if net.total_units > 20:
        raise InfeasibleNetwork(f"{net.total_units} units is too many for brute-force listing")
    if not net.duplicated:
        raise ValueError("network has no duplicated layers")
    sites = all_configs(net.n_sites).astype(float)
    dup = dup_blocks(net)
    nd = 2 ** sum(net.layers[k] for k in net.duplicated)
    re, im = net.split()
    lw, ph = [], []
    for wi in range(len(sites)):
        shared = shared_from_sites(net, sites[wi:wi + 1])
        layers = [dup[k] if k in net.duplicated else np.repeat(shared[k], nd, axis=0)
                  for k in range(net.n_layers)]
        lw.append(neg_energy(re, layers).real)
        ph.append(neg_energy(im, layers).real)
    lw = np.stack(lw)  # (n_w, nd)
    ph = np.stack(ph)
    joint_lw = lw[:, :, None] + lw[:, None, :]
    joint_ph = ph[:, :, None] - ph[:, None, :]
    p = np.exp(joint_lw - joint_lw.max())
    p /= p.sum()
    nw = len(sites)
    w_full = np.broadcast_to(np.arange(nw)[:, None, None], p.shape).reshape(-1)
    bra = np.broadcast_to(np.arange(nd)[None, :, None], p.shape).reshape(-1)
    ket = np.broadcast_to(np.arange(nd)[None, None, :], p.shape).reshape(-1)
    return sites[w_full], bra, ket, p.reshape(-1), joint_ph.reshape(-1)


def merge_reports_sums(parts: Iterable[PhaseSums]) -> PhaseSums:
    total = PhaseSums()
    for p in parts:
        total = total + p
    return total


def with_seed(report: EstimateReport, seed: int) -> EstimateReport:
    return replace(report, seed=seed)
