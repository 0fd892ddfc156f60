"""Parameter containers and energy function for complex Boltzmann machines.

All units take values in {+1, -1}.  A two-layer machine is described by
:class:`NetworkParams`; deeper machines obtained by attaching basis rotation
layers are described by :class:`LayeredNetwork`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class ShapeError(ValueError):
    """Configuration or parameter dimensions do not agree."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """Weights ``W`` (n_visible x n_hidden), visible biases ``d``, hidden biases ``b``."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        d = _frozen(self.visible_bias)
        b = _frozen(self.hidden_bias)
        if w.ndim != 2:
            raise ShapeError(f"weights must be 2-d, got shape {w.shape}")
        if d.shape != (w.shape[0],):
            raise ShapeError(f"visible_bias shape {d.shape} does not match weights {w.shape}")
        if b.shape != (w.shape[1],):
            raise ShapeError(f"hidden_bias shape {b.shape} does not match weights {w.shape}")
        for name, a in (("weights", w), ("visible_bias", d), ("hidden_bias", b)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "visible_bias", d)
        object.__setattr__(self, "hidden_bias", b)

    @property
    def n_visible(self) -> int:
        return self.weights.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def zeros(cls, n_visible: int, n_hidden: int) -> "NetworkParams":
        return cls(np.zeros((n_visible, n_hidden)), np.zeros(n_visible), np.zeros(n_hidden))

    @property
    def real(self) -> "NetworkParams":
        return NetworkParams(self.weights.real, self.visible_bias.real, self.hidden_bias.real)

    @property
    def imag(self) -> "NetworkParams":
        return NetworkParams(self.weights.imag, self.visible_bias.imag, self.hidden_bias.imag)

    def conj(self) -> "NetworkParams":
        return NetworkParams(self.weights.conj(), self.visible_bias.conj(), self.hidden_bias.conj())

    def __add__(self, other: "NetworkParams") -> "NetworkParams":
        return NetworkParams(self.weights + other.weights,
                             self.visible_bias + other.visible_bias,
                             self.hidden_bias + other.hidden_bias)

    def scale(self, factor: complex) -> "NetworkParams":
        return NetworkParams(factor * self.weights, factor * self.visible_bias,
                             factor * self.hidden_bias)

    def is_real(self) -> bool:
        return not (self.weights.imag.any() or self.visible_bias.imag.any()
                    or self.hidden_bias.imag.any())

    def allclose(self, other: "NetworkParams", atol: float = 0.0) -> bool:
        return (self.weights.shape == other.weights.shape
                and np.allclose(self.weights, other.weights, rtol=0, atol=atol)
                and np.allclose(self.visible_bias, other.visible_bias, rtol=0, atol=atol)
                and np.allclose(self.hidden_bias, other.hidden_bias, rtol=0, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return (self.weights.shape == other.weights.shape
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.visible_bias, other.visible_bias)
                and np.array_equal(self.hidden_bias, other.hidden_bias))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LayeredNetwork:
    """Deep Boltzmann machine with couplings between neighbouring layers only.

    ``couplings[k]`` connects layer ``k`` (rows) with layer ``k + 1`` (columns).
    Layers listed in ``duplicated`` are summed twice when forming |amplitude|^2,
    once for the bra and once for the ket; all other layers are physical
    (visible) layers shared by both copies.  ``readout[i]`` gives the
    ``(layer, unit)`` whose value is the measured outcome of physical site ``i``
    and ``axes[i]`` the Pauli axis that outcome refers to.
    """

    layers: tuple[int, ...]
    couplings: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    duplicated: frozenset[int]
    readout: tuple[tuple[int, int], ...] = ()
    axes: str = ""

    def __post_init__(self):
        layers = tuple(int(n) for n in self.layers)
        couplings = tuple(_frozen(c) for c in self.couplings)
        biases = tuple(_frozen(b) for b in self.biases)
        duplicated = frozenset(int(k) for k in self.duplicated)
        if len(couplings) != len(layers) - 1:
            raise ShapeError("need exactly one coupling block per pair of adjacent layers")
        for k, c in enumerate(couplings):
            if c.shape != (layers[k], layers[k + 1]):
                raise ShapeError(f"coupling {k} has shape {c.shape}, "
                                 f"expected {(layers[k], layers[k + 1])}")
        if len(biases) != len(layers):
            raise ShapeError("need one bias vector per layer")
        for k, b in enumerate(biases):
            if b.shape != (layers[k],):
                raise ShapeError(f"bias {k} has shape {b.shape}, expected {(layers[k],)}")
        if 0 in duplicated:
            raise ValueError("layer 0 is a physical layer and cannot be duplicated")
        if not duplicated <= set(range(len(layers))):
            raise ValueError("duplicated layer index out of range")
        for a in couplings + biases:
            if not np.all(np.isfinite(a)):
                raise ValueError("network contains non-finite entries")
        readout = tuple((int(k), int(u)) for k, u in self.readout)
        if not readout:
            readout = tuple((0, u) for u in range(layers[0]))
        axes = self.axes or "Z" * len(readout)
        if len(axes) != len(readout):
            raise ShapeError("axes and readout lengths differ")
        for k, u in readout:
            if k in duplicated:
                raise ValueError(f"readout unit ({k}, {u}) sits in a duplicated layer")
            if not 0 <= u < layers[k]:
                raise ShapeError(f"readout unit ({k}, {u}) out of range")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "duplicated", duplicated)
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "axes", axes.upper())

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n_sites(self) -> int:
        return len(self.readout)

    @property
    def copies(self) -> tuple[int, ...]:
        return tuple(2 if k in self.duplicated else 1 for k in range(self.n_layers))

    @property
    def total_units(self) -> int:
        """Number of binary units summed over in |amplitude|^2, copies included."""
        return sum(n * c for n, c in zip(self.layers, self.copies))

    def split(self) -> tuple["LayeredNetwork", "LayeredNetwork"]:
        """Real and imaginary parts as two networks of the same topology."""
        def part(f):
            return LayeredNetwork(self.layers, [f(c) for c in self.couplings],
                                  [f(b) for b in self.biases], self.duplicated,
                                  self.readout, self.axes)
        return part(np.real), part(np.imag)


@dataclass
class SpinConfig:
    """One joint assignment of +-1 values to every unit.

    ``layers[k]`` holds the (bra) values of layer ``k``; ``copies[k]`` holds the
    ket copy for duplicated layers and is ``None`` otherwise.  Arrays may carry
    leading batch axes.
    """

    layers: list[np.ndarray]
    copies: list[np.ndarray | None] = field(default_factory=list)

    def __post_init__(self):
        self.layers = [np.asarray(s) for s in self.layers]
        if not self.copies:
            self.copies = [None] * len(self.layers)
        self.copies = [None if c is None else np.asarray(c) for c in self.copies]
        for s in self.layers + [c for c in self.copies if c is not None]:
            if s.size and not np.all(np.abs(s) == 1):
                raise ValueError("spin values must be +1 or -1")

    @classmethod
    def rbm(cls, visible, hidden, hidden_copy=None) -> "SpinConfig":
        return cls([visible, hidden], [None, hidden_copy])

    @property
    def visible(self) -> np.ndarray:
        return self.layers[0]

    @property
    def hidden(self) -> np.ndarray:
        return self.layers[1]

    def ket(self) -> "SpinConfig":
        """The configuration seen by the ket copy (duplicated layers swapped in)."""
        return SpinConfig([s if c is None else c for s, c in zip(self.layers, self.copies)])

    def check(self, net: LayeredNetwork) -> None:
        if len(self.layers) != net.n_layers:
            raise ShapeError(f"config has {len(self.layers)} layers, network {net.n_layers}")
        for k, (s, c, n) in enumerate(zip(self.layers, self.copies, net.layers)):
            if s.shape[-1] != n:
                raise ShapeError(f"layer {k} has {s.shape[-1]} units, expected {n}")
            if k in net.duplicated and c is None:
                raise ShapeError(f"duplicated layer {k} lacks its second copy")
            if c is not None and c.shape != s.shape:
                raise ShapeError(f"copy of layer {k} has shape {c.shape}, expected {s.shape}")


def _check_rbm_shapes(v: np.ndarray, h: np.ndarray, params: NetworkParams) -> None:
    if v.shape[-1] != params.n_visible:
        raise ShapeError(f"visible config length {v.shape[-1]} != n_visible {params.n_visible}")
    if h.shape[-1] != params.n_hidden:
        raise ShapeError(f"hidden config length {h.shape[-1]} != n_hidden {params.n_hidden}")


def rbm_energy(config: SpinConfig, params: NetworkParams):
    """``-v.W.h - v.d - h.b``; complex, batched over leading axes of the config."""
    v = np.asarray(config.layers[0], dtype=float)
    h = np.asarray(config.layers[1], dtype=float)
    _check_rbm_shapes(v, h, params)
    return -(np.einsum("...i,ij,...j->...", v, params.weights, h)
             + v @ params.visible_bias + h @ params.hidden_bias)


def split_params(params: NetworkParams) -> tuple[NetworkParams, NetworkParams]:
    return params.real, params.imag


def combine_params(real: NetworkParams, imag: NetworkParams) -> NetworkParams:
    return NetworkParams(real.weights.real + 1j * imag.weights.real,
                         real.visible_bias.real + 1j * imag.visible_bias.real,
                         real.hidden_bias.real + 1j * imag.hidden_bias.real)


def promote_to_layered(params: NetworkParams) -> LayeredNetwork:
    return LayeredNetwork(
        layers=(params.n_visible, params.n_hidden),
        couplings=(params.weights,),
        biases=(params.visible_bias, params.hidden_bias),
        duplicated=frozenset({1}),
    )


def layered_energy(config: SpinConfig, net: LayeredNetwork):
    """Energy of a single copy (the bra values of ``config``)."""
    s = [np.asarray(x, dtype=float) for x in config.layers]
    if len(s) != net.n_layers:
        raise ShapeError(f"config has {len(s)} layers, network {net.n_layers}")
    e = 0
    for k, c in enumerate(net.couplings):
        e = e - np.einsum("...i,ij,...j->...", s[k], c, s[k + 1])
    for k, b in enumerate(net.biases):
        if s[k].shape[-1] != net.layers[k]:
            raise ShapeError(f"layer {k} has {s[k].shape[-1]} units, expected {net.layers[k]}")
        e = e - s[k] @ b
    return e


# --- text serialization ------------------------------------------------------

_HEADER = "rbm"


def _fmt(z: complex) -> str:
    return f"{z.real:.16e} {z.imag:.16e}"


def dumps_params(params: NetworkParams) -> str:
    lines = [f"{_HEADER} {params.n_visible} {params.n_hidden}"]
    for i in range(params.n_visible):
        for j in range(params.n_hidden):
            lines.append(f"{i} {j} {_fmt(params.weights[i, j])}")
    for i, z in enumerate(params.visible_bias):
        lines.append(f"d {i} {_fmt(z)}")
    for j, z in enumerate(params.hidden_bias):
        lines.append(f"b {j} {_fmt(z)}")
    return "\n".join(lines) + "\n"


def loads_params(text: str) -> NetworkParams:
    rows = [(n, ln.split()) for n, ln in enumerate(text.splitlines(), 1)]
    rows = [(n, r) for n, r in rows if r and not r[0].startswith("#")]
    if not rows or rows[0][1][0] != _HEADER or len(rows[0][1]) != 3:
        raise ValueError("line 1: expected header 'rbm <n_visible> <n_hidden>'")
    nv, nh = int(rows[0][1][1]), int(rows[0][1][2])
    w = np.full((nv, nh), np.nan, dtype=complex)
    d = np.full(nv, np.nan, dtype=complex)
    b = np.full(nh, np.nan, dtype=complex)
    for lineno, r in rows[1:]:
        try:
            if r[0] in ("d", "b"):
                if len(r) != 4:
                    raise ValueError("expected '<d|b> index re im'")
                target = d if r[0] == "d" else b
                target[int(r[1])] = complex(float(r[2]), float(r[3]))
            else:
                if len(r) != 4:
                    raise ValueError("expected 'i j re im'")
                w[int(r[0]), int(r[1])] = complex(float(r[2]), float(r[3]))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if np.isnan(w.real).any() or np.isnan(d.real).any() or np.isnan(b.real).any():
        raise ValueError("parameter file is missing entries")
    return NetworkParams(w, d, b)


def save_params(params: NetworkParams, path: str | Path) -> None:
    Path(path).write_text(dumps_params(params))


def load_params(path: str | Path) -> NetworkParams:
    return loads_params(Path(path).read_text())


def all_configs(n: int) -> np.ndarray:
    """Every +-1 vector of length ``n``, site 0 most significant, +1 before -1."""
    idx = np.arange(2 ** n)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int8)


def config_index(v: Sequence[int] | np.ndarray) -> np.ndarray | int:
    v = np.asarray(v)
    n = v.shape[-1]
    bits = (1 - v) // 2
    return bits @ (1 << np.arange(n - 1, -1, -1))

