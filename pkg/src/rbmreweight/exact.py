"""Dense reference calculations: state vectors, TFIM, exact diagonalization.

Basis convention shared by the whole package: a configuration ``v`` of ``N``
spins maps to index ``sum_i bit_i 2**(N-1-i)`` with ``bit_i = (1 - v_i)/2``,
i.e. site 1 is the most significant bit and ``+1`` is the 0 bit.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .amplitudes import coefficient
from .network import NetworkParams, all_configs, config_index

MAX_DENSE_SPINS = 14
MAX_ENUM_SPINS = 26
SINGULAR_TOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class InfeasibleSize(ValueError):
    """System too large for dense or enumerated evaluation."""


class SingularConfiguration(ZeroDivisionError):
    """Local operator requested at a configuration with zero coefficient."""


@dataclass(frozen=True)
class PauliString:
    """Product of single-site Pauli operators, one letter of ``IXYZ`` per site."""

    ops: str

    def __post_init__(self):
        ops = self.ops.upper()
        if not ops or set(ops) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.ops!r}")
        object.__setattr__(self, "ops", ops)

    def __len__(self):
        return len(self.ops)

    def __str__(self):
        return self.ops

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "PauliString":
        """Accept a full string (``XXI``) or site tokens (``X1X2``, ``z1 z3``)."""
        t = text.strip().upper().replace(" ", "").replace("*", "")
        if re.fullmatch(r"[IXYZ]+", t) and (n is None or len(t) == n):
            return cls(t)
        tokens = re.findall(r"([XYZ])(\d+)", t)
        if not tokens or "".join(a + s for a, s in tokens) != t:
            raise ValueError(f"cannot parse Pauli string {text!r}")
        if n is None:
            raise ValueError(f"site-indexed Pauli string {text!r} needs the number of spins")
        ops = ["I"] * n
        for axis, site in tokens:
            k = int(site) - 1
            if not 0 <= k < n:
                raise ValueError(f"site {site} out of range for {n} spins")
            if ops[k] != "I":
                raise ValueError(f"site {site} appears twice in {text!r}")
            ops[k] = axis
        return cls("".join(ops))

    @property
    def support(self) -> list[int]:
        return [i for i, a in enumerate(self.ops) if a != "I"]

    @property
    def is_diagonal(self) -> bool:
        return set(self.ops) <= {"I", "Z"}

    def basis(self) -> str:
        """Measurement basis in which this string is diagonal (identity sites in z)."""
        return self.ops.replace("I", "Z")

    def label(self) -> str:
        return "".join(f"{a}{i + 1}" for i, a in enumerate(self.ops) if a != "I") or "I"

    def act(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``O|v> = phase(v) |v'>``; returns ``(v', phase)`` for a batch of configs."""
        v = np.asarray(v)
        flip = np.array([a in "XY" for a in self.ops])
        vp = np.where(flip, -v, v)
        phase = np.ones(v.shape[:-1], dtype=complex)
        for i, a in enumerate(self.ops):
            if a == "Z":
                phase = phase * v[..., i]
            elif a == "Y":
                phase = phase * 1j * v[..., i]
        return vp, phase


def chsh(xx: float, zz: float) -> float:
    """CHSH observable sqrt(2)|<XX> - <ZZ>|; classical bound 2, quantum maximum 2 sqrt(2)."""
    return float(np.sqrt(2.0) * abs(xx - zz))


def network_state_vector(params: NetworkParams, normalize: bool = True) -> np.ndarray:
    """Dense coefficient vector; unnormalized output is rescaled so the largest scale is 1."""
    n = params.n_visible
    if n > MAX_ENUM_SPINS:
        raise InfeasibleSize(f"{n} spins exceed the enumeration limit {MAX_ENUM_SPINS}")
    mant, scale = coefficient(all_configs(n), params, return_scale=True)
    psi = mant * np.exp(scale - scale.max())
    if normalize:
        psi = psi / np.linalg.norm(psi)
    return psi


def tfim_hamiltonian(n: int, J: float = 1.0, h: float = 1.0) -> np.ndarray:
    """Dense ``-J sum_i z_i z_{(i+1) mod n} - h sum_i x_i`` with periodic boundaries."""
    if n > MAX_DENSE_SPINS:
        raise InfeasibleSize(f"{n} spins exceed the dense limit {MAX_DENSE_SPINS}")
    v = all_configs(n).astype(float)
    dim = 2 ** n
    H = np.zeros((dim, dim))
    H[np.arange(dim), np.arange(dim)] = -J * np.sum(v * np.roll(v, -1, axis=1), axis=1)
    idx = np.arange(dim)
    for i in range(n):
        H[idx ^ (1 << (n - 1 - i)), idx] += -h
    return H


def ground_state(H: np.ndarray, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of a Hermitian matrix.

    Degenerate ground spaces are resolved by projecting the lowest-index basis
    vector with nonzero weight onto the space.  The returned vector is
    normalized and its largest-magnitude entry is real and positive.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("Hamiltonian must be a square matrix")
    scale = max(1.0, np.abs(H).max())
    if not np.allclose(H, H.conj().T, rtol=0, atol=1e-12 * scale):
        raise ValueError("Hamiltonian is not Hermitian")
    evals, evecs = np.linalg.eigh(H)
    e0 = evals[0]
    space = evecs[:, evals <= e0 + tol * scale]
    if space.shape[1] == 1:
        psi = space[:, 0]
    else:
        weight = np.linalg.norm(space, axis=1)
        k = int(np.argmax(weight > 1e-8))
        psi = space @ space[k].conj()
    psi = psi / np.linalg.norm(psi)
    k = int(np.argmax(np.abs(psi) > np.abs(psi).max() * (1 - 1e-12)))
    psi = psi * (abs(psi[k]) / psi[k])
    if np.isrealobj(H):
        psi = psi.real
    return float(e0), psi


def apply_pauli(state: np.ndarray, op: PauliString) -> np.ndarray:
    """``O|psi>`` by contracting 2x2 matrices into the tensor form of ``psi``."""
    n = len(op)
    psi = np.asarray(state, dtype=complex).reshape((2,) * n)
    for i, a in enumerate(op.ops):
        if a != "I":
            psi = np.moveaxis(np.tensordot(PAULI[a], psi, axes=([1], [i])), 0, i)
    return psi.reshape(-1)


def pauli_expectation(state: np.ndarray, op: PauliString, atol: float = 1e-12) -> float:
    state = np.asarray(state)
    if state.shape != (2 ** len(op),):
        raise ValueError(f"state of length {state.size} does not match {len(op)}-site operator")
    val = np.vdot(state, apply_pauli(state, op)) / np.vdot(state, state).real
    if abs(val.imag) > max(atol, 1e-12 * abs(val.real)):
        raise ArithmeticError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def local_operator(v, op: PauliString, params: NetworkParams) -> complex:
    """``sum_v' <v'|O|v> c*_v' / c*_v`` at one configuration ``v``."""
    v = np.asarray(v)
    vp, phase = op.act(v)
    m0, s0 = coefficient(v, params, return_scale=True)
    # the mantissa is bounded by 1 in magnitude, so this is a relative test
    if abs(m0) < SINGULAR_TOL:
        raise SingularConfiguration(f"coefficient vanishes at configuration {v.tolist()}")
    m1, s1 = coefficient(vp, params, return_scale=True)
    return complex(phase * np.conj(m1 / m0) * np.exp(s1 - s0))


def full_sum_expectation(params: NetworkParams, op: PauliString) -> float:
    """Exact expectation in the state encoded by ``params`` via the sparse double sum.

    ``<O> = (1/Z) sum_v sum_v' <v'|O|v> c_v c*_v'``, the form of the local-operator
    estimator before division by ``|c_v|^2`` (so zero coefficients are harmless).
    """
    n = params.n_visible
    if len(op) != n:
        raise ValueError(f"operator has {len(op)} sites, network {n}")
    if n > MAX_ENUM_SPINS:
        raise InfeasibleSize(f"{n} spins exceed the enumeration limit {MAX_ENUM_SPINS}")
    v = all_configs(n)
    m, s = coefficient(v, params, return_scale=True)
    c = m * np.exp(s - s.max())
    vp, phase = op.act(v)
    cp = c[config_index(vp)]
    z = np.sum(np.abs(c) ** 2)
    val = np.sum(phase * c * np.conj(cp)) / z
    return float(val.real)


def dumps_state(state: np.ndarray) -> str:
    return "".join(f"{i} {z.real:.16e} {z.imag:.16e}\n" for i, z in enumerate(np.asarray(state, complex)))


def save_state(state: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(dumps_state(state))


def loads_state(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    out = np.zeros(len(rows), dtype=complex)
    for r in rows:
        out[int(r[0])] = complex(float(r[1]), float(r[2]))
    return out
