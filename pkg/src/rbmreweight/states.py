"""Closed-form Boltzmann machine parameters for Bell and GHZ states."""
from __future__ import annotations

import numpy as np

from .network import NetworkParams

#: arsinh(1/sqrt(8)) = ln(sqrt(2))
ARSINH_INV_SQRT8 = float(np.arcsinh(1 / np.sqrt(8)))
ARCCOS_INV_SQRT8 = float(np.arccos(1 / np.sqrt(8)))


def bell_complex() -> NetworkParams:
    """Bell pair (|+-> + |-+>)/sqrt(2) with complex weights, one hidden unit."""
    a = 0.5 * ARSINH_INV_SQRT8
    w = np.array([[-a + 0.5j * np.pi], [a + 0.5j * np.pi]])
    return NetworkParams(w, np.array([0.5j * np.pi, 0.0]), np.array([0.5j * np.pi]))


def bell_imaginary() -> NetworkParams:
    """Same Bell pair with purely imaginary weights and zero biases."""
    a = 0.5 * ARCCOS_INV_SQRT8
    w = 1j * np.array([[-a - np.pi / 4], [a - np.pi / 4]])
    return NetworkParams(w, np.zeros(2), np.zeros(1))


def ghz(n: int, literal: bool = False) -> NetworkParams:
    """GHZ state (|+...+> + |-...->)/sqrt(2) on ``n`` spins with ``n - 1`` hidden units.

    The first hidden unit fixes the normalisation of the two extremal
    configurations and kills configurations with the last spin flipped; the
    remaining units each couple neighbouring spins (k-1, k) with weight
    i*pi/4 and remove configurations where those two spins disagree.

    On their own these weights give c(+...+)/c(-...-) = (-1)**(n-1), so for even
    ``n`` they encode (|+...+> - |-...->)/sqrt(2).  A visible bias i*pi/2 on the
    first spin restores the relative sign (the state then carries the global
    phase -i).  ``literal=True`` skips that correction.
    """
    if n < 2:
        raise ValueError(f"GHZ state needs at least 2 spins, got {n}")
    m = n - 1
    alpha = np.arcsin(2.0 ** -(n - 0.5))
    w = np.zeros((n, m), dtype=complex)
    w[: n - 1, 0] = 1j * alpha / (2 * (n - 1))
    w[n - 1, 0] = 0.5j * alpha
    # 0-based: W[j, k] = i pi/4 for j in {k - 1, k}, k >= 1
    for k in range(1, m):
        w[k - 1, k] += 0.25j * np.pi
        w[k, k] += 0.25j * np.pi
    d = np.zeros(n, dtype=complex)
    if n % 2 == 0 and not literal:
        d[0] = 0.5j * np.pi
    return NetworkParams(w, d, np.full(m, 0.5j * np.pi))


def from_name(name: str) -> NetworkParams:
    """``bell-complex``, ``bell-imag`` or ``ghz:N``."""
    key = name.strip().lower()
    if key in ("bell-complex", "bell_complex"):
        return bell_complex()
    if key in ("bell-imag", "bell-imaginary", "bell_imaginary"):
        return bell_imaginary()
    if key.startswith("ghz:"):
        try:
            n = int(key.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad GHZ size in {name!r}") from None
        return ghz(n)
    raise ValueError(f"unknown analytic state {name!r}; "
                     "expected bell-complex, bell-imag or ghz:N")


def target_vector(name: str) -> np.ndarray:
    """The normalized state each analytic constructor is meant to encode."""
    key = name.strip().lower()
    if key.startswith("bell"):
        psi = np.zeros(4)
        psi[[1, 2]] = 1 / np.sqrt(2)
        return psi
    n = from_name(name).n_visible
    psi = np.zeros(2 ** n)
    psi[[0, -1]] = 1 / np.sqrt(2)
    return psi
