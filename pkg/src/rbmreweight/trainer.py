"""Real RBM ground states of the transverse-field Ising chain.

Stochastic reconfiguration with every expectation value evaluated by summing
over all ``2**N`` configurations, so there is no sampling noise in the
updates.  Parameters are flattened as ``[d (N), b (M), W (N*M, row-major)]``.
With translation invariance the free parameters are ``[a, c, w_0..w_{N-1}]``
with ``d_i = a``, ``b_j = c`` and ``W[i, j] = w[(i - j) mod N]``.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amplitudes import coefficient
from .exact import MAX_DENSE_SPINS, ground_state, tfim_hamiltonian
from .network import NetworkParams, all_configs

log = logging.getLogger(__name__)


class SingularSRMatrix(np.linalg.LinAlgError):
    pass


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrainConfig:
    n_spins: int
    n_hidden: int | None = None
    field_strength: float = 1.0
    coupling: float = 1.0
    learning_rate: float = 0.05
    # a shift decaying below ~1e-2 makes weight-shared SR oscillate
    regularization: float = 1e-2
    regularization_min: float = 1e-2
    regularization_decay: float = 0.99
    max_iters: int = 2000
    energy_tolerance: float = 1e-10
    seed: int = 0
    init_scale: float = 0.01
    translation_invariant: bool = True

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        if self.n_hidden is None:
            object.__setattr__(self, "n_hidden", self.n_spins)
        if self.n_hidden < 1:
            raise ValueError("n_hidden must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.regularization < 0 or self.regularization_min < 0:
            raise ValueError("regularization must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.translation_invariant and self.n_hidden != self.n_spins:
            raise ValueError("translation invariance needs n_hidden == n_spins")

    def regularization_at(self, it: int) -> float:
        return max(self.regularization_min, self.regularization * self.regularization_decay ** it)


@dataclass
class TrainResult:
    params: NetworkParams
    energy: float
    converged: bool
    iterations: int
    history: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "converged" if self.converged else "max_iters"


# parameter vector <-> NetworkParams

def flatten(params: NetworkParams) -> np.ndarray:
    p = params.real
    return np.concatenate([p.visible_bias.real, p.hidden_bias.real, p.weights.real.ravel()])


def unflatten(theta: np.ndarray, n: int, m: int) -> NetworkParams:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (n + m + n * m,):
        raise ValueError(f"parameter vector of length {theta.size}, expected {n + m + n * m}")
    return NetworkParams(theta[n + m:].reshape(n, m), theta[:n], theta[n:n + m])


def sharing_matrix(n: int) -> np.ndarray:
    """0/1 matrix mapping ``[a, c, w]`` onto the full parameter vector (M = N)."""
    P = np.zeros((2 * n + n * n, 2 + n))
    P[:n, 0] = 1
    P[n:2 * n, 1] = 1
    i, j = np.divmod(np.arange(n * n), n)
    P[2 * n + np.arange(n * n), 2 + (i - j) % n] = 1
    return P


def log_derivatives(params: NetworkParams, v) -> np.ndarray:
    """d ln c_v / d theta for real parameters; shape ``(..., N + M + N*M)``."""
    if not params.is_real():
        raise ValueError("log_derivatives expects real parameters")
    v = np.asarray(v, dtype=float)
    W = params.weights.real
    t = np.tanh(v @ W + params.hidden_bias.real)
    ow = v[..., :, None] * t[..., None, :]
    return np.concatenate([v, t, ow.reshape(v.shape[:-1] + (-1,))], axis=-1)


def _amplitudes(params: NetworkParams, configs: np.ndarray) -> np.ndarray:
    m, s = coefficient(configs, params, return_scale=True)
    c = m.real * np.exp(s - s.max())
    return c / np.linalg.norm(c)


def variational_energy(params: NetworkParams, H: np.ndarray) -> float:
    n = params.n_visible
    c = _amplitudes(params, all_configs(n))
    return float(c @ H @ c)


@dataclass
class SRQuantities:
    energy: float
    forces: np.ndarray
    S: np.ndarray


def sr_quantities(params: NetworkParams, H: np.ndarray, P: np.ndarray | None = None) -> SRQuantities:
    """Exact energy, forces and S-matrix; ``P`` projects onto shared parameters."""
    n = params.n_visible
    configs = all_configs(n)
    c = _amplitudes(params, configs)
    prob = c * c
    hc = H @ c
    # c_v > 0 for real parameters, so the local energy is always defined
    e_loc = hc / c
    O = log_derivatives(params, configs)
    if P is not None:
        O = O @ P
    e = float(prob @ e_loc)
    mean_o = prob @ O
    dO = O - mean_o
    forces = dO.T @ (prob * (e_loc - e))
    S = (dO * prob[:, None]).T @ dO
    return SRQuantities(e, forces, S)


def energy_gradient(params: NetworkParams, H: np.ndarray) -> np.ndarray:
    """d<H>/d theta = 2 F for real parameters and a real symmetric H."""
    return 2.0 * sr_quantities(params, H).forces


def sr_update(q: SRQuantities, learning_rate: float, regularization: float) -> np.ndarray:
    A = q.S + regularization * np.eye(len(q.S))
    try:
        if np.linalg.cond(A) > 1e14:
            raise np.linalg.LinAlgError("ill-conditioned")
        return -learning_rate * np.linalg.solve(A, q.forces)
    except np.linalg.LinAlgError:
        raise SingularSRMatrix(
            f"S + lambda*I is singular at lambda={regularization:g}; increase the regularization"
        ) from None


def sr_step(params: NetworkParams, H: np.ndarray, cfg: TrainConfig, it: int = 0):
    """One update; returns ``(params', energy of params, force norm)``."""
    n, m = params.n_visible, params.n_hidden
    P = sharing_matrix(n) if cfg.translation_invariant else None
    q = sr_quantities(params, H, P)
    delta = sr_update(q, cfg.learning_rate, cfg.regularization_at(it))
    if P is not None:
        delta = P @ delta
    return unflatten(flatten(params) + delta, n, m), q.energy, float(np.linalg.norm(q.forces))


def init_params(cfg: TrainConfig) -> NetworkParams:
    n, m = cfg.n_spins, cfg.n_hidden
    rng = np.random.default_rng(cfg.seed)
    if cfg.translation_invariant:
        reduced = rng.uniform(-cfg.init_scale, cfg.init_scale, 2 + n)
        return unflatten(sharing_matrix(n) @ reduced, n, m)
    return unflatten(rng.uniform(-cfg.init_scale, cfg.init_scale, n + m + n * m), n, m)


def train_ground_state(cfg: TrainConfig, H: np.ndarray | None = None,
                       init: NetworkParams | None = None) -> TrainResult:
    if cfg.n_spins > MAX_DENSE_SPINS:
        raise ValueError(f"exact training limited to {MAX_DENSE_SPINS} spins")
    if H is None:
        H = tfim_hamiltonian(cfg.n_spins, cfg.coupling, cfg.field_strength)
    params = init if init is not None else init_params(cfg)
    best, best_e = params, np.inf
    history = []
    prev = np.inf
    converged = False
    it = 0
    for it in range(cfg.max_iters):
        new, e, gnorm = sr_step(params, H, cfg, it)
        history.append((it, e, gnorm))
        if e < best_e:
            best, best_e = params, e
        if abs(prev - e) < cfg.energy_tolerance:
            converged = True
            break
        prev = e
        params = new
    if not converged:
        warnings.warn(f"SR did not reach |dE| < {cfg.energy_tolerance:g} in {cfg.max_iters} "
                      "iterations; returning the best parameters seen", ConvergenceWarning)
    log.info("training N=%d: E=%.12f after %d iterations (%s)", cfg.n_spins, best_e, it + 1,
             "converged" if converged else "not converged")
    return TrainResult(best, float(best_e), converged, it + 1, history)


def write_training_log(result: TrainResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "energy", "grad_norm"])
        for it, e, g in result.history:
            w.writerow([it, f"{e:.16e}", f"{g:.16e}"])


def exact_reference(n: int, h: float = 1.0, J: float = 1.0):
    """``(E0, psi0)`` of the dense TFIM Hamiltonian."""
    return ground_state(tfim_hamiltonian(n, J, h))
