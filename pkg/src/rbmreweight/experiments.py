"""Convergence and system-size studies emitting plot-ready CSV rows.

Every row is reproducible on its own: the per-point seed is derived from the
experiment seed and the point's position, and the parameter hash pins the
network that was sampled.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import stats

from .config import ExperimentSpec
from .estimator import InfeasibleNetwork, exact_moments, reweighted_expectation
from .exact import (MAX_DENSE_SPINS, InfeasibleSize, PauliString, chsh, full_sum_expectation,
                    ground_state, pauli_expectation, tfim_hamiltonian)
from .network import NetworkParams, dumps_params, load_params
from .rotations import attach_rotations
from .sampler import SamplerConfig, sample
from .states import from_name
from .trainer import ConvergenceWarning, TrainConfig, train_ground_state

log = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = [
    "observable", "basis", "n_samples", "value", "std_error", "exact", "abs_dev",
    "undersampled_flag", "seed", "repeat", "state", "param_hash", "predicted_error",
    "mean_phase",
]
SCALING_COLUMNS = [
    "n_spins", "observable", "basis", "n_samples", "value", "std_error", "exact", "abs_dev",
    "ed_exact", "repr_error", "undersampled_flag", "seed", "repeat", "state", "param_hash",
    "predicted_error", "mean_phase",
]
SUMMARY_KEYS = ["n_spins", "observable", "basis", "n_samples"]


def derive_seed(*keys: int) -> int:
    """64-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def chains_for(n_samples: int, max_chains: int, min_records: int = 1000) -> int:
    """Chain count giving each chain at least ``min_records`` records where possible.

    Burn-in is paid per chain, so small sample counts use few chains.
    """
    return max(1, min(max_chains, n_samples // min_records))


def param_hash(params: NetworkParams) -> str:
    return hashlib.sha256(dumps_params(params).encode()).hexdigest()[:16]


# --- state sources -------------------------------------------------------------

@dataclass(frozen=True)
class ResolvedState:
    state_id: str
    params: NetworkParams
    hamiltonian: np.ndarray | None = None  # set for trained TFIM states

    @property
    def n_spins(self) -> int:
        return self.params.n_visible


@lru_cache(maxsize=32)
def _trained(n: int, h: float, J: float, iters: int, ti: bool, seed: int) -> NetworkParams:
    cfg = TrainConfig(n_spins=n, field_strength=h, coupling=J, max_iters=max(iters, 1),
                      translation_invariant=ti, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return train_ground_state(cfg).params


def resolve_state(name: str, field: float = 1.0, coupling: float = 1.0, train_iters: int = 2000,
                  translation_invariant: bool = True, train_seed: int = 0) -> ResolvedState:
    """``bell-complex``, ``bell-imag``, ``ghz:N``, ``tfim:N`` (trained here) or a parameter file."""
    key = name.strip()
    low = key.lower()
    if low.startswith("tfim:"):
        try:
            n = int(low.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad TFIM size in {name!r}") from None
        params = _trained(n, float(field), float(coupling), int(train_iters),
                          bool(translation_invariant), int(train_seed))
        return ResolvedState(f"tfim:{n}:h={field:g}", params, tfim_hamiltonian(n, coupling, field))
    if low.startswith("file:"):
        path = key[5:]
        return ResolvedState(f"file:{path}", load_params(path))
    if Path(key).is_file():
        return ResolvedState(f"file:{key}", load_params(key))
    return ResolvedState(low, from_name(low))


def state_for_size(template: str, n: int) -> str:
    """``tfim`` -> ``tfim:N``, ``ghz`` -> ``ghz:N``."""
    t = template.strip().lower().split(":")[0]
    if t not in ("tfim", "ghz"):
        raise ValueError(f"size scaling supports tfim or ghz states, got {template!r}")
    return f"{t}:{n}"


# --- single points ---------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "" if np.isnan(x) else repr(float(x))
    return str(x)


class _Evaluator:
    """Caches rotated networks and exact references for one state."""

    def __init__(self, state: ResolvedState, spec: ExperimentSpec):
        self.state = state
        self.spec = spec
        self.hash = param_hash(state.params)
        self._nets = {}
        self._moments = {}
        self._exact = {}

    def net(self, basis: str):
        if basis not in self._nets:
            self._nets[basis] = attach_rotations(self.state.params, basis)
        return self._nets[basis]

    def moments(self, op: PauliString, basis: str | None = None):
        key = (op.ops, basis or op.basis())
        if key not in self._moments:
            try:
                self._moments[key] = exact_moments(self.net(key[1]), op)
            except InfeasibleNetwork:
                self._moments[key] = None
        return self._moments[key]

    def exact(self, op: PauliString):
        if op.ops not in self._exact:
            try:
                self._exact[op.ops] = full_sum_expectation(self.state.params, op)
            except InfeasibleSize:
                self._exact[op.ops] = None
        return self._exact[op.ops]

    def ed_exact(self, op: PauliString):
        H = self.state.hamiltonian
        if H is None:
            return None
        key = ("ed", op.ops)
        if key not in self._exact:
            self._exact[key] = pauli_expectation(ground_state(H)[1], op)
        return self._exact[key]

    def estimate(self, label: str, n_samples: int, seed: int, basis: str | None = None) -> dict:
        """One estimate; ``chsh`` combines an XX and a ZZ run with derived seeds.

        ``basis`` overrides the measurement axes of sites outside the
        observable's support; by default those are read out along Z.
        """
        n = self.state.n_spins
        if label.lower() == "chsh":
            if n != 2:
                raise ValueError("chsh needs a two-spin state")
            xx = self.estimate("XX", n_samples, derive_seed(seed, 1))
            zz = self.estimate("ZZ", n_samples, derive_seed(seed, 2))
            value = chsh(xx["value"], zz["value"])
            exact = None if xx["exact"] is None else chsh(xx["exact"], zz["exact"])
            pe = None
            if xx["predicted_error"] is not None and zz["predicted_error"] is not None:
                pe = np.sqrt(2.0) * np.hypot(xx["predicted_error"], zz["predicted_error"])
            return dict(observable="chsh", basis="XX+ZZ", n_samples=n_samples, value=value,
                        std_error=np.sqrt(2.0) * np.hypot(xx["std_error"], zz["std_error"]),
                        exact=exact, abs_dev=None if exact is None else abs(value - exact),
                        undersampled_flag=xx["undersampled_flag"] or zz["undersampled_flag"],
                        seed=seed, predicted_error=pe,
                        mean_phase=min(xx["mean_phase"], zz["mean_phase"]))
        op = PauliString.parse(label, n)
        basis = op.basis() if basis is None else basis
        cfg = SamplerConfig(n_samples=n_samples, burn_in=self.spec.burn_in, thin=self.spec.thin,
                            n_chains=chains_for(n_samples, self.spec.chains), seed=seed)
        rep = reweighted_expectation(sample(self.net(basis), cfg), op, seed=seed,
                                     quadrature=self.spec.quadrature)
        exact = self.exact(op)
        m = self.moments(op, basis)
        return dict(observable=op.label(), basis=basis, n_samples=n_samples, value=rep.value,
                    std_error=rep.std_error, exact=exact,
                    abs_dev=None if exact is None else abs(rep.value - exact),
                    undersampled_flag=rep.undersampled, seed=seed,
                    predicted_error=None if m is None else m.predicted_error(n_samples, self.spec.quadrature),
                    mean_phase=rep.mean_phase)


def _run_tasks(fn, tasks, workers: int):
    # results come back in task order whatever the number of workers
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


# --- experiments ------------------------------------------------------------------

def run_convergence_experiment(spec: ExperimentSpec) -> list[dict]:
    """One row per (observable, sample count, repeat), in that nesting order."""
    state = resolve_state(spec.state, spec.field, spec.coupling, spec.train_iters,
                          spec.translation_invariant)
    ev = _Evaluator(state, spec)
    tasks = []
    for oi, obs in enumerate(spec.observables):
        for qi, q in enumerate(spec.schedule):
            for r in range(spec.repeats):
                tasks.append((obs, q, r, derive_seed(spec.seed, oi, qi, r)))

    def point(obs, q, r, seed):
        row = ev.estimate(obs, q, seed)
        row.update(repeat=r, state=state.state_id, param_hash=ev.hash)
        log.info("%s Q=%d repeat %d: %.6g +- %.2g", row["observable"], q, r, row["value"], row["std_error"])
        return row

    return _run_tasks(point, tasks, spec.workers)


def run_size_scaling_experiment(spec: ExperimentSpec) -> list[dict]:
    """Deviations at the largest scheduled sample count for every size in ``spec.sizes``."""
    q = spec.schedule[-1]
    tasks = []
    evaluators = {}
    for n in spec.sizes:
        state = resolve_state(state_for_size(spec.state, n), spec.field, spec.coupling,
                              spec.train_iters, spec.translation_invariant)
        if n > MAX_DENSE_SPINS:
            state = ResolvedState(state.state_id, state.params, None)
        evaluators[n] = _Evaluator(state, spec)
        for oi, obs in enumerate(spec.observables):
            for r in range(spec.repeats):
                tasks.append((n, obs, r, derive_seed(spec.seed, n, oi, r)))

    def point(n, obs, r, seed):
        ev = evaluators[n]
        row = ev.estimate(obs, q, seed)
        op = PauliString.parse(obs, n)
        ed = ev.ed_exact(op)
        row.update(n_spins=n, repeat=r, state=ev.state.state_id, param_hash=ev.hash, ed_exact=ed,
                   repr_error=None if ed is None or row["exact"] is None else abs(row["exact"] - ed))
        log.info("N=%d %s repeat %d: dev %.3g", n, row["observable"], r, row["abs_dev"] or np.nan)
        return row

    return _run_tasks(point, tasks, spec.workers)


def run_experiment(spec: ExperimentSpec) -> tuple[list[dict], list[str]]:
    if spec.experiment == "size-scaling":
        return run_size_scaling_experiment(spec), SCALING_COLUMNS
    return run_convergence_experiment(spec), CONVERGENCE_COLUMNS


# --- output -------------------------------------------------------------------------

def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(rows: list[dict], columns: list[str], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows, columns))


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and spread (sample standard deviation) over repeats of each point."""
    groups = {}
    for row in rows:
        key = tuple(row.get(k) for k in SUMMARY_KEYS)
        groups.setdefault(key, []).append(row)
    out = []
    for key, rs in groups.items():
        vals = np.array([r["value"] for r in rs], dtype=float)
        devs = np.array([np.nan if r["abs_dev"] is None else r["abs_dev"] for r in rs], dtype=float)
        ses = np.array([r["std_error"] for r in rs], dtype=float)
        spread = lambda a: float(np.std(a, ddof=1)) if len(a) > 1 else 0.0
        out.append(dict(zip(SUMMARY_KEYS, key),
                        repeats=len(rs), mean_value=float(vals.mean()), spread_value=spread(vals),
                        mean_abs_dev=float(np.mean(devs)), spread_abs_dev=spread(devs),
                        mean_std_error=float(ses.mean()), exact=rs[0]["exact"],
                        predicted_error=rs[0]["predicted_error"],
                        repr_error=rs[0].get("repr_error"),
                        undersampled_count=sum(bool(r["undersampled_flag"]) for r in rs)))
    return out


SUMMARY_COLUMNS = SUMMARY_KEYS + ["repeats", "mean_value", "spread_value", "mean_abs_dev",
                                  "spread_abs_dev", "mean_std_error", "exact", "predicted_error",
                                  "repr_error", "undersampled_count"]


def summary_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + "_summary" + (out.suffix or ".csv"))


def loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x) and its standard error."""
    fit = stats.linregress(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)))
    return float(fit.slope), float(fit.stderr)


def semilog_slope(x, y):
    """Slope of log(y) against x and its standard error."""
    fit = stats.linregress(np.asarray(x, float), np.log(np.asarray(y, float)))
    return float(fit.slope), float(fit.stderr)
