"""Block Gibbs sampling of the real-part Boltzmann distribution.

The joint weight of a layered network is ``P = P~(bra) P~(ket)``: physical
layers are shared between the two copies, duplicated layers are sampled once
per copy.  Given its neighbours every layer factorizes, so one sweep updates
all even layers and then all odd layers.

Each chain owns an independent random stream derived from ``(seed, chain)``
with :class:`numpy.random.SeedSequence` and consumes a fixed number of uniforms
per sweep.  Chains are advanced in fixed-size groups for vectorization; the
output does not depend on how many groups run at once.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from scipy.special import expit

from .network import LayeredNetwork, NetworkParams, SpinConfig, promote_to_layered

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int
    burn_in: int = 1000
    thin: int = 1
    n_chains: int = 1
    seed: int = 0
    group_size: int = 512
    block: int = 64

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.group_size < 1 or self.block < 1:
            raise ValueError("group_size and block must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SampleBatch:
    """Records emitted by one chain: readout configurations and joint phases."""

    visible: np.ndarray  # (Q, n_sites) int8, site order
    phase: np.ndarray    # (Q,) radians
    axes: str
    chain: int = 0
    sweep: np.ndarray | None = None
    seed: int | None = None

    def __len__(self):
        return len(self.phase)

    @classmethod
    def concat(cls, batches: list["SampleBatch"]) -> "SampleBatch":
        if not batches:
            raise ValueError("no batches")
        return cls(np.concatenate([b.visible for b in batches]),
                   np.concatenate([b.phase for b in batches]),
                   batches[0].axes, batches[0].chain,
                   None if batches[0].sweep is None else np.concatenate([b.sweep for b in batches]),
                   batches[0].seed)


def conditional_flip_prob(local_field):
    """P(unit = +1 | neighbours) for +-1 units: ``1 / (1 + exp(-2 field))``."""
    return expit(2.0 * np.asarray(local_field, dtype=float))


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chain,))))


def chain_sizes(n_samples: int, n_chains: int) -> list[int]:
    base, rem = divmod(n_samples, n_chains)
    return [base + (1 if c < rem else 0) for c in range(n_chains)]


class _Kernel:
    """Precomputed real couplings, update order and random-number layout."""

    def __init__(self, net: LayeredNetwork):
        self.net = net
        re, im = net.split()
        self.w_re = [c.real.copy() for c in re.couplings]
        self.b_re = [b.real.copy() for b in re.biases]
        self.w_im = [c.real.copy() for c in im.couplings]
        self.b_im = [b.real.copy() for b in im.biases]
        self.copies = net.copies
        self.order = [k for k in range(net.n_layers) if k % 2 == 0] + \
                     [k for k in range(net.n_layers) if k % 2 == 1]
        self.offsets = {}
        off = 0
        for k in self.order:
            width = self.copies[k] * net.layers[k]
            self.offsets[k] = (off, off + width)
            off += width
        self.units = off
        self.dup = sorted(net.duplicated)
        self.phase_couplings = [k for k in range(net.n_layers - 1)
                                if k in net.duplicated or k + 1 in net.duplicated]

    def init_state(self, u: np.ndarray) -> list[np.ndarray]:
        """State from one row of uniforms per chain: ``u < 1/2`` -> +1."""
        state = []
        for k in range(self.net.n_layers):
            a, b = self.offsets[k]
            s = np.where(u[:, a:b] < 0.5, 1.0, -1.0)
            state.append(s.reshape(len(u), self.copies[k], self.net.layers[k]))
        return state

    def sweep(self, state: list[np.ndarray], u: np.ndarray) -> None:
        """One in-place block Gibbs sweep; ``u`` holds ``units`` uniforms per chain."""
        nb = u.shape[0]
        for k in self.order:
            n = self.net.layers[k]
            field = np.broadcast_to(self.b_re[k], (nb, 2, n))
            if k > 0:
                field = field + state[k - 1] @ self.w_re[k - 1]
            if k < self.net.n_layers - 1:
                field = field + state[k + 1] @ self.w_re[k].T
            field = np.broadcast_to(field, (nb, 2, n))
            if self.copies[k] == 1:
                field = field.sum(axis=1, keepdims=True)
            a, b = self.offsets[k]
            p = expit(2.0 * field)
            state[k] = np.where(u[:, a:b].reshape(p.shape) < p, 1.0, -1.0)

    def phase(self, state: list[np.ndarray]) -> np.ndarray:
        """Bra minus ket imaginary energy, summed over terms touching duplicated layers."""
        nb = state[0].shape[0]
        ph = np.zeros(nb)
        for k in self.phase_couplings:
            x, y = state[k], state[k + 1]
            t = np.sum((x @ self.w_im[k]) * y, axis=-1)  # (nb, copies)
            t = np.broadcast_to(t, (nb, 2))
            ph += t[:, 0] - t[:, 1]
        for k in self.dup:
            s = state[k]
            ph += (s[:, 0] - s[:, 1]) @ self.b_im[k]
        return ph

    def readout(self, state: list[np.ndarray]) -> np.ndarray:
        return np.stack([state[k][:, 0, u] for k, u in self.net.readout], axis=-1)


def _run_group(kernel: _Kernel, cfg: SamplerConfig, chains: list[int]) -> list[SampleBatch]:
    sizes = chain_sizes(cfg.n_samples, cfg.n_chains)
    counts = [sizes[c] for c in chains]
    n_rec = max(counts)
    rngs = [chain_rng(cfg.seed, c) for c in chains]
    nb, units = len(chains), kernel.units
    state = kernel.init_state(np.stack([r.random(units) for r in rngs]))
    total_sweeps = cfg.burn_in + n_rec * cfg.thin
    # chains of a group advance in lockstep, so record r of every chain comes
    # from the same sweep; surplus records of shorter chains are dropped
    vis = np.empty((n_rec, nb, kernel.net.n_sites), dtype=np.int8)
    phs = np.empty((n_rec, nb))
    r = 0
    done = 0
    while done < total_sweeps:
        todo = min(cfg.block, total_sweeps - done)
        u = np.stack([g.random((todo, units)) for g in rngs], axis=1)  # (todo, nb, units)
        for t in range(todo):
            kernel.sweep(state, u[t])
            after = done + t + 1 - cfg.burn_in
            if after > 0 and after % cfg.thin == 0:
                phs[r] = kernel.phase(state)
                vis[r] = kernel.readout(state)
                r += 1
        done += todo
    sweep_no = cfg.burn_in + cfg.thin * np.arange(1, n_rec + 1)
    return [SampleBatch(np.ascontiguousarray(vis[:c, i]), phs[:c, i].copy(), kernel.net.axes,
                        chains[i], sweep_no[:c].copy(), cfg.seed)
            for i, c in enumerate(counts)]


def run_chains(net: LayeredNetwork | NetworkParams, cfg: SamplerConfig,
               workers: int = 1) -> Iterator[SampleBatch]:
    """Yield one :class:`SampleBatch` per chain, in chain order.

    ``workers`` only changes how many chain groups are in flight at once; the
    records are identical for any value.
    """
    if isinstance(net, NetworkParams):
        net = promote_to_layered(net)
    kernel = _Kernel(net)
    groups = [list(range(a, min(a + cfg.group_size, cfg.n_chains)))
              for a in range(0, cfg.n_chains, cfg.group_size)]
    if workers <= 1 or len(groups) == 1:
        for g in groups:
            yield from _run_group(kernel, cfg, g)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps memory proportional to the number of workers
        pending = []
        it = iter(groups)
        for g in it:
            pending.append(pool.submit(_run_group, kernel, cfg, g))
            if len(pending) >= workers:
                yield from pending.pop(0).result()
        for f in pending:
            yield from f.result()


def sample(net: LayeredNetwork | NetworkParams, cfg: SamplerConfig, workers: int = 1) -> SampleBatch:
    """All records of :func:`run_chains` concatenated in chain-major order."""
    batches = list(run_chains(net, cfg, workers))
    out = SampleBatch.concat(batches)
    out.chain = -1
    return out


def gibbs_sweep(state: SpinConfig, net: LayeredNetwork | NetworkParams,
                rng: np.random.Generator) -> SpinConfig:
    """One block Gibbs sweep of a (possibly batched) configuration.

    Uniforms are drawn from ``rng`` in the same per-chain layout used by
    :func:`run_chains`.  Returns a new configuration.
    """
    if isinstance(net, NetworkParams):
        net = promote_to_layered(net)
    state.check(net)
    kernel = _Kernel(net)
    batch_shape = np.shape(state.layers[0])[:-1]
    arrays = []
    for k in range(net.n_layers):
        s = np.asarray(state.layers[k], dtype=float).reshape(-1, net.layers[k])
        if kernel.copies[k] == 2:
            c = np.asarray(state.copies[k], dtype=float).reshape(-1, net.layers[k])
            arrays.append(np.stack([s, c], axis=1))
        else:
            arrays.append(s[:, None, :])
    nb = arrays[0].shape[0]
    kernel.sweep(arrays, rng.random((nb, kernel.units)))
    layers = [a[:, 0].reshape(batch_shape + (n,)).astype(np.int8)
              for a, n in zip(arrays, net.layers)]
    copies = [a[:, 1].reshape(batch_shape + (n,)).astype(np.int8) if c == 2 else None
              for a, n, c in zip(arrays, net.layers, kernel.copies)]
    return SpinConfig(layers, copies)


def dump_records(batches, path: str | Path) -> None:
    """Write ``chain sweep v_1 ... v_N phase`` lines."""
    with open(path, "w") as fh:
        for b in batches:
            sw = b.sweep if b.sweep is not None else np.arange(1, len(b) + 1)
            for v, s, ph in zip(b.visible, sw, b.phase):
                fh.write(f"{b.chain} {s} {' '.join(str(int(x)) for x in v)} {ph:.16e}\n")
