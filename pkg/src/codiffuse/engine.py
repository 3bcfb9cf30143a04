"""Synchronous two-contagion update loop and ensemble runner.

A population is a pair of arrays: `states` (int8, one of NAIVE/STATE_A/STATE_B/
STATE_AB) and `active` (bool). One step has two phases. Phase 1 (adoption) reads
densities only from the pre-step buffer: every node draws against its adoption
probability; naive adopters pick A or B by the relative-proportion split, single
adopters add the other contagion (inclusive mode only), and at most one contagion
is adopted per node per step. Dormancy is one-directional: a dormant single
adopter may still pick up the second contagion but stays dormant, never feeding
either density again. Phase 2 (dormancy) switches off every active adopter,
including same-step adopters, with its state's rate.

Randomness is counter-based (Philox) and addressed by
(master_seed, param_index, stream, iteration), so any iteration of any parameter
set can be reproduced bit-exactly from any process or worker count.
"""

from __future__ import annotations

import concurrent.futures as cf
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .kernel import (
    NAIVE,
    QUENCHED,
    STATE_A,
    STATE_AB,
    STATE_B,
    DormancyParams,
    EXCLUSIVE,
    KernelParams,
    hill_term_vec,
)
from .topology import MultiplexGraph, build_lattice, build_rrg

DEFAULT_SEED = 1234

# Third component of a stream address.
ITERATION_STREAM = 0
GRAPH_STREAM = 1


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for one addressed random stream; same address, same draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((master_seed, *key))))


@dataclass(frozen=True)
class RunConfig:
    """Everything one realization needs: graph spec, kernel, dormancy, horizon, seeding."""

    kernel: KernelParams
    dormancy: DormancyParams
    side: int = 80
    degree: int = 4
    graph_mode: str = "multiplex"  # "multiplex" or "single"
    freeze_rrg: bool = False
    steps: int = 700
    seeds_per_contagion: int = 1
    master_seed: int = DEFAULT_SEED
    param_index: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if self.seeds_per_contagion < 1:
            raise ConfigurationError("seeds_per_contagion must be >= 1")
        if self.graph_mode not in ("multiplex", "single"):
            raise ConfigurationError(f"unknown graph_mode {self.graph_mode!r}")

    @property
    def n(self) -> int:
        return self.side * self.side


@dataclass(frozen=True, eq=False)
class CountsSeries:
    """Per-step node counts by state (columns naive, a, b, ab) plus a dormant channel.

    States are exclusive, so each row of `counts` sums to n. Counting ignores
    activity; the dormant column is diagnostic only.
    """

    counts: np.ndarray  # (steps, 4) int64
    dormant: np.ndarray  # (steps,) int64

    @property
    def naive(self) -> np.ndarray:
        return self.counts[:, 0]

    @property
    def a(self) -> np.ndarray:
        return self.counts[:, 1]

    @property
    def b(self) -> np.ndarray:
        return self.counts[:, 2]

    @property
    def ab(self) -> np.ndarray:
        return self.counts[:, 3]


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Stacked per-iteration series for one parameter set."""

    counts: np.ndarray  # (iterations, steps, 4) int64
    dormant: np.ndarray  # (iterations, steps) int64

    @property
    def iterations(self) -> int:
        return self.counts.shape[0]

    @property
    def steps(self) -> int:
        return self.counts.shape[1]

    @property
    def mean(self) -> np.ndarray:
        """(steps, 4) float64 mean of the four state counts over iterations."""
        return self.counts.mean(axis=0)


def seed_population(n: int, rng: np.random.Generator,
                    seeds_per_contagion: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Non-overlapping random seeds: k nodes get A, k distinct nodes get B, all active."""
    k = seeds_per_contagion
    if n < 2 * k:
        raise ConfigurationError(f"need at least {2 * k} nodes to seed, got {n}")
    states = np.full(n, NAIVE, dtype=np.int8)
    active = np.ones(n, dtype=bool)
    picks = rng.choice(n, size=2 * k, replace=False)
    states[picks[:k]] = STATE_A
    states[picks[k:]] = STATE_B
    return states, active


def _neighbor_count(src: np.ndarray, nbrs: np.ndarray) -> np.ndarray:
    """Sum `src` over every node's neighbor list (column at a time: faster than
    a 2-D gather and allocation-light)."""
    acc = np.take(src, nbrs[:, 0])
    for j in range(1, nbrs.shape[1]):
        acc += np.take(src, nbrs[:, j])
    return acc


def step_with_draws(graph: MultiplexGraph, states: np.ndarray, active: np.ndarray,
                    kernel: KernelParams, dormancy: DormancyParams,
                    adoption_u: np.ndarray, choice_u: np.ndarray,
                    dorm_u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous step with explicit per-node uniforms (deterministic)."""
    la, lb = graph.layer_a, graph.layer_b
    has_a = (states == STATE_A) | (states == STATE_AB)
    has_b = (states == STATE_B) | (states == STATE_AB)
    src_a = (has_a & active).astype(np.float64)
    src_b = (has_b & active).astype(np.float64)
    dens_a = _neighbor_count(src_a, la.nbrs) / la.t
    dens_b = _neighbor_count(src_b, lb.nbrs) / lb.t

    term_a = hill_term_vec(dens_a, kernel.k_a, kernel.alpha)
    term_b = hill_term_vec(dens_b, kernel.k_b, kernel.alpha)
    ta = np.where(has_a, 0.0, term_a)
    tb = np.where(has_b, 0.0, term_b)
    if kernel.mode == EXCLUSIVE:
        adopter = has_a | has_b
        ta = np.where(adopter, 0.0, ta)
        tb = np.where(adopter, 0.0, tb)
    tot = ta + tb
    p = tot / (1.0 + tot)
    fired = adoption_u >= 1.0 - p  # P(fired) == p for U[0,1) draws; p == 0 never fires

    new_states = states.copy()
    naive_fire = fired & (states == NAIVE)
    if naive_fire.any():
        denom = term_a + term_b  # raw terms: the choice split ignores indicators
        share_a = np.divide(term_a, denom, out=np.zeros_like(denom), where=denom > 0.0)
        pick_a = choice_u < share_a
        new_states[naive_fire & pick_a] = STATE_A
        new_states[naive_fire & ~pick_a] = STATE_B
    new_states[fired & (states == STATE_A)] = STATE_AB
    new_states[fired & (states == STATE_B)] = STATE_AB

    # Adoption leaves the activity flag untouched (one-directional dormancy).
    new_active = active.copy()
    rates = np.array([0.0, dormancy.tau_a, dormancy.tau_b, dormancy.tau_ab])[new_states]
    asleep = (new_states != NAIVE) & new_active & (dorm_u < rates)
    new_active[asleep] = False
    return new_states, new_active


def step(graph: MultiplexGraph, states: np.ndarray, active: np.ndarray,
         kernel: KernelParams, dormancy: DormancyParams, rng: np.random.Generator,
         quenched_draws: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous step. Annealed mode draws a fresh adoption uniform per node;
    quenched mode reuses the fixed per-node draws from initialization."""
    n = graph.n
    if kernel.threshold_mode == QUENCHED:
        if quenched_draws is None:
            raise ValueError("quenched threshold mode needs the per-node draws")
        choice_u, dorm_u = rng.random((2, n))
        adoption_u = quenched_draws
    else:
        adoption_u, choice_u, dorm_u = rng.random((3, n))
    return step_with_draws(graph, states, active, kernel, dormancy,
                           adoption_u, choice_u, dorm_u)


def build_graph(config: RunConfig, rng: np.random.Generator,
                stream_label: str | None = None) -> MultiplexGraph:
    """Lattice layer plus, in multiplex mode, a freshly sampled RRG layer."""
    lattice = build_lattice(config.side)
    if config.graph_mode == "single":
        return MultiplexGraph(layer_a=lattice, layer_b=lattice)
    rrg = build_rrg(lattice.n, config.degree, rng, stream_label=stream_label)
    return MultiplexGraph(layer_a=lattice, layer_b=rrg)


def frozen_graph(config: RunConfig) -> MultiplexGraph:
    """The one shared graph of a frozen-topology parameter set (own stream address)."""
    rng = stream(config.master_seed, config.param_index, GRAPH_STREAM, 0)
    label = f"({config.master_seed},{config.param_index},graph)"
    return build_graph(config, rng, stream_label=label)


def run(config: RunConfig, iteration: int = 0,
        graph: MultiplexGraph | None = None) -> CountsSeries:
    """One realization: (re)sample graph, seed, step `config.steps` times, count.

    Draw order within the iteration stream is fixed (graph pairing, seed picks,
    quenched draws if any, then per step: adoption/choice/dormancy uniforms), so
    a (config, iteration) pair maps to exactly one series.
    """
    rng = stream(config.master_seed, config.param_index, ITERATION_STREAM, iteration)
    if graph is None:
        if config.freeze_rrg:
            graph = frozen_graph(config)
        else:
            label = f"({config.master_seed},{config.param_index},{iteration})"
            graph = build_graph(config, rng, stream_label=label)
    states, active = seed_population(graph.n, rng, config.seeds_per_contagion)
    quenched = rng.random(graph.n) if config.kernel.threshold_mode == QUENCHED else None

    counts = np.empty((config.steps, 4), dtype=np.int64)
    dormant = np.empty(config.steps, dtype=np.int64)
    for t in range(config.steps):
        states, active = step(graph, states, active, config.kernel, config.dormancy,
                              rng, quenched)
        counts[t] = np.bincount(states, minlength=4)
        dormant[t] = graph.n - int(active.sum())
    return CountsSeries(counts=counts, dormant=dormant)


def _run_iterations(config: RunConfig, iterations: list[int]) -> list[CountsSeries]:
    graph = frozen_graph(config) if config.freeze_rrg else None
    return [run(config, i, graph=graph) for i in iterations]


def run_ensemble(config: RunConfig, iterations: int, workers: int = 1) -> EnsembleResult:
    """Independent realizations 0..iterations-1 of one parameter set.

    Results are keyed by iteration index and bit-identical for any `workers`.
    """
    if iterations < 1:
        raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
    indices = list(range(iterations))
    if workers <= 1 or iterations == 1:
        series = _run_iterations(config, indices)
    else:
        chunks = [indices[k::workers] for k in range(workers) if indices[k::workers]]
        series = [None] * iterations
        with cf.ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            futures = {pool.submit(_run_iterations, config, chunk): chunk for chunk in chunks}
            for fut in cf.as_completed(futures):
                for i, cs in zip(futures[fut], fut.result()):
                    series[i] = cs
    counts = np.stack([cs.counts for cs in series])
    dormant = np.stack([cs.dormant for cs in series])
    return EnsembleResult(counts=counts, dormant=dormant)
