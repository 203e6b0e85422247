"""Seeded random instances shared by the acceptance and property tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from leadersel.graph import WeightedGraph, generate_graph
from leadersel.simulate import InputSignal


@dataclass(frozen=True)
class Instance:
    graph: WeightedGraph
    leaders: tuple
    demoted: tuple

    @property
    def n(self):
        return self.graph.n

    @property
    def m(self):
        return len(self.leaders)

    @property
    def r(self):
        return len(self.demoted)


def _pick(rng, pool, size):
    return tuple(sorted(int(v) for v in rng.choice(pool, size=size, replace=False)))


def random_instance(seed: int, n_max: int = 12, m_max: int = 5) -> Instance:
    """Connected Erdos-Renyi graph with log-uniform weights in [0.1, 10] and a
    random leader set of size m <= m_max with 0 <= r < m demoted."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    p = float(rng.uniform(0.25, 0.9))
    g = generate_graph("random", n, seed=seed, edge_prob=p, weights="loguniform")
    m = int(rng.integers(1, min(m_max, n) + 1))
    leaders = _pick(rng, np.arange(1, n + 1), m)
    r = int(rng.integers(0, m))
    return Instance(g, leaders, _pick(rng, np.array(leaders), r))


def corpus(size: int = 500, base_seed: int = 20_000) -> list[Instance]:
    return [random_instance(base_seed + i) for i in range(size)]


@dataclass(frozen=True)
class SimulationCase:
    instance: Instance
    new_leaders: tuple
    signal: InputSignal


def simulation_case(seed: int) -> SimulationCase:
    """Random graph (n <= 8), demotion with r >= 1, an arbitrary admissible
    new-leader set and an exponential or grid-aligned pulse input."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    g = generate_graph("random", n, seed=seed, edge_prob=float(rng.uniform(0.3, 0.9)),
                       weights="loguniform")
    m = int(rng.integers(1, min(4, n) + 1))
    leaders = _pick(rng, np.arange(1, n + 1), m)
    r = int(rng.integers(1, m + 1))
    demoted = _pick(rng, np.array(leaders), r)
    pool = np.array([v for v in range(1, n + 1) if v not in demoted])
    new = _pick(rng, pool, m - r)
    alpha = tuple(float(a) for a in rng.uniform(-2, 2, size=m))
    if rng.random() < 0.5:
        sig = InputSignal("exp", alpha, beta=float(rng.uniform(0.3, 3.0)))
    else:
        sig = InputSignal("pulse", alpha, width=int(rng.integers(10, 200)) / 100)
    return SimulationCase(Instance(g, leaders, demoted), new, sig)
