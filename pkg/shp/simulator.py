"""Synthetic graphs, parameters and event data.

All functions take an explicit seed and draw from their own generator, so a
result depends only on its inputs. :func:`simulate_dataset` derives the
graph, parameter and data seeds from one root seed with
:func:`shp.utils.derive_seed` under the keys ``'dag'``, ``'params'`` and
``'data'``.

Two generators produce counts:

- ``continuous``: an event stream by Ogata thinning with the kernel
  ``A[u, v] * beta * exp(-beta * t)``, so ``A[u, v]`` is the mean number of
  type-v children of one type-u event. The stream is then binned.
- ``discrete``: counts drawn bin by bin from the binned model, parents before
  children inside a bin.
"""

from __future__ import annotations

import logging
import math
import typing

import numpy as np

from . import base, utils
from .config import Generator, SimConfig
from .events import (
    BinnedCounts,
    ContinuousSequence,
    EventRecord,
    bin_events,
)
from .graph import CausalGraph, topological_order
from .params import SHPParams, validate_support

logger = logging.getLogger(__name__)

Node = typing.Hashable


class SimulatedDataset(typing.NamedTuple):
    graph: CausalGraph
    params: SHPParams
    counts: BinnedCounts
    #: The raw stream, only for the continuous generator
    events: ContinuousSequence | None = None


def node_names(n: int) -> tuple[str, ...]:
    """
    Default names of `n` event types.

    >>> node_names(3)
    ('v0', 'v1', 'v2')
    """
    return tuple(f'v{index}' for index in range(n))


def edge_probability(n: int, avg_indegree: float) -> float:
    """
    Inclusion probability of each forward pair for a mean indegree.

    >>> round(edge_probability(20, 1.5), 4)
    0.1579
    >>> edge_probability(1, 3.0)
    0.0
    """
    if n < 1:
        raise base.ValidationError(f'n must be >= 1, got {n}')
    if n == 1:
        return 0.0
    if avg_indegree < 0 or avg_indegree > (n - 1) / 2:
        raise base.ValidationError(
            f'avg_indegree must lie in [0, {(n - 1) / 2}] for {n} nodes, '
            f'got {avg_indegree}'
        )
    return avg_indegree * n / (n * (n - 1) / 2)


def random_dag(
    n: int,
    avg_indegree: float,
    seed: int,
    nodes: typing.Sequence[Node] | None = None,
) -> CausalGraph:
    """Random DAG: a uniform node order with independent forward edges."""
    probability = edge_probability(n, avg_indegree)
    nodes = node_names(n) if nodes is None else tuple(nodes)
    if len(nodes) != n:
        raise base.ValidationError(
            f'Expected {n} node names, got {len(nodes)}'
        )

    rng = utils.make_rng(seed)
    order = rng.permutation(n)
    sources, targets = np.triu_indices(n, k=1)
    keep = rng.random(sources.size) < probability
    edges = {
        (nodes[order[src]], nodes[order[dst]])
        for src, dst in zip(sources[keep], targets[keep])
    }
    return CausalGraph(nodes, frozenset(edges))


def _is_stable(params: SHPParams, generator: Generator) -> tuple[bool, float]:
    continuous = generator is Generator.CONTINUOUS
    radius = params.spectral_radius(continuous=continuous)
    return radius < 1.0, radius


def sample_params(
    graph: CausalGraph, cfg: SimConfig, seed: int | None = None
) -> SHPParams:
    """Uniform strengths on the graph's edges and uniform base intensities.

    Parameter sets whose branching matrix is not stable are redrawn, up to
    `cfg.max_resample` times.

    Raises:
        StabilityError: if no stable draw was found.
    """
    if seed is None:
        seed = utils.derive_seed(cfg.seed, 'params')
    rng = utils.make_rng(seed)
    n = len(graph.nodes)
    support = graph.adjacency()
    low, high = cfg.alpha_range
    radius = math.inf
    for attempt in range(1, cfg.max_resample + 1):
        A = np.where(support, rng.uniform(low, high, size=(n, n)), 0.0)
        if cfg.self_excitation:
            np.fill_diagonal(A, rng.uniform(*cfg.self_alpha_range, size=n))
        mu = rng.uniform(*cfg.mu_range, size=n)
        params = SHPParams(A, mu, cfg.beta, cfg.delta)
        stable, radius = _is_stable(params, cfg.generator)
        if stable:
            if attempt > 1:
                logger.info('Found stable parameters on attempt %d', attempt)
            return params
        logger.debug('Attempt %d: spectral radius %.4g', attempt, radius)
    raise base.StabilityError(radius, cfg.max_resample)


def simulate_continuous(
    params: SHPParams, graph: CausalGraph, horizon: float, seed: int
) -> ContinuousSequence:
    """Multivariate exponential Hawkes stream on ``(0, horizon]``.

    Between events every excitation decays, so the intensity right after the
    last accepted event bounds it until the next candidate.
    """
    validate_support(params, graph)
    if math.isinf(params.beta):
        raise base.ValidationError(
            'The continuous simulator needs a finite beta'
        )
    radius = params.spectral_radius(continuous=True)
    if radius >= 1.0:
        raise base.StabilityError(radius, 1)
    if horizon < 0 or not math.isfinite(horizon):
        raise base.ValidationError(f'horizon must be >= 0, got {horizon}')

    rng = utils.make_rng(seed)
    jumps = params.A * params.beta
    excitation = np.zeros(params.n_nodes)
    records: list[EventRecord] = []
    now = 0.0
    while True:
        bound = float(params.mu.sum() + excitation.sum())
        if bound <= 0:
            break
        wait = rng.exponential(1.0 / bound)
        now += wait
        if now > horizon:
            break
        excitation *= math.exp(-params.beta * wait)
        intensities = params.mu + excitation
        cumulative = np.cumsum(intensities)
        threshold = rng.uniform(0.0, bound)
        if threshold >= cumulative[-1]:
            continue
        node = int(np.searchsorted(cumulative, threshold, side='right'))
        records.append(EventRecord(graph.nodes[node], now))
        excitation += jumps[node]

    logger.debug('Simulated %d events up to %g', len(records), horizon)
    return ContinuousSequence(tuple(records), horizon)


def simulate_discrete(
    params: SHPParams, graph: CausalGraph, n_bins: int, seed: int
) -> BinnedCounts:
    """Counts drawn bin by bin, each node after its parents.

    With lagged terms disabled (``beta = inf``) bins are independent and
    each node's column is drawn in one go, in topological order.

    Raises:
        CyclicGraphError: if `graph` has a directed cycle.
    """
    validate_support(params, graph)
    order = [graph.index(node) for node in topological_order(graph)]
    if n_bins < 0:
        raise base.ValidationError(f'n_bins must be >= 0, got {n_bins}')

    rng = utils.make_rng(seed)
    n_nodes = params.n_nodes
    delta = params.delta
    instantaneous = np.array(params.A)
    np.fill_diagonal(instantaneous, 0.0)
    counts = np.zeros((n_bins, n_nodes), dtype=np.int64)

    if params.decay == 0.0:
        for node in order:
            rates = params.mu[node] + counts @ instantaneous[:, node]
            counts[:, node] = rng.poisson(rates * delta)
        return BinnedCounts(counts, delta, graph.nodes)

    lags = np.zeros(n_nodes)
    for k in range(n_bins):
        lagged = params.mu + lags @ params.A
        row = counts[k]
        for node in order:
            rate = lagged[node] + row @ instantaneous[:, node]
            row[node] = rng.poisson(rate * delta)
        lags = params.decay * (lags + row)
    return BinnedCounts(counts, delta, graph.nodes)


def simulate_instantaneous_pair(
    alpha: float, mu_x: float, mu_y: float, n: int, seed: int
) -> BinnedCounts:
    """Rows of ``X ~ Poisson(mu_x)`` and ``Y | X ~ Poisson(alpha * X + mu_y)``.

    Columns are named ``X`` and ``Y`` and the bin width is 1, so the rates
    are per bin.
    """
    if not alpha > 0:
        raise base.ValidationError(f'alpha must be > 0, got {alpha}')
    if not mu_x > 0:
        raise base.ValidationError(f'mu_x must be > 0, got {mu_x}')
    if not mu_y >= 0:
        raise base.ValidationError(f'mu_y must be >= 0, got {mu_y}')
    if n < 1:
        raise base.ValidationError(f'n must be >= 1, got {n}')

    rng = utils.make_rng(seed)
    cause = rng.poisson(mu_x, size=n)
    effect = rng.poisson(alpha * cause + mu_y)
    return BinnedCounts(np.column_stack([cause, effect]), 1.0, ('X', 'Y'))


def simulate(
    cfg: SimConfig,
    graph: CausalGraph,
    params: SHPParams,
    seed: int | None = None,
) -> tuple[BinnedCounts, ContinuousSequence | None]:
    """Counts over `cfg.n_bins` bins from the configured generator."""
    if seed is None:
        seed = utils.derive_seed(cfg.seed, 'data')
    if cfg.generator is Generator.DISCRETE:
        return simulate_discrete(params, graph, cfg.n_bins, seed), None

    events = simulate_continuous(params, graph, cfg.horizon, seed)
    counts = bin_events(events, cfg.delta, graph.nodes)
    return counts, events


def simulate_dataset(cfg: SimConfig) -> SimulatedDataset:
    """Graph, parameters and counts from the single seed in `cfg`."""
    with utils.log_duration(
        'Simulating %d nodes over %d bins', cfg.n_nodes, cfg.n_bins
    ):
        graph = random_dag(
            cfg.n_nodes, cfg.avg_indegree, utils.derive_seed(cfg.seed, 'dag')
        )
        params = sample_params(graph, cfg)
        counts, events = simulate(cfg, graph, params)
    return SimulatedDataset(graph, params, counts, events)
