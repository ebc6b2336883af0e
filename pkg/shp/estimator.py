"""Minorization-maximization fitting of the strengths and base intensities.

The log-likelihood is a sum of independent per-node (column) terms, each
depending only on that node's base intensity and incoming strengths. Every
routine here therefore works column by column on a `_Column`, which keeps
the joint fit, the single family fit used by the search and the one-step
update numerically identical.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing

import numpy as np

from . import base, utils
from .config import FitConfig, MuInit
from .events import BinnedCounts
from .graph import CausalGraph, require_acyclic
from .likelihood import (
    CountDesign,
    check_dimensions,
    intensity_from_design,
    poisson_log_pmf,
)
from .params import SHPParams, validate_support

logger = logging.getLogger(__name__)

Node = typing.Hashable


@dataclasses.dataclass(frozen=True)
class FitResult:
    params: SHPParams
    loglik_trace: tuple[float, ...]
    converged: bool
    iterations: int
    graph: CausalGraph

    @property
    def log_likelihood(self) -> float:
        return self.loglik_trace[-1]

    def penalized_score(self, alpha_s: float) -> float:
        return self.log_likelihood - alpha_s * len(self.graph.edges)

    def to_dict(self) -> dict[str, typing.Any]:
        return {
            'graph': self.graph.to_dict(),
            'params': self.params.to_dict(self.graph.nodes),
            'log_likelihood': self.log_likelihood,
            'loglik_trace': list(self.loglik_trace),
            'converged': self.converged,
            'iterations': self.iterations,
        }


@dataclasses.dataclass(frozen=True)
class FamilyFit:
    """Fit of one node given its parents.

    `alpha` maps each source (the parents, plus the node itself when lagged
    self-excitation is fitted) to its strength on `node`.
    """

    node: Node
    parents: tuple[Node, ...]
    mu: float
    alpha: dict[Node, float]
    log_likelihood: float
    loglik_trace: tuple[float, ...]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.loglik_trace) - 1


@dataclasses.dataclass(frozen=True)
class Responsibilities:
    """Share of each intensity explained by the base rate and by each source.

    `q_mu[k, v]` is ``mu[v] / lambda[k, v]``. `q_alpha[k, u, v]` is the share
    of ``lambda[k, v]`` caused by all earlier (and same-bin) events of `u`,
    summed over their bins. Single-bin shares come from :meth:`entry`.
    """

    q_mu: np.ndarray
    q_alpha: np.ndarray
    params: SHPParams
    design: CountDesign
    intensities: np.ndarray

    def entry(self, target: int, k: int, source: int, i: int) -> float:
        """Share of ``lambda[k, target]`` caused by the events of `source`
        in bin `i` (bins are 1-based)."""
        if not 1 <= i <= k <= self.design.n_bins:
            return 0.0
        lag = k - i
        if source == target and lag == 0:
            return 0.0
        kernel = self.params.decay**lag if lag else 1.0
        count = self.design.values[i - 1, source]
        strength = self.params.A[source, target]
        rate = self.intensities[k - 1, target]
        return float(strength * kernel * count / rate)


def responsibilities(
    params: SHPParams, counts: BinnedCounts, graph: CausalGraph
) -> Responsibilities:
    """Posterior shares of every intensity term.

    Raises:
        ZeroIntensityError: if any intensity is zero.
    """
    check_dimensions(params, counts, graph)
    validate_support(params, graph)
    design = CountDesign.build(counts, params.beta)
    rates = intensity_from_design(params, design)
    if rates.size and rates.min() <= 0:
        row, column = np.argwhere(rates <= 0)[0]
        raise base.ZeroIntensityError(counts.node_names[column], int(row) + 1)

    q_mu = params.mu[np.newaxis, :] / rates
    # [k, u, v]: strength u -> v times what u offers in bin k
    offered = design.excitation[:, :, np.newaxis] * params.A[np.newaxis]
    diagonal = np.arange(params.n_nodes)
    offered[:, diagonal, diagonal] = (
        design.history * np.diag(params.A)[np.newaxis, :]
    )
    q_alpha = offered / rates[:, np.newaxis, :]
    return Responsibilities(q_mu, q_alpha, params, design, rates)


@dataclasses.dataclass(frozen=True)
class _Column:
    """The sufficient statistics of one node's likelihood term."""

    target: int
    sources: tuple[int, ...]
    counts: np.ndarray
    offered: np.ndarray
    denominators: np.ndarray
    delta: float

    @classmethod
    def build(
        cls, design: CountDesign, target: int, sources: typing.Sequence[int]
    ) -> _Column:
        sources = tuple(sources)
        offered = np.empty((design.n_bins, len(sources)))
        for position, source in enumerate(sources):
            offered[:, position] = design.source_column(source, target)
        # Parameter free, so computed once per family
        denominators = design.delta * offered.sum(axis=0)
        return cls(
            target,
            sources,
            design.values[:, target],
            offered,
            denominators,
            design.delta,
        )

    @property
    def n_bins(self) -> int:
        return self.counts.shape[0]

    def rates(self, mu: float, alpha: np.ndarray) -> np.ndarray:
        return mu + self.offered @ alpha

    def log_likelihood(
        self, mu: float, alpha: np.ndarray, node: Node
    ) -> float:
        rates = self.rates(mu, alpha)
        impossible = (rates <= 0) & (self.counts > 0)
        if impossible.any():
            raise base.ZeroIntensityError(
                node, int(np.argmax(impossible)) + 1
            )
        return float(poisson_log_pmf(self.counts, rates * self.delta).sum())

    def update(
        self, mu: float, alpha: np.ndarray, mu_floor: float, node: Node
    ) -> tuple[float, np.ndarray]:
        rates = self.rates(mu, alpha)
        impossible = (rates <= 0) & (self.counts > 0)
        if impossible.any():
            raise base.ZeroIntensityError(
                node, int(np.argmax(impossible)) + 1
            )
        weights = np.divide(
            self.counts,
            rates,
            out=np.zeros_like(self.counts),
            where=rates > 0,
        )
        new_mu = mu * weights.sum() / (self.n_bins * self.delta)
        numerators = alpha * (self.offered.T @ weights)
        # No upstream events means no information, the strength drops to 0
        new_alpha = np.divide(
            numerators,
            self.denominators,
            out=np.zeros_like(numerators),
            where=self.denominators > 0,
        )
        return max(new_mu, mu_floor), new_alpha


def _has_converged(previous: float, current: float, rel_tol: float) -> bool:
    change = abs(current - previous)
    return change == 0 or change < rel_tol * abs(current)


def _climb(
    column: _Column,
    mu: float,
    alpha: np.ndarray,
    cfg: FitConfig,
    node: Node,
) -> tuple[float, np.ndarray, list[float], bool]:
    current = column.log_likelihood(mu, alpha, node)
    trace = [current]
    for _ in range(cfg.max_iters):
        mu, alpha = column.update(mu, alpha, cfg.mu_floor, node)
        previous, current = current, column.log_likelihood(mu, alpha, node)
        trace.append(current)
        if _has_converged(previous, current, cfg.rel_tol):
            return mu, alpha, trace, True
    return mu, alpha, trace, False


def initial_mu(counts: BinnedCounts, cfg: FitConfig) -> np.ndarray:
    """
    Starting base intensities, never below `cfg.mu_floor`.

    >>> counts = BinnedCounts(np.array([[2, 0], [0, 0]]), 0.5, ('a', 'b'))
    >>> initial_mu(counts, FitConfig()).tolist()
    [2.0, 1e-10]
    >>> initial_mu(counts, FitConfig(mu_init='pooled')).tolist()
    [1.0, 1.0]
    """
    means = counts.counts.mean(axis=0) / counts.delta
    if cfg.mu_init is MuInit.POOLED:
        means = np.full(counts.n_nodes, counts.counts.mean() / counts.delta)
    return np.maximum(means, cfg.mu_floor)


def _sources(
    target: int,
    parents: typing.Iterable[int],
    self_excitation: bool,
) -> list[int]:
    sources = sorted(set(parents))
    if self_excitation:
        sources.append(target)
    return sources


def _require_bins(counts: BinnedCounts) -> None:
    if counts.n_bins < 1:
        raise base.ValidationError('Fitting needs at least one bin')


def _design_for(
    counts: BinnedCounts, beta: float, design: CountDesign | None
) -> CountDesign:
    if design is None:
        return CountDesign.build(counts, beta)
    if design.counts is not counts or design.beta != beta:
        raise base.ValidationError('The design was built for other data')
    return design


def fit_family(
    node: Node,
    parents: typing.Collection[Node],
    counts: BinnedCounts,
    cfg: FitConfig | None = None,
    design: CountDesign | None = None,
) -> FamilyFit:
    """Fit one node's base intensity and incoming strengths.

    This is the joint fit restricted to a single column, for any graph in
    which `node` has exactly `parents`.
    """
    cfg = cfg or FitConfig()
    _require_bins(counts)
    design = _design_for(counts, cfg.beta, design)
    target = counts.index(node)
    parent_indices = [counts.index(parent) for parent in parents]
    if target in parent_indices:
        raise base.ValidationError(f'{node!r} cannot be its own parent')

    sources = _sources(target, parent_indices, cfg.self_excitation)
    column = _Column.build(design, target, sources)
    alpha = np.where(column.denominators > 0, cfg.alpha_init, 0.0)
    mu = float(initial_mu(counts, cfg)[target])
    mu, alpha, trace, converged = _climb(column, mu, alpha, cfg, node)

    names = counts.node_names
    ordered_parents = tuple(
        names[index] for index in sorted(set(parent_indices))
    )
    logger.debug(
        'Fitted %r given %s: %.6f after %d iterations',
        node,
        ordered_parents,
        trace[-1],
        len(trace) - 1,
    )
    return FamilyFit(
        node=node,
        parents=ordered_parents,
        mu=mu,
        alpha={
            names[source]: float(value)
            for source, value in zip(sources, alpha)
        },
        log_likelihood=trace[-1],
        loglik_trace=tuple(trace),
        converged=converged,
    )


def family_fitter(
    counts: BinnedCounts, cfg: FitConfig | None = None
) -> typing.Callable[[Node, typing.Collection[Node], BinnedCounts], FamilyFit]:
    """A `fit_fn` for :func:`shp.likelihood.local_score` that reuses one
    precomputed design for `counts`."""
    cfg = cfg or FitConfig()
    design = CountDesign.build(counts, cfg.beta)

    def fit_fn(
        node: Node, parents: typing.Collection[Node], data: BinnedCounts
    ) -> FamilyFit:
        return fit_family(
            node, parents, data, cfg, design if data is counts else None
        )

    return fit_fn


def mm_step(
    params: SHPParams,
    counts: BinnedCounts,
    graph: CausalGraph,
    mu_floor: float = 0.0,
) -> SHPParams:
    """One minorization-maximization update of all parameters.

    Updates are multiplicative, so zero strengths (outside the graph's edges
    or on a disabled diagonal) stay zero.
    """
    check_dimensions(params, counts, graph)
    validate_support(params, graph)
    _require_bins(counts)
    design = CountDesign.build(counts, params.beta)

    A = np.zeros_like(params.A)
    mu = np.zeros_like(params.mu)
    for target, node in enumerate(graph.nodes):
        parents = [graph.index(parent) for parent in graph.parents(node)]
        sources = _sources(target, parents, True)
        column = _Column.build(design, target, sources)
        mu[target], alpha = column.update(
            float(params.mu[target]),
            params.A[sources, target],
            mu_floor,
            node,
        )
        A[sources, target] = alpha
    return params.replace(A=A, mu=mu)


def fit_graph(
    graph: CausalGraph,
    counts: BinnedCounts,
    cfg: FitConfig | None = None,
    threads: int = 1,
) -> FitResult:
    """Fit `graph` without requiring it to be acyclic.

    Columns converge independently and a converged column stays frozen, the
    joint trace sums the latest value of every column.
    """
    cfg = cfg or FitConfig()
    _require_bins(counts)
    if tuple(graph.nodes) != tuple(counts.node_names):
        raise base.ValidationError(
            'Graph nodes and count columns must be in the same order'
        )
    design = CountDesign.build(counts, cfg.beta)

    def fit_column(node: Node) -> FamilyFit:
        return fit_family(node, graph.parents(node), counts, cfg, design)

    families = utils.map_ordered(fit_column, graph.nodes, threads)

    n_nodes = counts.n_nodes
    A = np.zeros((n_nodes, n_nodes))
    mu = np.zeros(n_nodes)
    for target, family in enumerate(families):
        mu[target] = family.mu
        for source, value in family.alpha.items():
            A[counts.index(source), target] = value

    iterations = max(family.iterations for family in families)
    trace = []
    for step in range(iterations + 1):
        trace.append(
            math.fsum(
                family.loglik_trace[min(step, family.iterations)]
                for family in families
            )
        )
    converged = all(family.converged for family in families)
    if not converged:
        logger.warning(
            'Fit stopped after %d iterations without converging', iterations
        )
    params = SHPParams(A, mu, cfg.beta, counts.delta)
    logger.info(
        'Fitted %d edges: log-likelihood %.6f after %d iterations',
        len(graph.edges),
        trace[-1],
        iterations,
    )
    return FitResult(params, tuple(trace), converged, iterations, graph)


def fit(
    graph: CausalGraph,
    counts: BinnedCounts,
    cfg: FitConfig | None = None,
    threads: int = 1,
) -> FitResult:
    """Fit the parameters of an acyclic graph by MM iteration.

    Raises:
        CyclicGraphError: if `graph` has a directed cycle.
    """
    require_acyclic(graph)
    return fit_graph(graph, counts, cfg, threads)
