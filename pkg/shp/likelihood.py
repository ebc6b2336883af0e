"""Conditional intensities and the Poisson log-likelihood of binned counts.

For bin ``k`` the intensity of node ``v`` is::

    lambda[k, v] = mu[v] + sum_u A[u, v] * (L[k, u] + [u != v] * X[k, u])

where ``L[k, u] = sum_{i < k} exp(-beta * (k - i) * delta) * X[i, u]`` is the
decayed history of node ``u``. Same-bin counts of other nodes act at full
strength, a node never excites itself within its own bin.

The reported log-likelihood is the full Poisson log-pmf including the
``-log(X!) + X log(delta)`` term, so values compare across graphs and match a
term-by-term pmf evaluation.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import signal, special

from . import base
from .events import BinnedCounts
from .graph import CausalGraph
from .params import SHPParams, validate_support

logger = logging.getLogger(__name__)

Node = typing.Hashable


@dataclasses.dataclass(frozen=True)
class LagState:
    """Decayed history ``L[k, v]`` of every node, parameter free given beta.

    Satisfies ``L[k] = decay * (L[k - 1] + X[k - 1])`` with ``L[0] = 0``.
    """

    lags: np.ndarray
    decay: float

    @classmethod
    def from_counts(cls, counts: BinnedCounts, beta: float) -> LagState:
        decay = math.exp(-float(beta) * counts.delta)
        values = counts.counts.astype(float)
        if decay == 0.0 or counts.n_bins == 0:
            lags = np.zeros_like(values)
        else:
            lags = signal.lfilter([0.0, decay], [1.0, -decay], values, axis=0)
        lags.flags.writeable = False
        return cls(lags, decay)


@dataclasses.dataclass(frozen=True)
class CountDesign:
    """Everything about the counts that the fitting loop reuses.

    `excitation` holds ``L + X`` (sources acting on other nodes, same bin
    included) and `history` holds ``L`` (a node acting on itself).
    """

    counts: BinnedCounts
    beta: float
    values: np.ndarray
    history: np.ndarray
    excitation: np.ndarray

    @classmethod
    def build(cls, counts: BinnedCounts, beta: float) -> CountDesign:
        values = counts.counts.astype(float)
        values.flags.writeable = False
        history = LagState.from_counts(counts, beta).lags
        excitation = history + values
        excitation.flags.writeable = False
        return cls(counts, float(beta), values, history, excitation)

    @property
    def delta(self) -> float:
        return self.counts.delta

    @property
    def n_bins(self) -> int:
        return self.counts.n_bins

    def source_column(self, source: int, target: int) -> np.ndarray:
        """Per-bin kernel-weighted counts of `source` acting on `target`."""
        if source == target:
            return self.history[:, source]
        return self.excitation[:, source]


@dataclasses.dataclass(frozen=True)
class IntensityMatrix:
    values: np.ndarray
    delta: float


def poisson_log_pmf(counts: np.ndarray, rate: np.ndarray) -> np.ndarray:
    """
    Elementwise ``log P(X = counts)`` for ``X ~ Poisson(rate)``.

    >>> float(poisson_log_pmf(np.array(0.0), np.array(1.0)))
    -1.0
    >>> round(float(poisson_log_pmf(np.array(2.0), np.array(2.0))), 10)
    -1.3068528194
    """
    return special.xlogy(counts, rate) - rate - special.gammaln(counts + 1.0)


def check_dimensions(
    params: SHPParams, counts: BinnedCounts, graph: CausalGraph
) -> None:
    if not (params.n_nodes == counts.n_nodes == len(graph.nodes)):
        raise base.ValidationError(
            f'Dimension mismatch: {params.n_nodes} parameter nodes, '
            f'{counts.n_nodes} count columns, {len(graph.nodes)} graph nodes'
        )
    if tuple(graph.nodes) != tuple(counts.node_names):
        raise base.ValidationError(
            'Graph nodes and count columns must be in the same order'
        )
    if not math.isclose(params.delta, counts.delta, rel_tol=1e-12):
        raise base.ValidationError(
            f'Parameter delta {params.delta} does not match the counts '
            f'delta {counts.delta}'
        )


def intensity_from_design(
    params: SHPParams, design: CountDesign
) -> np.ndarray:
    """Raw ``K x V`` intensity array, no validation."""
    instantaneous = np.array(params.A)
    np.fill_diagonal(instantaneous, 0.0)
    return (
        params.mu[np.newaxis, :]
        + design.history @ params.A
        + design.values @ instantaneous
    )


def intensity(
    params: SHPParams,
    counts: BinnedCounts,
    graph: CausalGraph,
    design: CountDesign | None = None,
) -> IntensityMatrix:
    """Conditional intensity of every node in every bin."""
    check_dimensions(params, counts, graph)
    validate_support(params, graph)
    if design is None:
        design = CountDesign.build(counts, params.beta)
    values = intensity_from_design(params, design)
    values.flags.writeable = False
    return IntensityMatrix(values, counts.delta)


def _column_terms(
    counts: BinnedCounts, rates: np.ndarray
) -> np.ndarray:
    values = counts.counts
    impossible = (rates <= 0) & (values > 0)
    if impossible.any():
        row, column = np.argwhere(impossible)[0]
        raise base.ZeroIntensityError(counts.node_names[column], int(row) + 1)
    return poisson_log_pmf(values.astype(float), rates).sum(axis=0)


def column_log_likelihood(
    params: SHPParams,
    counts: BinnedCounts,
    graph: CausalGraph,
    design: CountDesign | None = None,
) -> np.ndarray:
    """Log-likelihood contribution of each node (column)."""
    rates = intensity(params, counts, graph, design).values * counts.delta
    return _column_terms(counts, rates)


def log_likelihood(
    params: SHPParams,
    counts: BinnedCounts,
    graph: CausalGraph,
    design: CountDesign | None = None,
) -> float:
    """Sum of Poisson log-pmfs of every count given its intensity.

    Raises:
        ZeroIntensityError: if a positive count meets a zero intensity.
    """
    return float(column_log_likelihood(params, counts, graph, design).sum())


def penalized_score(
    params: SHPParams,
    counts: BinnedCounts,
    graph: CausalGraph,
    alpha_s: float,
    design: CountDesign | None = None,
) -> float:
    """Log-likelihood minus `alpha_s` per graph edge.

    Only off-diagonal edges count, lagged self-excitation is never penalized.
    """
    if alpha_s < 0:
        raise base.ValidationError(f'alpha_s must be >= 0, got {alpha_s}')
    return log_likelihood(params, counts, graph, design) - alpha_s * len(
        graph.edges
    )


class FamilyFitter(typing.Protocol):
    def __call__(
        self,
        node: Node,
        parents: typing.Collection[Node],
        counts: BinnedCounts,
    ) -> typing.Any: ...


def local_score(
    node: Node,
    parents: typing.Collection[Node],
    counts: BinnedCounts,
    alpha_s: float,
    fit_fn: FamilyFitter,
) -> float:
    """Penalized score of one node given its parent set.

    `fit_fn` fits the node's column and returns an object with a
    `log_likelihood` attribute, see :func:`shp.estimator.family_fitter`.
    Summed over all nodes of a DAG this equals :func:`penalized_score` of the
    jointly fitted model.
    """
    if node in parents:
        raise base.ValidationError(f'{node!r} cannot be its own parent')
    family = fit_fn(node, parents, counts)
    return float(family.log_likelihood) - alpha_s * len(parents)
