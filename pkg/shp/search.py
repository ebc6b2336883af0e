"""Greedy structure search over DAGs and the thresholding alternative.

The penalized score decomposes into one local score per node that depends
only on that node's parent set. A candidate graph is scored by summing the
local scores of its families, most of which are shared with the current
graph and come from the :class:`ScoreCache`.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import threading
import typing

import numpy as np

from . import base, estimator, progress, utils
from .config import FitConfig, SearchConfig
from .events import BinnedCounts
from .graph import CausalGraph, Edge, is_acyclic
from .likelihood import local_score
from .params import SHPParams

logger = logging.getLogger(__name__)

Node = typing.Hashable
FamilyKey = typing.Tuple[Node, typing.FrozenSet[Node]]


class Move(str, enum.Enum):
    ADD = 'add'
    DELETE = 'delete'
    REVERSE = 'reverse'


class Candidate(typing.NamedTuple):
    move: Move
    edge: Edge
    graph: CausalGraph

    def changed_nodes(self) -> tuple[Node, ...]:
        """Nodes whose parent set differs from the graph the move started
        from: the target of an added or deleted edge, both ends of a
        reversed one."""
        src, dst = self.edge
        if self.move is Move.REVERSE:
            return (dst, src)
        return (dst,)


def candidates(graph: CausalGraph) -> list[Candidate]:
    """Acyclic single-edge moves from `graph`.

    Additions come first, then deletions, then reversals, each ordered by
    the (source, target) node indices of the edge.
    """
    nodes = graph.nodes
    moves: list[Candidate] = []
    for src in nodes:
        for dst in nodes:
            if src == dst or (src, dst) in graph.edges:
                continue
            if (dst, src) in graph.edges:
                continue
            moves.append(
                Candidate(Move.ADD, (src, dst), graph.add_edge(src, dst))
            )

    existing = graph.sorted_edges()
    for src, dst in existing:
        moves.append(
            Candidate(Move.DELETE, (src, dst), graph.remove_edge(src, dst))
        )
    for src, dst in existing:
        moves.append(
            Candidate(Move.REVERSE, (src, dst), graph.reverse_edge(src, dst))
        )
    return [
        candidate
        for candidate in moves
        if candidate.move is Move.DELETE or is_acyclic(candidate.graph)
    ]


def neighborhood(graph: CausalGraph) -> list[CausalGraph]:
    """
    All acyclic graphs one edge addition, deletion or reversal away.

    >>> graph = CausalGraph(('a', 'b'), {('a', 'b')})
    >>> [sorted(neighbor.edges) for neighbor in neighborhood(graph)]
    [[], [('b', 'a')]]
    """
    return [candidate.graph for candidate in candidates(graph)]


class ScoreCache:
    """Local scores keyed by node and parent set, safe to share between
    threads.

    A disabled cache never remembers anything, every request fits afresh.
    """

    def __init__(
        self,
        counts: BinnedCounts,
        alpha_s: float,
        fit_cfg: FitConfig | None = None,
        enabled: bool = True,
    ) -> None:
        self.counts = counts
        self.alpha_s = alpha_s
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        self.fits = 0
        self._fit_fn = estimator.family_fitter(counts, fit_cfg)
        self._scores: dict[FamilyKey, float] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(node: Node, parents: typing.Iterable[Node]) -> FamilyKey:
        return node, frozenset(parents)

    def __len__(self) -> int:
        return len(self._scores)

    def __contains__(self, key: FamilyKey) -> bool:
        return key in self._scores

    def lookup(
        self, node: Node, parents: typing.Iterable[Node]
    ) -> float | None:
        with self._lock:
            score = None
            if self.enabled:
                score = self._scores.get(self.key(node, parents))
            if score is None:
                self.misses += 1
            else:
                self.hits += 1
            return score

    def store(
        self, node: Node, parents: typing.Iterable[Node], score: float
    ) -> None:
        if not self.enabled:
            return
        with self._lock:
            self._scores.setdefault(self.key(node, parents), score)

    def compute(self, node: Node, parents: typing.Iterable[Node]) -> float:
        """Fit the family and store its local score."""
        parents = self.canonical_parents(parents)
        score = local_score(
            node, parents, self.counts, self.alpha_s, self._fit_fn
        )
        with self._lock:
            self.fits += 1
        self.store(node, parents, score)
        return score

    def score(self, node: Node, parents: typing.Iterable[Node]) -> float:
        parents = self.canonical_parents(parents)
        score = self.lookup(node, parents)
        if score is None:
            score = self.compute(node, parents)
        return score

    def canonical_parents(
        self, parents: typing.Iterable[Node]
    ) -> tuple[Node, ...]:
        """Parents in count column order."""
        return tuple(sorted(parents, key=self.counts.index))

    def stats(self) -> dict[str, int]:
        return {
            'hits': self.hits,
            'misses': self.misses,
            'fits': self.fits,
            'size': len(self._scores),
        }


def score_cache_lookup(
    cache: ScoreCache, node: Node, parents: typing.Iterable[Node]
) -> float | None:
    """The cached local score of `node` given `parents`, None on a miss."""
    return cache.lookup(node, parents)


@dataclasses.dataclass(frozen=True)
class SearchResult:
    graph: CausalGraph
    params: SHPParams
    score: float
    score_trace: tuple[float, ...]
    visited: int
    alpha_s: float
    fit: estimator.FitResult
    cache_stats: dict[str, int] = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict[str, typing.Any]:
        return {
            'graph': self.graph.to_dict(),
            'params': self.params.to_dict(self.graph.nodes),
            'score': self.score,
            'score_trace': list(self.score_trace),
            'log_likelihood': self.fit.log_likelihood,
            'alpha_s': self.alpha_s,
            'visited': self.visited,
            'converged': self.fit.converged,
            'cache': dict(self.cache_stats),
        }


def _score_candidates(
    moves: list[Candidate],
    current: dict[Node, float],
    cache: ScoreCache,
    threads: int,
) -> list[tuple[float, dict[Node, float]]]:
    """Score every candidate, fitting missing families in parallel."""
    requests: list[tuple[Node, tuple[Node, ...]]] = []
    for candidate in moves:
        for node in candidate.changed_nodes():
            requests.append(
                (node, cache.canonical_parents(candidate.graph.parents(node)))
            )

    if cache.enabled:
        known: dict[tuple[Node, tuple[Node, ...]], float] = {}
        missing = []
        for family in dict.fromkeys(requests):
            score = cache.lookup(*family)
            if score is None:
                missing.append(family)
            else:
                known[family] = score
        fitted = utils.map_ordered(
            lambda family: cache.compute(*family), missing, threads
        )
        known.update(zip(missing, fitted))
        scores = [known[family] for family in requests]
    else:
        scores = utils.map_ordered(
            lambda family: cache.compute(*family), requests, threads
        )

    results = []
    position = 0
    for candidate in moves:
        changed = {}
        for node in candidate.changed_nodes():
            changed[node] = scores[position]
            position += 1
        total = math.fsum(changed.get(node, current[node]) for node in current)
        results.append((total, changed))
    return results


def _require_data(counts: BinnedCounts) -> None:
    if counts.n_bins < 1 or counts.n_nodes < 1:
        raise base.ValidationError(
            'Structure search needs at least one bin and one node'
        )


def hill_climb(
    counts: BinnedCounts, cfg: SearchConfig | None = None
) -> SearchResult:
    """Greedy search from the empty graph.

    Each sweep scores every acyclic neighbor and moves to the best one if it
    beats the current score by more than `cfg.min_improvement`. Ties go to
    the first candidate in :func:`candidates` order.
    """
    cfg = cfg or SearchConfig()
    _require_data(counts)
    alpha_s = cfg.resolve_alpha_s(counts.n_bins)
    cache = ScoreCache(counts, alpha_s, cfg.fit_cfg, enabled=cfg.use_cache)
    threads = cfg.workers

    graph = CausalGraph.empty(counts.node_names)
    empty_scores = utils.map_ordered(
        lambda node: cache.score(node, ()), graph.nodes, threads
    )
    current = dict(zip(graph.nodes, empty_scores))
    score = math.fsum(current.values())
    trace = [score]
    visited = 0

    with utils.log_duration('Structure search over %d nodes', counts.n_nodes):
        sweeps = progress.track(
            range(1, cfg.max_sweeps + 1),
            label='search',
            enabled=cfg.show_progress,
            max_value=cfg.max_sweeps,
        )
        for sweep in sweeps:
            moves = candidates(graph)
            if not moves:
                break
            scored = _score_candidates(moves, current, cache, threads)
            visited += len(moves)

            totals = np.array([total for total, _changed in scored])
            best = int(np.argmax(totals))
            best_score, changed = scored[best]
            if not best_score > score + cfg.min_improvement:
                logger.info('Sweep %d: no improving move', sweep)
                break

            move = moves[best]
            graph = move.graph
            current.update(changed)
            score = best_score
            trace.append(score)
            logger.info(
                'Sweep %d: %s %r -> %r, score %.6f',
                sweep,
                move.move.value,
                *move.edge,
                score,
            )
        else:
            logger.warning('Search stopped after %d sweeps', cfg.max_sweeps)

    fitted = estimator.fit(graph, counts, cfg.fit_cfg, threads=threads)
    logger.debug('Score cache: %s', cache.stats())
    return SearchResult(
        graph=graph,
        params=fitted.params,
        score=fitted.penalized_score(alpha_s),
        score_trace=tuple(trace),
        visited=visited,
        alpha_s=alpha_s,
        fit=fitted,
        cache_stats=cache.stats(),
    )


def threshold_graph(
    counts: BinnedCounts, tau: float, fit_cfg: FitConfig | None = None
) -> CausalGraph:
    """Edges whose strength exceeds `tau` in a fit with every edge allowed.

    The complete graph is cyclic, no acyclicity is enforced here and the
    result may be cyclic too.
    """
    if math.isnan(tau) or tau < 0:
        raise base.ValidationError(f'tau must be >= 0, got {tau}')
    _require_data(counts)
    complete = CausalGraph.complete(counts.node_names)
    fitted = estimator.fit_graph(complete, counts, fit_cfg)
    strengths = np.array(fitted.params.A)
    np.fill_diagonal(strengths, 0.0)
    return CausalGraph.from_adjacency(strengths > tau, counts.node_names)


def threshold_search(
    counts: BinnedCounts, tau: float, cfg: SearchConfig | None = None
) -> SearchResult:
    """:func:`threshold_graph` reported like a search, with the kept graph
    refitted and scored."""
    cfg = cfg or SearchConfig()
    alpha_s = cfg.resolve_alpha_s(counts.n_bins)
    graph = threshold_graph(counts, tau, cfg.fit_cfg)
    fitted = estimator.fit_graph(
        graph, counts, cfg.fit_cfg, threads=cfg.workers
    )
    score = fitted.penalized_score(alpha_s)
    return SearchResult(
        graph=graph,
        params=fitted.params,
        score=score,
        score_trace=(score,),
        visited=0,
        alpha_s=alpha_s,
        fit=fitted,
    )
