"""Metrics against a known graph and the experiment drivers.

Structural Hamming distance counts the single-edge additions, deletions and
reversals that turn one graph into the other. Every node pair is edited on
its own, so the distance is a sum over unordered pairs: a reversed edge costs
1, a missing or extra edge costs 1, and a pair connected both ways on one
side and not at all on the other costs 2.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import typing

import numpy as np
import pandas

from . import base, estimator, progress, simulator, utils
from .config import FitConfig, SearchConfig, SweepSpec
from .events import BinnedCounts, ContinuousSequence, bin_events
from .graph import CausalGraph
from .search import hill_climb, threshold_graph

logger = logging.getLogger(__name__)

#: Fit settings of the two-variable studies: per-bin rates with no lagged
#: terms, run to a tight tolerance so the per-sample gap is resolved.
PAIR_FIT = FitConfig(
    max_iters=2000,
    rel_tol=1e-10,
    beta=math.inf,
    self_excitation=False,
)

METRICS = ('precision', 'recall', 'f1', 'shd')


@dataclasses.dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f1: float
    shd: int
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0

    def to_dict(self) -> dict[str, typing.Any]:
        return dataclasses.asdict(self)


def _matrices(
    truth: CausalGraph, estimated: CausalGraph
) -> tuple[np.ndarray, np.ndarray]:
    if set(truth.nodes) != set(estimated.nodes):
        raise base.ValidationError(
            'Graphs must share one node set, got '
            f'{sorted(map(str, truth.nodes))} and '
            f'{sorted(map(str, estimated.nodes))}'
        )
    aligned = CausalGraph(truth.nodes, estimated.edges)
    return truth.adjacency(), aligned.adjacency()


def structural_hamming_distance(
    truth: CausalGraph, estimated: CausalGraph
) -> int:
    """
    Minimal number of single-edge edits between two directed graphs.

    >>> a_to_b = CausalGraph(('a', 'b'), {('a', 'b')})
    >>> structural_hamming_distance(a_to_b, a_to_b.reverse_edge('a', 'b'))
    1
    >>> structural_hamming_distance(a_to_b, CausalGraph.complete(('a', 'b')))
    1
    """
    true_matrix, estimated_matrix = _matrices(truth, estimated)
    upper = np.triu_indices(len(truth.nodes), k=1)
    forward = true_matrix[upper], estimated_matrix[upper]
    backward = true_matrix.T[upper], estimated_matrix.T[upper]

    differing = (forward[0] != forward[1]).astype(int) + (
        backward[0] != backward[1]
    ).astype(int)
    true_count = forward[0].astype(int) + backward[0]
    estimated_count = forward[1].astype(int) + backward[1]
    reversed_ = (differing == 2) & (true_count == 1) & (estimated_count == 1)
    return int(differing.sum() - reversed_.sum())


def compare_graphs(truth: CausalGraph, estimated: CausalGraph) -> MetricReport:
    """Directed-edge precision, recall, F1 and SHD of `estimated`.

    When both graphs are empty every score is 1. Otherwise a ratio with a
    zero denominator is 0.
    """
    true_matrix, estimated_matrix = _matrices(truth, estimated)
    tp = int((true_matrix & estimated_matrix).sum())
    fp = int((~true_matrix & estimated_matrix).sum())
    fn = int((true_matrix & ~estimated_matrix).sum())
    shd = structural_hamming_distance(truth, estimated)

    if tp + fp + fn == 0:
        return MetricReport(1.0, 1.0, 1.0, shd, tp, fp, fn)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return MetricReport(precision, recall, f1, shd, tp, fp, fn)


@dataclasses.dataclass(frozen=True)
class GapSummary:
    """Per-sample log-likelihood advantage of the causal over the reversed
    direction, one entry per trial."""

    alpha: float
    mu_x: float
    mu_y: float
    n: int
    gaps: tuple[float, ...]

    @property
    def mean_gap(self) -> float:
        return float(np.mean(self.gaps))

    @property
    def positive_fraction(self) -> float:
        return float(np.mean(np.asarray(self.gaps) > 0))

    def to_dict(self) -> dict[str, typing.Any]:
        return {
            'alpha': self.alpha,
            'mu_x': self.mu_x,
            'mu_y': self.mu_y,
            'n': self.n,
            'trials': len(self.gaps),
            'mean_gap': self.mean_gap,
            'positive_fraction': self.positive_fraction,
            'gaps': list(self.gaps),
        }


def direction_gap(
    counts: BinnedCounts, fit_cfg: FitConfig = PAIR_FIT
) -> float:
    """Per-row log-likelihood of ``X -> Y`` minus that of ``Y -> X``."""
    forward = CausalGraph(('X', 'Y'), {('X', 'Y')})
    backward = CausalGraph(('X', 'Y'), {('Y', 'X')})
    gap = (
        estimator.fit(forward, counts, fit_cfg).log_likelihood
        - estimator.fit(backward, counts, fit_cfg).log_likelihood
    )
    return gap / counts.n_bins


def bivariate_gap(
    alpha: float,
    mu_x: float,
    mu_y: float,
    n: int,
    trials: int,
    seed: int,
    fit_cfg: FitConfig = PAIR_FIT,
    threads: int = 1,
    show_progress: bool = False,
) -> GapSummary:
    """Fit both directions on `trials` simulated pairs.

    Trial ``i`` uses the seed ``derive_seed(seed, i)``.
    """
    if not alpha > 0:
        raise base.ValidationError(f'alpha must be > 0, got {alpha}')
    if trials < 1:
        raise base.ValidationError(f'trials must be >= 1, got {trials}')

    def run_trial(trial: int) -> float:
        counts = simulator.simulate_instantaneous_pair(
            alpha, mu_x, mu_y, n, utils.derive_seed(seed, trial)
        )
        return direction_gap(counts, fit_cfg)

    gaps = progress.track(
        utils.imap_ordered(run_trial, range(trials), threads),
        label=f'alpha={alpha:g}',
        enabled=show_progress,
        max_value=trials,
    )
    summary = GapSummary(alpha, mu_x, mu_y, n, tuple(gaps))
    logger.info(
        'alpha=%g: mean gap %.6g, %.0f%% positive',
        alpha,
        summary.mean_gap,
        100 * summary.positive_fraction,
    )
    return summary


def bivariate_gap_curve(
    alphas: typing.Sequence[float],
    mu_x: float,
    mu_y: float,
    n: int,
    trials: int,
    seed: int,
    fit_cfg: FitConfig = PAIR_FIT,
    threads: int = 1,
    show_progress: bool = False,
) -> list[GapSummary]:
    """:func:`bivariate_gap` for each strength, seeded by its position."""
    return [
        bivariate_gap(
            alpha,
            mu_x,
            mu_y,
            n,
            trials,
            utils.derive_seed(seed, index),
            fit_cfg,
            threads,
            show_progress,
        )
        for index, alpha in enumerate(alphas)
    ]


def theoretical_dispersion(alpha: float, mu_x: float, mu_y: float) -> float:
    """
    Variance to mean ratio of the effect in the instantaneous pair.

    >>> round(theoretical_dispersion(0.5, 1.0, 0.1), 4)
    1.4167
    """
    return 1.0 + mu_x * alpha**2 / (mu_x * alpha + mu_y)


class DispersionReport(typing.NamedTuple):
    empirical_index: float
    theoretical_index: float
    #: Index of the cause, a Poisson variable
    cause_index: float

    def to_dict(self) -> dict[str, float]:
        return self._asdict()


def dispersion_index(values: np.ndarray) -> float:
    mean = float(np.mean(values))
    if mean == 0:
        return math.nan
    return float(np.var(values, ddof=1)) / mean


def dispersion_check(
    alpha: float, mu_x: float, mu_y: float, n: int, seed: int
) -> DispersionReport:
    """Empirical against theoretical overdispersion of the effect."""
    counts = simulator.simulate_instantaneous_pair(alpha, mu_x, mu_y, n, seed)
    return DispersionReport(
        empirical_index=dispersion_index(counts.column('Y')),
        theoretical_index=theoretical_dispersion(alpha, mu_x, mu_y),
        cause_index=dispersion_index(counts.column('X')),
    )


def identifiability_frame(
    rows: typing.Sequence[typing.Mapping[str, typing.Any]],
) -> pandas.DataFrame:
    """One row per strength: gap summary and dispersion indices, without
    the per-trial gaps."""
    records = []
    for row in rows:
        record = {
            key: value
            for key, value in row.items()
            if key not in ('gaps', 'dispersion')
        }
        for key, value in row.get('dispersion', {}).items():
            record[f'dispersion_{key}'] = value
        records.append(record)
    return pandas.DataFrame(records)


@dataclasses.dataclass(frozen=True)
class CellRecord:
    """One simulated dataset and what the search made of it."""

    value: typing.Any
    value_index: int
    repeat: int
    seed: int
    metrics: MetricReport | None = None
    ablation: MetricReport | None = None
    true_edges: int | None = None
    found_edges: int | None = None
    score: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, typing.Any]:
        data = dataclasses.asdict(self)
        data['value'] = _plain(self.value)
        return data

    def to_row(self) -> dict[str, typing.Any]:
        row: dict[str, typing.Any] = {
            'value': json.dumps(_plain(self.value)),
            'value_index': self.value_index,
            'repeat': self.repeat,
            'seed': str(self.seed),
            'true_edges': self.true_edges,
            'found_edges': self.found_edges,
            'score': self.score,
        }
        reports = (('', self.metrics), ('ablation_', self.ablation))
        for prefix, report in reports:
            for name in METRICS:
                row[prefix + name] = getattr(report, name) if report else None
        row['error'] = self.error or ''
        return row


def _plain(value: typing.Any) -> typing.Any:
    if isinstance(value, tuple):
        return list(value)
    return value


_REPORTS = (('', 'metrics'), ('ablation_', 'ablation'))


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    return float(np.mean(values)), float(np.std(values))


@dataclasses.dataclass(frozen=True)
class ExperimentReport:
    swept_parameter: str
    values: tuple[typing.Any, ...]
    cells: tuple[CellRecord, ...]
    config: dict[str, typing.Any] = dataclasses.field(default_factory=dict)

    def summary(self) -> list[dict[str, typing.Any]]:
        """Mean and standard deviation of every metric per swept value,
        over the cells that completed."""
        rows = []
        for index, value in enumerate(self.values):
            cells = [cell for cell in self.cells if cell.value_index == index]
            done = [cell for cell in cells if cell.ok]
            row: dict[str, typing.Any] = {
                'value': _plain(value),
                'cells': len(cells),
                'failed': len(cells) - len(done),
            }
            for prefix, attribute in _REPORTS:
                reports = [
                    getattr(cell, attribute)
                    for cell in done
                    if getattr(cell, attribute) is not None
                ]
                if prefix and not reports:
                    continue
                for name in METRICS:
                    mean, std = _mean_std(
                        [getattr(report, name) for report in reports]
                    )
                    row[f'{prefix}{name}_mean'] = mean
                    row[f'{prefix}{name}_std'] = std
            rows.append(row)
        return rows

    def to_dict(self) -> dict[str, typing.Any]:
        return {
            'swept_parameter': self.swept_parameter,
            'values': [_plain(value) for value in self.values],
            'summary': self.summary(),
            'cells': [cell.to_dict() for cell in self.cells],
        }

    def to_frame(self) -> pandas.DataFrame:
        """One row per cell."""
        return pandas.DataFrame([cell.to_row() for cell in self.cells])

    def summary_frame(self) -> pandas.DataFrame:
        rows = []
        for row in self.summary():
            rows.append({**row, 'value': json.dumps(row['value'])})
        return pandas.DataFrame(rows)


def _run_cell(
    spec: SweepSpec, value_index: int, repeat: int
) -> CellRecord:
    value = spec.values[value_index]
    seed = utils.derive_seed(spec.base.seed, value_index, repeat)
    record = CellRecord(value, value_index, repeat, seed)
    try:
        cfg = spec.cell_config(value, seed)
        dataset = simulator.simulate_dataset(cfg)
        result = hill_climb(dataset.counts, spec.search_cfg)
        ablation = None
        if spec.include_ablation:
            ablation = compare_graphs(
                dataset.graph,
                threshold_graph(
                    dataset.counts, spec.tau, spec.search_cfg.fit_cfg
                ),
            )
    except (base.SHPError, ArithmeticError) as exception:
        logger.exception(
            'Cell %s=%r repeat %d failed',
            spec.swept_parameter.value,
            value,
            repeat,
        )
        return dataclasses.replace(
            record, error=f'{type(exception).__name__}: {exception}'
        )

    return dataclasses.replace(
        record,
        metrics=compare_graphs(dataset.graph, result.graph),
        ablation=ablation,
        true_edges=len(dataset.graph.edges),
        found_edges=len(result.graph.edges),
        score=result.score,
    )


def run_sweep(spec: SweepSpec) -> ExperimentReport:
    """Simulate, search and score every (value, repeat) cell.

    The seed of a cell is ``derive_seed(spec.base.seed, value_index,
    repeat)``, so any cell can be rerun on its own. Failed cells are kept
    with their error message.
    """
    cells = [
        (value_index, repeat)
        for value_index in range(len(spec.values))
        for repeat in range(spec.n_repeats)
    ]
    with utils.log_duration(
        'Sweep over %s with %d cells', spec.swept_parameter.value, len(cells)
    ):
        records = progress.track(
            utils.imap_ordered(
                lambda cell: _run_cell(spec, *cell), cells, spec.threads
            ),
            label=spec.swept_parameter.value,
            enabled=spec.show_progress,
            max_value=len(cells),
        )
        records = tuple(records)

    return ExperimentReport(
        spec.swept_parameter.value, spec.values, records, spec.to_dict()
    )


def run_resolution_sweep(
    sequence: ContinuousSequence,
    truth: CausalGraph,
    deltas: typing.Sequence[float],
    search_cfg: SearchConfig | None = None,
    show_progress: bool = False,
) -> ExperimentReport:
    """Bin one event log at each width in `deltas`, search and score
    against `truth`."""
    search_cfg = search_cfg or SearchConfig()
    if not deltas:
        raise base.ValidationError('deltas must not be empty')

    cells = []
    for index, delta in enumerate(
        progress.track(
            deltas, label='delta', enabled=show_progress, max_value=len(deltas)
        )
    ):
        counts = bin_events(sequence, delta, truth.nodes)
        result = hill_climb(counts, search_cfg)
        cells.append(
            CellRecord(
                value=float(delta),
                value_index=index,
                repeat=0,
                seed=search_cfg.seed,
                metrics=compare_graphs(truth, result.graph),
                true_edges=len(truth.edges),
                found_edges=len(result.graph.edges),
                score=result.score,
            )
        )
        logger.info(
            'delta=%g: F1 %.3f over %d bins',
            delta,
            cells[-1].metrics.f1,
            counts.n_bins,
        )

    return ExperimentReport(
        'delta',
        tuple(float(delta) for delta in deltas),
        tuple(cells),
        {'deltas': [float(delta) for delta in deltas], **search_cfg.to_dict()},
    )
