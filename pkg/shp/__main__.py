from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import pathlib
import sys
import typing

from . import base, env, storage, utils
from .config import (
    ConfigMixin,
    FitConfig,
    SearchConfig,
    SimConfig,
    SweepSpec,
    check_keys,
    load_config,
)
from .estimator import fit
from .evaluation import (
    PAIR_FIT,
    bivariate_gap_curve,
    compare_graphs,
    dispersion_check,
    identifiability_frame,
    run_resolution_sweep,
    run_sweep,
)
from .events import BinnedCounts, bin_events
from .graph import CausalGraph
from .search import hill_climb
from .simulator import simulate_dataset

logger = logging.getLogger('shp')

LOG_LEVELS = {
    0: logging.WARNING,
    1: logging.INFO,
    2: logging.DEBUG,
}

#: Settings that change how a result is computed but never the result, left
#: out of echoed configs so outputs do not depend on them.
RUNTIME_KEYS = frozenset({'threads', 'parallel', 'show_progress'})


def _without_runtime(data: typing.Any) -> typing.Any:
    if isinstance(data, dict):
        return {
            key: _without_runtime(value)
            for key, value in data.items()
            if key not in RUNTIME_KEYS
        }
    return data


@dataclasses.dataclass
class RunConfig:
    """Everything one command invocation needs."""

    command: str
    mapping: dict[str, typing.Any]
    out: pathlib.Path
    seed: int | None
    threads: int
    format: str
    verbosity: int
    show_progress: bool
    args: argparse.Namespace
    blocks: dict[str, ConfigMixin] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        mapping = load_config(args.config) if args.config else {}
        if args.seed is not None:
            mapping['seed'] = args.seed
        return cls(
            command=args.command,
            mapping=mapping,
            out=pathlib.Path(args.out),
            seed=args.seed,
            threads=args.threads,
            format=args.format,
            verbosity=args.verbose,
            show_progress=args.progress,
            args=args,
        )

    def resolve(self, name: str, block: type[ConfigMixin], **changes):
        values = {**self.mapping, **changes}
        self.blocks[name] = config = block.from_mapping(values)
        return config

    def echo(self, **extra: typing.Any) -> dict[str, typing.Any]:
        """The fully resolved configuration written into every artifact."""
        data: dict[str, typing.Any] = {}
        for name, block in self.blocks.items():
            data[name] = block.to_dict()
        data.update(extra)
        return _without_runtime(data)

    def write_document(
        self, filename: str, payload: typing.Mapping[str, typing.Any], **extra
    ) -> pathlib.Path:
        path = self.out / filename
        storage.write_json(
            storage.document(self.command, self.echo(**extra), payload), path
        )
        return path

    @property
    def tables(self) -> bool:
        return self.format == 'csv'


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed <= utils.MAX_SEED:
        raise argparse.ArgumentTypeError(
            f'seed must lie in [0, {utils.MAX_SEED}], got {value}'
        )
    return seed


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(
            f'expected an integer >= 1, got {value}'
        )
    return number


def _floats(value: str) -> list[float]:
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'expected comma separated numbers, got {value!r}'
        ) from None


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        '--config', type=pathlib.Path, help='Flat JSON config file.'
    )
    parser.add_argument(
        '--seed', type=_seed, help='Root seed, overrides the config value.'
    )
    parser.add_argument(
        '--out',
        type=pathlib.Path,
        default=pathlib.Path('.'),
        help='Output directory.',
    )
    parser.add_argument(
        '--threads',
        type=_positive_int,
        default=env.default_threads(),
        help='Worker threads (default: $SHP_THREADS or 1).',
    )
    parser.add_argument(
        '--format',
        choices=('csv', 'json'),
        default='csv',
        help='csv writes JSON documents plus CSV tables, json only JSON.',
    )
    parser.add_argument(
        '--progress',
        action=argparse.BooleanOptionalAction,
        default=env.default_progress(),
        help='Show progress bars (default: $SHP_PROGRESS).',
    )
    parser.add_argument(
        '-v',
        '--verbose',
        action='count',
        default=0,
        help='More logging, repeat for debug output.',
    )
    return parser


def _add_counts_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--counts', type=pathlib.Path, help='Counts CSV.')
    source.add_argument(
        '--events', type=pathlib.Path, help='Event log CSV, binned on load.'
    )
    parser.add_argument(
        '--delta',
        type=float,
        help='Bin width (default: the config delta, else 5).',
    )
    parser.add_argument(
        '--horizon',
        type=float,
        help='End of the observation window of --events '
        '(default: the last timestamp).',
    )


def create_argument_parser() -> argparse.ArgumentParser:
    '''
    Create the argument parser for the `shp` command.
    '''
    parser = argparse.ArgumentParser(
        prog='shp',
        description='''
        Learn causal graphs between event types from binned event counts
        with structural Hawkes processes.
        ''',
    )
    common = _common_parser()
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser(
        'simulate',
        parents=[common],
        help='Simulate a random graph, parameters and counts.',
    )
    simulate.set_defaults(handler=cmd_simulate)

    fit_parser = commands.add_parser(
        'fit', parents=[common], help='Fit parameters for a fixed graph.'
    )
    _add_counts_arguments(fit_parser)
    fit_parser.add_argument(
        '--graph', type=pathlib.Path, help='Edge list CSV (default: empty).'
    )
    fit_parser.set_defaults(handler=cmd_fit)

    search = commands.add_parser(
        'search', parents=[common], help='Learn a graph by hill climbing.'
    )
    _add_counts_arguments(search)
    search.set_defaults(handler=cmd_search)

    evaluate = commands.add_parser(
        'evaluate', parents=[common], help='Compare a graph with the truth.'
    )
    evaluate.add_argument('--truth', type=pathlib.Path, required=True)
    evaluate.add_argument('--estimated', type=pathlib.Path, required=True)
    evaluate.set_defaults(handler=cmd_evaluate)

    experiment = commands.add_parser(
        'experiment',
        parents=[common],
        help='Run a sensitivity sweep described by --config.',
    )
    experiment.set_defaults(handler=cmd_experiment)

    identifiability = commands.add_parser(
        'identifiability',
        parents=[common],
        help='Likelihood gap and overdispersion of instantaneous pairs.',
    )
    identifiability.add_argument(
        '--alpha',
        type=_floats,
        default=[0.05, 0.1, 0.2, 0.5],
        help='Comma separated strengths.',
    )
    identifiability.add_argument('--mu-x', type=float, default=1.0)
    identifiability.add_argument('--mu-y', type=float, default=0.1)
    identifiability.add_argument('-n', type=_positive_int, default=20000)
    identifiability.add_argument('--trials', type=_positive_int, default=100)
    identifiability.add_argument(
        '--dispersion-n',
        type=_positive_int,
        default=100000,
        help='Rows of the overdispersion check.',
    )
    identifiability.set_defaults(handler=cmd_identifiability)

    resolution = commands.add_parser(
        'resolution',
        parents=[common],
        help='Search one event log at several bin widths.',
    )
    resolution.add_argument('--events', type=pathlib.Path, required=True)
    resolution.add_argument('--truth', type=pathlib.Path, required=True)
    resolution.add_argument('--deltas', type=_floats, required=True)
    resolution.add_argument('--horizon', type=float)
    resolution.set_defaults(handler=cmd_resolution)

    return parser


def _search_changes(run: RunConfig) -> dict[str, typing.Any]:
    return {
        'threads': run.threads,
        'parallel': run.threads > 1,
        'show_progress': run.show_progress,
    }


def _load_counts(run: RunConfig) -> tuple[BinnedCounts, float]:
    args = run.args
    if args.delta is not None:
        delta = args.delta
    else:
        delta = float(run.mapping.get('delta', SimConfig.delta))
    if args.counts is not None:
        return storage.read_counts_csv(args.counts, delta), delta
    events = storage.read_events_csv(args.events, args.horizon)
    return bin_events(events, delta), delta


def cmd_simulate(run: RunConfig) -> list[pathlib.Path]:
    check_keys(run.mapping, SimConfig)
    cfg = run.resolve('simulation', SimConfig)
    dataset = simulate_dataset(cfg)
    paths = [run.out / 'counts.csv', run.out / 'truth_edges.csv']
    storage.write_counts_csv(dataset.counts, paths[0])
    storage.write_edges_csv(dataset.graph, paths[1])
    if dataset.events is not None and run.tables:
        paths.append(run.out / 'events.csv')
        storage.write_events_csv(dataset.events, paths[-1])
    paths.append(
        run.write_document(
            'params.json',
            {
                'graph': dataset.graph.to_dict(),
                'params': dataset.params.to_dict(dataset.graph.nodes),
                'totals': dataset.counts.totals(),
                'n_events': int(dataset.counts.counts.sum()),
            },
        )
    )
    return paths


def cmd_fit(run: RunConfig) -> list[pathlib.Path]:
    check_keys(run.mapping, FitConfig, SearchConfig, SimConfig)
    counts, delta = _load_counts(run)
    if run.args.graph is None:
        graph = CausalGraph.empty(counts.node_names)
    else:
        graph = storage.read_edges_csv(run.args.graph, counts.node_names)
    cfg = run.resolve('fit', FitConfig)
    alpha_s = SearchConfig.from_mapping(run.mapping).resolve_alpha_s(
        counts.n_bins
    )
    result = fit(graph, counts, cfg, threads=run.threads)
    payload = result.to_dict()
    payload['penalized_score'] = result.penalized_score(alpha_s)
    return [
        run.write_document('fit.json', payload, delta=delta, alpha_s=alpha_s)
    ]


def cmd_search(run: RunConfig) -> list[pathlib.Path]:
    check_keys(run.mapping, SearchConfig, FitConfig, SimConfig)
    counts, delta = _load_counts(run)
    cfg = run.resolve('search', SearchConfig, **_search_changes(run))
    result = hill_climb(counts, cfg)
    paths = [run.write_document('search.json', result.to_dict(), delta=delta)]
    if run.tables:
        paths.append(run.out / 'edges.csv')
        storage.write_edges_csv(result.graph, paths[-1])
    return paths


def cmd_evaluate(run: RunConfig) -> list[pathlib.Path]:
    truth = storage.read_edges_csv(run.args.truth)
    estimated = storage.read_edges_csv(run.args.estimated)
    nodes = tuple(dict.fromkeys(truth.nodes + estimated.nodes))
    report = compare_graphs(
        CausalGraph(nodes, truth.edges), CausalGraph(nodes, estimated.edges)
    )
    return [
        run.write_document(
            'metrics.json',
            report.to_dict(),
            truth=str(run.args.truth),
            estimated=str(run.args.estimated),
        )
    ]


def cmd_experiment(run: RunConfig) -> list[pathlib.Path]:
    check_keys(run.mapping, SweepSpec, SimConfig, SearchConfig, FitConfig)
    spec = run.resolve(
        'experiment',
        SweepSpec,
        threads=run.threads,
        show_progress=run.show_progress,
    )
    report = run_sweep(spec)
    paths = [run.write_document('experiment.json', report.to_dict())]
    if run.tables:
        paths.append(run.out / 'cells.csv')
        storage.write_table(report.to_frame(), paths[-1])
        paths.append(run.out / 'summary.csv')
        storage.write_table(report.summary_frame(), paths[-1])
    return paths


def cmd_identifiability(run: RunConfig) -> list[pathlib.Path]:
    args = run.args
    check_keys(run.mapping, FitConfig, extra=('seed',))
    seed = int(run.mapping.get('seed', 0))
    # The pair has no lagged terms, only the instantaneous edge
    values = {**PAIR_FIT.to_dict(), **run.mapping}
    values.pop('seed', None)
    values.update(beta=math.inf, self_excitation=False)
    run.blocks['fit'] = fit_cfg = FitConfig.build(values)
    gaps = bivariate_gap_curve(
        args.alpha,
        args.mu_x,
        args.mu_y,
        args.n,
        args.trials,
        utils.derive_seed(seed, 'gap'),
        fit_cfg,
        run.threads,
        run.show_progress,
    )
    rows = []
    for index, (alpha, summary) in enumerate(zip(args.alpha, gaps)):
        dispersion = dispersion_check(
            alpha,
            args.mu_x,
            args.mu_y,
            args.dispersion_n,
            utils.derive_seed(seed, 'dispersion', index),
        )
        rows.append({**summary.to_dict(), 'dispersion': dispersion.to_dict()})

    paths = [
        run.write_document(
            'identifiability.json',
            {'curves': rows},
            seed=seed,
            alphas=list(args.alpha),
            mu_x=args.mu_x,
            mu_y=args.mu_y,
            n=args.n,
            trials=args.trials,
            dispersion_n=args.dispersion_n,
        )
    ]
    if run.tables:
        paths.append(run.out / 'identifiability.csv')
        storage.write_table(identifiability_frame(rows), paths[-1])
    return paths


def cmd_resolution(run: RunConfig) -> list[pathlib.Path]:
    args = run.args
    check_keys(run.mapping, SearchConfig, FitConfig, SimConfig)
    sequence = storage.read_events_csv(args.events, args.horizon)
    truth = storage.read_edges_csv(args.truth)
    nodes = tuple(dict.fromkeys(truth.nodes + tuple(sequence.event_types())))
    truth = CausalGraph(nodes, truth.edges)
    cfg = run.resolve('search', SearchConfig, **_search_changes(run))
    report = run_resolution_sweep(
        sequence, truth, args.deltas, cfg, run.show_progress
    )
    paths = [
        run.write_document(
            'resolution.json', report.to_dict(), deltas=list(args.deltas)
        )
    ]
    if run.tables:
        paths.append(run.out / 'resolution.csv')
        storage.write_table(report.to_frame(), paths[-1])
    return paths


def main(argv: list[str] | None = None) -> int:
    '''
    Main function for the `shp` command.

    Args:
        argv (list[str] | None): Command-line arguments passed to the script.

    Returns:
        int: The exit status, 0 on success.
    '''
    parser = create_argument_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=LOG_LEVELS.get(args.verbose, logging.DEBUG),
        format='%(levelname)s %(name)s: %(message)s',
    )

    try:
        run = RunConfig.from_args(args)
        with utils.log_duration('Command %s', args.command):
            paths = args.handler(run)
    except base.SHPError as exception:
        logger.error('%s', exception)
        return exception.exit_code
    except OSError as exception:
        logger.error('%s', exception)
        return base.EXIT_IO

    for path in paths:
        logger.info('Wrote %s', path)
    return base.EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
