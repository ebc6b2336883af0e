#!/usr/bin/python
from __future__ import annotations

import functools
import math
import sys
import time
import typing

import shp

examples: list[typing.Callable[[typing.Any], typing.Any]] = []


def example(fn):
    '''Wrap the examples so they generate readable output'''

    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        try:
            sys.stdout.write('Running: %s\n' % fn.__name__)
            fn(*args, **kwargs)
            sys.stdout.write('\n')
        except KeyboardInterrupt:
            sys.stdout.write('\nSkipping example.\n\n')
            # Sleep a bit to make killing the script easier
            time.sleep(0.2)

    examples.append(wrapped)
    return wrapped


def small_config(**changes) -> shp.SimConfig:
    values = dict(
        n_nodes=6,
        avg_indegree=1.0,
        alpha_range=(0.3, 0.5),
        mu_range=(0.05, 0.1),
        delta=1.0,
        n_bins=3000,
        generator='discrete',
    )
    values.update(changes)
    return shp.SimConfig(**values)


@example
def search_example():
    '''Simulate a small network and learn it back'''
    dataset = shp.simulate_dataset(small_config(seed=1))
    result = shp.hill_climb(
        dataset.counts, shp.SearchConfig(show_progress=True)
    )
    report = shp.compare_graphs(dataset.graph, result.graph)
    print('truth:  ', dataset.graph.sorted_edges())
    print('learned:', result.graph.sorted_edges())
    print(f'F1 {report.f1:.3f}, SHD {report.shd}')


@example
def threshold_example():
    '''Compare the search with thresholding a fit of every edge'''
    dataset = shp.simulate_dataset(small_config(seed=2))
    found = shp.threshold_graph(dataset.counts, tau=0.1)
    report = shp.compare_graphs(dataset.graph, found)
    print(f'threshold F1 {report.f1:.3f}, SHD {report.shd}')


@example
def instantaneous_pair_example():
    '''Direction of a same-bin effect from counts alone'''
    fit_cfg = shp.FitConfig(beta=math.inf, self_excitation=False)
    for alpha in (0.05, 0.5):
        summary = shp.bivariate_gap(
            alpha, 1.0, 0.1, n=5000, trials=5, seed=0, fit_cfg=fit_cfg
        )
        print(
            f'alpha={alpha}: mean gap {summary.mean_gap:.5f}, '
            f'{summary.positive_fraction:.0%} favour the true direction'
        )


@example
def dispersion_example():
    report = shp.dispersion_check(0.5, 1.0, 0.1, n=100000, seed=0)
    print(
        f'effect index {report.empirical_index:.4f} '
        f'(expected {report.theoretical_index:.4f}), '
        f'cause index {report.cause_index:.4f}'
    )


@example
def resolution_example():
    '''Learn one event stream at several bin widths'''
    cfg = small_config(
        n_nodes=4, generator='continuous', mu_range=(0.1, 0.2), n_bins=2000
    )
    dataset = shp.simulate_dataset(cfg)
    report = shp.run_resolution_sweep(
        dataset.events, dataset.graph, [0.5, 1.0, 4.0], show_progress=True
    )
    for row in report.summary():
        print(f"delta={row['value']}: F1 {row['f1_mean']:.3f}")


def test(*tests):
    if tests:
        no_tests = True
        for example in examples:
            for test in tests:
                if test in example.__name__:
                    example()
                    no_tests = False
                    break

        if no_tests:
            for example in examples:
                print('Skipping', example.__name__)
    else:
        for example in examples:
            example()


if __name__ == '__main__':
    try:
        test(*sys.argv[1:])
    except KeyboardInterrupt:
        sys.stdout.write('\nQuitting examples.\n')
