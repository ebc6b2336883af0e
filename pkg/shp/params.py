"""Strengths, base intensities and kernel of a structural Hawkes process.

Strengths are per unit time per parent event. With the kernel
``exp(-beta * t)`` sampled at bin ends, one event raises the rate of its
children by ``A[i, j] * exp(-beta * m * delta)`` in the bin ``m`` steps later.
Within its own bin (``m = 0``) an event never excites its own type.
"""

from __future__ import annotations

import dataclasses
import math
import typing

import numpy as np

from . import base
from .graph import CausalGraph


def kernel_mass(beta: float, delta: float, include_zero: bool = True) -> float:
    """
    Discrete mass ``delta * sum_j exp(-beta * j * delta)`` of the kernel.

    The sum starts at ``j = 1`` when `include_zero` is false (self terms never
    act within their own bin).

    >>> kernel_mass(float('inf'), 2.0)
    2.0
    >>> kernel_mass(float('inf'), 2.0, include_zero=False)
    0.0
    """
    decay = math.exp(-beta * delta)
    if decay >= 1.0:
        return math.inf
    tail = decay / (1.0 - decay)
    return delta * (1.0 + tail if include_zero else tail)


@dataclasses.dataclass(frozen=True)
class SHPParams:
    """Parameters of a structural Hawkes process.

    `A[i, j]` is the causal strength of nodes[i] on nodes[j], the diagonal
    holds lagged self-excitation. `mu` is the immigration intensity per unit
    time, `beta` the kernel decay (``inf`` disables lagged terms) and `delta`
    the bin width.
    """

    A: np.ndarray
    mu: np.ndarray
    beta: float
    delta: float

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=float)
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape != (mu.size, mu.size):
            raise base.ValidationError(
                f'A of shape {A.shape} does not match mu of size {mu.size}'
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(mu))):
            raise base.ValidationError('A and mu must be finite')
        if A.size and A.min() < 0 or mu.size and mu.min() < 0:
            raise base.ValidationError('A and mu must be non-negative')

        beta = float(self.beta)
        delta = float(self.delta)
        if math.isnan(beta) or beta <= 0:
            raise base.ValidationError(f'beta must be > 0, got {self.beta}')
        if not math.isfinite(delta) or delta <= 0:
            raise base.ValidationError(f'delta must be > 0, got {self.delta}')

        A.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'beta', beta)
        object.__setattr__(self, 'delta', delta)

    @property
    def n_nodes(self) -> int:
        return int(self.mu.size)

    @property
    def decay(self) -> float:
        """Kernel ratio between consecutive bins, ``exp(-beta * delta)``."""
        return math.exp(-self.beta * self.delta)

    def replace(self, **changes: typing.Any) -> SHPParams:
        return dataclasses.replace(self, **changes)

    def branching_matrix(self, continuous: bool = False) -> np.ndarray:
        """Expected number of direct offspring per event.

        Entry ``[i, j]`` is the mean number of type-j events triggered by one
        type-i event. The continuous simulator uses a normalised kernel so
        this is just `A`; the discrete model sums the kernel over all bins.
        """
        if continuous:
            return np.array(self.A)
        off_diagonal = kernel_mass(self.beta, self.delta, include_zero=True)
        diagonal = kernel_mass(self.beta, self.delta, include_zero=False)
        matrix = self.A * off_diagonal
        np.fill_diagonal(matrix, np.diag(self.A) * diagonal)
        return matrix

    def spectral_radius(self, continuous: bool = False) -> float:
        matrix = self.branching_matrix(continuous)
        if matrix.size == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(matrix))))

    def is_stable(self, continuous: bool = False) -> bool:
        return self.spectral_radius(continuous) < 1.0

    def to_dict(
        self, nodes: typing.Sequence[typing.Hashable] | None = None
    ) -> dict[str, typing.Any]:
        data: dict[str, typing.Any] = {
            'A': self.A.tolist(),
            'mu': self.mu.tolist(),
            'beta': 'inf' if math.isinf(self.beta) else self.beta,
            'delta': self.delta,
        }
        if nodes is not None:
            data['nodes'] = list(nodes)
        return data

    @classmethod
    def from_dict(cls, data: typing.Mapping[str, typing.Any]) -> SHPParams:
        return cls(
            A=np.asarray(data['A'], dtype=float),
            mu=np.asarray(data['mu'], dtype=float),
            beta=float(data['beta']),
            delta=float(data['delta']),
        )


def validate_support(params: SHPParams, graph: CausalGraph) -> None:
    """Off-diagonal strengths must vanish outside the graph's edges."""
    if params.n_nodes != len(graph.nodes):
        raise base.ValidationError(
            f'Parameters for {params.n_nodes} nodes do not match a graph '
            f'with {len(graph.nodes)} nodes'
        )
    allowed = graph.adjacency()
    np.fill_diagonal(allowed, True)
    stray = np.argwhere((params.A != 0) & ~allowed)
    if stray.size:
        src, dst = stray[0]
        raise base.ValidationError(
            f'Nonzero strength {graph.nodes[src]!r} -> {graph.nodes[dst]!r} '
            'is not an edge of the graph'
        )
