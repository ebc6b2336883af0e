"""Configuration blocks for simulation, fitting, search and sweeps.

Config files are flat JSON objects. Each block picks the keys named after its
own fields, so one file can configure a whole pipeline::

    {
        "n_nodes": 10,
        "avg_indegree": 1.5,
        "alpha_range": [0.3, 0.5],
        "delta": 5,
        "max_iters": 200,
        "alpha_s": 4.0
    }

Units: `delta` uses the timestamp unit, `mu_range` is per unit time (the per
bin mean is ``mu * delta``) and `beta` is per unit time.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
import math
import pathlib
import typing

from . import base, utils

logger = logging.getLogger(__name__)

ConfigT = typing.TypeVar('ConfigT', bound='ConfigMixin')
Range = typing.Tuple[float, float]


def normalize_range(value: typing.Sequence[float], name: str) -> Range:
    """
    Return a (low, high) pair, accepting the bounds in either order.

    >>> normalize_range([0.0005, 0.0001], 'mu_range')
    (0.0001, 0.0005)
    >>> normalize_range([-1, 2], 'alpha')
    Traceback (most recent call last):
    ...
    shp.base.ValidationError: alpha bounds must be finite and >= 0, got [-1, 2]
    """
    try:
        low, high = (float(bound) for bound in value)
    except (TypeError, ValueError):
        raise base.ValidationError(
            f'{name} must be a pair of numbers, got {value!r}'
        ) from None
    if not (math.isfinite(low) and math.isfinite(high)) or min(low, high) < 0:
        raise base.ValidationError(
            f'{name} bounds must be finite and >= 0, got {value!r}'
        )
    return (min(low, high), max(low, high))


def _jsonable(value: typing.Any) -> typing.Any:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float) and math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    return value


def _check_seed(seed: typing.Any) -> int:
    seed = int(seed)
    if not 0 <= seed <= utils.MAX_SEED:
        raise base.ValidationError(
            f'seed must be an unsigned 64-bit integer, got {seed}'
        )
    return seed


class ConfigMixin:
    """Flat mapping round trip shared by all config blocks."""

    @classmethod
    def field_names(cls) -> set[str]:
        fields = dataclasses.fields(cls)  # type: ignore[arg-type]
        return {field.name for field in fields}

    @classmethod
    def pick(
        cls, mapping: typing.Mapping[str, typing.Any]
    ) -> dict[str, typing.Any]:
        """The entries of `mapping` named after a field of this block."""
        names = cls.field_names()
        return {key: value for key, value in mapping.items() if key in names}

    @classmethod
    def from_mapping(
        cls: type[ConfigT], mapping: typing.Mapping[str, typing.Any]
    ) -> ConfigT:
        return cls.build(cls.pick(mapping))

    @classmethod
    def build(
        cls: type[ConfigT], values: typing.Mapping[str, typing.Any]
    ) -> ConfigT:
        """Construct from keyword values, missing or mistyped values raise
        `ValidationError`."""
        try:
            return cls(**values)
        except base.ValidationError:
            raise
        except (TypeError, ValueError) as exception:
            raise base.ValidationError(
                f'Invalid {cls.__name__}: {exception}'
            ) from None

    def to_dict(self) -> dict[str, typing.Any]:
        result: dict[str, typing.Any] = {}
        for field in dataclasses.fields(self):  # type: ignore[arg-type]
            value = getattr(self, field.name)
            if isinstance(value, ConfigMixin):
                result[field.name] = value.to_dict()
            else:
                result[field.name] = _jsonable(value)
        return result

    def replace(self: ConfigT, **changes: typing.Any) -> ConfigT:
        return dataclasses.replace(self, **changes)  # type: ignore[type-var]


class Generator(str, enum.Enum):
    """How synthetic counts are produced."""

    #: Event stream by thinning, then binned
    CONTINUOUS = 'continuous'
    #: Counts drawn bin by bin from the discrete model
    DISCRETE = 'discrete'


@dataclasses.dataclass(frozen=True)
class SimConfig(ConfigMixin):
    n_nodes: int = 20
    avg_indegree: float = 1.5
    alpha_range: Range = (0.3, 0.5)
    mu_range: Range = (0.0001, 0.0005)
    delta: float = 5.0
    n_bins: int = 20000
    beta: float = 1.0
    seed: int = 0
    generator: Generator = Generator.CONTINUOUS
    self_excitation: bool = False
    self_alpha_range: Range = (0.1, 0.3)
    max_resample: int = 100

    def __post_init__(self) -> None:
        n_nodes = int(self.n_nodes)
        if n_nodes < 1:
            raise base.ValidationError(f'n_nodes must be >= 1, got {n_nodes}')
        avg_indegree = float(self.avg_indegree)
        # A single node has no pairs, any indegree yields the empty graph
        if avg_indegree < 0 or (
            n_nodes > 1 and avg_indegree > (n_nodes - 1) / 2
        ):
            raise base.ValidationError(
                f'avg_indegree must lie in [0, {(n_nodes - 1) / 2}] for '
                f'{n_nodes} nodes, got {avg_indegree}'
            )
        delta = float(self.delta)
        if not math.isfinite(delta) or delta <= 0:
            raise base.ValidationError(f'delta must be > 0, got {delta}')
        n_bins = int(self.n_bins)
        if n_bins < 0:
            raise base.ValidationError(f'n_bins must be >= 0, got {n_bins}')
        beta = float(self.beta)
        if math.isnan(beta) or beta <= 0:
            raise base.ValidationError(f'beta must be > 0, got {beta}')
        if int(self.max_resample) < 1:
            raise base.ValidationError('max_resample must be >= 1')

        try:
            generator = Generator(self.generator)
        except ValueError:
            raise base.ValidationError(
                f'Unknown generator {self.generator!r}, expected one of '
                f'{[item.value for item in Generator]}'
            ) from None

        values = dict(
            n_nodes=n_nodes,
            avg_indegree=avg_indegree,
            alpha_range=normalize_range(self.alpha_range, 'alpha_range'),
            mu_range=normalize_range(self.mu_range, 'mu_range'),
            delta=delta,
            n_bins=n_bins,
            beta=beta,
            seed=_check_seed(self.seed),
            generator=generator,
            self_excitation=bool(self.self_excitation),
            self_alpha_range=normalize_range(
                self.self_alpha_range, 'self_alpha_range'
            ),
            max_resample=int(self.max_resample),
        )
        for key, value in values.items():
            object.__setattr__(self, key, value)

    @property
    def horizon(self) -> float:
        return self.n_bins * self.delta


class MuInit(str, enum.Enum):
    """Starting point for the immigration intensities."""

    #: Per-node mean count divided by delta
    EMPIRICAL = 'empirical'
    #: Mean over all nodes divided by delta
    POOLED = 'pooled'


@dataclasses.dataclass(frozen=True)
class FitConfig(ConfigMixin):
    max_iters: int = 100
    rel_tol: float = 1e-6
    mu_floor: float = 1e-10
    alpha_init: float = 0.1
    mu_init: MuInit = MuInit.EMPIRICAL
    beta: float = 1.0
    self_excitation: bool = True

    def __post_init__(self) -> None:
        max_iters = int(self.max_iters)
        rel_tol = float(self.rel_tol)
        mu_floor = float(self.mu_floor)
        alpha_init = float(self.alpha_init)
        beta = float(self.beta)
        if max_iters < 1:
            raise base.ValidationError(
                f'max_iters must be >= 1, got {max_iters}'
            )
        for name, value in (
            ('rel_tol', rel_tol),
            ('mu_floor', mu_floor),
            ('alpha_init', alpha_init),
        ):
            if not math.isfinite(value) or value <= 0:
                raise base.ValidationError(f'{name} must be > 0, got {value}')
        if math.isnan(beta) or beta <= 0:
            raise base.ValidationError(f'beta must be > 0, got {beta}')
        try:
            mu_init = MuInit(self.mu_init)
        except ValueError:
            raise base.ValidationError(
                f'Unknown mu_init {self.mu_init!r}'
            ) from None

        object.__setattr__(self, 'max_iters', max_iters)
        object.__setattr__(self, 'rel_tol', rel_tol)
        object.__setattr__(self, 'mu_floor', mu_floor)
        object.__setattr__(self, 'alpha_init', alpha_init)
        object.__setattr__(self, 'mu_init', mu_init)
        object.__setattr__(self, 'beta', beta)
        object.__setattr__(self, 'self_excitation', bool(self.self_excitation))


@dataclasses.dataclass(frozen=True)
class SearchConfig(ConfigMixin):
    """Hill climbing settings.

    `alpha_s` is the weight of the edge count penalty, ``None`` resolves to
    ``0.5 * log(K)`` for K bins. A move is taken only when it raises the
    score by more than `min_improvement`.
    """

    alpha_s: float | None = None
    fit_cfg: FitConfig = dataclasses.field(default_factory=FitConfig)
    max_sweeps: int = 200
    parallel: bool = False
    threads: int = 1
    seed: int = 0
    use_cache: bool = True
    min_improvement: float = 1e-9
    show_progress: bool = False

    def __post_init__(self) -> None:
        if self.alpha_s is not None:
            alpha_s = float(self.alpha_s)
            if not math.isfinite(alpha_s) or alpha_s < 0:
                raise base.ValidationError(
                    f'alpha_s must be >= 0, got {self.alpha_s}'
                )
            object.__setattr__(self, 'alpha_s', alpha_s)
        fit_cfg = self.fit_cfg
        if isinstance(fit_cfg, typing.Mapping):
            fit_cfg = FitConfig.from_mapping(fit_cfg)
        if int(self.max_sweeps) < 1:
            raise base.ValidationError('max_sweeps must be >= 1')
        if int(self.threads) < 1:
            raise base.ValidationError('threads must be >= 1')
        if float(self.min_improvement) < 0:
            raise base.ValidationError('min_improvement must be >= 0')

        object.__setattr__(self, 'fit_cfg', fit_cfg)
        object.__setattr__(self, 'max_sweeps', int(self.max_sweeps))
        object.__setattr__(self, 'parallel', bool(self.parallel))
        object.__setattr__(self, 'threads', int(self.threads))
        object.__setattr__(self, 'seed', _check_seed(self.seed))
        object.__setattr__(self, 'use_cache', bool(self.use_cache))
        object.__setattr__(
            self, 'min_improvement', float(self.min_improvement)
        )
        object.__setattr__(self, 'show_progress', bool(self.show_progress))

    @classmethod
    def from_mapping(
        cls, mapping: typing.Mapping[str, typing.Any]
    ) -> SearchConfig:
        values = cls.pick(mapping)
        if 'fit_cfg' not in values:
            values['fit_cfg'] = FitConfig.from_mapping(mapping)
        return cls.build(values)

    @property
    def workers(self) -> int:
        return self.threads if self.parallel else 1

    def resolve_alpha_s(self, n_bins: int) -> float:
        """
        The penalty weight for `n_bins` bins.

        >>> round(SearchConfig().resolve_alpha_s(20000), 4)
        4.9517
        >>> SearchConfig(alpha_s=2.5).resolve_alpha_s(20000)
        2.5
        """
        if self.alpha_s is not None:
            return self.alpha_s
        return 0.5 * math.log(max(n_bins, 1))


def sweep_simulation(**changes: typing.Any) -> SimConfig:
    """Simulation defaults of a sweep.

    Sweeps draw counts from the discrete model so that the fitted strengths
    and the ablation threshold `tau` share the units of the generated ones.

    >>> sweep_simulation().generator.value
    'discrete'
    """
    return SimConfig(**{'generator': Generator.DISCRETE, **changes})


class SweptParameter(str, enum.Enum):
    DELTA = 'delta'
    ALPHA_RANGE = 'alpha_range'
    MU_RANGE = 'mu_range'
    N_BINS = 'n_bins'
    N_NODES = 'n_nodes'
    AVG_INDEGREE = 'avg_indegree'


@dataclasses.dataclass(frozen=True)
class SweepSpec(ConfigMixin):
    """One sensitivity experiment: vary one simulation parameter."""

    swept_parameter: SweptParameter
    values: tuple[typing.Any, ...]
    base: SimConfig = dataclasses.field(default_factory=sweep_simulation)
    n_repeats: int = 10
    search_cfg: SearchConfig = dataclasses.field(default_factory=SearchConfig)
    include_ablation: bool = True
    tau: float = 0.1
    threads: int = 1
    show_progress: bool = False

    def __post_init__(self) -> None:
        try:
            swept = SweptParameter(self.swept_parameter)
        except ValueError:
            raise base.ValidationError(
                f'Unknown swept_parameter {self.swept_parameter!r}, expected '
                f'one of {[item.value for item in SweptParameter]}'
            ) from None
        values = tuple(
            tuple(value) if isinstance(value, list) else value
            for value in self.values
        )
        if not values:
            raise base.ValidationError('values must not be empty')
        if int(self.n_repeats) < 1:
            raise base.ValidationError('n_repeats must be >= 1')
        if float(self.tau) < 0:
            raise base.ValidationError('tau must be >= 0')
        if int(self.threads) < 1:
            raise base.ValidationError('threads must be >= 1')

        sim = self.base
        if isinstance(sim, typing.Mapping):
            sim = SimConfig.from_mapping(sim)
        search_cfg = self.search_cfg
        if isinstance(search_cfg, typing.Mapping):
            search_cfg = SearchConfig.from_mapping(search_cfg)

        object.__setattr__(self, 'swept_parameter', swept)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'base', sim)
        object.__setattr__(self, 'n_repeats', int(self.n_repeats))
        object.__setattr__(self, 'search_cfg', search_cfg)
        object.__setattr__(
            self, 'include_ablation', bool(self.include_ablation)
        )
        object.__setattr__(self, 'tau', float(self.tau))
        object.__setattr__(self, 'threads', int(self.threads))
        object.__setattr__(self, 'show_progress', bool(self.show_progress))

        # Fail early on values the simulator would reject
        for value in values:
            self.cell_config(value, sim.seed)

    @classmethod
    def from_mapping(
        cls, mapping: typing.Mapping[str, typing.Any]
    ) -> SweepSpec:
        values = cls.pick(mapping)
        values.setdefault(
            'base',
            SimConfig.from_mapping(
                {'generator': Generator.DISCRETE.value, **mapping}
            ),
        )
        values.setdefault('search_cfg', SearchConfig.from_mapping(mapping))
        return cls.build(values)

    def cell_config(self, value: typing.Any, seed: int) -> SimConfig:
        """The simulation config of one sweep cell.

        Sweeping `delta` keeps the observation window fixed, so the number of
        bins shrinks as the bins get wider.
        """
        changes: dict[str, typing.Any] = {
            self.swept_parameter.value: value,
            'seed': seed,
        }
        if self.swept_parameter is SweptParameter.DELTA:
            changes['n_bins'] = max(round(self.base.horizon / float(value)), 1)
        return self.base.replace(**changes)


def load_config(path: str | pathlib.Path) -> dict[str, typing.Any]:
    """Read a flat JSON config file."""
    path = pathlib.Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as error:
        raise base.DataFormatError(
            f'Invalid JSON: {error.msg}', path=path, line=error.lineno
        ) from error
    if not isinstance(data, dict):
        raise base.DataFormatError(
            'Config must be a JSON object', path=path, line=1
        )
    logger.debug('Loaded %d config keys from %s', len(data), path)
    return data


def check_keys(
    mapping: typing.Mapping[str, typing.Any],
    *blocks: type[ConfigMixin],
    extra: typing.Iterable[str] = (),
) -> None:
    """Reject keys that none of `blocks` (or `extra`) understand."""
    known = set(extra)
    for block in blocks:
        known |= block.field_names()
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise base.ValidationError(
            f'Unknown config keys: {", ".join(unknown)}'
        )
