# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Simulation study: sweep base shapes and connectivity, elect on every graph, check bounds."""

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from . import style as S
from .constants import (BASE_SHAPES, CONNECTIVITY_SWEEP, DEFAULT_DELAY_BOUND,
                        DEFAULT_GROWTH_FACTOR, DEFAULT_REPLICATIONS, DEFAULT_SEED, DELAY_ALIASES)
from .election import run_election
from .engine import DelayModel
from .fragments import InvalidGrowthFactorError, lineages
from .oracle import message_bound, time_bound, work_message_bound
from .topology import generate

RUN_COLUMNS = [
    'base_shape', 'n', 'connectivity', 'replication', 'seed', 'leader', 'leader_is_max_id',
    'init_time', 'time_excl_init', 'transmissions',
    'post_init_transmissions', 'completion_time', 'edges', 'work_phases',
]

SUMMARY_COLUMNS = [
    'base_shape', 'n', 'connectivity', 'replications', 'max_time', 'max_transmissions',
    'leader_is_max_id',
]

BOUND_COLUMNS = [
    'base_shape', 'n', 'connectivity', 'replication', 'x', 'time_excl_init', 'time_bound',
    'time_margin', 'post_init_transmissions', 'message_limit', 'message_margin',
    'work_message_limit', 'work_message_margin', 'time_ok', 'message_ok', 'work_message_ok',
]


class ConfigError(ValueError):
    """Raised for a malformed experiment configuration."""
    pass


@dataclass
class ExperimentConfig:
    n: int = 16
    base_shapes: tuple = ('string',)
    connectivity: tuple = CONNECTIVITY_SWEEP
    x: float = DEFAULT_GROWTH_FACTOR
    replications: int = DEFAULT_REPLICATIONS
    seed: int = DEFAULT_SEED
    delay: str = 'unit'
    delay_bound: float = DEFAULT_DELAY_BOUND

    _KEYS = ('n', 'base_shape', 'connectivity', 'x', 'replications', 'seed', 'delay', 'delay_bound')

    def __post_init__(self):
        if isinstance(self.base_shapes, str):
            self.base_shapes = (self.base_shapes,)
        self.base_shapes = tuple(self.base_shapes)
        if isinstance(self.connectivity, (int, float)):
            self.connectivity = (self.connectivity,)
        try:
            self.connectivity = tuple(float(c) for c in self.connectivity)
            self.x = float(self.x)
            self.delay_bound = float(self.delay_bound)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"connectivity, x and delay_bound must be numbers: {e}") from e
        self.validate()

    def validate(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer (got {self.n!r})")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"replications must be at least 1 (got {self.replications!r})")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer (got {self.seed!r})")
        if not self.base_shapes:
            raise ConfigError("at least one base shape is required")
        for shape in self.base_shapes:
            if shape not in BASE_SHAPES:
                raise ConfigError(f"unsupported base shape '{shape}'")
        if not self.connectivity:
            raise ConfigError("at least one connectivity value is required")
        for c in self.connectivity:
            if not 0.0 <= c <= 1.0:
                raise ConfigError(f"connectivity {c} outside [0, 1]")
        if not self.x > 1:
            raise ConfigError(f"x must be greater than 1 (got {self.x})")
        if DELAY_ALIASES.get(self.delay) is None:
            raise ConfigError(f"delay must be one of {', '.join(DELAY_ALIASES)} (got {self.delay!r})")
        if not self.delay_bound > 0:
            raise ConfigError(f"delay_bound must be positive (got {self.delay_bound})")

    @property
    def delay_kind(self):
        return DELAY_ALIASES[self.delay]

    @classmethod
    def from_json(cls, payload):
        """Build from a dict, a JSON string or a path to a JSON file."""
        if isinstance(payload, str):
            text = payload.strip()
            if not text.startswith('{'):
                with open(payload, encoding='utf-8') as fh:
                    text = fh.read()
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}") from e
        if not isinstance(payload, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(payload) - set(cls._KEYS))
        if unknown:
            raise ConfigError(f"unknown config key '{unknown[0]}'")
        kwargs = {k: v for k, v in payload.items() if k != 'base_shape'}
        if 'base_shape' in payload:
            kwargs['base_shapes'] = payload['base_shape']
        return cls(**kwargs)

    def to_json(self):
        data = asdict(self)
        data['base_shape'] = list(data.pop('base_shapes'))
        data['connectivity'] = list(self.connectivity)
        return data


@dataclass
class BoundReport:
    x: float
    n: int
    time_excl_init: float
    time_bound: float
    post_init_transmissions: int
    message_limit: float
    work_message_limit: float

    @property
    def time_margin(self):
        return self.time_bound - self.time_excl_init

    @property
    def message_margin(self):
        return self.message_limit - self.post_init_transmissions

    @property
    def time_ok(self):
        return self.time_margin >= 0

    @property
    def message_ok(self):
        return self.message_margin >= 0

    @property
    def work_message_margin(self):
        return self.work_message_limit - self.post_init_transmissions

    @property
    def work_message_ok(self):
        return self.work_message_margin >= 0

    @property
    def passed(self):
        """Time bound and the per-period message accounting. The closed-form message margin
        is reported but not required."""
        return self.time_ok and self.work_message_ok

    def as_dict(self):
        return {
            'x': self.x, 'time_excl_init': self.time_excl_init, 'time_bound': self.time_bound,
            'time_margin': self.time_margin, 'post_init_transmissions': self.post_init_transmissions,
            'message_limit': self.message_limit, 'message_margin': self.message_margin,
            'work_message_limit': self.work_message_limit,
            'work_message_margin': self.work_message_margin,
            'time_ok': self.time_ok, 'message_ok': self.message_ok,
            'work_message_ok': self.work_message_ok,
        }


def check_bounds(metrics, x, n):
    """Compare one election against the time bound and both message limits, each with the
    n-transmission announcement allowance. Failures are report entries, never exceptions."""
    return BoundReport(
        x=float(x),
        n=n,
        time_excl_init=metrics.time_excl_init,
        time_bound=time_bound(x, n),
        post_init_transmissions=metrics.transmissions - n,
        message_limit=message_bound(x, n) + n,
        work_message_limit=work_message_bound(x, n) + n,
    )


def check_growth(phases, x, n):
    """Lineage checks on a work-phase trace. Returns a list of violation strings."""
    problems = []
    limit = int(np.ceil(np.log(n) / np.log(x) - 1e-9)) + 1 if n > 1 else 1
    for candidate, seq in lineages(phases).items():
        if len(seq) > limit:
            problems.append(f"candidate {candidate} worked {len(seq)} times (limit {limit})")
        for prev, cur in zip(seq, seq[1:]):
            if prev.outcome == 'stay' and cur.outcome == 'stay' \
                    and cur.new_size < x * x * prev.entry_id.size:
                problems.append(f"candidate {candidate} grew {prev.entry_id.size} -> {cur.new_size}")
        for phase in seq:
            if phase.outcome == 'stay' and not phase.new_size > x * phase.best_external.size:
                problems.append(f"candidate {candidate} stayed at {phase.new_size} against "
                                f"{phase.best_external}")
    return problems


def derive_seed(seed, shape_index, connectivity_index, replication):
    """Per-run seed; independent of how many runs the sweep contains."""
    state = np.random.SeedSequence([seed, shape_index, connectivity_index, replication])
    return int(state.generate_state(1)[0])


def run_one(n, base_shape, connectivity, seed, x=DEFAULT_GROWTH_FACTOR, delay='unit',
            delay_bound=DEFAULT_DELAY_BOUND):
    topology = generate(n, base_shape, connectivity, seed)
    result = run_election(topology, x, DelayModel(delay, seed, delay_bound))
    return topology, result


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: pd.DataFrame
    summary: pd.DataFrame
    bounds: pd.DataFrame
    growth_problems: list = field(default_factory=list)

    @property
    def all_bounds_hold(self):
        return bool(self.bounds['time_ok'].all() and self.bounds['work_message_ok'].all())


def summarize(runs):
    if runs.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    grouped = runs.groupby(['base_shape', 'n', 'connectivity'], sort=False)
    summary = grouped.agg(
        replications=('replication', 'count'),
        max_time=('time_excl_init', 'max'),
        max_transmissions=('transmissions', 'max'),
        leader_is_max_id=('leader_is_max_id', 'mean'),
    ).reset_index()
    return summary[SUMMARY_COLUMNS]


def run_experiment(cfg, verbose=False):
    if cfg.x <= 1:
        raise InvalidGrowthFactorError(f"growth factor X must be greater than 1 (got {cfg.x})")
    run_rows, bound_rows, problems = [], [], []
    for si, shape in enumerate(cfg.base_shapes):
        for ci, c in enumerate(cfg.connectivity):
            for r in range(cfg.replications):
                seed = derive_seed(cfg.seed, si, ci, r)
                topology, result = run_one(cfg.n, shape, c, seed, cfg.x, cfg.delay_kind,
                                           cfg.delay_bound)
                run_rows.append({
                    'base_shape': shape,
                    'n': cfg.n,
                    'connectivity': c,
                    'replication': r,
                    'seed': seed,
                    'leader': result.leader,
                    'leader_is_max_id': result.leader == max(topology.nodes),
                    'init_time': result.init_time,
                    'time_excl_init': result.time_excl_init,
                    'transmissions': result.transmissions,
                    'post_init_transmissions': result.post_init_transmissions,
                    'completion_time': result.completion_time,
                    'edges': topology.edge_count,
                    'work_phases': len(result.work_phases),
                })
                report = check_bounds(result, cfg.x, cfg.n)
                bound_rows.append({'base_shape': shape, 'n': cfg.n, 'connectivity': c,
                                   'replication': r, **report.as_dict()})
                problems.extend(f"{shape} C={c} rep={r}: {p}"
                                for p in check_growth(result.work_phases, cfg.x, cfg.n))
            if verbose:
                S.status(S.info(f"  {shape:<12} C={c:<4} {cfg.replications} runs done"))

    runs = pd.DataFrame(run_rows, columns=RUN_COLUMNS)
    bounds = pd.DataFrame(bound_rows, columns=BOUND_COLUMNS)
    summary = summarize(runs)
    if verbose:
        failures = int((~bounds['time_ok']).sum() + (~bounds['work_message_ok']).sum())
        if failures:
            S.status(S.warning(f"  {failures} bound checks failed"))
        over = int((~bounds['message_ok']).sum())
        if over:
            S.status(S.muted(f"  {over} runs above the closed-form message bound"))
    return ExperimentResult(cfg, runs, summary, bounds, problems)
