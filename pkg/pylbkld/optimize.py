# Copyright 2021-2026 pylbkld contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Design-space search: exhaustive sweeps and SPSA."""

from .error import ConfigError, DivergenceError
from .estimators import estimate
from .parallel import ordered_map
from .rng import as_stream
from .structs import UtilityEstimate
from dataclasses import dataclass, field, replace
from functools import partial
import itertools
import logging
import math
import numpy as np

log = logging.getLogger(__name__)


DESIGN_KINDS = ('point', 'scalar_interval', 'index_pairs', 'time_box', 'integer_grid')
EXHAUSTIVE_TIME_BOX_K_MAX = 2


@dataclass(frozen=True)
class DesignSpec:
    """The design search space.

    * ``point``: the single design ``value``.
    * ``scalar_interval``: ``grid_points`` equally spaced scalars in [lo, hi], inclusive.
    * ``index_pairs``: all pairs (i, j), 1 <= i < j <= m.
    * ``time_box``: k sorted times in [lo, hi] on a ``grid_resolution`` grid.
    * ``integer_grid``: all strictly increasing integer k-tuples in [lo, hi].
    """
    kind: str
    value: tuple = ()
    lo: float = 0.0
    hi: float = 0.0
    grid_points: int = 0
    m: int = 0
    k: int = 1
    grid_resolution: float = 1.0

    def validate(self, prefix='design'):
        if self.kind not in DESIGN_KINDS:
            raise ConfigError(f'unknown kind {self.kind!r}, expected one of {list(DESIGN_KINDS)}', f'{prefix}.kind')
        if self.kind == 'point' and not len(self.value):
            raise ConfigError('point design needs a value', f'{prefix}.value')
        if self.kind in ('scalar_interval', 'time_box', 'integer_grid') and not self.hi >= self.lo:
            raise ConfigError(f'need lo <= hi, got [{self.lo}, {self.hi}]', f'{prefix}.hi')
        if self.kind == 'scalar_interval' and self.grid_points < 1:
            raise ConfigError('grid_points must be >= 1', f'{prefix}.grid_points')
        if self.kind == 'index_pairs' and self.m < 2:
            raise ConfigError('m must be >= 2', f'{prefix}.m')
        if self.kind in ('time_box', 'integer_grid') and self.k < 1:
            raise ConfigError('k must be >= 1', f'{prefix}.k')
        if self.kind == 'time_box' and not self.grid_resolution > 0:
            raise ConfigError('grid_resolution must be > 0', f'{prefix}.grid_resolution')
        return self

    @property
    def enumerable(self) -> bool:
        return self.kind != 'time_box' or self.k <= EXHAUSTIVE_TIME_BOX_K_MAX

    @property
    def width(self) -> float:
        return float(self.hi - self.lo)


def _time_grid(spec: DesignSpec):
    count = int(math.floor(spec.width / spec.grid_resolution + 1e-9)) + 1
    return [snap_value(spec.lo + i * spec.grid_resolution, spec.grid_resolution) for i in range(count)]


def snap_value(x, resolution):
    """Round x to a multiple of resolution without binary residue."""
    decimals = max(0, -int(math.floor(math.log10(resolution))) + 1)
    return round(round(x / resolution) * resolution, decimals)


def enumerate_designs(spec: DesignSpec) -> list:
    """List every design of an enumerable spec in lexicographic order.

    :raise ConfigError: for a time_box with k > 2; use :func:`spsa_optimize`.
    """
    spec.validate()
    if spec.kind == 'point':
        return [tuple(spec.value)]
    if spec.kind == 'scalar_interval':
        if spec.grid_points == 1:
            return [(float(spec.lo),)]
        return [(float(x),) for x in np.linspace(spec.lo, spec.hi, spec.grid_points)]
    if spec.kind == 'index_pairs':
        return list(itertools.combinations(range(1, spec.m + 1), 2))
    if spec.kind == 'integer_grid':
        values = range(int(math.ceil(spec.lo)), int(math.floor(spec.hi)) + 1)
        return list(itertools.combinations(values, spec.k))
    if not spec.enumerable:
        raise ConfigError(f'time_box with k={spec.k} is not enumerable, use the optimize command',
                          'design.k')
    return list(itertools.combinations(_time_grid(spec), spec.k))


def project(design, spec: DesignSpec) -> tuple:
    """Clip every coordinate into [lo, hi] and sort ascending."""
    x = np.clip(np.asarray(design, dtype=np.float64), spec.lo, spec.hi)
    return tuple(float(v) for v in np.sort(x))


def snap(design, spec: DesignSpec) -> tuple:
    """Project onto the box and round to the grid resolution."""
    x = project(design, spec)
    x = [min(max(snap_value(v, spec.grid_resolution), spec.lo), spec.hi) for v in x]
    return tuple(sorted(x))


# ----------------------------------------------------------------------------
# Objective plumbing

def _as_estimate(design, result) -> UtilityEstimate:
    if isinstance(result, UtilityEstimate):
        return result
    return UtilityEstimate(design=tuple(design), kind='custom', value=float(result), std_error=0.0,
                           n_sims=0, replications=1)


def _estimator_objective(model, kind, cfg, workers, design, stream):
    return estimate(kind, model, design, cfg, stream, workers=workers)


def make_objective(model, estimator, cfg, workers=1):
    """Build an objective(design, stream) -> UtilityEstimate.

    :param model: The model.
    :param estimator: An estimator kind, or a callable(design, stream)
        returning a :class:`UtilityEstimate` or a float.
    :param cfg: The estimator configuration.
    :param workers: The replication parallelism of each estimate.
    """
    if callable(estimator):
        return estimator
    return partial(_estimator_objective, model, estimator, cfg, workers)


@dataclass
class SweepResult:
    rows: list
    argmax_design: tuple
    argmax_value: float

    @property
    def estimates(self):
        return [est for _, est in self.rows]


def argmax_row(rows):
    """The (design, value) with the largest value; ties go to the smallest design."""
    best = max(est.value for _, est in rows)
    design = min(d for d, est in rows if est.value == best)
    return design, best


def _sweep_row(objective, item):
    index, design, stream = item
    est = _as_estimate(design, objective(design, stream))
    log.info('sweep %d: design=%s value=%.6g se=%.3g', index, design, est.value, est.std_error)
    return est


def sweep(model, spec: DesignSpec, estimator, cfg, stream, workers=1) -> SweepResult:
    """Evaluate the estimator at every enumerated design.

    Row i draws from ``stream.child(i)``.

    :return: The :class:`SweepResult`.
    :raise ConfigError: when the spec is not enumerable.
    """
    stream = as_stream(stream)
    designs = enumerate_designs(spec)
    if model is not None:
        designs = [model.validate_design(d) for d in designs]
    objective = make_objective(model, estimator, cfg)
    items = [(i, d, stream.child(i)) for i, d in enumerate(designs)]
    estimates = ordered_map(partial(_sweep_row, objective), items, workers)
    rows = list(zip(designs, estimates))
    argmax_design, argmax_value = argmax_row(rows)
    log.info('sweep argmax: %s = %.6g', argmax_design, argmax_value)
    return SweepResult(rows=rows, argmax_design=argmax_design, argmax_value=argmax_value)


# ----------------------------------------------------------------------------
# SPSA

@dataclass(frozen=True)
class SpsaConfig:
    """SPSA settings.

    Gains follow a_m = a / (m + 1 + A)^alpha and c_m = c / (m + 1)^gamma.
    Unset a, c and A are calibrated: A is 10% of the iterations, c is the
    replication standard error of the utility at x0, and a makes the first
    step about 2% of the box width.

    The calibrated c is clipped to [1%, 10%] of the box width.  The standard
    error is in utility units while c perturbs the design, so an unclipped
    c can be far below the grid resolution or wider than the box.

    :param iterations: The iteration count.
    :param alpha: The step gain exponent.
    :param gamma: The perturbation gain exponent.
    :param a: The step gain numerator.
    :param c: The perturbation gain numerator.
    :param A: The step gain stability offset.
    :param replications: The estimator replications per utility evaluation.
    :param calibration: The gradient estimates averaged to calibrate a.
    :param x0: The initial design, or evenly spaced times when empty.
    :param compare: Extra designs to score at the full estimator settings.
    """
    iterations: int = 200
    alpha: float = 0.602
    gamma: float = 0.101
    a: float = None
    c: float = None
    A: float = None
    replications: int = 5
    calibration: int = 2
    x0: tuple = ()
    compare: tuple = field(default_factory=tuple)

    def validate(self, prefix='spsa'):
        if self.iterations < 1:
            raise ConfigError('iterations must be >= 1', f'{prefix}.iterations')
        if self.replications < 1:
            raise ConfigError('replications must be >= 1', f'{prefix}.replications')
        if self.calibration < 1:
            raise ConfigError('calibration must be >= 1', f'{prefix}.calibration')
        for name in ('a', 'c'):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f'{name} must be > 0', f'{prefix}.{name}')
        if self.A is not None and self.A < 0:
            raise ConfigError('A must be >= 0', f'{prefix}.A')
        return self


def _spsa_estimator_cfg(cfg, spsa: SpsaConfig):
    if cfg is not None and hasattr(cfg, 'replications'):
        return replace(cfg, replications=spsa.replications)
    return cfg


def _gradient(objective, x, c, spec, stream):
    """One simultaneous-perturbation gradient estimate with common random numbers."""
    delta = stream.child(0).generator().integers(0, 2, size=len(x)) * 2 - 1
    eval_stream = stream.child(1)
    u_plus = _as_estimate(x, objective(project(x + c * delta, spec), eval_stream)).value
    u_minus = _as_estimate(x, objective(project(x - c * delta, spec), eval_stream)).value
    g = (u_plus - u_minus) / (2.0 * c * delta)
    return g, 0.5 * (u_plus + u_minus)


def spsa_optimize(model, spec: DesignSpec, estimator, cfg, stream, spsa: SpsaConfig = None, workers=1):
    """Maximize the expected utility over a time_box by SPSA.

    Iterates d <- proj(d + a_m g_m) where proj clips into [lo, hi]^k and
    sorts.  Both perturbed evaluations of an iteration share one random
    stream.  The trace records each iterate with the mean of its two
    perturbed utility estimates.

    :param model: The model, or None with a callable estimator.
    :param spec: The time_box :class:`DesignSpec`.
    :param estimator: An estimator kind or a callable(design, stream).
    :param cfg: The estimator configuration.
    :param stream: The :class:`Stream` or integer seed.
    :param spsa: The :class:`SpsaConfig`.
    :param workers: The replication parallelism of each utility estimate.
    :return: (design, trace) with the design snapped to the grid resolution.
    :raise DivergenceError: when a utility estimate is not finite.
    """
    spsa = (spsa or SpsaConfig()).validate()
    spec.validate()
    if spec.kind != 'time_box':
        raise ConfigError(f'spsa needs a time_box design, got {spec.kind}', 'design.kind')
    stream = as_stream(stream)
    objective = make_objective(model, estimator, _spsa_estimator_cfg(cfg, spsa), workers)
    width = spec.width
    if spsa.x0:
        if len(spsa.x0) != spec.k:
            raise ConfigError(f'x0 needs {spec.k} coordinates', 'spsa.x0')
        x = np.array(project(spsa.x0, spec))
    else:
        x = spec.lo + width * np.arange(1, spec.k + 1) / (spec.k + 1)

    A = 0.1 * spsa.iterations if spsa.A is None else spsa.A
    c = spsa.c
    if c is None:
        est = _as_estimate(x, objective(tuple(x), stream.child(2)))
        c = est.std_error if est.std_error > 0 else 0.01 * width
        c = min(max(c, 0.01 * width), 0.1 * width)
    a = spsa.a
    if a is None:
        mags = [np.mean(np.abs(_gradient(objective, x, c, spec, stream.child(3, j))[0]))
                for j in range(spsa.calibration)]
        mag = float(np.mean(mags))
        a = 0.02 * width * (1 + A) ** spsa.alpha / mag if mag > 0 and np.isfinite(mag) else 1.0
    log.info('spsa: a=%.6g c=%.6g A=%.6g iterations=%d', a, c, A, spsa.iterations)

    trace = []
    for m in range(spsa.iterations):
        a_m = a / (m + 1 + A) ** spsa.alpha
        c_m = c / (m + 1) ** spsa.gamma
        g, u = _gradient(objective, x, c_m, spec, stream.child(1, m))
        if not (np.isfinite(u) and np.all(np.isfinite(g))):
            trace.append({'iteration': m, 'design': tuple(float(v) for v in x), 'utility': float(u)})
            log.warning('spsa: non-finite utility at iteration %d', m)
            raise DivergenceError(f'non-finite utility at iteration {m}', trace)
        trace.append({'iteration': m, 'design': tuple(float(v) for v in x), 'utility': float(u)})
        x = np.array(project(x + a_m * g, spec))
        log.info('spsa %d: design=%s utility=%.6g', m, tuple(np.round(x, 4)), u)
    design = snap(x, spec)
    if model is not None:
        design = model.validate_design(design)
    return design, trace
