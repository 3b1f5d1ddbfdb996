import csv
import json
import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import EvaluationError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_MIN_CAPITAL = 100.0
DEFAULT_MAX_CAPITAL = 10000.0
DEFAULT_STEP = 10.0
DEFAULT_MULTIPLES = (2, 3, 4)

CURVE_CSV_HEADER = ('capital_usd', 'roi')


@dataclass(frozen=True)
class CapitalGrid:
    """Discrete uniform capital distribution: min, min + step, ... up to max."""

    min_capital: float = DEFAULT_MIN_CAPITAL
    max_capital: float = DEFAULT_MAX_CAPITAL
    step: float = DEFAULT_STEP

    def __post_init__(self):
        for attr in ('min_capital', 'max_capital', 'step'):
            value = getattr(self, attr)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError("{0} must be a finite number, got {1!r}".format(attr, value))
        if self.min_capital <= 0:
            raise ParameterError("min_capital must be positive")
        if self.max_capital < self.min_capital:
            raise ParameterError("max_capital must be at least min_capital")
        if self.step <= 0:
            raise ParameterError("step must be positive")

    def __len__(self):
        return math.floor((self.max_capital - self.min_capital) / self.step + 1e-9) + 1

    def samples(self):
        return [float(self.min_capital + k * self.step) for k in range(len(self))]

    def to_dict(self):
        return {
            'min_capital': self.min_capital,
            'max_capital': self.max_capital,
            'step': self.step,
        }


@dataclass(frozen=True)
class Curve:
    points: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        capitals = [v for v, _ in self.points]
        if any(b <= a for a, b in zip(capitals, capitals[1:])):
            raise ParameterError("curve capitals must be strictly increasing")
        for v, roi in self.points:
            if not math.isfinite(roi):
                raise ParameterError("non-finite ROI {0!r} at capital {1!r}".format(roi, v))

    def __len__(self):
        return len(self.points)

    @property
    def capitals(self):
        return np.array([v for v, _ in self.points], dtype=float)

    @property
    def rois(self):
        return np.array([roi for _, roi in self.points], dtype=float)

    def with_metadata(self, **extra):
        metadata = dict(self.metadata)
        metadata.update(extra)
        return Curve(points=self.points, metadata=metadata)

    def write_csv(self, stream, extra=None):
        """extra: ordered (column, value) pairs prepended to every row."""
        extra = list(extra or [])
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow([name for name, _ in extra] + list(CURVE_CSV_HEADER))
        self.write_csv_rows(writer, extra)

    def write_csv_rows(self, writer, extra=None):
        prefix = [value for _, value in (extra or [])]
        for v, roi in self.points:
            writer.writerow(prefix + [repr(v), repr(roi)])

    def to_dict(self):
        return {
            'metadata': self.metadata,
            'points': [{'capital_usd': v, 'roi': roi} for v, roi in self.points],
        }


@dataclass(frozen=True)
class EgalScore:
    value: float
    mean_roi: float
    sample_count: int

    def to_dict(self):
        return {
            'egalitarianism': self.value,
            'mean_roi': self.mean_roi,
            'n': self.sample_count,
        }


def _evaluate(evaluator, capital):
    try:
        roi = evaluator(capital)
    except EvaluationError:
        raise
    except Exception as e:
        raise EvaluationError(capital, e) from e
    if not isinstance(roi, (int, float)) or not math.isfinite(roi):
        raise EvaluationError(capital, "non-finite ROI {0!r}".format(roi))
    logger.debug("ROI at capital %s: %s", capital, roi)
    return float(roi)


def _evaluate_chunk(evaluator, capitals):
    return [_evaluate(evaluator, v) for v in capitals]


def egalitarian_curve(evaluator, grid, metadata=None, workers=1):
    """
    Samples evaluator (capital -> ROI) at every grid capital. With workers > 1
    the grid is cut into one contiguous chunk per worker process, so the
    evaluator must be picklable and is shipped to each worker once.
    """
    capitals = grid.samples()

    if workers > 1 and len(capitals) > 1:
        size = math.ceil(len(capitals) / workers)
        chunks = [capitals[i:i + size] for i in range(0, len(capitals), size)]
        with Pool(processes=len(chunks)) as pool:
            results = pool.starmap(_evaluate_chunk, [(evaluator, chunk) for chunk in chunks])
        rois = [roi for chunk in results for roi in chunk]
    else:
        rois = _evaluate_chunk(evaluator, capitals)

    logger.info("Sampled curve: %s", {'points': len(capitals), 'workers': workers})
    return Curve(points=tuple(zip(capitals, rois)), metadata=dict(metadata or {}))


def egalitarianism(curve):
    """Negative population variance of the sampled ROIs; 0 is perfectly egalitarian."""
    if len(curve) == 0:
        raise ParameterError("egalitarianism of an empty curve is undefined")

    rois = curve.rois
    if np.all(rois == rois[0]):
        return EgalScore(value=0.0, mean_roi=float(rois[0]), sample_count=len(rois))

    return EgalScore(
        value=-float(np.var(rois)),
        mean_roi=float(np.mean(rois)),
        sample_count=len(rois),
    )


def curve_envelope(curve):
    rois = np.maximum.accumulate(curve.rois)
    points = tuple(zip([v for v, _ in curve.points], [float(r) for r in rois]))
    return Curve(points=points, metadata=dict(curve.metadata, envelope=True))


@dataclass(frozen=True)
class SybilViolation:
    capital: float
    multiple: int
    roi: float
    multiple_roi: float


@dataclass(frozen=True)
class SybilReport:
    tolerance: float
    checked: int
    violations: tuple = ()

    @property
    def holds(self):
        return not self.violations

    def to_dict(self):
        return {
            'tolerance': self.tolerance,
            'checked': self.checked,
            'violations': [
                {
                    'capital_usd': v.capital,
                    'multiple': v.multiple,
                    'roi': v.roi,
                    'multiple_roi': v.multiple_roi,
                }
                for v in self.violations
            ],
        }


def sybil_check(evaluator, grid, multiples=DEFAULT_MULTIPLES, tolerance=0.0):
    """Lists every (v, i) where splitting capital i*v into i investors of v would beat pooling it."""
    multiples = sorted(set(multiples))
    if any(not isinstance(i, int) or i < 2 for i in multiples):
        raise ParameterError("multiples must be integers >= 2, got {0!r}".format(multiples))
    if tolerance < 0:
        raise ParameterError("tolerance must be non-negative")

    violations = []
    checked = 0
    for v in grid.samples():
        roi = evaluator(v)
        for i in multiples:
            pooled = evaluator(i * v)
            checked += 1
            if roi > pooled + tolerance:
                violations.append(SybilViolation(v, i, roi, pooled))

    if violations:
        logger.warning("Sybil property violated at %d of %d checks", len(violations), checked)
    return SybilReport(tolerance=tolerance, checked=checked, violations=tuple(violations))


def parameter_sweep(base, axis, values, grid, workers=1):
    """
    One curve per value of `axis`, every other parameter held at `base`.
    `base` is a model (see egalitarian.models) that knows its sweepable axes.
    """
    if axis not in base.sweep_axes:
        raise ParameterError(
            "invalid sweep axis '{0}' for model {1}; choose from: {2}".format(
                axis, base.name, ", ".join(base.sweep_axes)
            )
        )
    values = list(values)
    if not values:
        raise ParameterError("sweep needs at least one value")

    curves = []
    for value in values:
        logger.info("Sweeping %s: %s", base.name, {'axis': axis, 'value': value})
        model = base.replace(axis, value)
        curve = model.curve(grid, workers=workers)
        curves.append(curve.with_metadata(swept_axis=axis, swept_value=value))
    return curves


def write_json(document, stream):
    json.dump(document, stream, indent=2, sort_keys=True)
    stream.write('\n')
