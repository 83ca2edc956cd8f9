"""Peak and saturation-onset finders for gain curves."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError

__all__ = ["Peak", "find_peak", "saturation_onset", "onset_spacing"]


@dataclass(frozen=True)
class Peak:
    """Location and value of a maximum.

    ``at_boundary`` is set when the maximum sits on the edge of the search
    interval, i.e. the curve is still rising there.
    """

    x: float
    value: float
    at_boundary: bool
    lower: float
    upper: float


def find_peak(f, lower, upper, step=0.001, resolution=1e-4):
    """Global maximum of ``f`` on ``[lower, upper]``.

    A grid scan with spacing ``step`` picks the best bracket; golden-section
    search then refines it to ``resolution``. The scan guards against the many
    local maxima that gain curves show between grating-lobe onsets.
    """
    if not (math.isfinite(lower) and math.isfinite(upper) and lower < upper):
        raise DomainError(f"invalid search interval [{lower}, {upper}]")
    if not (step > 0 and resolution > 0):
        raise DomainError("step and resolution must be positive")
    n = max(2, int(math.ceil((upper - lower) / step)) + 1)
    xs = np.linspace(lower, upper, n)
    ys = np.array([f(x) for x in xs])
    i = int(np.argmax(ys))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n - 1)]
    res = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded", options={"xatol": resolution})
    x, y = (float(res.x), float(-res.fun)) if -res.fun >= ys[i] else (float(xs[i]), float(ys[i]))
    edge = min(x - lower, upper - x) <= max(resolution, 1e-12 * abs(upper))
    return Peak(x=x, value=y, at_boundary=bool(edge), lower=lower, upper=upper)


def saturation_onset(x, y, fraction=0.1):
    """First point where a rising curve flattens.

    The forward slope ``dy/dx`` is compared with its largest value (the steep
    rise before saturation); the onset is the first ``x`` after that maximum
    at which the slope falls below ``fraction`` times it.

    Parameters
    ----------
    x, y : array_like
        Samples with strictly increasing ``x``.
    fraction : float
        Threshold relative to the largest slope, in (0, 1).

    Returns
    -------
    float or None
        ``None`` if the slope never drops below the threshold.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 3:
        raise DomainError("need at least three matching samples")
    if np.any(np.diff(x) <= 0):
        raise DomainError("x must be strictly increasing")
    if not 0 < fraction < 1:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")
    slope = np.diff(y) / np.diff(x)
    k = int(np.argmax(slope))
    if not slope[k] > 0:
        return None
    below = np.nonzero(slope[k:] < fraction * slope[k])[0]
    if below.size == 0:
        return None
    return float(x[k + below[0]])


def onset_spacing(aperture, n_onset):
    """Element spacing of a ULA with the given aperture and element count."""
    if n_onset is None:
        return None
    return aperture / (n_onset - 1)
