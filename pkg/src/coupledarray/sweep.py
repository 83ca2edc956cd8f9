"""Sweep configuration, evaluation and CSV output.

A sweep is described by an INI-style document::

    [array]
    kind = ula
    aperture = 40

    [link]
    d_bm = 1000
    phi = 0

    [sweep]
    N = 2:300

    [family]
    d_bm = log(100, 10000, 5)

    [output]
    quantities = a_tx, a_rx

``[sweep]`` holds exactly one variable and ``[family]`` at most one; the
family is the outer loop and produces one curve per value. Value lists are
written as ``1, 2, 4``, as an inclusive range ``start:stop[:step]`` or as
``log(first, last, count)``.
"""

from concurrent.futures import ThreadPoolExecutor
import configparser
import csv
from dataclasses import dataclass, field, replace
import io
import math
import re

import numpy as np

from . import __version__
from .analysis import find_peak, saturation_onset
from .arraygain import receive_array_gain, transmit_array_gain, transmit_array_gain_far_field
from .errors import ConfigError, DomainError, NumericalError
from .geometry import Direction, chord_spacing, radius_for_spacing, uca_positions, ula_positions
from .impedance import DIPOLE_LENGTH, ETA0, dipole_self_impedance
from .multiport import (
    ANTENNA_NOISE_ONLY,
    DEFAULT_Z_LOAD,
    ILLUSTRATIVE_LNA_NOISE,
    NoiseModel,
    TerminationModel,
)
from .scenario import LinkDirection, LinkScenario

__all__ = [
    "QUANTITIES",
    "SWEEP_VARIABLES",
    "PeakSpec",
    "SweepSpec",
    "SweepRow",
    "parse_config",
    "format_config",
    "sweep_points",
    "evaluate_point",
    "run_sweep",
    "run_peaks",
    "emit_csv",
    "emit_peaks_csv",
]

QUANTITIES = ("a_rx", "a_tx", "a_tx_ff", "eb_min")
NEAR_FIELD_QUANTITIES = ("a_rx", "a_tx", "eb_min")
SWEEP_VARIABLES = ("N", "spacing", "radius", "aperture", "d_bm", "phi")
NOISE_PROFILES = {"antenna": ANTENNA_NOISE_ONLY, "illustrative": ILLUSTRATIVE_LNA_NOISE}
METHODS = ("auto", "dense", "structured")

DEFAULT_GAMMA = 1e-3
MAX_ANTENNAS = 100_000

# (type, lower, upper, lower_open); bounds are inclusive unless lower_open
_BOUNDS = {
    "N": (int, 1, MAX_ANTENNAS, False),
    "spacing": (float, 0.0, 1e4, True),
    "radius": (float, 0.0, 1e5, True),
    "aperture": (float, 0.0, 1e5, True),
    "d_bm": (float, 0.0, 1e9, True),
    "phi": (float, -180.0, 180.0, False),
    "theta": (float, 0.0, 180.0, False),
    "gamma": (float, 0.0, 10.0, False),
    "reference_x": (float, -1e5, 1e5, False),
    "reference_y": (float, -1e5, 1e5, False),
    "sigma_u": (float, 0.0, 1e3, False),
    "sigma_i": (float, 0.0, 1e3, False),
    "t_antenna": (float, 0.0, 1e6, True),
    "bandwidth": (float, 0.0, 1e15, True),
    "lower": (float, 0.0, 1e9, True),
    "upper": (float, 0.0, 1e9, True),
    "step": (float, 0.0, 1e3, True),
    "resolution": (float, 0.0, 1.0, True),
    "max_aperture": (float, 0.0, 1e5, True),
    "fraction": (float, 0.0, 1.0, True),
}

_SECTIONS = {
    "array": ("kind", "N", "spacing", "radius", "aperture"),
    "link": ("d_bm", "phi", "theta", "gamma", "z_load", "reference_x", "reference_y"),
    "noise": ("profile", "sigma_u", "sigma_i", "rho", "t_antenna", "bandwidth"),
    "sweep": SWEEP_VARIABLES,
    "family": SWEEP_VARIABLES,
    "output": ("quantities", "method"),
    "peaks": ("mode", "quantity", "variable", "lower", "upper", "step", "resolution", "max_aperture", "fraction"),
}

_LOG_RE = re.compile(r"^log\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")


@dataclass(frozen=True)
class PeakSpec:
    """What the ``peaks`` subcommand searches for.

    ``mode = "peak"`` maximises ``quantity`` over ``variable`` in
    ``[lower, upper]`` (clipped so the array stays within ``max_aperture``);
    ``mode = "onset"`` locates the saturation onset of each ``[sweep]`` curve.
    """

    mode: str = "peak"
    quantity: str = "a_tx_ff"
    variable: str = "spacing"
    lower: float = 0.3
    upper: float = 0.7
    step: float = 0.001
    resolution: float = 1e-4
    max_aperture: float | None = None
    fraction: float = 0.1


@dataclass(frozen=True)
class SweepSpec:
    """Parsed sweep configuration.

    Scalar parameters hold the fixed values; the swept and family variables
    are stored separately as ``(name, values)``.
    """

    kind: str = "ula"
    N: int | None = None
    spacing: float | None = None
    radius: float | None = None
    aperture: float | None = None
    d_bm: float | None = None
    phi: float = 0.0
    theta: float = 90.0
    gamma: float = DEFAULT_GAMMA
    z_load: complex = DEFAULT_Z_LOAD
    reference_x: float = 0.0
    reference_y: float = 0.0
    noise_profile: str = "antenna"
    noise: NoiseModel = ANTENNA_NOISE_ONLY
    quantities: tuple = ("a_tx_ff",)
    method: str = "auto"
    sweep: tuple | None = None
    family: tuple | None = None
    peaks: PeakSpec | None = None

    @property
    def termination(self):
        return TerminationModel(z_load=self.z_load)


@dataclass(frozen=True)
class SweepRow:
    """One evaluated sweep point; unrequested or failed quantities are ``None``."""

    sweep_index: int
    curve: int
    N: int
    d_over_lambda: float | None
    aperture_over_lambda: float
    radius_over_lambda: float | None
    d_bm_over_lambda: float | None
    phi_deg: float
    theta_deg: float
    gamma: float
    a_rx: float | None = None
    a_tx: float | None = None
    a_tx_ff: float | None = None
    eb_min_joule: float | None = None
    diagnostics: tuple = ()


CSV_HEADER = (
    "sweep_index",
    "curve",
    "N",
    "d_over_lambda",
    "aperture_over_lambda",
    "radius_over_lambda",
    "d_bm_over_lambda",
    "phi_deg",
    "theta_deg",
    "gamma",
    "a_rx",
    "a_tx",
    "a_tx_ff",
    "eb_min_joule",
    "diagnostics",
)


# parsing ------------------------------------------------------------------


def _number(text, name, kind=float):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as a number") from None
    if kind is int:
        if v != round(v):
            raise ConfigError(f"{name}: expected an integer, got {text!r}")
        return int(round(v))
    return v


def _check_bounds(name, v):
    kind, lo, hi, lo_open = _BOUNDS[name]
    bad = (v <= lo if lo_open else v < lo) or v > hi or not math.isfinite(v)
    if bad:
        left = "(" if lo_open else "["
        raise ConfigError(f"{name} = {v!r} out of range {left}{lo:g}, {hi:g}]")
    return v


def _scalar(name, text):
    kind = _BOUNDS[name][0]
    text = text.strip()
    if "," in text or ":" in text or text.startswith("log("):
        raise ConfigError(f"{name}: value lists belong in [sweep] or [family], got {text!r}")
    return _check_bounds(name, _number(text, name, kind))


def parse_values(name, text):
    """Parse a value list: ``a, b, c``, ``start:stop[:step]`` or ``log(a, b, n)``."""
    kind = _BOUNDS[name][0]
    text = text.strip()
    m = _LOG_RE.match(text)
    if m:
        a, b = (_number(m.group(i), name) for i in (1, 2))
        count = _number(m.group(3), name, int)
        if a <= 0 or b <= 0 or count < 1:
            raise ConfigError(f"{name}: log() needs positive ends and count >= 1")
        vals = np.logspace(math.log10(a), math.log10(b), count) if count > 1 else np.array([a])
    elif ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"{name}: range must be start:stop or start:stop:step, got {text!r}")
        start, stop = _number(parts[0], name), _number(parts[1], name)
        step = _number(parts[2], name) if len(parts) == 3 else 1.0
        if step <= 0 or stop < start:
            raise ConfigError(f"{name}: range {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = start + step * np.arange(count)
    else:
        vals = np.array([_number(p, name) for p in text.split(",") if p.strip()])
    if vals.size == 0:
        raise ConfigError(f"{name}: empty value list")
    if kind is int:
        if np.any(np.abs(vals - np.round(vals)) > 1e-9):
            raise ConfigError(f"{name}: expected integers, got {text!r}")
        out = tuple(int(round(v)) for v in vals)
    else:
        out = tuple(float(np.round(v, 12)) if abs(v) >= 1e-3 else float(v) for v in vals)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{name}: values must be strictly increasing")
    for v in out:
        _check_bounds(name, v)
    return out


def _complex(name, text):
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as a complex number") from None


def _read(text):
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), comment_prefixes=("#", ";")
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    for sect in cp.sections():
        if sect not in _SECTIONS:
            raise ConfigError(f"unknown section [{sect}]; known: {', '.join(_SECTIONS)}")
        for key in cp[sect]:
            if key not in _SECTIONS[sect]:
                raise ConfigError(
                    f"unknown key {key!r} in [{sect}]; known: {', '.join(_SECTIONS[sect])}"
                )
    return cp


def _one_variable(cp, sect):
    if not cp.has_section(sect):
        return None
    keys = list(cp[sect])
    if len(keys) != 1:
        raise ConfigError(f"[{sect}] must name exactly one variable, got {keys or 'none'}")
    name = keys[0]
    return name, parse_values(name, cp[sect][name])


def parse_config(text):
    """Parse a configuration document into a :class:`SweepSpec`.

    Raises
    ------
    ConfigError
        On unknown sections or keys, malformed or out-of-range values and
        inconsistent parameter combinations.
    """
    cp = _read(text)
    kw = {}
    if cp.has_section("array"):
        a = cp["array"]
        if "kind" in a:
            kind = a["kind"].strip().lower()
            if kind not in ("ula", "uca"):
                raise ConfigError(f"kind must be 'ula' or 'uca', got {kind!r}")
            kw["kind"] = kind
        for key in ("N", "spacing", "radius", "aperture"):
            if key in a:
                kw[key] = _scalar(key, a[key])
    if cp.has_section("link"):
        s = cp["link"]
        for key in ("d_bm", "phi", "theta", "gamma", "reference_x", "reference_y"):
            if key in s:
                kw[key] = _scalar(key, s[key])
        if "z_load" in s:
            z = _complex("z_load", s["z_load"])
            if not z.real > 0:
                raise ConfigError(f"z_load = {z} needs a positive real part")
            kw["z_load"] = z
    profile = "antenna"
    noise_kw = {}
    if cp.has_section("noise"):
        s = cp["noise"]
        if "profile" in s:
            profile = s["profile"].strip().lower()
            if profile not in NOISE_PROFILES:
                raise ConfigError(f"noise profile must be one of {list(NOISE_PROFILES)}, got {profile!r}")
        for key in ("sigma_u", "sigma_i", "t_antenna", "bandwidth"):
            if key in s:
                noise_kw[key] = _scalar(key, s[key])
        if "rho" in s:
            rho = _complex("rho", s["rho"])
            if abs(rho) > 1:
                raise ConfigError(f"rho = {rho} out of range |rho| <= 1")
            noise_kw["rho"] = rho
    try:
        kw["noise"] = replace(NOISE_PROFILES[profile], **noise_kw)
    except DomainError as exc:
        raise ConfigError(f"[noise]: {exc}") from None
    kw["noise_profile"] = profile
    if cp.has_section("output"):
        s = cp["output"]
        if "quantities" in s:
            qs = tuple(q.strip() for q in s["quantities"].split(",") if q.strip())
            for q in qs:
                if q not in QUANTITIES:
                    raise ConfigError(f"unknown quantity {q!r}; known: {', '.join(QUANTITIES)}")
            if not qs:
                raise ConfigError("[output] quantities must name at least one quantity")
            kw["quantities"] = tuple(q for q in QUANTITIES if q in qs)
        if "method" in s:
            m = s["method"].strip()
            if m not in METHODS:
                raise ConfigError(f"method must be one of {METHODS}, got {m!r}")
            kw["method"] = m
    kw["sweep"] = _one_variable(cp, "sweep")
    kw["family"] = _one_variable(cp, "family")
    if cp.has_section("peaks"):
        kw["peaks"] = _parse_peaks(cp["peaks"])
    spec = SweepSpec(**kw)
    validate(spec)
    return spec


def _parse_peaks(s):
    kw = {}
    if "mode" in s:
        kw["mode"] = s["mode"].strip()
        if kw["mode"] not in ("peak", "onset"):
            raise ConfigError(f"[peaks] mode must be 'peak' or 'onset', got {kw['mode']!r}")
    if "quantity" in s:
        kw["quantity"] = s["quantity"].strip()
        if kw["quantity"] not in QUANTITIES:
            raise ConfigError(f"[peaks] unknown quantity {kw['quantity']!r}")
    if "variable" in s:
        kw["variable"] = s["variable"].strip()
        if kw["variable"] not in ("spacing", "radius", "aperture", "d_bm", "phi"):
            raise ConfigError(f"[peaks] cannot search over {kw['variable']!r}")
    for key in ("lower", "upper", "step", "resolution", "max_aperture", "fraction"):
        if key in s:
            kw[key] = _scalar(key, s[key])
    p = PeakSpec(**kw)
    if p.lower >= p.upper:
        raise ConfigError(f"[peaks] needs lower < upper, got {p.lower} >= {p.upper}")
    if p.mode == "onset" and p.fraction >= 1:
        raise ConfigError("[peaks] fraction must be below 1")
    return p


def _varying(spec):
    out = {}
    for v in (spec.sweep, spec.family):
        if v is not None:
            out[v[0]] = v[1]
    return out


def validate(spec):
    """Check that a spec determines every sweep point; raises ConfigError."""
    varying = _varying(spec)
    if spec.sweep is not None and spec.family is not None and spec.sweep[0] == spec.family[0]:
        raise ConfigError(f"{spec.sweep[0]} is both the sweep and the family variable")
    for name in varying:
        if getattr(spec, name) is not None and name not in ("phi",):
            raise ConfigError(f"{name} is fixed in the configuration and swept at the same time")
    if spec.peaks is not None and spec.peaks.mode == "peak":
        var = spec.peaks.variable
        if spec.sweep is not None and spec.family is not None:
            raise ConfigError("[peaks] mode = peak takes [sweep] or [family], not both")
        if var in varying:
            raise ConfigError(f"[peaks] variable {var} must not also be swept")
        if var != "phi" and getattr(spec, var) is not None:
            raise ConfigError(f"[peaks] variable {var} must not have a fixed value")
        varying = dict(varying, **{var: (spec.peaks.lower,)})
    if spec.peaks is not None and spec.peaks.mode == "onset":
        if spec.sweep is None or spec.sweep[0] != "N":
            raise ConfigError("[peaks] mode = onset needs [sweep] N = ...")
    if spec.peaks is not None and spec.peaks.quantity not in spec.quantities:
        raise ConfigError(f"[peaks] quantity {spec.peaks.quantity} is not listed in [output] quantities")

    def given(name):
        return getattr(spec, name) is not None or name in varying

    if not given("N"):
        raise ConfigError("the number of antennas N is required")
    sizes = [k for k in ("spacing", "radius", "aperture") if given(k)]
    allowed = ("spacing", "aperture") if spec.kind == "ula" else ("spacing", "radius", "aperture")
    bad = [k for k in sizes if k not in allowed]
    if bad:
        raise ConfigError(f"{bad[0]} does not apply to kind = {spec.kind}")
    if len(sizes) != 1:
        raise ConfigError(
            f"give exactly one of {', '.join(allowed)} for kind = {spec.kind}, got {sizes or 'none'}"
        )
    near = [q for q in spec.quantities if q in NEAR_FIELD_QUANTITIES]
    if near and not given("d_bm"):
        raise ConfigError(f"d_bm is required for {', '.join(near)}")
    if near and spec.theta != 90.0:
        raise ConfigError("near-field quantities place the mobile in the array plane; theta must be 90")
    if (spec.reference_x or spec.reference_y) and not near:
        raise ConfigError("reference_x/reference_y only affect near-field quantities")
    return spec


# canonical text -----------------------------------------------------------


def _fmt(v):
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_config(spec):
    """Canonical configuration text; ``parse_config(format_config(s)) == s``."""
    lines = ["[array]", f"kind = {spec.kind}"]
    for key in ("N", "spacing", "radius", "aperture"):
        if getattr(spec, key) is not None:
            lines.append(f"{key} = {_fmt(getattr(spec, key))}")
    lines += ["", "[link]"]
    if spec.d_bm is not None:
        lines.append(f"d_bm = {_fmt(spec.d_bm)}")
    for key in ("phi", "theta", "gamma", "z_load", "reference_x", "reference_y"):
        lines.append(f"{key} = {_fmt(getattr(spec, key))}")
    n = spec.noise
    lines += [
        "",
        "[noise]",
        f"profile = {spec.noise_profile}",
        f"sigma_u = {_fmt(n.sigma_u)}",
        f"sigma_i = {_fmt(n.sigma_i)}",
        f"rho = {_fmt(complex(n.rho))}",
        f"t_antenna = {_fmt(n.t_antenna)}",
        f"bandwidth = {_fmt(n.bandwidth)}",
    ]
    lines += ["", "[output]", f"quantities = {', '.join(spec.quantities)}", f"method = {spec.method}"]
    for sect, var in (("sweep", spec.sweep), ("family", spec.family)):
        if var is not None:
            lines += ["", f"[{sect}]", f"{var[0]} = {', '.join(_fmt(v) for v in var[1])}"]
    if spec.peaks is not None:
        p = spec.peaks
        lines += ["", "[peaks]", f"mode = {p.mode}", f"quantity = {p.quantity}"]
        if p.mode == "peak":
            lines += [f"variable = {p.variable}"]
            for key in ("lower", "upper", "step", "resolution", "max_aperture"):
                if getattr(p, key) is not None:
                    lines.append(f"{key} = {_fmt(getattr(p, key))}")
        else:
            lines.append(f"fraction = {_fmt(p.fraction)}")
    return "\n".join(lines) + "\n"


# evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    index: int
    curve: int
    params: dict = field(hash=False)


def sweep_points(spec):
    """All sweep points in output order (family outer, sweep inner)."""
    base = {k: getattr(spec, k) for k in ("N", "spacing", "radius", "aperture", "d_bm", "phi")}
    fam = [(None, None)] if spec.family is None else [(spec.family[0], v) for v in spec.family[1]]
    sw = [(None, None)] if spec.sweep is None else [(spec.sweep[0], v) for v in spec.sweep[1]]
    out = []
    for c, (fk, fv) in enumerate(fam):
        for sk, sv in sw:
            p = dict(base)
            if fk is not None:
                p[fk] = fv
            if sk is not None:
                p[sk] = sv
            out.append(Point(index=len(out), curve=c, params=p))
    return out


def point_geometry(kind, params):
    """Array geometry of one sweep point."""
    n = params["N"]
    if kind == "ula":
        if params.get("aperture") is not None:
            d = params["aperture"] / (n - 1) if n > 1 else 1.0
        else:
            d = params["spacing"]
        return ula_positions(n, d)
    if params.get("radius") is not None:
        r = params["radius"]
    elif params.get("aperture") is not None:
        r = params["aperture"] / 2.0
    else:
        if n < 2:
            raise DomainError("a UCA with a given spacing needs N >= 2")
        r = radius_for_spacing(n, params["spacing"])
    return uca_positions(n, r)


def _scenario(spec, geometry, params, direction):
    return LinkScenario(
        bs=geometry,
        mobile_distance=params["d_bm"],
        mobile_azimuth=math.radians(params["phi"]),
        gamma=spec.gamma,
        termination=spec.termination,
        noise=spec.noise,
        direction=direction,
        reference_position=(spec.reference_x, spec.reference_y, 0.0),
    )


def _evaluate_quantities(spec, geometry, params, quantities):
    values = {}
    diags = []
    want = set(quantities)

    def record(name, fn):
        try:
            res = fn()
        except (NumericalError, DomainError, np.linalg.LinAlgError) as exc:
            diags.append(f"{name}:{type(exc).__name__}:{exc}")
            return None
        if res.diagnostics.get("fallback"):
            diags.append(f"{name}:dense-fallback")
        return res

    if want & {"a_tx", "eb_min"}:
        scen = _scenario(spec, geometry, params, LinkDirection.DOWNLINK)
        res = record("a_tx", lambda: transmit_array_gain(scen, method=spec.method))
        if res is not None:
            if "a_tx" in want:
                values["a_tx"] = res.a_tx
            if "eb_min" in want:
                values["eb_min"] = res.eb_min
    if "a_rx" in want:
        scen = _scenario(spec, geometry, params, LinkDirection.UPLINK)
        res = record("a_rx", lambda: receive_array_gain(scen, method=spec.method))
        if res is not None:
            values["a_rx"] = res.a_rx
    if "a_tx_ff" in want:
        direction = Direction.from_degrees(params["phi"], spec.theta)
        res = record(
            "a_tx_ff",
            lambda: transmit_array_gain_far_field(
                geometry, direction, spec.gamma, method=spec.method, return_result=True
            ),
        )
        if res is not None:
            values["a_tx_ff"] = res.a_tx_ff
    return values, diags


def evaluate_point(spec, point):
    """Evaluate one sweep point; failures are recorded, not raised."""
    p = point.params
    try:
        g = point_geometry(spec.kind, p)
    except DomainError as exc:
        g = None
        values, diags = {}, [f"geometry:DomainError:{exc}"]
    else:
        values, diags = _evaluate_quantities(spec, g, p, spec.quantities)
    n = p["N"]
    return SweepRow(
        sweep_index=point.index,
        curve=point.curve,
        N=n,
        d_over_lambda=g.spacing if g is not None and n > 1 else None,
        aperture_over_lambda=g.aperture if g is not None else float("nan"),
        radius_over_lambda=g.radius if g is not None and spec.kind == "uca" else None,
        d_bm_over_lambda=p["d_bm"],
        phi_deg=p["phi"],
        theta_deg=spec.theta,
        gamma=spec.gamma,
        a_rx=values.get("a_rx"),
        a_tx=values.get("a_tx"),
        a_tx_ff=values.get("a_tx_ff"),
        eb_min_joule=values.get("eb_min"),
        diagnostics=tuple(diags),
    )


def _map(fn, items, threads):
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_sweep(spec, threads=1):
    """Evaluate every sweep point; rows come back in sweep order.

    Parameters
    ----------
    spec : SweepSpec
    threads : int
        Worker threads. Rows depend only on their own point, so the result is
        the same for every thread count.
    """
    validate(spec)
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return _map(lambda pt: evaluate_point(spec, pt), sweep_points(spec), threads)


# peaks and onsets ---------------------------------------------------------


PEAK_HEADER = (
    "curve",
    "family_variable",
    "family_value",
    "variable",
    "lower",
    "upper",
    "x_peak",
    "value",
    "at_boundary",
    "N",
    "aperture_over_lambda",
)

ONSET_HEADER = (
    "curve",
    "family_variable",
    "family_value",
    "quantity",
    "fraction",
    "N_onset",
    "d_onset",
    "aperture_over_lambda",
)


def _upper_limit(spec, params, p):
    """Largest value of the peak variable keeping the aperture within ``max_aperture``."""
    if p.max_aperture is None:
        return p.upper
    n = params["N"]
    if p.variable == "spacing":
        if spec.kind == "ula":
            lim = p.max_aperture / (n - 1)
        else:
            lim = chord_spacing(n, p.max_aperture / 2.0)
    elif p.variable == "radius":
        lim = p.max_aperture / 2.0
    elif p.variable == "aperture":
        lim = p.max_aperture
    else:
        return p.upper
    return min(p.upper, lim)


def _value_at(spec, params, quantity):
    g = point_geometry(spec.kind, params)
    values, diags = _evaluate_quantities(spec, g, params, (quantity,))
    key = "eb_min" if quantity == "eb_min" else quantity
    if key not in values:
        raise NumericalError("; ".join(diags) or f"{quantity} unavailable")
    return values[key]


def run_peaks(spec, threads=1):
    """Peak or saturation-onset table for a spec with a ``[peaks]`` section.

    Returns
    -------
    header : tuple of str
    rows : list of tuple
    """
    if spec.peaks is None:
        raise ConfigError("configuration has no [peaks] section")
    p = spec.peaks
    fam = [(None, None)] if spec.family is None else [(spec.family[0], v) for v in spec.family[1]]
    if p.mode == "onset":
        rows = run_sweep(spec, threads=threads)
        out = []
        for c, (fk, fv) in enumerate(fam):
            curve = [r for r in rows if r.curve == c]
            xs = [r.N for r in curve]
            key = "eb_min_joule" if p.quantity == "eb_min" else p.quantity
            ys = [getattr(r, key) for r in curve]
            if any(y is None for y in ys):
                onset = None
            else:
                onset = saturation_onset(xs, ys, fraction=p.fraction)
            at = next((r for r in curve if r.N == onset), None)
            out.append(
                (
                    c,
                    fk,
                    fv,
                    p.quantity,
                    p.fraction,
                    None if onset is None else int(onset),
                    None if at is None else at.d_over_lambda,
                    None if at is None else at.aperture_over_lambda,
                )
            )
        return ONSET_HEADER, out

    base = {k: getattr(spec, k) for k in ("N", "spacing", "radius", "aperture", "d_bm", "phi")}
    curves = [(None, None)] if spec.sweep is None else [(spec.sweep[0], v) for v in spec.sweep[1]]
    jobs = []
    for fk, fv in fam:
        for sk, sv in curves:
            params = dict(base)
            if fk is not None:
                params[fk] = fv
            if sk is not None:
                params[sk] = sv
            jobs.append((fk, fv, sk, sv, params))

    def one(job):
        fk, fv, sk, sv, params = job
        hi = _upper_limit(spec, params, p)
        if hi <= p.lower:
            raise ConfigError(f"max_aperture leaves no search interval above {p.lower}")

        def f(x):
            return _value_at(spec, dict(params, **{p.variable: x}), p.quantity)

        pk = find_peak(f, p.lower, hi, step=p.step, resolution=p.resolution)
        g = point_geometry(spec.kind, dict(params, **{p.variable: pk.x}))
        label = fk if fk is not None else sk
        value = fv if fk is not None else sv
        return (label, value, p.variable, p.lower, hi, pk.x, pk.value, pk.at_boundary, params["N"], g.aperture)

    results = _map(one, jobs, threads)
    return PEAK_HEADER, [(i,) + r for i, r in enumerate(results)]


# CSV ----------------------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


def metadata_lines(spec):
    """Comment lines echoing every physical default used by a run."""
    term = spec.termination
    za = dipole_self_impedance()
    n = spec.noise
    items = [
        ("package", f"coupledarray {__version__}"),
        ("array_kind", spec.kind),
        ("dipole_length_lambda", DIPOLE_LENGTH),
        ("eta0_ohm", ETA0),
        ("z_self_ohm", za),
        ("z_gen_ohm", term.z_gen),
        ("z_load_ohm", term.z_load),
        ("gamma", spec.gamma),
        ("theta_deg", spec.theta),
        ("noise_profile", spec.noise_profile),
        ("sigma_u_volt", n.sigma_u),
        ("sigma_i_ampere", n.sigma_i),
        ("rho", complex(n.rho)),
        ("t_antenna_kelvin", n.t_antenna),
        ("bandwidth_hz", n.bandwidth),
        ("reference_position_lambda", f"{spec.reference_x!r} {spec.reference_y!r} 0.0"),
        ("method", spec.method),
        ("quantities", " ".join(spec.quantities)),
    ]
    if spec.sweep is not None:
        items.append(("sweep_variable", spec.sweep[0]))
    if spec.family is not None:
        items.append(("family_variable", spec.family[0]))
    out = []
    for k, v in items:
        if isinstance(v, float):
            v = "%.12g" % v
        elif isinstance(v, complex):
            v = "%.12g%+.12gj" % (v.real, v.imag)
        out.append(f"# {k} = {v}")
    return out


def _write(header, rows, meta):
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def emit_csv(rows, spec=None):
    """CSV text for sweep rows; with ``spec``, a ``#`` metadata block comes first."""
    body = []
    for r in rows:
        body.append(
            (
                r.sweep_index,
                r.curve,
                r.N,
                r.d_over_lambda,
                r.aperture_over_lambda,
                r.radius_over_lambda,
                r.d_bm_over_lambda,
                r.phi_deg,
                r.theta_deg,
                r.gamma,
                r.a_rx,
                r.a_tx,
                r.a_tx_ff,
                r.eb_min_joule,
                ";".join(r.diagnostics),
            )
        )
    return _write(CSV_HEADER, body, metadata_lines(spec) if spec is not None else [])


def emit_peaks_csv(header, rows, spec=None):
    return _write(header, rows, metadata_lines(spec) if spec is not None else [])
