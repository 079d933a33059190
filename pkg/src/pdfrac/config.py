"""INI run configuration: schema, validation, model construction and the
resolved-config echo.

Sections and keys::

    [model]     rho*, f_prime_0*, f_infinity*, profile
    [influence] kind, coefficients, bound_M
    [domain]    horizon*, spacing | horizon_ratio, bounds, collar_width
    [time]      T*, dt, dt_factor
    [initial]   mode_amplitude, velocity_amplitude, cracks, band_halfwidth
    [load]      body_force, amplitude, omega
    [output]    stride, snapshot_stride
    [sweep]     eps, n_samples, reference, deltas
    [nucleate]  points, n_dir
    [wave]      h_ref, dt_ref, sample_count
    [gamma]     field, eps, amplitude, crack, band_halfwidth, full_jump_set

Keys marked * are required. Lists are comma separated; a crack is
``x0 y0 x1 y1 [jump]`` and several cracks or points are separated by ``;``.
"""
import configparser
from dataclasses import dataclass, field
import math

from .dynamics import BodyForceSpec, CrackSegment, ModelSpec, sine_mode, stable_dt
from .errors import ConfigurationError
from .kernels import InfluenceSpec, PotentialSpec
from .lattice import DomainSpec, build_grid, build_neighborhoods

_REQUIRED = object()


def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _cracks(text):
    out = []
    for chunk in text.split(";"):
        nums = [float(t) for t in chunk.split()]
        if not nums:
            continue
        if len(nums) not in (4, 5):
            raise ValueError("a crack is 'x0 y0 x1 y1 [jump]'")
        out.append(tuple(nums))
    return tuple(out)


def _points(text):
    out = []
    for chunk in text.split(";"):
        nums = [float(t) for t in chunk.split()]
        if not nums:
            continue
        if len(nums) != 2:
            raise ValueError("a point is 'x y'")
        out.append(tuple(nums))
    return tuple(out)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(" ".join(repr(float(v)) for v in item) for item in value)
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


# section -> key -> (parser, default)
SCHEMA = {
    "model": {"rho": (_float, _REQUIRED), "f_prime_0": (_float, _REQUIRED),
              "f_infinity": (_float, _REQUIRED), "profile": (str, "exponential")},
    "influence": {"kind": (str, "constant"), "coefficients": (_floats, ()),
                  "bound_M": (_float, None)},
    "domain": {"horizon": (_float, _REQUIRED), "spacing": (_float, None),
               "horizon_ratio": (_float, None), "bounds": (_floats, (0.0, 1.0, 0.0, 1.0)),
               "collar_width": (_float, None)},
    "time": {"T": (_float, _REQUIRED), "dt": (_float, None), "dt_factor": (_float, 0.5)},
    "initial": {"mode_amplitude": (_float, 0.0), "velocity_amplitude": (_float, 0.0),
                "cracks": (_cracks, ()), "band_halfwidth": (_float, 0.1)},
    "load": {"body_force": (str, "zero"), "amplitude": (_float, 0.0), "omega": (_float, 0.0)},
    "output": {"stride": (_int, 1), "snapshot_stride": (_int, 0)},
    "sweep": {"eps": (_floats, ()), "n_samples": (_int, 10), "reference": (_bool, True),
              "deltas": (_floats, ())},
    "nucleate": {"points": (_points, ()), "n_dir": (_int, 64)},
    "wave": {"h_ref": (_float, None), "dt_ref": (_float, None), "sample_count": (_int, 10)},
    "gamma": {"field": (str, "mode"), "eps": (_floats, ()), "amplitude": (_float, 1.0),
              "crack": (_cracks, ()), "band_halfwidth": (_float, 0.1),
              "full_jump_set": (_bool, False)},
}

_POSITIVE = {("model", "rho"), ("model", "f_infinity"), ("domain", "horizon"),
             ("domain", "spacing"), ("domain", "horizon_ratio"), ("domain", "collar_width"),
             ("time", "dt"), ("time", "dt_factor"), ("initial", "band_halfwidth"),
             ("output", "stride"), ("sweep", "n_samples"), ("nucleate", "n_dir"),
             ("wave", "h_ref"), ("wave", "dt_ref"), ("wave", "sample_count"),
             ("gamma", "band_halfwidth")}
_NON_NEGATIVE = {("model", "f_prime_0"), ("time", "T"), ("output", "snapshot_stride"),
                 ("influence", "bound_M")}


@dataclass
class RunConfig:
    """Typed, validated values by section; ``values[section][key]``."""

    values: dict
    source: str = field(default=None, compare=False)

    def get(self, section, key):
        return self.values[section][key]

    def potential(self):
        m = self.values["model"]
        return PotentialSpec(m["f_prime_0"], m["f_infinity"], m["profile"])

    def influence(self):
        s = self.values["influence"]
        return InfluenceSpec(s["kind"], s["coefficients"], s["bound_M"])

    def domain(self, horizon=None):
        d = self.values["domain"]
        return DomainSpec(d["horizon"] if horizon is None else horizon, d["horizon_ratio"],
                          d["bounds"], d["collar_width"] if horizon is None else None)

    def model(self):
        return ModelSpec(self.values["model"]["rho"], self.potential(), self.influence(),
                         self.domain(), T=self.values["time"]["T"], dt=self.values["time"]["dt"])

    def body_force(self):
        s = self.values["load"]
        return BodyForceSpec(s["body_force"], s["amplitude"], s["omega"])

    def cracks(self, key=("initial", "cracks")):
        return [CrackSegment(c[:2], c[2:4], c[4] if len(c) == 5 else 1.0)
                for c in self.values[key[0]][key[1]]]

    def smooth_part(self):
        a = self.values["initial"]["mode_amplitude"]
        return sine_mode(a) if a else None

    def velocity(self):
        a = self.values["initial"]["velocity_amplitude"]
        return sine_mode(a) if a else None

    def to_ini(self):
        lines = ["# fully resolved configuration"]
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                value = self.values[section][key]
                if value is None or value == ():
                    continue
                lines.append(f"{key} = {_fmt(value)}")
            lines.append("")
        return "\n".join(lines)


def _parse_value(parser, raw, key, section):
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"cannot parse {raw!r} ({exc})", key, section) from None


def parse_string(text, source="<string>", resolve_dt=True):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from None
    values = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section in {source}", section, section)
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigurationError("unknown key", key, section)
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (parser, default) in keys.items():
            if cp.has_option(section, key):
                value = _parse_value(parser, cp.get(section, key), key, section)
            elif default is _REQUIRED:
                raise ConfigurationError("missing required key", key, section)
            else:
                value = default
            values[section][key] = value
    _validate(values)
    cfg = RunConfig(values, source)
    if resolve_dt and values["time"]["dt"] is None:
        model = cfg.model()
        table = build_neighborhoods(build_grid(model.domain), model.influence)
        values["time"]["dt"] = values["time"]["dt_factor"] * stable_dt(model, table)
    return cfg


def parse_config(path, resolve_dt=True):
    """Read, validate and resolve an INI file. ``dt`` defaults to
    ``dt_factor * stable_dt`` with ``dt_factor = 0.5``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration: {exc}") from None
    return parse_string(text, source=str(path), resolve_dt=resolve_dt)


def _validate(values):
    for section, key in _POSITIVE:
        v = values[section][key]
        if v is not None and not v > 0:
            raise ConfigurationError(f"must be positive, got {v}", key, section)
    for section, key in _NON_NEGATIVE:
        v = values[section][key]
        if v is not None and not v >= 0:
            raise ConfigurationError(f"must be non-negative, got {v}", key, section)
    d = values["domain"]
    if d["spacing"] is not None:
        ratio = d["horizon"] / d["spacing"]
        if d["horizon_ratio"] is not None and not math.isclose(ratio, d["horizon_ratio"],
                                                               rel_tol=1e-12):
            raise ConfigurationError("conflicts with horizon / spacing", "horizon_ratio",
                                     "domain")
        d["horizon_ratio"] = ratio
        d["spacing"] = None
    if d["horizon_ratio"] is None:
        d["horizon_ratio"] = 4.0
    if len(d["bounds"]) != 4:
        raise ConfigurationError("expects x0, x1, y0, y1", "bounds", "domain")
    for section, key in (("sweep", "eps"), ("gamma", "eps")):
        if any(not e > 0 for e in values[section][key]):
            raise ConfigurationError("horizons must be positive", key, section)
    # build the typed specs once so their own checks surface here
    for build, section in ((lambda: PotentialSpec(values["model"]["f_prime_0"],
                                                  values["model"]["f_infinity"],
                                                  values["model"]["profile"]), "model"),
                           (lambda: InfluenceSpec(values["influence"]["kind"],
                                                  values["influence"]["coefficients"],
                                                  values["influence"]["bound_M"]), "influence"),
                           (lambda: DomainSpec(d["horizon"], d["horizon_ratio"],
                                               d["bounds"], d["collar_width"]), "domain"),
                           (lambda: BodyForceSpec(values["load"]["body_force"],
                                                  values["load"]["amplitude"],
                                                  values["load"]["omega"]), "load")):
        try:
            build()
        except ConfigurationError as exc:
            if exc.section is None:
                raise ConfigurationError(str(exc).split(": ", 1)[-1], exc.key, section) from None
            raise
