"""Run configuration: an INI document with sections run, model, cone, sweep.

Overrides passed to :func:`parse_config` use dotted keys (``model.g``).
Validation collects every problem before raising :class:`ConfigError`.
Keys left out take the defaults below; ``half_width`` and ``s_list``
default per scenario.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from ..dynamics import BACKENDS
from ..errors import ConfigError

SCENARIOS = ("lightcone", "rme", "expansion", "conjecture", "stationary", "audit")
KRAUS_CHOICES = ("dephasing", "directed_jump", "local_random")
POTENTIAL_FORMS = ("zero", "constant", "linear", "random")

DEFAULT_TEXT = """\
[run]
scenario = lightcone
seed = 0
threads = 1
backend = rk4
dt = 0.05
output_dir = out

[model]
# half_width defaults by scenario: rme 180, expansion 80, stationary 19, otherwise 60
hopping = 1.0
hopping_range = 1
potential = zero
kraus = dephasing
g = 1.0
order = 3

[cone]
a = 2.0
b = 1.5
c = auto
c_prime = auto

[sweep]
# s_list defaults by scenario: lightcone 4, 6, 8, 12; rme 8, 16, 32, 64;
# expansion 8, 16, 32, 64, 128; stationary: a lattice-aligned grid that
# puts eta = a + c s between the weights of sites 5..half_width-7
eta_factors = 0.5, 0.75, 1.0
offsets = 0.0, 4.3, 9.7
# evolution time of the stationary-state drift check
t_final = 10.0
trials = 20
"""


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "lightcone"
    seed: int = 0
    threads: int = 1
    backend: str = "rk4"
    dt: float = 0.05
    output_dir: str = "out"
    half_width: Optional[int] = None
    hopping: float = 1.0
    hopping_range: int = 1
    potential: str = "zero"
    kraus: str = "dephasing"
    g: float = 1.0
    order: int = 3
    a: float = 2.0
    b: float = 1.5
    c: Optional[float] = None
    c_prime: Optional[float] = None
    s_list: Optional[tuple] = None
    eta_factors: tuple = (0.5, 0.75, 1.0)
    offsets: tuple = (0.0, 4.3, 9.7)
    t_final: float = 10.0
    trials: int = 20

    def resolve_speeds(self, kappa: float) -> "RunConfig":
        """Fill ``auto`` speeds: ``c' = 1.2 kappa``, ``c = 1.5 kappa``."""
        c = 1.5 * kappa if self.c is None else self.c
        cp = 1.2 * kappa if self.c_prime is None else self.c_prime
        return replace(self, c=c, c_prime=cp)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("s_list", "eta_factors", "offsets"):
            out[key] = "auto" if out[key] is None else list(out[key])
        out["c"] = "auto" if self.c is None else self.c
        out["c_prime"] = "auto" if self.c_prime is None else self.c_prime
        return out


SCENARIO_DEFAULTS = {
    "lightcone": {"half_width": 60, "s_list": (4.0, 6.0, 8.0, 12.0)},
    "rme": {"half_width": 180, "s_list": (8.0, 16.0, 32.0, 64.0)},
    "expansion": {"half_width": 80, "s_list": (8.0, 16.0, 32.0, 64.0, 128.0)},
    "conjecture": {"half_width": 60, "s_list": (4.0, 6.0, 8.0, 12.0)},
    "stationary": {"half_width": 19, "s_list": None},
    "audit": {"half_width": 60, "s_list": (4.0, 6.0, 8.0, 12.0)},
}


# key -> (section, kind, check, description of the allowed range)
_SCHEMA = {
    "scenario": ("run", "choice", SCENARIOS, None),
    "seed": ("run", "int", lambda v: v >= 0, ">= 0"),
    "threads": ("run", "int", lambda v: 1 <= v <= 256, "in [1, 256]"),
    "backend": ("run", "choice", BACKENDS, None),
    "dt": ("run", "float", lambda v: 0 < v <= 1, "in (0, 1]"),
    "output_dir": ("run", "str", None, None),
    "half_width": ("model", "int", lambda v: 1 <= v <= 400, "in [1, 400]"),
    "hopping": ("model", "float", lambda v: abs(v) <= 100, "|J| <= 100"),
    "hopping_range": ("model", "int", lambda v: v >= 1, ">= 1"),
    "potential": ("model", "potential", None, None),
    "kraus": ("model", "choice", KRAUS_CHOICES, None),
    "g": ("model", "float", lambda v: 0 <= v <= 100, "in [0, 100]"),
    "order": ("model", "int", lambda v: 2 <= v <= 8, "in [2, 8]"),
    "a": ("cone", "float", lambda v: v > 0, "> 0"),
    "b": ("cone", "float", lambda v: v > 0, "> 0"),
    "c": ("cone", "speed", lambda v: v > 0, "> 0 or auto"),
    "c_prime": ("cone", "speed", lambda v: v > 0, "> 0 or auto"),
    "s_list": ("sweep", "floats", lambda v: v > 0, "every entry > 0"),
    "eta_factors": ("sweep", "floats", lambda v: v > 0, "every entry > 0"),
    "offsets": ("sweep", "floats", lambda v: True, None),
    "t_final": ("sweep", "float", lambda v: 0 < v <= 1000, "in (0, 1000]"),
    "trials": ("sweep", "int", lambda v: 1 <= v <= 10000, "in [1, 10000]"),
}


def _convert(key: str, raw: str, errors: list):
    section, kind, check, bound = _SCHEMA[key]
    name = f"{section}.{key}"
    raw = raw.strip()
    try:
        if kind == "choice":
            if raw not in check:
                errors.append(f"{name}: {raw!r} is not one of {', '.join(check)}")
                return None
            return raw
        if kind == "str":
            if not raw:
                errors.append(f"{name}: must not be empty")
                return None
            return raw
        if kind == "potential":
            return _check_potential(name, raw, errors)
        if kind == "speed" and raw.lower() == "auto":
            return None
        if kind == "floats":
            values = tuple(float(x) for x in raw.split(",") if x.strip())
            if not values:
                errors.append(f"{name}: needs at least one value")
                return None
            if not all(math.isfinite(v) for v in values) or not all(check(v) for v in values):
                errors.append(f"{name}: {raw!r} violates bound ({bound})")
                return None
            return values
        value = int(raw) if kind == "int" else float(raw)
    except ValueError:
        errors.append(f"{name}: cannot parse {raw!r} as {kind}")
        return None
    if isinstance(value, float) and not math.isfinite(value):
        errors.append(f"{name}: must be finite")
        return None
    if not check(value):
        errors.append(f"{name}: {value} violates bound ({bound})")
        return None
    return value


def _check_potential(name: str, raw: str, errors: list):
    form, _, arg = raw.partition(":")
    form = form.strip()
    if form not in POTENTIAL_FORMS:
        errors.append(f"{name}: {raw!r} is not one of zero, constant:<v>, linear:<slope>, random:<amplitude>")
        return None
    if form == "zero":
        if arg.strip():
            errors.append(f"{name}: 'zero' takes no argument")
            return None
        return "zero"
    try:
        value = float(arg)
    except ValueError:
        errors.append(f"{name}: {form} needs a numeric argument, got {arg!r}")
        return None
    if not math.isfinite(value) or (form == "random" and value < 0):
        errors.append(f"{name}: argument {value} out of range")
        return None
    return f"{form}:{value!r}"


def _cross_checks(values: dict, errors: list) -> None:
    a, b = values.get("a"), values.get("b")
    if a is not None and b is not None and not b < a:
        errors.append(f"cone.b: need b < a (the initial perturbation must sit inside the cone start), got a = {a}, b = {b}")
    c, cp = values.get("c"), values.get("c_prime")
    if c is not None and cp is not None and not cp < c:
        errors.append(f"cone.c_prime: need c' < c, got c = {c}, c' = {cp}")
    m, rng = values.get("half_width"), values.get("hopping_range")
    if m is not None and rng is not None and rng >= 2 * m + 1:
        errors.append(f"model.hopping_range: must be smaller than the site count {2 * m + 1}")
    if values.get("scenario") == "stationary" and m is not None and 2 * m + 1 > 40:
        errors.append("model.half_width: the stationary scenario needs at most 40 sites (half_width <= 19)")
    if values.get("backend") == "superop_exp" and m is not None and 2 * m + 1 > 40:
        errors.append("run.backend: superop_exp supports at most 40 sites (half_width <= 19)")


def parse_config(text: str, overrides: Optional[dict] = None) -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    errors: list = []
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    raw: dict = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            spec = _SCHEMA.get(key)
            if spec is None or spec[0] != section:
                errors.append(f"unknown key {section}.{key}")
                continue
            raw[key] = value
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        spec = _SCHEMA.get(key)
        if spec is None or spec[0] != section:
            errors.append(f"unknown key {dotted}")
            continue
        raw[key] = str(value)
    values = {}
    for key, value in raw.items():
        converted = _convert(key, value, errors)
        if converted is not None or _SCHEMA[key][1] == "speed":
            values[key] = converted
    scenario = values.get("scenario", RunConfig.scenario)
    for key, default in SCENARIO_DEFAULTS.get(scenario, SCENARIO_DEFAULTS["lightcone"]).items():
        if values.get(key) is None:
            values[key] = default
    _cross_checks({**asdict(RunConfig()), **values}, errors)
    if errors:
        raise ConfigError(errors)
    return replace(RunConfig(), **values)


def config_fields() -> list:
    return [f.name for f in fields(RunConfig)]
