"""Run configuration: a documented key = value schema with full validation.

Configs are INI text with a [run] section (subcommand, seed, out, threads)
plus one section named after the subcommand.  Parsing validates everything
and reports ALL violations at once instead of stopping at the first;
serialization is canonical, so parse -> serialize -> parse is the identity
on valid configs.
"""

import configparser
import io
from dataclasses import dataclass, field as dc_field

from . import registry
from .cones import CONE_REGISTRY

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_config_file",
           "serialize_config", "SUBCOMMANDS", "SCHEMA"]

SUBCOMMANDS = ("smooth", "flow", "cascade", "shadow", "verify")
GEOMETRIES = ("interval", "radial", "graph2d")


class ConfigError(ValueError):
    """Carries every violation found in a config, not just the first."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid config (%d problem%s):\n  %s"
                         % (len(self.violations),
                            "" if len(self.violations) == 1 else "s",
                            "\n  ".join(self.violations)))


# (type, default, check) per key; default REQUIRED means the key must appear.
REQUIRED = object()


def _chk_range(lo, hi, lo_open=False, hi_open=False):
    def check(v):
        ok_lo = v > lo if lo_open else v >= lo
        ok_hi = v < hi if hi_open else v <= hi
        if not (ok_lo and ok_hi):
            return "must be in %s%g, %g%s" % ("(" if lo_open else "[", lo, hi,
                                              ")" if hi_open else "]")
        return None
    return check


def _chk_choice(options):
    def check(v):
        if v not in options:
            return "must be one of: %s" % ", ".join(sorted(options))
        return None
    return check


def _chk_domain(v):
    return None if v in registry.DOMAINS else (
        "unknown domain id (known: %s)" % ", ".join(registry.domain_names()))


def _chk_initial(v):
    return None if v in registry.EXPRESSIONS else (
        "unknown expression id (known: %s)" % ", ".join(registry.expression_names()))


def _chk_schedule(v):
    if len(v) < 1:
        return "needs at least one entry"
    if any(b <= a for a, b in zip(v, v[1:])):
        return "must be strictly increasing"
    if v[0] <= 1.0:
        return "entries must exceed 1"
    return None


def _chk_nonempty(v):
    return None if v.strip() else "must be a nonempty path"


_FLOW_KEYS = {
    "geometry": ("str", REQUIRED, _chk_choice(GEOMETRIES)),
    "domain": ("str", REQUIRED, _chk_domain),
    "initial": ("str", REQUIRED, _chk_initial),
    "data": ("float", 0.0, _chk_range(-1e6, 1e6)),
    "h": ("float", REQUIRED, _chk_range(1e-6, 0.5, lo_open=False)),
    "t_end": ("float", REQUIRED, _chk_range(0.0, 100.0, lo_open=True)),
    "n_frames": ("int", 11, _chk_range(2, 100000)),
    "sigma_cfl": ("float", 0.0, _chk_range(0.0, 1.0)),
    "h_cap": ("float", 1e6, _chk_range(1.0, 1e12)),
    "dim": ("int", 2, _chk_range(2, 3)),
}

_CASCADE_KEYS = {
    "geometry": ("str", REQUIRED, _chk_choice(GEOMETRIES)),
    "domain": ("str", REQUIRED, _chk_domain),
    "initial": ("str", REQUIRED, _chk_initial),
    "r_schedule": ("float_list", REQUIRED, _chk_schedule),
    "eps": ("float", 0.2, _chk_range(0.0, 1.0, lo_open=True)),
    "stab_tol": ("float", 1e-3, _chk_range(0.0, 1.0, lo_open=True)),
    "h_inf": ("float", 1e3, _chk_range(1.0, 1e12, lo_open=True)),
    "h_cap": ("float", 1e9, _chk_range(1.0, 1e15, lo_open=True)),
    "clamp_delta": ("float", 0.5, _chk_range(0.0, 1.0, lo_open=True)),
    "h": ("float", REQUIRED, _chk_range(1e-6, 0.5)),
    "t_end": ("float", REQUIRED, _chk_range(0.0, 100.0, lo_open=True)),
    "n_frames": ("int", 31, _chk_range(2, 100000)),
    "dim": ("int", 2, _chk_range(2, 3)),
}

SCHEMA = {
    "run": {
        "subcommand": ("str", None, _chk_choice(SUBCOMMANDS)),
        "seed": ("int", 0, _chk_range(0, 2 ** 64 - 1)),
        "out": ("str", "gmcf-out", _chk_nonempty),
        "threads": ("int", 1, _chk_range(1, 4096)),
    },
    "smooth": {
        "domain_a": ("str", REQUIRED, _chk_domain),
        "domain_b": ("str", REQUIRED, _chk_domain),
        "eps": ("float", REQUIRED, _chk_range(0.0, 1.0, lo_open=True)),
        "cone": ("str", "mean", _chk_choice(tuple(CONE_REGISTRY))),
        "delta": ("float", 0.0, _chk_range(0.0, 1.0)),       # 0 = auto-select
        "n_rim": ("int", 1500, _chk_range(100, 100000)),
        "n_validate": ("int", 4000, _chk_range(100, 10 ** 7)),
        "grid_n": ("int", 129, _chk_range(17, 4097)),
    },
    "flow": dict(_FLOW_KEYS),
    "cascade": dict(_CASCADE_KEYS),
    "shadow": dict(_CASCADE_KEYS, probes_file=("str", REQUIRED, _chk_nonempty)),
    "verify": {
        "n_samples": ("int", 2000, _chk_range(100, 10 ** 6)),
    },
}


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    out: str = "gmcf-out"
    threads: int = 1
    params: dict = dc_field(default_factory=dict)


def _parse_value(kind, raw):
    raw = raw.strip()
    if kind == "int":
        return int(raw, 10)
    if kind == "float":
        return float(raw)
    if kind == "float_list":
        return tuple(float(p) for p in raw.split(",") if p.strip())
    return raw


def _format_value(kind, value):
    if kind == "float":
        return repr(float(value))
    if kind == "float_list":
        return ",".join(repr(float(v)) for v in value)
    return str(value)


def parse_config(text, subcommand=None):
    """Validate config text; returns RunConfig or raises ConfigError.

    ``subcommand`` (e.g. from the command line) fills in or must agree with
    [run] subcommand.  Every unknown section/key, missing required key, and
    out-of-range value is collected into the error.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    violations = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(["not parseable as key = value sections: %s"
                           % exc.message.replace("\n", " ")]) from None

    run_vals = {}
    for key, raw in (cp["run"].items() if cp.has_section("run") else ()):
        if key not in SCHEMA["run"]:
            violations.append("[run] unknown key %r" % key)
            continue
        kind, _, check = SCHEMA["run"][key]
        try:
            val = _parse_value(kind, raw)
        except ValueError:
            violations.append("[run] %s: not a valid %s: %r" % (key, kind, raw))
            continue
        msg = check(val) if check else None
        if msg:
            violations.append("[run] %s: %s (got %r)" % (key, msg, raw))
        else:
            run_vals[key] = val

    sub = run_vals.get("subcommand")
    if subcommand is not None:
        if sub is not None and sub != subcommand:
            violations.append("[run] subcommand %r conflicts with the "
                              "requested subcommand %r" % (sub, subcommand))
        sub = subcommand
    if sub is None:
        violations.append("[run] subcommand missing (and none given on the "
                          "command line)")
        raise ConfigError(violations)
    if sub not in SUBCOMMANDS:
        violations.append("[run] subcommand: %s" % _chk_choice(SUBCOMMANDS)(sub))
        raise ConfigError(violations)

    expected = {"run", sub}
    for sec in cp.sections():
        if sec not in expected:
            violations.append("unknown or inapplicable section [%s]" % sec)

    params = {}
    schema = SCHEMA[sub]
    present = cp[sub] if cp.has_section(sub) else {}
    for key, raw in present.items():
        if key not in schema:
            violations.append("[%s] unknown key %r" % (sub, key))
            continue
        kind, _, check = schema[key]
        try:
            val = _parse_value(kind, raw)
        except ValueError:
            violations.append("[%s] %s: not a valid %s: %r" % (sub, key, kind, raw))
            continue
        msg = check(val) if check else None
        if msg:
            violations.append("[%s] %s: %s (got %r)" % (sub, key, msg, raw))
        else:
            params[key] = val
    for key, (kind, default, _) in schema.items():
        if key in params or key in present:   # present-but-invalid: already reported
            continue
        if default is REQUIRED:
            violations.append("[%s] missing required key %r" % (sub, key))
        else:
            params[key] = default

    if sub in ("cascade", "shadow") and "h_inf" in params and "h_cap" in params:
        if not params["h_inf"] < params["h_cap"]:
            violations.append("[%s] h_inf must be strictly below h_cap" % sub)

    if violations:
        raise ConfigError(violations)
    return RunConfig(subcommand=sub,
                     seed=run_vals.get("seed", SCHEMA["run"]["seed"][1]),
                     out=run_vals.get("out", SCHEMA["run"]["out"][1]),
                     threads=run_vals.get("threads", SCHEMA["run"]["threads"][1]),
                     params=params)


def parse_config_file(path, subcommand=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), subcommand=subcommand)


def serialize_config(cfg):
    """Canonical text form; parse(serialize(parse(t))) == parse(t)."""
    buf = io.StringIO()
    buf.write("[run]\n")
    buf.write("subcommand = %s\n" % cfg.subcommand)
    buf.write("seed = %d\n" % cfg.seed)
    buf.write("out = %s\n" % cfg.out)
    buf.write("threads = %d\n" % cfg.threads)
    buf.write("\n[%s]\n" % cfg.subcommand)
    schema = SCHEMA[cfg.subcommand]
    for key in schema:
        if key in cfg.params:
            kind = schema[key][0]
            buf.write("%s = %s\n" % (key, _format_value(kind, cfg.params[key])))
    return buf.getvalue()
