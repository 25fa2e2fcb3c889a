"""Line-oriented ``key = value`` configuration files.

Example::

    # reference phantom on the default acceptance grid
    d = 2
    x_extent = -1, 1
    y_extent = 1, 3
    n_x = 128
    n_y = 128
    u_extent = -56, 56
    n_u = 256
    theta_min = 0.001
    theta_max = 1.54
    n_theta = 180
    [bump] kind=mollifier center=0,2 radius=1 amplitude=1

Top-level keys come before the first section or after a ``[global]``
header.  Each ``[bump]`` section describes one bump; its keys may follow the
header on the same line as whitespace-separated ``key=value`` tokens or on
their own lines.  Values are validated as soon as they are read, so errors
carry the offending line number and key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import ConeSinogramGrid, VolumeGrid
from .errors import ConeRadonError, ConfigError
from .phantom import Bump, KINDS, PhantomSpec
from .reconstruct import METHODS, ReconstructionConfig
from .transforms import FilterConfig, WINDOWS


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not finite")
    return x


def _pos_float(v: str) -> float:
    x = _float(v)
    if x <= 0:
        raise ValueError("must be positive")
    return x


def _int(v: str) -> int:
    return int(v)


def _count(v: str) -> int:
    n = int(v)
    if n < 2:
        raise ValueError("must be >= 2")
    return n


def _pair(v: str) -> tuple[float, float]:
    parts = [p for p in v.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ValueError("expected two comma-separated numbers")
    lo, hi = (_float(p) for p in parts)
    if hi <= lo:
        raise ValueError("upper bound must exceed lower bound")
    return lo, hi


def _vector(v: str) -> tuple[float, ...]:
    parts = [p for p in v.replace(" ", "").split(",") if p]
    if not parts:
        raise ValueError("expected comma-separated numbers")
    return tuple(_float(p) for p in parts)


def _theta(v: str) -> float:
    x = _float(v)
    if not (0.0 < x < 0.5 * math.pi):
        raise ValueError("must lie strictly inside (0, pi/2)")
    return x


def _choice(options):
    def parse(v: str) -> str:
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v

    return parse


def _dim(v: str) -> int:
    d = int(v)
    if d not in (2, 3):
        raise ValueError("only d = 2 and d = 3 are supported")
    return d


def _one_of_ints(options):
    def parse(v: str) -> int:
        n = int(v)
        if n not in options:
            raise ValueError(f"must be one of {', '.join(map(str, options))}")
        return n

    return parse


def _band(v: str) -> float:
    x = _float(v)
    if not (0.0 < x <= 1.0):
        raise ValueError("must lie in (0, 1]")
    return x


def _sphere_nodes(v: str) -> int:
    n = int(v)
    if n < 8:
        raise ValueError("must be >= 8")
    return n


TOP_KEYS = {
    "d": _dim,
    "x_extent": _pair,
    "y_extent": _pair,
    "n_x": _count,
    "n_y": _count,
    "u_extent": _pair,
    "n_u": _count,
    "theta_min": _theta,
    "theta_max": _theta,
    "n_theta": _count,
    "p": _float,
    "method": _choice(METHODS),
    "band_fraction": _band,
    "window": _choice(WINDOWS),
    "pad_factor": _one_of_ints((1, 2, 4)),
    "upsample": _one_of_ints((1, 2, 4, 8)),
    "interpolation": _choice(("linear",)),
    "sphere_nodes": _sphere_nodes,
    "seed": _int,
}

BUMP_KEYS = {
    "kind": _choice(KINDS),
    "center": _vector,
    "radius": _pos_float,
    "amplitude": _float,
    "sigma": _pos_float,
}


@dataclass
class ParsedConfig:
    """Validated content of a configuration file; absent parts are ``None``."""

    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    phantom: PhantomSpec | None = None
    volume: VolumeGrid | None = None
    sinogram: ConeSinogramGrid | None = None
    reconstruction: ReconstructionConfig = field(default_factory=ReconstructionConfig)

    @property
    def d(self):
        return self.values.get("d")

    @property
    def p(self):
        return self.values.get("p")

    @property
    def seed(self):
        return self.values.get("seed")


def _assign(target: dict, lines: dict, table: dict, key: str, raw: str, lineno: int, where: str):
    if key not in table:
        raise ConfigError(f"unknown {where} key {key!r}", lineno, key)
    if key in target:
        raise ConfigError(f"{where} key {key!r} given twice (first on line {lines[key]})", lineno, key)
    try:
        target[key] = table[key](raw.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid value {raw.strip()!r} for {key!r}: {exc}", lineno, key) from None
    lines[key] = lineno


def _split_kv(token: str, lineno: int):
    if "=" not in token:
        raise ConfigError(f"expected key = value, got {token!r}", lineno)
    key, val = token.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError("missing key before '='", lineno)
    return key, val


def _build_bump(entry: dict, lines: dict, header_line: int, d) -> Bump:
    if "kind" not in entry:
        raise ConfigError("bump section needs a 'kind'", header_line, "kind")
    if "center" not in entry:
        raise ConfigError("bump section needs a 'center'", header_line, "center")
    if d is not None and len(entry["center"]) != d:
        raise ConfigError(f"center must have {d} coordinates", lines["center"], "center")
    try:
        return Bump(entry["kind"], entry["center"], entry.get("radius"), entry.get("amplitude", 1.0),
                    entry.get("sigma"))
    except ConeRadonError as exc:
        raise ConfigError(f"invalid bump: {exc}", header_line) from None


def parse_config(text: str) -> ParsedConfig:
    """Parse configuration text into validated objects.

    Unknown keys, repeated keys and out-of-range values raise
    :class:`~coneradon.errors.ConfigError` naming the line and key.
    """
    top: dict = {}
    top_lines: dict = {}
    bumps = []  # (entry, lines, header line)
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close = line.find("]")
            if close < 0:
                raise ConfigError("unterminated section header", lineno)
            name = line[1:close].strip()
            rest = line[close + 1:].strip()
            if name == "bump":
                section = ({}, {}, lineno)
                bumps.append(section)
                for tok in rest.split():
                    key, val = _split_kv(tok, lineno)
                    _assign(section[0], section[1], BUMP_KEYS, key, val, lineno, "bump")
            elif name == "global":
                if rest:
                    raise ConfigError("[global] takes no inline keys", lineno)
                section = None
            else:
                raise ConfigError(f"unknown section [{name}]", lineno, name)
            continue
        key, val = _split_kv(line, lineno)
        if section is None:
            _assign(top, top_lines, TOP_KEYS, key, val, lineno, "top-level")
        else:
            _assign(section[0], section[1], BUMP_KEYS, key, val, lineno, "bump")

    cfg = ParsedConfig(values=top, lines=top_lines)
    d = top.get("d")
    if d is None and bumps and "center" in bumps[0][0]:
        d = len(bumps[0][0]["center"])
        top["d"] = d
    if bumps:
        built = tuple(_build_bump(e, ln, h, d) for e, ln, h in bumps)
        try:
            cfg.phantom = PhantomSpec(d, built)
        except ConeRadonError as exc:
            raise ConfigError(f"invalid phantom: {exc}", bumps[0][2]) from None

    def line_of(*keys):
        found = [top_lines[k] for k in keys if k in top_lines]
        return max(found) if found else None

    vol_keys = ("x_extent", "y_extent", "n_x", "n_y")
    if any(k in top for k in vol_keys):
        missing = [k for k in vol_keys if k not in top]
        if missing or d is None:
            raise ConfigError(f"volume grid needs {', '.join(missing or ['d'])}", line_of(*vol_keys), (missing or ["d"])[0])
        try:
            cfg.volume = VolumeGrid(d, top["x_extent"], top["y_extent"], top["n_x"], top["n_y"])
        except ConeRadonError as exc:
            raise ConfigError(f"invalid volume grid: {exc}", line_of(*vol_keys), "y_extent") from None

    sino_keys = ("u_extent", "n_u", "theta_min", "theta_max", "n_theta")
    if any(k in top for k in sino_keys):
        missing = [k for k in sino_keys if k not in top]
        if missing or d is None:
            raise ConfigError(f"sinogram grid needs {', '.join(missing or ['d'])}", line_of(*sino_keys), (missing or ["d"])[0])
        if top["theta_min"] >= top["theta_max"]:
            raise ConfigError("theta_min must be below theta_max", line_of("theta_min", "theta_max"), "theta_min")
        cfg.sinogram = ConeSinogramGrid(d, top["u_extent"], top["n_u"], (top["theta_min"], top["theta_max"]),
                                        top["n_theta"])

    fdef = FilterConfig()
    filt = FilterConfig(top.get("band_fraction", fdef.band_fraction), top.get("window", fdef.window),
                        top.get("pad_factor", fdef.pad_factor), top.get("upsample", fdef.upsample))
    rdef = ReconstructionConfig()
    cfg.reconstruction = ReconstructionConfig(top.get("method", rdef.method), filt,
                                              top.get("interpolation", rdef.interpolation),
                                              top.get("sphere_nodes", rdef.sphere_nodes))
    return cfg


def load_config(path) -> ParsedConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
