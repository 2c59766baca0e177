"""Experiment config files, trace CSV and summary JSON.

Configs are INI documents read with ``configparser``. Every key maps onto one
``ExperimentConfig`` field; unknown sections or keys are rejected and each
error names the key and the line it sits on.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import re
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, NamedTuple, Tuple

import numpy as np

from sldo.errors import ConfigError, SldoError
from sldo.learning import LearnerState
from sldo.plant import DisturbanceSchedule, Segment
from sldo.sim import COLUMNS, ExperimentConfig, NetworkConfig, ObserverConfig, RunSummary, Trace

DEFAULT_CONFIG = "main.ini"


def default_config_path() -> Path:
    return Path(str(resources.files("sldo") / "data" / DEFAULT_CONFIG))


# -- value parsers --------------------------------------------------------------


def _float(text: str) -> float:
    v = float(text)
    if math.isnan(v):
        raise ValueError("NaN is not a valid value")
    return v


def _int(text: str) -> int:
    return int(text)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _vec2(text: str) -> Tuple[float, float]:
    parts = [p for p in re.split(r"[\s,]+", text.strip().strip("[]()")) if p]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {text!r}")
    return (_float(parts[0]), _float(parts[1]))


def _str(text: str) -> str:
    return text.strip()


_KIND_ARITY = {"zero": (0,), "constant": (1,), "sinusoid": (2, 3)}


def parse_segments(text: str) -> DisturbanceSchedule:
    """``"0 10 zero; 10 20 constant 3; 20 30 sinusoid 3 1 0"``"""
    segments = []
    for chunk in (c.strip() for c in text.split(";")):
        if not chunk:
            continue
        tok = chunk.split()
        if len(tok) < 3:
            raise ValueError(f"segment {chunk!r} needs 'start end kind [params]'")
        kind = tok[2]
        if kind not in _KIND_ARITY:
            raise ValueError(f"unknown segment kind {kind!r}")
        params = tuple(_float(v) for v in tok[3:])
        if len(params) not in _KIND_ARITY[kind]:
            raise ValueError(f"segment kind {kind!r} takes {_KIND_ARITY[kind]} parameters, got {len(params)}")
        segments.append(Segment(_float(tok[0]), _float(tok[1]), kind, params))
    if not segments:
        raise ValueError("disturbance schedule is empty")
    return DisturbanceSchedule(tuple(segments))


def format_segments(schedule: DisturbanceSchedule) -> str:
    parts = []
    for seg in schedule.segments:
        parts.append(" ".join([repr(seg.t_start), repr(seg.t_end), seg.kind] + [repr(p) for p in seg.params]))
    return "; ".join(parts)


class _Key(NamedTuple):
    parse: Callable[[str], object]
    required: bool


_SCHEMA: Dict[str, Dict[str, _Key]] = {
    "simulation": {
        "dt": _Key(_float, True),
        "t_final": _Key(_float, True),
        "x0": _Key(_vec2, True),
        "controller": _Key(_str, True),
        "plant": _Key(_str, False),
        "seed": _Key(_int, False),
    },
    "controller": {"k1": _Key(_float, True), "k2": _Key(_float, True)},
    "observer": {
        "l_p": _Key(_vec2, True),
        "l_d": _Key(_vec2, True),
        "l_r": _Key(_vec2, False),
        "smoothing_beta": _Key(_float, False),
        "coupled": _Key(_bool, False),
    },
    "network": {
        "type": _Key(_int, True),
        "I": _Key(_int, True),
        "J": _Key(_int, True),
        "range1": _Key(_vec2, False),
        "range2": _Key(_vec2, False),
        "sigma_ratio": _Key(_float, False),
        "q0": _Key(_float, True),
    },
    "learner": {
        "alpha0": _Key(_float, True),
        "gamma_alpha": _Key(_float, True),
        "delta": _Key(_float, True),
        "epsilon": _Key(_float, True),
        "sigma_min": _Key(_float, False),
        "denom_floor": _Key(_float, False),
    },
    "disturbance": {"segments": _Key(parse_segments, True)},
    "noise": {"snr_db": _Key(_float, False)},
}

# config key -> (section, key) for errors raised by ExperimentConfig.validate()
_FIELD_KEYS = {
    "dt": ("simulation", "dt"),
    "t_final": ("simulation", "t_final"),
    "controller": ("simulation", "controller"),
    "plant": ("simulation", "plant"),
    "k1": ("controller", "k1"),
    "k2": ("controller", "k2"),
    "l_r": ("observer", "l_r"),
    "l_p": ("observer", "l_p"),
    "l_d": ("observer", "l_d"),
    "smoothing_beta": ("observer", "smoothing_beta"),
    "network_type": ("network", "type"),
    "q0": ("network", "q0"),
    "schedule": ("disturbance", "segments"),
    "snr_db": ("noise", "snr_db"),
}

_LEARNER_FIELDS = (
    ("alpha0", "alpha"),
    ("gamma_alpha", "gamma_alpha"),
    ("delta", "delta"),
    ("epsilon", "epsilon_deadzone"),
    ("sigma_min", "sigma_min"),
)


def _line_index(text: str) -> Dict[Tuple[str, str], int]:
    """1-based line of every section header (key "") and key in an INI text."""
    index: Dict[Tuple[str, str], int] = {}
    section = ""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, ""), n)
            continue
        m = re.match(r"([^=:\s][^=:]*?)\s*[=:]", line)
        if m:
            index.setdefault((section, m.group(1).strip()), n)
    return index


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate; never returns a partially valid config."""
    lines = _line_index(text)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}", line=getattr(exc, "lineno", None)) from exc

    values: Dict[str, Dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", key=section, line=lines.get((section, "")))
        values[section] = {}
        for key, raw in parser.items(section):
            spec = _SCHEMA[section].get(key)
            where = dict(key=f"{section}.{key}", line=lines.get((section, key)))
            if spec is None:
                raise ConfigError("unknown key", **where)
            try:
                values[section][key] = spec.parse(raw)
            except (ValueError, SldoError) as exc:
                raise ConfigError(f"invalid value {raw!r}: {exc}", **where) from exc
    for section, keys in _SCHEMA.items():
        for key, spec in keys.items():
            if spec.required and key not in values.get(section, {}):
                raise ConfigError("required key missing", key=f"{section}.{key}", line=lines.get((section, "")))

    def get(section, key, default):
        return values.get(section, {}).get(key, default)

    base = ExperimentConfig()
    obs_d, net_d, learn_d = ObserverConfig(), NetworkConfig(), LearnerState()
    try:
        learner = LearnerState(
            alpha=get("learner", "alpha0", learn_d.alpha),
            gamma_alpha=get("learner", "gamma_alpha", learn_d.gamma_alpha),
            delta=get("learner", "delta", learn_d.delta),
            epsilon_deadzone=get("learner", "epsilon", learn_d.epsilon_deadzone),
            sigma_min=get("learner", "sigma_min", learn_d.sigma_min),
            denom_floor=get("learner", "denom_floor", learn_d.denom_floor),
        )
    except SldoError as exc:
        msg = str(exc)
        key = next((k for k, f in _LEARNER_FIELDS if re.search(rf"\b{f}\b", msg)), "")
        where = ("learner", key)
        raise ConfigError(msg, key=f"learner.{key}" if key else "learner", line=lines.get(where)) from exc
    cfg = replace(
        base,
        dt=get("simulation", "dt", base.dt),
        t_final=get("simulation", "t_final", base.t_final),
        x0=get("simulation", "x0", base.x0),
        controller=get("simulation", "controller", base.controller),
        plant=get("simulation", "plant", base.plant),
        seed=get("simulation", "seed", base.seed),
        k1=get("controller", "k1", base.k1),
        k2=get("controller", "k2", base.k2),
        observer=ObserverConfig(
            l_p=get("observer", "l_p", obs_d.l_p),
            l_d=get("observer", "l_d", obs_d.l_d),
            l_r=get("observer", "l_r", obs_d.l_r),
            smoothing_beta=get("observer", "smoothing_beta", obs_d.smoothing_beta),
            coupled=get("observer", "coupled", obs_d.coupled),
        ),
        network=NetworkConfig(
            network_type=get("network", "type", net_d.network_type),
            I=get("network", "I", net_d.I),
            J=get("network", "J", net_d.J),
            range1=get("network", "range1", net_d.range1),
            range2=get("network", "range2", net_d.range2),
            sigma_ratio=get("network", "sigma_ratio", net_d.sigma_ratio),
            q0=get("network", "q0", net_d.q0),
        ),
        learner=learner,
        schedule=get("disturbance", "segments", base.schedule),
        snr_db=get("noise", "snr_db", base.snr_db),
    )
    validate_config(cfg, lines)
    return cfg


def validate_config(cfg: ExperimentConfig, lines=None) -> None:
    """Run the model-level checks and map a failure back onto a config key."""
    lines = lines or {}
    try:
        cfg.validate()
    except SldoError as exc:
        msg = str(exc)
        found = None
        for name, sk in _FIELD_KEYS.items():
            if re.search(rf"\b{re.escape(name)}\b", msg):
                found = sk
                break
        if found is None and "gain" in msg:
            found = ("observer", "l_r")
        key = f"{found[0]}.{found[1]}" if found else None
        line = lines.get(found) if found else None
        raise ConfigError(msg, key=key, line=line) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text, source=str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    """INI text that ``parse_config_text`` maps back onto ``cfg``."""

    def vec(v):
        return f"{v[0]!r}, {v[1]!r}"

    o, n, lr = cfg.observer, cfg.network, cfg.learner
    out = [
        "[simulation]",
        f"dt = {cfg.dt!r}",
        f"t_final = {cfg.t_final!r}",
        f"x0 = {vec(cfg.x0)}",
        f"controller = {cfg.controller}",
        f"plant = {cfg.plant}",
        f"seed = {cfg.seed}",
        "",
        "[controller]",
        f"k1 = {cfg.k1!r}",
        f"k2 = {cfg.k2!r}",
        "",
        "[observer]",
        f"l_p = {vec(o.l_p)}",
        f"l_d = {vec(o.l_d)}",
    ]
    if o.l_r is not None:
        out.append(f"l_r = {vec(o.l_r)}")
    out += [
        f"smoothing_beta = {o.smoothing_beta!r}",
        f"coupled = {str(o.coupled).lower()}",
        "",
        "[network]",
        f"type = {n.network_type}",
        f"I = {n.I}",
        f"J = {n.J}",
        f"range1 = {vec(n.range1)}",
        f"range2 = {vec(n.range2)}",
        f"sigma_ratio = {n.sigma_ratio!r}",
        f"q0 = {n.q0!r}",
        "",
        "[learner]",
        f"alpha0 = {lr.alpha!r}",
        f"gamma_alpha = {lr.gamma_alpha!r}",
        f"delta = {lr.delta!r}",
        f"epsilon = {lr.epsilon_deadzone!r}",
        f"sigma_min = {lr.sigma_min!r}",
        f"denom_floor = {lr.denom_floor!r}",
        "",
        "[disturbance]",
        f"segments = {format_segments(cfg.schedule)}",
        "",
        "[noise]",
        f"snr_db = {cfg.snr_db!r}",
        "",
    ]
    return "\n".join(out)


# -- trace CSV and summary JSON ---------------------------------------------------

FLOAT_FORMAT = "%.17g"


def write_trace_csv(trace: Trace, path) -> None:
    """Header plus one row per step, 17 significant digits so values round-trip."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        if len(trace):
            np.savetxt(fh, trace.data, fmt=FLOAT_FORMAT, delimiter=",")


def read_trace_csv(path) -> Trace:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: header does not match trace columns")
        rows = [[float(v) for v in row] for row in reader if row]
    if any(len(r) != len(COLUMNS) for r in rows):
        raise ValueError(f"{path}: ragged rows")
    data = np.array(rows, dtype=float).reshape(-1, len(COLUMNS))
    return Trace(data)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_summary_json(summary: RunSummary, path, extra: dict = None) -> None:
    payload = summary.as_dict()
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
