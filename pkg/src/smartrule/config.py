"""JSON run configuration.

Errors name the offending field with a JSON pointer, e.g. ``/schedule/K``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .problems import LearningProblem
from .schedule import Schedule, ScheduleError, exact_schedule, practical_schedule

__all__ = ["ConfigError", "RunConfig", "build_schedule", "load_config", "parse_run_config"]

RULES = ("smart", "histogram_fixed", "nn1", "constant")


class ConfigError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("", f"config file {str(p)!r} does not exist")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("", "top level must be an object")
    return data


def _int(data: dict, key: str, ptr: str, default=None, minimum: int | None = None):
    if key not in data:
        if default is None:
            raise ConfigError(f"{ptr}/{key}", "required")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{ptr}/{key}", f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{ptr}/{key}", f"must be >= {minimum}")
    return v


def _num(data: dict, key: str, ptr: str, default=None):
    if key not in data:
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{ptr}/{key}", f"expected a number, got {v!r}")
    return float(v)


def _int_list(data: dict, key: str, ptr: str):
    if key not in data:
        return None
    v = data[key]
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{ptr}/{key}", "expected a list of integers")
    return v


def _num_list(data: dict, key: str, ptr: str):
    if key not in data:
        return None
    v = data[key]
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{ptr}/{key}", "expected a list of numbers")
    return [float(x) for x in v]


def build_schedule(spec: dict, ptr: str = "/schedule", cap: int = 10 ** 5) -> Schedule:
    """Schedule from its config object; exact mode may raise :class:`ScheduleError`."""
    if not isinstance(spec, dict):
        raise ConfigError(ptr, "expected an object")
    mode = spec.get("mode", "practical")
    if mode not in ("exact", "practical"):
        raise ConfigError(f"{ptr}/mode", f"expected 'exact' or 'practical', got {mode!r}")
    K = _int(spec, "K", ptr, minimum=1)
    eps = _num_list(spec, "eps", ptr)
    delta = _num_list(spec, "delta", ptr)
    for key, seq in (("eps", eps), ("delta", delta)):
        if seq is not None and len(seq) < K:
            raise ConfigError(f"{ptr}/{key}", f"needs at least K = {K} entries")
    try:
        if mode == "exact":
            grid = _int(spec, "grid_size", ptr, default=4097, minimum=4097)
            return exact_schedule(K, eps, delta, grid_size=grid, cap=_int(spec, "cap", ptr, default=cap, minimum=3))
        growth = spec.get("growth", "geometric")
        N = spec.get("N", 3)
        if isinstance(N, list):
            N = _int_list(spec, "N", ptr)
        else:
            N = _int(spec, "N", ptr, default=3, minimum=1)
        if growth == "polynomial":
            ca = _num(spec, "ca", ptr, 2.0)
            cb = _num(spec, "cb", ptr, 4.0)
            if ca <= 0 or cb <= 0:
                raise ConfigError(f"{ptr}", "ca and cb must be positive")
            return practical_schedule(
                K, N=N, eps=eps, delta=delta,
                a=lambda k: math.ceil(ca * k * k),
                b=lambda k: math.ceil(cb * k ** 4) + 1 - math.ceil(cb * k ** 4) % 2,
            )
        if growth != "geometric":
            raise ConfigError(f"{ptr}/growth", f"expected 'geometric' or 'polynomial', got {growth!r}")
        return practical_schedule(
            K, A=_num(spec, "A", ptr, 4.0), B=_num(spec, "B", ptr, 9.0), r=_num(spec, "r", ptr, 2.0),
            N=N, a=_int_list(spec, "a", ptr), b=_int_list(spec, "b", ptr), eps=eps, delta=delta,
        )
    except ScheduleError:
        raise
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(ptr, str(exc)) from exc


@dataclass
class RunConfig:
    problem: LearningProblem
    rule: str
    rule_params: dict
    schedule: Schedule | None
    schedule_spec: dict
    ns: list
    trials: int
    seed: int
    extra: dict = field(default_factory=dict)


def parse_run_config(data: dict, seed=None, trials=None) -> RunConfig:
    """Validate a ``simulate`` config; ``seed`` and ``trials`` override the file."""
    if "problem" not in data:
        raise ConfigError("/problem", "required")
    try:
        problem = LearningProblem.from_dict(data["problem"])
    except ValueError as exc:
        msg = str(exc)
        ptr = "/problem" + (msg.split(":", 1)[0] if msg.startswith("/") else "")
        raise ConfigError(ptr, msg.split(": ", 1)[-1] if msg.startswith("/") else msg) from exc
    rule = data.get("rule", "smart")
    if rule not in RULES:
        raise ConfigError("/rule", f"expected one of {list(RULES)}, got {rule!r}")
    rule_params = data.get("rule_params", {})
    if not isinstance(rule_params, dict):
        raise ConfigError("/rule_params", "expected an object")
    sched_spec = data.get("schedule", {"mode": "practical", "K": 8})
    schedule = build_schedule(sched_spec) if rule == "smart" else None
    ns = _int_list(data, "ns", "")
    if ns is None:
        if schedule is None:
            raise ConfigError("/ns", "required unless rule is 'smart'")
        ns = list(schedule.n)
    if not ns or any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("/ns", "must be a non-empty increasing list of positive integers")
    if trials is None:
        trials = _int(data, "trials", "", default=100, minimum=1)
    if seed is None:
        if "seed" not in data:
            raise ConfigError("/seed", "a seed is required (pass --seed or set it in the config)")
        seed = _int(data, "seed", "", minimum=0)
    return RunConfig(problem, rule, rule_params, schedule, sched_spec, ns, int(trials), int(seed))

