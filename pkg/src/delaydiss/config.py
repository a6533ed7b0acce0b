"""Flat ``key = value`` run configuration and the model registry behind it.

Example::

    # rigid body just below the Hopf point
    model = rigid_body
    I1 = 0.8
    I2 = 0.5
    I3 = 0.4
    alpha = 0.3
    m = 1.5
    tau = 0.5
    h = 0.001
    t_end = 50
    initial = perturbed
    eps = 0.1
    direction = 0, 1, 0
    output_csv = run.csv
    output_json = run.json

Relative output and input paths are resolved against the directory of
the config file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import models as M
from .history import InitialFunction
from .integrator import DDEProblem

__all__ = [
    "ConfigError",
    "RunConfig",
    "ModelSpec",
    "MODELS",
    "parse_config_text",
    "load_config",
    "build_problem",
]


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


REQUIRED = object()


@dataclass(frozen=True)
class ModelSpec:
    """Parameter schema and factories for one model.

    ``build(params, initial)`` returns a :class:`DDEProblem`; ``state(params)``
    the reference state used by the ``equilibrium`` and ``perturbed`` initial
    data; ``casimir`` and ``energy`` (optional) give the monitored quantities.
    """

    name: str
    params: dict
    build: Callable[[dict, InitialFunction], DDEProblem]
    dimension: Callable[[dict], int]
    state: Callable[[dict], np.ndarray]
    delay: Callable[[dict], float]
    casimir: Optional[Callable[[dict], Callable]] = None
    energy: Optional[Callable[[dict], Callable]] = None


def _rb(p):
    return M.RigidBodyParams(p["I1"], p["I2"], p["I3"], p["alpha"], tau=p["tau"], m=p["m"],
                             casimir_scaled=p["casimir_scaled"])


def _ll(p):
    return M.LandauLifschitzParams(p["gamma_ratio"], p["lambda_damp"], B=(p["B1"], p["B2"], p["B3"]), tau=p["tau"])


def _neuron(p):
    return M.NeuronParams(p["a"], p["b"], p["c"], p["d"], h_gain=p["h_gain"], n=p["n"])


def _tool(p):
    return M.MachineToolParams(p["k_damp"], p["omega_nat"], p["mass"], p["k1"], p["beta"], p["Omega_rot"])


def _norm(x):
    return float(np.linalg.norm(x))


MODELS: dict[str, ModelSpec] = {
    "rigid_body": ModelSpec(
        "rigid_body",
        {"I1": float, "I2": float, "I3": float, "alpha": float, "tau": float, "m": float,
         "casimir_scaled": bool},
        lambda p, phi: M.rigid_body_problem(_rb(p), initial=phi),
        lambda p: 3,
        lambda p: M.equilibrium_state(_rb(p)),
        lambda p: p["tau"],
        casimir=lambda p: _norm,
        energy=lambda p: (lambda x, rb=_rb(p): float(M.rigid_body_energy(x, rb))),
    ),
    "landau_lifschitz": ModelSpec(
        "landau_lifschitz",
        {"gamma_ratio": float, "lambda_damp": float, "B1": float, "B2": float, "B3": float, "tau": float},
        lambda p, phi: M.landau_lifschitz_problem(_ll(p), phi(0.0), initial=phi),
        lambda p: 3,
        lambda p: np.array([1.0, 0.0, 0.0]),
        lambda p: p["tau"],
        casimir=lambda p: _norm,
        energy=lambda p: (lambda x, ll=_ll(p): float(M.landau_lifschitz_energy(x, ll))),
    ),
    "circle": ModelSpec(
        "circle", {"c": float},
        lambda p, phi: M.circle_problem(p["c"], initial=phi),
        lambda p: 1, lambda p: np.array([0.5]), lambda p: 1.0,
    ),
    "cylinder": ModelSpec(
        "cylinder", {"b": float, "c": float},
        lambda p, phi: M.cylinder_problem(p["b"], p["c"], initial=phi),
        lambda p: 2, lambda p: np.array([0.5, 0.0]), lambda p: 1.0,
    ),
    "sphere": ModelSpec(
        "sphere", {"tau": float},
        lambda p, phi: M.sphere_problem(p["tau"], initial=phi),
        lambda p: 3, lambda p: np.array([1.0, 0.0, 0.0]), lambda p: p["tau"],
        casimir=lambda p: _norm,
    ),
    "neuron": ModelSpec(
        "neuron", {"a": float, "b": float, "c": float, "d": float, "h_gain": float, "n": int, "tau": float},
        lambda p, phi: M.neuron_problem(_neuron(p), p["tau"], initial=phi),
        lambda p: 2 * p["n"], lambda p: np.full(2 * p["n"], 0.1), lambda p: p["tau"],
    ),
    "machine_tool": ModelSpec(
        "machine_tool",
        {"k_damp": float, "omega_nat": float, "mass": float, "k1": float, "beta": float, "Omega_rot": float},
        lambda p, phi: M.machine_tool_problem(_tool(p), initial=phi),
        lambda p: 2, lambda p: np.array([1e-3, 0.0]), lambda p: _tool(p).tau,
    ),
}

PARAM_DEFAULTS = {
    "rigid_body": {"tau": 0.0, "m": 1.0, "casimir_scaled": False},
    "landau_lifschitz": {"B1": 0.0, "B2": 0.0, "B3": 1.0, "tau": 0.0},
    "neuron": {"h_gain": 0.0, "n": 1},
}

RUN_KEYS = {"model", "h", "t_end", "divergence_guard", "prune_history", "initial", "x0", "eps",
            "direction", "on_sphere", "initial_file", "output_csv", "output_json"}
INITIAL_KINDS = ("equilibrium", "constant", "perturbed", "tabulated")


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: dict
    h: float
    t_end: float
    divergence_guard: float = 1e6
    prune_history: bool = False
    initial: str = "equilibrium"
    x0: Optional[tuple] = None
    eps: float = 0.0
    direction: tuple = (0.0, 1.0, 0.0)
    on_sphere: bool = True
    initial_file: Optional[Path] = None
    output_csv: Optional[Path] = None
    output_json: Optional[Path] = None
    source: Optional[Path] = field(default=None, compare=False)

    @property
    def spec(self) -> ModelSpec:
        return MODELS[self.model]

    @property
    def tau(self) -> float:
        return float(self.spec.delay(self.params))

    def with_params(self, **kw) -> "RunConfig":
        from dataclasses import replace

        params = dict(self.params)
        params.update(kw)
        return replace(self, params=params)


def _to_bool(key, s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {s!r}")


def _to_float(key, s):
    try:
        v = float(s)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {s!r}") from None
    if not math.isfinite(v):
        raise ConfigError(key, f"must be finite, got {s!r}")
    return v


def _to_int(key, s):
    try:
        return int(s)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {s!r}") from None


def _to_vector(key, s):
    parts = [x for x in s.replace(",", " ").split() if x]
    if not parts:
        raise ConfigError(key, "expected a list of numbers")
    return tuple(_to_float(key, x) for x in parts)


def _convert(key, typ, raw):
    if typ is float:
        return _to_float(key, raw)
    if typ is int:
        return _to_int(key, raw)
    if typ is bool:
        return _to_bool(key, raw)
    return raw


def parse_config_text(text: str, base_dir: Optional[Path] = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {lineno}", "empty key")
        if k in raw:
            raise ConfigError(k, f"duplicate key (line {lineno})")
        raw[k] = v

    if "model" not in raw:
        raise ConfigError("model", "missing; choose one of " + ", ".join(sorted(MODELS)))
    model = raw.pop("model")
    if model not in MODELS:
        raise ConfigError("model", f"unknown model {model!r}; choose one of " + ", ".join(sorted(MODELS)))
    spec = MODELS[model]

    params = dict(PARAM_DEFAULTS.get(model, {}))
    for k in list(raw):
        if k in spec.params:
            params[k] = _convert(k, spec.params[k], raw.pop(k))
    missing = [k for k in spec.params if k not in params]
    if missing:
        raise ConfigError(missing[0], f"required parameter for model {model!r} is missing")
    unknown = [k for k in raw if k not in RUN_KEYS]
    if unknown:
        raise ConfigError(unknown[0], f"unknown key for model {model!r}")

    def path(key):
        if key not in raw:
            return None
        p = Path(raw[key])
        return p if p.is_absolute() or base_dir is None else base_dir / p

    for key in ("h", "t_end"):
        if key not in raw:
            raise ConfigError(key, "missing integrator setting")
    h = _to_float("h", raw["h"])
    t_end = _to_float("t_end", raw["t_end"])
    if h <= 0:
        raise ConfigError("h", "must be positive")
    if t_end <= 0:
        raise ConfigError("t_end", "must be positive")
    guard = _to_float("divergence_guard", raw.get("divergence_guard", "1e6"))
    if guard <= 0:
        raise ConfigError("divergence_guard", "must be positive")
    initial = raw.get("initial", "equilibrium")
    if initial not in INITIAL_KINDS:
        raise ConfigError("initial", f"unknown kind {initial!r}; choose one of " + ", ".join(INITIAL_KINDS))
    dim = spec.dimension(params)
    x0 = _to_vector("x0", raw["x0"]) if "x0" in raw else None
    if initial == "constant":
        if x0 is None:
            raise ConfigError("x0", "required for initial = constant")
        if len(x0) != dim:
            raise ConfigError("x0", f"expected {dim} components for model {model!r}, got {len(x0)}")
    direction = _to_vector("direction", raw["direction"]) if "direction" in raw else None
    if direction is None:
        direction = tuple([0.0, 1.0] + [0.0] * (dim - 2)) if dim >= 2 else (1.0,)
    if len(direction) != dim:
        raise ConfigError("direction", f"expected {dim} components, got {len(direction)}")
    if initial == "perturbed" and not any(direction):
        raise ConfigError("direction", "must be non-zero")
    eps = _to_float("eps", raw.get("eps", "0"))
    if initial == "tabulated" and "initial_file" not in raw:
        raise ConfigError("initial_file", "required for initial = tabulated")
    cfg = RunConfig(
        model=model, params=params, h=h, t_end=t_end, divergence_guard=guard,
        prune_history=_to_bool("prune_history", raw.get("prune_history", "false")),
        initial=initial, x0=x0, eps=eps, direction=direction,
        on_sphere=_to_bool("on_sphere", raw.get("on_sphere", "true")),
        initial_file=path("initial_file"), output_csv=path("output_csv"), output_json=path("output_json"),
        source=base_dir,
    )
    try:
        spec.delay(params)
        build_initial(cfg)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError("model parameters", str(exc)) from None
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text, base_dir=path.parent)


def build_initial(cfg: RunConfig) -> InitialFunction:
    """Initial function on ``[-tau, 0]`` for the configured kind."""
    spec = cfg.spec
    tau = cfg.tau
    if cfg.initial == "equilibrium":
        return InitialFunction.constant(spec.state(cfg.params), tau)
    if cfg.initial == "constant":
        return InitialFunction.constant(cfg.x0, tau)
    if cfg.initial == "perturbed":
        ref = np.asarray(spec.state(cfg.params), dtype=float)
        d = np.asarray(cfg.direction, dtype=float)
        x = ref + cfg.eps * d / np.linalg.norm(d)
        if cfg.on_sphere and spec.casimir is not None and np.linalg.norm(ref) > 0:
            x *= np.linalg.norm(ref) / np.linalg.norm(x)
        return InitialFunction.constant(x, tau)
    # tabulated: CSV with a header, first column t, then one column per state component
    try:
        data = np.loadtxt(cfg.initial_file, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError("initial_file", f"cannot read {cfg.initial_file}: {exc}") from None
    except ValueError as exc:
        raise ConfigError("initial_file", f"malformed table: {exc}") from None
    dim = spec.dimension(cfg.params)
    if data.shape[1] != dim + 1:
        raise ConfigError("initial_file", f"expected {dim + 1} columns (t and state), got {data.shape[1]}")
    try:
        phi = InitialFunction.tabulated(data[:, 0], data[:, 1:])
    except ValueError as exc:
        raise ConfigError("initial_file", str(exc)) from None
    if phi.tau < tau * (1 - 1e-12):
        raise ConfigError("initial_file", f"table covers [{-phi.tau}, 0] but the delay is {tau}")
    return phi


def build_problem(cfg: RunConfig) -> DDEProblem:
    return cfg.spec.build(cfg.params, build_initial(cfg))
