"""Scenario files: YAML documents with nested sections.

Layout (every section except ``name`` is required)::

    name: wall_1dof
    robot:       {model: point_mass, n: 1, mass: 1.0}   # or model: two_link + link params
    environment: {F0: 0.0, KS: -100.0, KD: -2.0, x0: 0.0}
    desired_force: -5.0
    reference:   {kind: constant, value: 0.0}           # constant | line | fourier
    initial:     {q: 0.0, qdot: 0.0}
    gains:       {alpha: 5.0, Gamma: 20.0, Q_F: 1.0, Q_S: 1.0, Q_D: 1.0,
                  Q_r: 1.0, L: 1.0, beta: 1.0e-3, kappa: 1.0e-4}
    timing:      {T: 2.0, h: 1.0e-3, periods: 30}
    controller:  {variant: full, gate: {mode: simultaneous}}

Vector entries take a scalar (broadcast) or a list of length n. Matrix
entries take a scalar (times identity), a list (diagonal) or a nested list.
Any periodic entry may instead be ``{mean: ..., cos: [...], sin: [...]}``
with up to five harmonics of the period T.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .controller import GainSet, GateConfig, InitialReference
from .dynamics import PointMass, TwoLinkArm
from .environment import EnvironmentProfile, Periodic
from .errors import ConfigError
from .simulation import ScenarioConfig

SECTIONS = ("robot", "environment", "desired_force", "reference", "initial", "gains", "timing", "controller")
GAIN_KEYS = ("alpha", "Gamma", "Q_F", "Q_S", "Q_D", "Q_r", "L", "beta", "kappa")
TWO_LINK_KEYS = ("m1", "m2", "l1", "l2", "lc1", "lc2", "I1", "I2", "g", "eps_sing")


def _num(value, path):
    if isinstance(value, bool):
        raise ConfigError("expected a number", path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    if isinstance(value, (list, tuple)):
        return [_num(v, f"{path}[{i}]") for i, v in enumerate(value)]
    raise ConfigError(f"expected a number, got {value!r}", path)


def _vector(value, n, path):
    a = np.asarray(_num(value, path), dtype=float)
    if a.ndim == 0:
        return np.full(n, float(a))
    if a.shape != (n,):
        raise ConfigError(f"expected {n} entries, got shape {a.shape}", path)
    return a


def _matrix(value, n, path):
    a = np.asarray(_num(value, path), dtype=float)
    if a.ndim == 0:
        return float(a) * np.eye(n)
    if a.ndim == 1 and a.shape == (n,):
        return np.diag(a)
    if a.shape != (n, n):
        raise ConfigError(f"expected scalar, {n} diagonal entries or {n}x{n} matrix", path)
    return a


def _periodic(value, n, T, path, matrix):
    conv = _matrix if matrix else _vector
    if isinstance(value, dict):
        unknown = set(value) - {"mean", "cos", "sin"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", path)
        cos = [conv(c, n, f"{path}.cos[{i}]") for i, c in enumerate(value.get("cos", []) or [])]
        sin = [conv(s, n, f"{path}.sin[{i}]") for i, s in enumerate(value.get("sin", []) or [])]
        try:
            return Periodic(conv(value.get("mean", 0.0), n, f"{path}.mean"), T, tuple(cos), tuple(sin))
        except ValueError as exc:
            raise ConfigError(str(exc), path) from None
    return Periodic(conv(value, n, path), T)


def _require(d, key, path):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError("missing", f"{path}.{key}" if path else key)
    return d[key]


def _build_robot(params):
    kind = params.get("model", "point_mass")
    if kind == "point_mass":
        n = int(_num(params.get("n", 1), "robot.n"))
        g = params.get("gravity")
        try:
            return PointMass(n=n, mass=_num(params.get("mass", 1.0), "robot.mass"),
                             gravity=None if g is None else _vector(g, n, "robot.gravity"))
        except ValueError as exc:
            raise ConfigError(str(exc), "robot") from None
    if kind == "two_link":
        kw = {k: _num(params[k], f"robot.{k}") for k in TWO_LINK_KEYS if k in params}
        return TwoLinkArm(**kw)
    raise ConfigError(f"unknown model {kind!r}; expected point_mass or two_link", "robot.model")


def config_from_dict(d: dict) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("scenario must be a mapping")
    for key in SECTIONS:
        _require(d, key, "")
    robot_params = dict(d["robot"])
    model = _build_robot(robot_params)
    n = model.n

    timing = d["timing"]
    T = _num(_require(timing, "T", "timing"), "timing.T")
    h = _num(_require(timing, "h", "timing"), "timing.h")
    periods = _num(_require(timing, "periods", "timing"), "timing.periods")
    if periods != int(periods):
        raise ConfigError("must be an integer", "timing.periods")
    if not (T > 0 and h > 0):
        raise ConfigError("T and h must be positive", "timing")
    ratio = T / h
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ConfigError(f"not integer (T={T}, h={h})", "T/h")

    env_d = d["environment"]
    env = EnvironmentProfile(
        T,
        _periodic(env_d.get("F0", 0.0), n, T, "environment.F0", False),
        _periodic(env_d.get("KS", 0.0), n, T, "environment.KS", True),
        _periodic(env_d.get("KD", 0.0), n, T, "environment.KD", True),
        _periodic(env_d.get("x0", 0.0), n, T, "environment.x0", False),
    )
    F_d = _periodic(d["desired_force"], n, T, "desired_force", False)

    ref = d["reference"]
    kind = ref.get("kind", "constant")
    if kind == "constant":
        reference = InitialReference("constant", value=Periodic(_vector(ref.get("value", 0.0), n, "reference.value"), T))
    elif kind == "line":
        reference = InitialReference.line(_vector(ref.get("offset", 0.0), n, "reference.offset"),
                                          _vector(ref.get("slope", 0.0), n, "reference.slope"))
    elif kind == "fourier":
        body = {k: v for k, v in ref.items() if k != "kind"}
        reference = InitialReference.fourier(_periodic(body, n, T, "reference", False))
    else:
        raise ConfigError(f"unknown kind {kind!r}; expected constant, line or fourier", "reference.kind")

    g = d["gains"]
    unknown = set(g) - set(GAIN_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "gains")
    gkw = {}
    for key in ("Gamma", "Q_F", "Q_S", "Q_D", "Q_r", "L"):
        gkw[key] = _matrix(_require(g, key, "gains"), n, f"gains.{key}")
    gkw["alpha"] = _num(_require(g, "alpha", "gains"), "gains.alpha")
    gkw["beta"] = _num(g.get("beta", 1e-3), "gains.beta")
    gkw["kappa"] = _num(g.get("kappa", 1e-4), "gains.kappa")
    gains = GainSet(n=n, **gkw)

    init = d["initial"]
    q0 = _vector(init.get("q", 0.0), n, "initial.q")
    qdot0 = _vector(init.get("qdot", 0.0), n, "initial.qdot")

    ctrl = d["controller"] or {}
    gate_d = ctrl.get("gate", {}) or {}
    gate = GateConfig(mode=gate_d.get("mode", "simultaneous"), k=int(_num(gate_d.get("k", 1), "controller.gate.k")),
                      threshold=_num(gate_d.get("threshold", 1e-2), "controller.gate.threshold"))
    return ScenarioConfig(model=model, env=env, gains=gains, T=T, h=h, periods=int(periods), F_d=F_d,
                          reference=reference, q0=q0, qdot0=qdot0, variant=ctrl.get("variant", "full"),
                          gate=gate, name=str(d.get("name", "scenario")), robot_params=robot_params)


def parse_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc}", str(path)) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}", str(path)) from None
    return config_from_dict(data)


def _plain(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a.tolist()


def _periodic_dict(p: Periodic):
    if p.is_constant:
        return _plain(p.mean)
    return {"mean": _plain(p.mean), "cos": [_plain(c) for c in p.cos], "sin": [_plain(s) for s in p.sin]}


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Inverse of ``config_from_dict`` (full lists, no shorthand)."""
    ref = cfg.reference
    if ref.kind == "line":
        ref_d = {"kind": "line", "offset": _plain(ref.offset), "slope": _plain(ref.slope)}
    elif ref.kind == "constant":
        ref_d = {"kind": "constant", "value": _plain(ref.value.mean)}
    else:
        p = ref.value
        ref_d = {"kind": "fourier", "mean": _plain(p.mean),
                 "cos": [_plain(c) for c in p.cos], "sin": [_plain(s) for s in p.sin]}
    robot = dict(cfg.robot_params) if cfg.robot_params else _robot_dict(cfg.model)
    return {
        "name": cfg.name,
        "robot": robot,
        "environment": {k: _periodic_dict(getattr(cfg.env, k)) for k in ("F0", "KS", "KD", "x0")},
        "desired_force": _periodic_dict(cfg.F_d),
        "reference": ref_d,
        "initial": {"q": _plain(cfg.q0), "qdot": _plain(cfg.qdot0)},
        "gains": {k: _plain(getattr(cfg.gains, k)) for k in GAIN_KEYS},
        "timing": {"T": float(cfg.T), "h": float(cfg.h), "periods": int(cfg.periods)},
        "controller": {"variant": cfg.variant,
                       "gate": {"mode": cfg.gate.mode, "k": cfg.gate.k, "threshold": float(cfg.gate.threshold)}},
    }


def _robot_dict(model):
    if isinstance(model, PointMass):
        return {"model": "point_mass", "n": model.n, "mass": float(model.mass),
                "gravity": _plain(model.gravity)}
    return {"model": "two_link", **{k: float(getattr(model, k)) for k in TWO_LINK_KEYS}}


def dump_scenario(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def bundled_scenarios() -> list[str]:
    root = resources.files("coadapt") / "scenarios"
    return sorted(p.name[: -len(".scenario")] for p in root.iterdir() if p.name.endswith(".scenario"))


def bundled_path(name: str) -> Path:
    if not name.endswith(".scenario"):
        name += ".scenario"
    path = Path(str(resources.files("coadapt") / "scenarios" / name))
    if not path.exists():
        raise ConfigError(f"no bundled scenario {name!r}; available: {bundled_scenarios()}")
    return path


def load_bundled(name: str) -> ScenarioConfig:
    return parse_scenario(bundled_path(name))


def apply_overrides(d: dict, overrides: dict) -> dict:
    """Return a copy of scenario dict ``d`` with dotted-key overrides applied."""
    import copy

    out = copy.deepcopy(d)
    for dotted, value in overrides.items():
        keys = dotted.split(".")
        node = out
        for k in keys[:-1]:
            if not isinstance(node.get(k), dict):
                node[k] = {}
            node = node[k]
        node[keys[-1]] = value
    return out
