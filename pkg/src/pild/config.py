"""Run configuration: YAML/JSON document -> validated :class:`SimConfig`.

Every check happens here, before any numerical work starts.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .bath import BathSpec, SpectralDensity
from .exceptions import ValidationError
from .liouville import Constant, Cosine, JumpOperator, SystemHamiltonian, check_hermitian, density_matrix
from .models import MODELS, Model
from .path_integral import DEFAULT_MEMORY_BUDGET
from .propagator import DEFAULT_TOLERANCE

SCHEMA_VERSION = 1
METHODS = ("direct_pild", "ttm_pild", "lindblad_only", "brute_force")
TOP_LEVEL_KEYS = {"schema_version", "model", "baths", "jumps", "grid", "method", "initial_state",
                  "outputs", "tolerances", "memory_budget", "discretization", "diagnostics", "ttm"}
_UNITS = {"": 1, "b": 1, "kib": 2**10, "mib": 2**20, "gib": 2**30, "kb": 10**3, "mb": 10**6, "gb": 10**9}


def parse_matrix(value, name="matrix") -> np.ndarray:
    """Nested lists of numbers or complex literals such as ``"1-2j"``."""
    try:
        rows = [[complex(str(x).replace(" ", "")) if isinstance(x, str) else complex(x) for x in row]
                for row in value]
        a = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: cannot parse matrix ({exc})") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name}: expected a square matrix, got shape {a.shape}")
    return a


def parse_envelope(value, name):
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, dict) or "kind" not in value:
        raise ValidationError(f"{name}: expected a number or an envelope mapping with 'kind'")
    kind = value["kind"]
    try:
        if kind == "cos":
            return Cosine(float(value["amplitude"]), float(value["frequency"]), float(value.get("phase", 0.0)))
        if kind == "constant":
            return Constant(float(value["value"]))
    except KeyError as exc:
        raise ValidationError(f"{name}: missing envelope field {exc}") from exc
    raise ValidationError(f"{name}: unknown envelope kind {kind!r}")


def parse_bytes(value) -> int:
    if isinstance(value, (int, float)):
        return int(value)
    m = re.fullmatch(r"\s*([0-9.]+)\s*([A-Za-z]*)\s*", str(value))
    if not m or m.group(2).lower() not in _UNITS:
        raise ValidationError(f"memory_budget: cannot parse {value!r}")
    return int(float(m.group(1)) * _UNITS[m.group(2).lower()])


def _require(d, key, where):
    if key not in d:
        raise ValidationError(f"{where}: missing required field '{key}'")
    return d[key]


@dataclass
class SimConfig:
    """A fully resolved run description."""

    raw: dict
    model: Model
    hamiltonian: SystemHamiltonian
    baths: list
    jumps: list
    dt: float
    n_steps: int
    k_max: int
    method: str
    rho0: np.ndarray
    observables: list
    output_file: str
    manifest_file: str
    ode_tolerance: float = DEFAULT_TOLERANCE
    quad_tolerance: float = 1e-10
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    scheme: str = "trailing"
    kmax_sensitivity: bool = False
    tensors_file: Path | None = None
    tail_threshold: float | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def is_time_dependent(self) -> bool:
        return self.hamiltonian.is_time_dependent or any(j.is_time_dependent for j in self.jumps)


def _build_model(spec) -> Model:
    name = _require(spec, "name", "model")
    if name in MODELS:
        params = spec.get("params", {}) or {}
        try:
            return MODELS[name](**params)
        except TypeError as exc:
            raise ValidationError(f"model.params: {exc}") from exc
    if name != "explicit":
        raise ValidationError(f"model.name: unknown model {name!r}; choose from {sorted(MODELS) + ['explicit']}")
    H = parse_matrix(_require(spec, "hamiltonian", "model"), "model.hamiltonian")
    check_hermitian(H, "model.hamiltonian")
    terms = []
    for i, f in enumerate(spec.get("fields", []) or []):
        env = parse_envelope(_require(f, "envelope", f"model.fields[{i}]"), f"model.fields[{i}].envelope")
        if not callable(env):
            env = Constant(env)
        op = parse_matrix(_require(f, "operator", f"model.fields[{i}]"), f"model.fields[{i}].operator")
        terms.append((env, check_hermitian(op, f"model.fields[{i}].operator")))
    d = H.shape[0]
    labels = tuple(spec.get("labels", [str(i) for i in range(d)]))
    if len(labels) != d:
        raise ValidationError(f"model.labels: {len(labels)} labels for dimension {d}")
    couplings = {k: np.diag(np.asarray(v, dtype=float)) for k, v in (spec.get("couplings") or {}).items()}
    jumps = {k: parse_matrix(v, f"model.jumps.{k}") for k, v in (spec.get("jumps") or {}).items()}
    obs = {f"pop_{l}": np.diag(np.eye(d)[i]) for i, l in enumerate(labels)}
    obs.update({k: parse_matrix(v, f"model.observables.{k}") for k, v in (spec.get("observables") or {}).items()})
    return Model(SystemHamiltonian(H, tuple(terms)), labels, couplings, jumps, obs)


def _resolve_operator(value, table, d, where, kind):
    if isinstance(value, str):
        if value not in table:
            raise ValidationError(f"{where}: unknown {kind} {value!r}; known: {', '.join(table) or 'none'}")
        return np.asarray(table[value])
    if isinstance(value, list) and value and not isinstance(value[0], list):
        return np.diag(np.asarray(value, dtype=float))
    return parse_matrix(value, where)


def load_config(path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ValidationError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must be a mapping at the top level")
    return data


def resolve_config(data: dict, base_dir=None) -> SimConfig:
    """Validate a parsed config document and build all run objects."""
    data = copy.deepcopy(data)
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise ValidationError(f"unknown top-level field(s): {', '.join(sorted(unknown))}")
    version = _require(data, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    model = _build_model(_require(data, "model", "config"))
    H = model.hamiltonian
    d = H.dim

    method = _require(data, "method", "config")
    if method not in METHODS:
        raise ValidationError(f"method: unknown method {method!r}; choose from {', '.join(METHODS)}")

    grid = _require(data, "grid", "config")
    try:
        dt = float(_require(grid, "dt", "grid"))
        n_steps = int(_require(grid, "n_steps", "grid"))
        k_max = int(grid.get("k_max", 1))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"grid: {exc}") from exc
    if not dt > 0:
        raise ValidationError(f"grid.dt: must be positive, got {dt}")
    if n_steps < 1:
        raise ValidationError(f"grid.n_steps: must be >= 1, got {n_steps}")
    if not 1 <= k_max <= n_steps:
        raise ValidationError(f"grid.k_max: need 1 <= k_max <= n_steps, got {k_max}")

    baths = []
    for i, b in enumerate(data.get("baths", []) or []):
        where = f"baths[{i}]"
        sd = _require(b, "spectral_density", where)
        try:
            spec = SpectralDensity(float(_require(sd, "xi", f"{where}.spectral_density")),
                                   float(_require(sd, "omega_c", f"{where}.spectral_density")),
                                   sd.get("kind", "ohmic_exponential"))
        except ValidationError as exc:
            raise ValidationError(f"{where}.spectral_density: {exc}") from exc
        beta = float(_require(b, "beta", where))
        s = _resolve_operator(_require(b, "coupling", where), model.couplings, d, f"{where}.coupling", "coupling")
        if s.shape != (d, d):
            raise ValidationError(f"{where}.coupling: dimension {s.shape[0]} does not match system {d}")
        try:
            baths.append(BathSpec(spec, beta, s))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc

    jumps = []
    for i, j in enumerate(data.get("jumps", []) or []):
        where = f"jumps[{i}]"
        L = _resolve_operator(_require(j, "operator", where), model.jumps, d, f"{where}.operator", "jump operator")
        if L.shape != (d, d):
            raise ValidationError(f"{where}.operator: dimension {L.shape[0]} does not match system {d}")
        jumps.append(JumpOperator(L, parse_envelope(j.get("rate", 1.0), f"{where}.rate")))

    init = _require(data, "initial_state", "config")
    if isinstance(init, str):
        rho0 = model.basis_state(init)
    else:
        rho0 = parse_matrix(init, "initial_state")
    try:
        rho0 = density_matrix(rho0)
    except ValidationError as exc:
        raise ValidationError(f"initial_state: {exc}") from exc
    if rho0.shape != (d, d):
        raise ValidationError(f"initial_state: dimension {rho0.shape[0]} does not match system {d}")

    outputs = data.get("outputs", {}) or {}
    observables = list(outputs.get("observables", list(model.observables)))
    for name in observables:
        if name not in model.observables:
            raise ValidationError(
                f"outputs.observables: unknown observable {name!r}; known: {', '.join(model.observables)}")

    tol = data.get("tolerances", {}) or {}
    ode_tol = float(tol.get("ode", DEFAULT_TOLERANCE))
    if not 0 < ode_tol <= 1e-2:
        raise ValidationError(f"tolerances.ode: must lie in (0, 1e-2], got {ode_tol}")

    scheme = data.get("discretization", "trailing")
    if scheme not in ("trailing", "centered"):
        raise ValidationError(f"discretization: expected 'trailing' or 'centered', got {scheme!r}")

    ttm = data.get("ttm", {}) or {}
    tensors_file = ttm.get("tensors_file")
    if tensors_file is not None:
        tensors_file = Path(tensors_file)
        if not tensors_file.is_absolute():
            tensors_file = base_dir / tensors_file

    cfg = SimConfig(
        raw=data, model=model, hamiltonian=H, baths=baths, jumps=jumps, dt=dt, n_steps=n_steps,
        k_max=k_max, method=method, rho0=rho0, observables=observables,
        output_file=str(outputs.get("file", "timeseries.csv")),
        manifest_file=str(outputs.get("manifest", "manifest.json")),
        ode_tolerance=ode_tol, quad_tolerance=float(tol.get("quadrature", 1e-10)),
        memory_budget=parse_bytes(data.get("memory_budget", DEFAULT_MEMORY_BUDGET)),
        scheme=scheme, kmax_sensitivity=bool((data.get("diagnostics") or {}).get("kmax_sensitivity", False)),
        tensors_file=tensors_file, tail_threshold=ttm.get("tail_threshold"), base_dir=base_dir,
    )
    if method == "ttm_pild" and cfg.is_time_dependent:
        raise ValidationError("method: time-dependent field unsupported by ttm_pild "
                              "(transfer tensors require a time-independent generator)")
    if method == "brute_force" and cfg.kmax_sensitivity:
        raise ValidationError("diagnostics.kmax_sensitivity: not applicable to brute_force")
    return cfg
