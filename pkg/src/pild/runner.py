"""Execute a :class:`SimConfig` and write the time-series CSV and JSON manifest."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bath import eta_table
from .config import SimConfig
from .exceptions import ValidationError
from .liouville import Generator, build_lindbladian, vectorize
from .models import evaluate_observables
from .path_integral import brute_force_pi, dynamical_maps, iterative_pi
from .propagator import propagator_series
from .ttm import (TransferTensorSet, extract_transfer_tensors, load_transfer_tensors,
                  propagate_ttm_lindblad, save_transfer_tensors)


@dataclass
class RunResult:
    times: np.ndarray
    rhos: np.ndarray
    observables: dict
    diagnostics: dict = field(default_factory=dict)


def _etas(cfg: SimConfig, span: int):
    return [eta_table(b, cfg.dt, span, scheme=cfg.scheme, epsabs=min(1e-13, cfg.quad_tolerance))
            for b in cfg.baths]


def bath_transfer_tensors(cfg: SimConfig, k_max=None, workers=1) -> TransferTensorSet:
    """Transfer tensors of the bath-only dynamics (jump operators left out)."""
    if cfg.is_time_dependent:
        raise ValidationError("time-dependent field unsupported by ttm_pild")
    k_max = cfg.k_max if k_max is None else k_max
    Ks = propagator_series(Generator(cfg.hamiltonian), cfg.dt, cfg.n_steps, tolerance=cfg.ode_tolerance,
                           workers=workers)
    maps = dynamical_maps(Ks, _etas(cfg, k_max), cfg.baths, cfg.n_steps, k_max, dt=cfg.dt,
                          memory_budget=cfg.memory_budget)
    tt = extract_transfer_tensors(maps, tail_threshold=cfg.tail_threshold)
    meta = {"dt": cfg.dt, "k_max": k_max, "n_steps": cfg.n_steps, "scheme": cfg.scheme,
            "model": cfg.raw.get("model"), "baths": cfg.raw.get("baths", [])}
    return TransferTensorSet(tt.dt, tt.tensors, meta)


def _propagate(cfg: SimConfig, k_max: int, workers: int):
    if cfg.method == "ttm_pild":
        if cfg.tensors_file is not None:
            tt = load_transfer_tensors(cfg.tensors_file)
            if not np.isclose(tt.dt, cfg.dt, rtol=0, atol=1e-15) or tt.dim != cfg.hamiltonian.dim:
                raise ValidationError(
                    f"ttm.tensors_file: archive has dt={tt.dt}, dim={tt.dim}; "
                    f"config has dt={cfg.dt}, dim={cfg.hamiltonian.dim}")
        else:
            tt = bath_transfer_tensors(cfg, k_max, workers)
        L = build_lindbladian(cfg.jumps, dim=cfg.hamiltonian.dim)
        return propagate_ttm_lindblad(tt, L, cfg.rho0, cfg.n_steps)

    gen = Generator(cfg.hamiltonian, cfg.jumps)
    Ks = propagator_series(gen, cfg.dt, cfg.n_steps, tolerance=cfg.ode_tolerance, workers=workers)
    if cfg.method == "lindblad_only" or not cfg.baths:
        v = vectorize(cfg.rho0)
        out = [v]
        for K in Ks:
            out.append(K @ out[-1])
        d = cfg.hamiltonian.dim
        return np.array(out).reshape(-1, d, d)
    if cfg.method == "brute_force":
        return brute_force_pi(Ks, _etas(cfg, cfg.n_steps), cfg.baths, cfg.rho0, cfg.n_steps,
                              cfg.memory_budget)
    return iterative_pi(Ks, _etas(cfg, k_max), cfg.baths, cfg.rho0, cfg.n_steps, k_max, cfg.memory_budget)


def simulate(cfg: SimConfig, workers: int = 1) -> RunResult:
    """Run the configured method and collect observables and diagnostics."""
    start = time.perf_counter()
    rhos = _propagate(cfg, cfg.k_max, workers)
    obs = evaluate_observables(rhos, cfg.model.observables, cfg.observables)
    herm = np.max(np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2))))
    diag = {
        "trace_drift": float(np.max(np.abs(obs["trace"] - 1.0))),
        "max_abs_imag_trace": float(np.max(np.abs(np.imag(obs["trace"])))),
        "hermiticity_residual": float(herm),
        "min_eigenvalue": float(np.min(obs["min_eigenvalue"])),
    }
    if cfg.kmax_sensitivity and cfg.method in ("direct_pild", "ttm_pild") and cfg.baths and cfg.k_max > 1:
        other = _propagate(cfg, cfg.k_max - 1, workers)
        pops = lambda r: np.real(np.diagonal(r, axis1=1, axis2=2))
        diag["kmax_sensitivity"] = {"k_max_compared": cfg.k_max - 1,
                                    "max_population_difference": float(np.max(np.abs(pops(rhos) - pops(other))))}
    diag["wall_time_s"] = time.perf_counter() - start
    return RunResult(cfg.dt * np.arange(cfg.n_steps + 1), rhos, obs, diag)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def csv_columns(cfg: SimConfig) -> list[str]:
    d = cfg.hamiltonian.dim
    cols = ["t"] + list(cfg.observables)
    for i in range(d):
        for j in range(d):
            cols += [f"rho_{i}_{j}_re", f"rho_{i}_{j}_im"]
    return cols + ["trace_re", "trace_im", "min_eigenvalue"]


def write_csv(path, cfg: SimConfig, result: RunResult) -> Path:
    path = Path(path)
    d = cfg.hamiltonian.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_columns(cfg))
        for n, t in enumerate(result.times):
            row = [_fmt(t)] + [_fmt(result.observables[name][n]) for name in cfg.observables]
            rho = result.rhos[n]
            for i in range(d):
                for j in range(d):
                    row += [_fmt(rho[i, j].real), _fmt(rho[i, j].imag)]
            tr = result.observables["trace"][n]
            row += [_fmt(tr.real), _fmt(tr.imag), _fmt(result.observables["min_eigenvalue"][n])]
            w.writerow(row)
    return path


def write_manifest(path, cfg: SimConfig, result: RunResult, csv_path) -> Path:
    path = Path(path)
    manifest = {
        "package_version": __version__,
        "schema_version": cfg.raw.get("schema_version"),
        "config": cfg.raw,
        "resolved": {"method": cfg.method, "dt": cfg.dt, "n_steps": cfg.n_steps, "k_max": cfg.k_max,
                     "discretization": cfg.scheme, "ode_tolerance": cfg.ode_tolerance,
                     "memory_budget": cfg.memory_budget, "observables": cfg.observables},
        "outputs": {"timeseries": str(Path(csv_path).name)},
        "diagnostics": result.diagnostics,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    return path


def run(cfg: SimConfig, output_dir=".", workers: int = 1) -> tuple[Path, Path, RunResult]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = simulate(cfg, workers)
    csv_path = write_csv(out / cfg.output_file, cfg, result)
    manifest = write_manifest(out / cfg.manifest_file, cfg, result, csv_path)
    return csv_path, manifest, result


def export_transfer_tensors(cfg: SimConfig, path, workers: int = 1) -> Path:
    """Run the bath-only simulation once and archive its transfer tensors."""
    tt = bath_transfer_tensors(cfg, workers=workers)
    return save_transfer_tensors(path, tt)
