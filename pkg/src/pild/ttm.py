"""Transfer tensors for time-independent problems.

Transfer tensors ``T_j`` are extracted from a series of bath-only dynamical
maps ``E_n`` through

    T_n = E_n - sum_{m=1}^{n-1} T_m E_{n-m}

so that ``rho_n = sum_j T_j rho_{n-j}`` reproduces every supplied map.  Jump
operators are added afterwards by symmetric splitting of the dissipator
exponential around each transfer-tensor update, which lets one bath
simulation serve any number of pump/drain variants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from .exceptions import ValidationError
from .liouville import density_matrix, vectorize
from .path_integral import DynamicalMapSeries

ARCHIVE_FORMAT = "pild-transfer-tensors"
ARCHIVE_VERSION = 1


@dataclass(frozen=True)
class TransferTensorSet:
    dt: float
    tensors: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.tensors)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.tensors.shape[1])))

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.tensors, axis=(1, 2))


def _as_maps(maps):
    if isinstance(maps, DynamicalMapSeries):
        return maps.dt, np.asarray(maps.maps)
    return float("nan"), np.asarray(maps)


def extract_transfer_tensors(maps, L_mem=None, tail_threshold=None, dt=None) -> TransferTensorSet:
    """Transfer tensors ``T_1 .. T_L`` from maps ``E_1 .. E_L``.

    ``L_mem`` defaults to the number of maps.  With ``tail_threshold`` set,
    trailing tensors whose Frobenius norm falls below it are discarded.
    """
    map_dt, E = _as_maps(maps)
    dt = map_dt if dt is None else dt
    if L_mem is None:
        L_mem = len(E)
    if L_mem < 1 or len(E) < L_mem:
        raise ValidationError(f"need at least L_mem={L_mem} dynamical maps, got {len(E)}")
    T = np.empty((L_mem,) + E.shape[1:], dtype=complex)
    for n in range(L_mem):
        acc = E[n].astype(complex)
        for m in range(n):
            acc = acc - T[m] @ E[n - m - 1]
        T[n] = acc
    if tail_threshold is not None:
        norms = np.linalg.norm(T, axis=(1, 2))
        keep = len(T)
        while keep > 1 and norms[keep - 1] < tail_threshold:
            keep -= 1
        T = T[:keep]
    return TransferTensorSet(dt, T)


def reconstruct_maps(tt: TransferTensorSet, n_maps: int) -> np.ndarray:
    """Maps ``E_1 .. E_n`` generated by the transfer tensors (``E_0 = I``)."""
    D = tt.tensors.shape[1]
    E = [np.eye(D, dtype=complex)]
    for n in range(1, n_maps + 1):
        acc = np.zeros((D, D), dtype=complex)
        for j in range(1, min(n, len(tt)) + 1):
            acc += tt.tensors[j - 1] @ E[n - j]
        E.append(acc)
    return np.array(E[1:])


def memory_kernel_view(tt: TransferTensorSet, L0) -> np.ndarray:
    """Discrete memory kernels ``(T_k - (1 - i L0 dt) delta_k1) / dt**2``."""
    L0 = np.asarray(L0, dtype=complex)
    if L0.shape != tt.tensors.shape[1:]:
        raise ValidationError(f"Liouvillian shape {L0.shape} does not match tensors {tt.tensors.shape[1:]}")
    dt = tt.dt
    K = tt.tensors.copy()
    K[0] = K[0] - (np.eye(L0.shape[0]) - 1j * dt * L0)
    return K / dt ** 2


def propagate_ttm_lindblad(tt: TransferTensorSet, lindbladian, rho0, n_steps: int) -> np.ndarray:
    """Transfer-tensor propagation with a static dissipator split around it.

    Each step is ``rho_n = G sum_j T_j (G rho_{n-j})`` with
    ``G = exp(-i L_lindblad dt / 2)``.  A zero ``lindbladian`` reduces to
    plain transfer-tensor propagation.  Returns density matrices at
    ``t = 0 .. n_steps*dt``.
    """
    rho0 = density_matrix(rho0)
    d = rho0.shape[0]
    D = d * d
    if tt.tensors.shape[1:] != (D, D):
        raise ValidationError(f"transfer tensors act on dimension {tt.dim}, initial state on {d}")
    if lindbladian is None:
        lindbladian = np.zeros((D, D))
    lindbladian = np.asarray(lindbladian, dtype=complex)
    if lindbladian.shape != (D, D):
        raise ValidationError(f"Lindbladian shape {lindbladian.shape} does not match ({D}, {D})")
    G = expm(-0.5j * tt.dt * lindbladian)
    identity = not np.any(lindbladian)

    rhos = [vectorize(rho0)]
    history = [rhos[0] if identity else G @ rhos[0]]
    for n in range(1, n_steps + 1):
        acc = np.zeros(D, dtype=complex)
        for j in range(1, min(n, len(tt)) + 1):
            acc += tt.tensors[j - 1] @ history[n - j]
        rho = acc if identity else G @ acc
        rhos.append(rho)
        history.append(rho if identity else G @ rho)
    return np.array(rhos).reshape(n_steps + 1, d, d)


def save_transfer_tensors(path, tt: TransferTensorSet, metadata: dict | None = None) -> Path:
    """Write an ``.npz`` archive holding the tensors, ``dt`` and JSON metadata."""
    path = Path(path)
    meta = dict(tt.metadata)
    meta.update(metadata or {})
    meta.update(format=ARCHIVE_FORMAT, version=ARCHIVE_VERSION)
    with open(path, "wb") as fh:
        np.savez(fh, tensors=tt.tensors, dt=np.float64(tt.dt),
                 metadata=np.array(json.dumps(meta, sort_keys=True)))
    return path


def load_transfer_tensors(path) -> TransferTensorSet:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["metadata"]))
        if meta.get("format") != ARCHIVE_FORMAT:
            raise ValidationError(f"{path} is not a transfer-tensor archive")
        return TransferTensorSet(float(data["dt"]), data["tensors"].copy(), meta)
