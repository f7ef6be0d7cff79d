"""Discretized influence-functional path integral with Lindbladian step propagators.

A path is a sequence of Liouville indices ``a_0 .. a_n``; index ``a = i*d + j``
stands for the forward/backward pair ``(s+, s-) = (i, j)``.  Its weight is

    rho0[a_0] * prod_j K_j[a_j, a_{j-1}] * prod_baths F_b[path]

where ``K_j`` are one-step Liouville-space propagators (possibly generated by
a time-dependent Lindbladian) and ``F_b`` is the influence functional of bath
``b``.  Coupling operators are diagonal, so each bath only sees the
eigenvalues ``s_b[i]`` and ``s_b[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bath import BathSpec, EtaTable, eta_table
from .exceptions import BudgetError, NumericalError, ValidationError
from .liouville import Generator, JumpOperator, SystemHamiltonian, density_matrix, vectorize
from .propagator import DEFAULT_TOLERANCE, propagator_series

DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3
_COMPLEX_BYTES = 16
_TEMPORARIES = 3


def _human(nbytes: float) -> str:
    for unit in ("B", "KiB", "MiB", "GiB"):
        if nbytes < 1024 or unit == "GiB":
            return f"{nbytes:.3g} {unit}"
        nbytes /= 1024


@dataclass(frozen=True)
class DynamicalMapSeries:
    """``maps[j-1]`` sends ``vec(rho(0))`` to ``vec(rho(j*dt))``."""

    dt: float
    maps: np.ndarray

    def __len__(self):
        return len(self.maps)

    def __getitem__(self, j):
        return self.maps[j]

    def apply(self, rho0) -> np.ndarray:
        """Density matrices at ``t = 0, dt, ..., N*dt`` from ``rho0``."""
        v = vectorize(rho0)
        d = int(round(np.sqrt(v.size)))
        out = [v] + [E @ v for E in self.maps]
        return np.array(out).reshape(-1, d, d)


class _Couplings:
    """Per-bath forward/backward eigenvalue tables in Liouville indexing."""

    def __init__(self, couplings, etas: Sequence[EtaTable], d: int):
        if len(couplings) != len(etas):
            raise ValidationError(f"{len(couplings)} coupling operators but {len(etas)} eta tables")
        self.etas = list(etas)
        self.sp, self.sm = [], []
        for s in couplings:
            if isinstance(s, BathSpec):
                s = s.coupling_values
            s = np.asarray(s)
            if s.ndim == 2:
                s = np.real(np.diag(s))
            if s.shape != (d,):
                raise ValidationError(f"coupling operator of dimension {s.shape[0]} does not match system {d}")
            self.sp.append(np.repeat(s, d).astype(float))
            self.sm.append(np.tile(s, d).astype(float))
        self.diff = [p - m for p, m in zip(self.sp, self.sm)]
        self.D = d * d

    def pair_factor(self, lag, row_end=False, col_origin=False) -> np.ndarray:
        """``F[row, col]`` for a row point ``lag`` steps after a column point."""
        expo = np.zeros((self.D, self.D), dtype=complex)
        for eta, sp, sm, ds in zip(self.etas, self.sp, self.sm, self.diff):
            c = eta.pair(lag, row_end, col_origin)
            if c != 0:
                expo += ds[:, None] * (c * sp[None, :] - np.conj(c) * sm[None, :])
        return np.exp(-expo)

    def self_factor(self, row_end=False, col_origin=False) -> np.ndarray:
        expo = np.zeros(self.D, dtype=complex)
        for eta, sp, sm, ds in zip(self.etas, self.sp, self.sm, self.diff):
            c = eta.pair(0, row_end, col_origin)
            if c != 0:
                expo += ds * (c * sp - np.conj(c) * sm)
        return np.exp(-expo)

    def log_weight(self, n: int) -> np.ndarray:
        """Exponent ``-log F`` of an ``n``-step path as a broadcast array."""
        expo = 0
        ndim = n + 1
        for eta, sp, sm, ds in zip(self.etas, self.sp, self.sm, self.diff):
            E = eta.matrix(n)
            for k in range(n + 1):
                dk = _axis_view(ds, k, ndim)
                for kp in range(k + 1):
                    c = E[k, kp]
                    if c == 0:
                        continue
                    expo = expo + dk * (c * _axis_view(sp, kp, ndim) - np.conj(c) * _axis_view(sm, kp, ndim))
        return expo


def _axis_view(v, axis, ndim):
    shape = [1] * ndim
    shape[axis] = v.shape[0]
    return v.reshape(shape)


def _pair_view(F, axis, ndim):
    """Broadcast a ``[new, old]`` factor against a tensor with ``new`` on
    axis 0 and ``old`` on ``axis``."""
    shape = [1] * ndim
    shape[0] = F.shape[0]
    shape[axis] = F.shape[1]
    return F.reshape(shape)


def _prepare(propagators, rho0, n_steps):
    Ks = [np.asarray(K, dtype=complex) for K in propagators]
    if n_steps is None:
        n_steps = len(Ks)
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")
    if len(Ks) < n_steps:
        raise ValidationError(f"{len(Ks)} propagators supplied for {n_steps} steps")
    D = Ks[0].shape[0]
    d = int(round(np.sqrt(D)))
    for K in Ks:
        if K.shape != (D, D):
            raise ValidationError(f"propagator shape {K.shape} differs from {(D, D)}")
    return Ks, n_steps, D, d


def _largest_kmax(D, batch, budget):
    k = 0
    while _TEMPORARIES * _COMPLEX_BYTES * batch * D ** (k + 1) <= budget:
        k += 1
    return k


def _propagate(Ks, couplings: _Couplings, rho0_vecs, n_steps, k_max, budget):
    """Iterative finite-memory propagation for a batch of initial vectors.

    Returns an array ``(n_steps + 1, D, batch)``.
    """
    D, B = rho0_vecs.shape
    need = _TEMPORARIES * _COMPLEX_BYTES * B * D ** k_max
    if need > budget:
        fit = _largest_kmax(D, B, budget)
        raise BudgetError(
            f"k_max={k_max} with Liouville dimension {D} needs ~{_human(need)} "
            f"(budget {_human(budget)}); the largest k_max that fits is {fit}")
    centered = any(e.scheme == "centered" for e in couplings.etas)

    # tensor axes: newest point first, batch last
    state = rho0_vecs * couplings.self_factor(col_origin=True)[:, None]
    out = np.empty((n_steps + 1, D, B), dtype=complex)
    out[0] = rho0_vecs

    for n in range(n_steps):
        K = Ks[n]
        modes = (False, True) if centered else (False,)
        for row_end in modes:
            X = _advance(state, K, couplings, n, k_max, row_end)
            if row_end or not centered:
                out[n + 1] = X.sum(axis=tuple(range(1, X.ndim - 1)))
            if not row_end:
                new_state = X
        state = new_state
        if not np.all(np.isfinite(out[n + 1])):
            raise NumericalError(f"non-finite reduced density matrix at step {n + 1}")
    return out


def _advance(state, K, couplings: _Couplings, n, k_max, row_end):
    """Add path point ``n+1`` to a tensor whose newest point is ``n``."""
    m = state.ndim - 1  # number of retained path points
    if m == k_max:
        # the oldest point (n+1-k_max) is summed out against its last coupling
        oldest = n + 1 - k_max
        F = couplings.pair_factor(k_max, row_end, oldest == 0)
        if k_max == 1:
            F = F * K
        X = np.tensordot(F, state, axes=([1], [m - 1]))
    else:
        X = np.broadcast_to(state, (K.shape[0],) + state.shape)
    nd = X.ndim
    r = nd - 2  # retained old points, on axes 1..r
    for l in range(1, r + 1):
        F = couplings.pair_factor(l, row_end, n + 1 - l == 0)
        if l == 1:
            F = F * K
        X = X * _pair_view(F, l, nd)
    X = X * _axis_view(couplings.self_factor(row_end), 0, nd)
    return X


def iterative_pi(propagators, etas: Sequence[EtaTable], couplings, rho0, n_steps=None, k_max=None,
                 memory_budget=DEFAULT_MEMORY_BUDGET) -> np.ndarray:
    """Finite-memory iterative path integral.

    Influence-functional couplings further apart than ``k_max`` steps are
    dropped.  Returns density matrices at ``t = 0, dt, ..., n_steps*dt``.
    """
    Ks, n_steps, D, d = _prepare(propagators, rho0, n_steps)
    rho0 = density_matrix(rho0)
    if rho0.shape != (d, d):
        raise ValidationError(f"initial state dimension {rho0.shape[0]} does not match system {d}")
    cp = _Couplings(couplings, etas, d)
    k_max = _resolve_kmax(k_max, etas)
    out = _propagate(Ks, cp, vectorize(rho0)[:, None], n_steps, k_max, memory_budget)
    return out[:, :, 0].reshape(n_steps + 1, d, d)


def _resolve_kmax(k_max, etas):
    if k_max is None:
        if not etas:
            return 1
        k_max = min(e.k_max for e in etas)
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    for e in etas:
        if e.k_max < k_max:
            raise ValidationError(f"eta table spans {e.k_max} lags, fewer than k_max={k_max}")
    return k_max


def dynamical_maps(propagators, etas: Sequence[EtaTable], couplings, n_steps=None, k_max=None,
                   dt=None, memory_budget=DEFAULT_MEMORY_BUDGET) -> DynamicalMapSeries:
    """Dynamical maps ``E(j*dt)``, one column per matrix-unit initial condition.

    All ``d^2`` initial conditions are carried through a single propagation
    as a trailing batch axis.
    """
    Ks, n_steps, D, d = _prepare(propagators, None, n_steps)
    cp = _Couplings(couplings, etas, d)
    k_max = _resolve_kmax(k_max, etas)
    out = _propagate(Ks, cp, np.eye(D, dtype=complex), n_steps, k_max, memory_budget)
    if dt is None:
        dt = etas[0].dt if etas else float("nan")
    return DynamicalMapSeries(dt, out[1:].copy())


def brute_force_pi(propagators, etas: Sequence[EtaTable], couplings, rho0, n_steps=None,
                   memory_budget=DEFAULT_MEMORY_BUDGET) -> np.ndarray:
    """Reference path sum over every forward-backward path, no memory truncation.

    Each ``rho(n*dt)`` is summed from scratch over all ``(d^2)^(n+1)`` paths
    with the full influence functional of an ``n``-step path.
    """
    Ks, n_steps, D, d = _prepare(propagators, rho0, n_steps)
    rho0 = density_matrix(rho0)
    for e in etas:
        if e.k_max < n_steps:
            raise ValidationError(
                f"brute force needs eta tables spanning all {n_steps} lags, got k_max={e.k_max}")
    need = 4 * _COMPLEX_BYTES * float(D) ** (n_steps + 1)
    if need > memory_budget:
        raise BudgetError(f"brute force over {D}^{n_steps + 1} paths needs ~{_human(need)} (budget {_human(memory_budget)})")
    cp = _Couplings(couplings, etas, d)
    v0 = vectorize(rho0)
    out = [rho0]
    for n in range(1, n_steps + 1):
        nd = n + 1
        W = _axis_view(v0, 0, nd)
        for j in range(1, n + 1):
            # K_j[a_j, a_{j-1}]
            shape = [1] * nd
            shape[j - 1], shape[j] = D, D
            W = W * Ks[j - 1].T.reshape(shape)
        W = W * np.exp(-cp.log_weight(n))
        out.append(W.sum(axis=tuple(range(n))).reshape(d, d))
    return np.array(out)


def direct_pild(hamiltonian: SystemHamiltonian, jumps: Sequence[JumpOperator], baths: Sequence[BathSpec],
                rho0, dt: float, n_steps: int, k_max: int, scheme="trailing",
                tolerance=DEFAULT_TOLERANCE, workers=1, memory_budget=DEFAULT_MEMORY_BUDGET,
                method="iterative"):
    """Path-integral Lindblad dynamics with a possibly time-dependent Hamiltonian.

    Returns ``(times, rhos)``.
    """
    gen = Generator(hamiltonian, jumps)
    Ks = propagator_series(gen, dt, n_steps, tolerance=tolerance, workers=workers)
    span = n_steps if method == "brute_force" else k_max
    etas = [eta_table(b, dt, span, scheme=scheme) for b in baths]
    if method == "brute_force":
        rhos = brute_force_pi(Ks, etas, baths, rho0, n_steps, memory_budget)
    else:
        rhos = iterative_pi(Ks, etas, baths, rho0, n_steps, k_max, memory_budget)
    return dt * np.arange(n_steps + 1), rhos
