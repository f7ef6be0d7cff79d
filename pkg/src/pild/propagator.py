"""One-step forward-backward propagators ``K(t + dt <- t)`` in Liouville space."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .exceptions import NumericalError, ValidationError
from .liouville import Generator

DEFAULT_TOLERANCE = 1e-10


def propagator_static(L, dt: float) -> np.ndarray:
    """``exp(-1j * L * dt)`` for a time-independent Liouvillian ``L``."""
    L = np.asarray(L, dtype=complex)
    if not np.all(np.isfinite(L)):
        raise NumericalError("Liouvillian has non-finite entries")
    return expm(-1j * dt * L)


@dataclass(frozen=True)
class PropagatorRequest:
    generator: Generator
    t_start: float
    dt: float
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not 0 < self.tolerance <= 1e-2:
            raise ValidationError(f"tolerance must lie in (0, 1e-2], got {self.tolerance}")


def propagator_timedep(req: PropagatorRequest) -> np.ndarray:
    """Integrate ``dK/dt = G(t) K`` from ``K(t_start) = I`` over one step.

    The generator is sampled continuously inside the step (true time
    ordering) by an adaptive 8th-order Dormand-Prince scheme with the whole
    superoperator as the state.
    """
    G = req.generator
    D = G.dim ** 2

    def rhs(t, y):
        return (G(t) @ y.reshape(D, D)).reshape(-1)

    t0, t1 = req.t_start, req.t_start + req.dt
    sol = solve_ivp(rhs, (t0, t1), np.eye(D, dtype=complex).reshape(-1), method="DOP853",
                    rtol=req.tolerance, atol=req.tolerance * 1e-2, t_eval=[t1])
    if sol.status != 0:
        raise NumericalError(f"propagator integration failed on [{t0}, {t1}]: {sol.message}")
    K = sol.y[:, -1].reshape(D, D)
    if not np.all(np.isfinite(K)):
        raise NumericalError(f"non-finite propagator on [{t0}, {t1}]")
    return K


def propagator_series(generator: Generator, dt: float, n_steps: int, t_start: float = 0.0,
                      tolerance: float = DEFAULT_TOLERANCE, workers: int = 1) -> list[np.ndarray]:
    """Step propagators ``K_j = K(t_j <- t_{j-1})`` for ``j = 1..n_steps``.

    A time-independent generator is exponentiated once and the result
    repeated.  Otherwise every step is an independent ODE solve, optionally
    spread over ``workers`` threads.
    """
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")
    if not generator.is_time_dependent:
        if not dt > 0:
            raise ValidationError(f"dt must be positive, got {dt}")
        K = propagator_static(generator.liouvillian(t_start), dt)
        return [K] * n_steps
    reqs = [PropagatorRequest(generator, t_start + j * dt, dt, tolerance) for j in range(n_steps)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(propagator_timedep, reqs))
    return [propagator_timedep(r) for r in reqs]
