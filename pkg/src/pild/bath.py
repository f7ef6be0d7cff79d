"""Harmonic baths: spectral densities, correlation functions, eta coefficients
and influence-functional weights.

Baths are never sampled into discrete modes; every quantity is an integral
over the spectral density ``J(w)``.  The bath correlation function is

    C(t) = (1/pi) int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw

and the eta coefficients are double time integrals of ``C`` over the cells on
which the discretized system path is held constant.  Those time integrals are
done analytically under the frequency integral, so each coefficient costs a
single (oscillatory) Gauss-Kronrod quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate

from .exceptions import NumericalError, ValidationError

#: Upper frequency limit in units of the cutoff; the neglected tail is
#: bounded analytically and folded into the error estimate.
OMEGA_MAX_FACTOR = 50.0
QUAD_EPSABS = 1e-13
QUAD_LIMIT = 2000

Scheme = Literal["centered", "trailing"]


@dataclass(frozen=True)
class SpectralDensity:
    """``J(w) = (pi/2) * xi * w * exp(-w / omega_c)``."""

    xi: float
    omega_c: float
    kind: str = "ohmic_exponential"

    def __post_init__(self):
        if self.kind != "ohmic_exponential":
            raise ValidationError(f"unsupported spectral density kind {self.kind!r}")
        if self.xi < 0:
            raise ValidationError(f"xi must be nonnegative, got {self.xi}")
        if not self.omega_c > 0:
            raise ValidationError(f"omega_c must be positive, got {self.omega_c}")

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return 0.5 * np.pi * self.xi * w * np.exp(-w / self.omega_c)

    @property
    def omega_max(self) -> float:
        return OMEGA_MAX_FACTOR * self.omega_c

    def tail_bound(self, beta: float) -> float:
        """Bound on ``(1/pi) int_{omega_max}^inf J(w) coth(beta w/2) dw``."""
        wc, W = self.omega_c, self.omega_max
        coth = 1.0 if np.isinf(beta) else 1.0 / np.tanh(0.5 * beta * W)
        return 0.5 * self.xi * coth * wc * (W + wc) * np.exp(-W / wc)


def _j_coth(spec: SpectralDensity, beta: float, w):
    """``J(w) coth(beta w/2)`` with its finite ``w -> 0`` limit."""
    w = np.asarray(w, dtype=float)
    if np.isinf(beta):
        return spec(w)
    x = 0.5 * beta * w
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    x_coth = np.where(small, 1.0 + x * x / 3.0, xs / np.tanh(xs))
    return 0.5 * np.pi * spec.xi * np.exp(-w / spec.omega_c) * x_coth * 2.0 / beta


def _check_beta(beta):
    if not (beta > 0):
        raise ValidationError(f"beta must be positive (or inf), got {beta}")


def _quad(f, upper, weight=None, wvar=0.0, epsabs=QUAD_EPSABS):
    """Integrate ``f`` (times ``cos``/``sin`` of ``wvar*w``) on ``[0, upper]``."""
    kw = dict(limit=QUAD_LIMIT, epsabs=epsabs, epsrel=1e-12)
    if weight is not None and wvar != 0.0:
        kw.update(weight=weight, wvar=wvar)
    elif weight == "sin":
        return 0.0, 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, upper, **kw)
    if caught and err > 100 * epsabs:
        # roundoff warnings are harmless once the error is small against the
        # magnitude of the (non-oscillating) integrand
        scale, _ = integrate.quad(lambda w: abs(f(w)), 0.0, upper, limit=QUAD_LIMIT)
        if err > 1e-10 * max(1.0, scale):
            raise NumericalError(
                f"frequency quadrature did not converge (error {err:.2e}): {' '.join(str(caught[0].message).split())}")
    return val, err


def bath_correlation(spec: SpectralDensity, beta: float, t: float, tol: float = 1e-10) -> complex:
    """Bath autocorrelation ``C(t)``, absolute error below ``tol``."""
    _check_beta(beta)
    if spec.xi == 0:
        return 0.0j
    W = spec.omega_max
    re, e1 = _quad(lambda w: _j_coth(spec, beta, w) / np.pi, W, "cos", abs(t))
    im, e2 = _quad(lambda w: spec(w) / np.pi, W, "sin", abs(t))
    err = e1 + e2 + spec.tail_bound(beta)
    if err > tol:
        raise NumericalError(f"C({t}) error estimate {err:.2e} exceeds {tol:.0e}")
    im = -np.sign(t) * im
    return complex(re, im)


def _eta_pair(spec, beta, tau, len_row, len_col, epsabs=QUAD_EPSABS):
    """Coupling between two disjoint cells of lengths ``len_row`` (later) and
    ``len_col`` whose centres are ``tau`` apart."""
    # 4 sin(w L1/2) sin(w L2/2) / w^2 written through sinc for a finite w -> 0 limit
    def amp(w):
        return (len_row * len_col * np.sinc(w * len_row / (2 * np.pi))
                * np.sinc(w * len_col / (2 * np.pi)) / np.pi)

    W = spec.omega_max
    re, _ = _quad(lambda w: _j_coth(spec, beta, w) * amp(w), W, "cos", tau, epsabs)
    im, _ = _quad(lambda w: spec(w) * amp(w), W, "sin", tau, epsabs)
    return complex(re, -im)


def _eta_self(spec, beta, length, epsabs=QUAD_EPSABS):
    """Ordered double integral of ``C`` over a single cell of ``length``."""
    L = length

    def re_amp(w):
        return 0.5 * L * L * np.sinc(w * L / (2 * np.pi)) ** 2 / np.pi

    def im_amp(w):
        x = w * L
        small = np.abs(x) < 1e-3
        xs = np.where(small, 1.0, x)
        r = np.where(small, -x / 6.0 + x ** 3 / 120.0, (np.sin(xs) - xs) / xs ** 2)
        return L * L * r / np.pi

    W = spec.omega_max
    re, _ = _quad(lambda w: _j_coth(spec, beta, w) * re_amp(w), W, epsabs=epsabs)
    im, _ = _quad(lambda w: spec(w) * im_amp(w), W, epsabs=epsabs)
    return complex(re, im)


@dataclass(frozen=True)
class BathSpec:
    """A harmonic bath coupled through a diagonal system operator."""

    spectral_density: SpectralDensity
    beta: float
    coupling_op: np.ndarray

    def __post_init__(self):
        _check_beta(self.beta)
        s = np.asarray(self.coupling_op)
        if s.ndim == 1:
            s = np.diag(s)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValidationError(f"coupling operator must be square, got shape {s.shape}")
        off = s - np.diag(np.diag(s))
        if np.any(off != 0):
            raise ValidationError("coupling operator must be diagonal in the simulation basis")
        diag = np.diag(s)
        if np.any(np.abs(np.imag(diag)) > 0):
            raise ValidationError("coupling operator must be real")
        object.__setattr__(self, "coupling_op", np.diag(np.real(diag)).astype(float))

    @property
    def coupling_values(self) -> np.ndarray:
        return np.diag(self.coupling_op).copy()

    @property
    def dim(self) -> int:
        return self.coupling_op.shape[0]


@dataclass(frozen=True)
class EtaTable:
    """Influence-functional coefficients for one bath on a uniform grid.

    ``lag[l]`` couples two full cells ``l`` steps apart (``lag[0]`` is the
    ordered self term of a full cell); these depend only on the lag.

    Path point ``k`` sits at ``t_k = k*dt``.  With ``scheme="centered"`` its
    cell is ``[t_k - dt/2, t_k + dt/2]`` clipped to ``[0, t_n]``, so the first
    and last points of an ``n``-step path own half cells; ``half[l]`` couples
    a half cell to a full one and ``half_half[l]`` two half cells (both
    measured between path points).  With ``scheme="trailing"`` point ``k``
    owns ``[t_{k-1}, t_k]`` and point 0 does not couple at all.

    Lags beyond ``k_max`` are dropped (finite memory).
    """

    dt: float
    k_max: int
    scheme: str
    lag: np.ndarray
    half: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    half_half: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    half_self: complex = 0j

    def pair(self, lag: int, row_end: bool = False, col_origin: bool = False) -> complex:
        """Coefficient for a row point and an earlier (or equal) column point.

        ``row_end`` marks the row as the last point of the path, ``col_origin``
        marks the column as point 0.
        """
        if lag > self.k_max:
            return 0j
        if self.scheme == "trailing":
            return 0j if col_origin else complex(self.lag[lag])
        if lag == 0:
            return complex(self.half_self) if (row_end or col_origin) else complex(self.lag[0])
        if row_end and col_origin:
            return complex(self.half_half[lag])
        if row_end or col_origin:
            return complex(self.half[lag])
        return complex(self.lag[lag])

    def coefficient(self, k: int, kp: int, n: int) -> complex:
        """Coefficient ``eta_{k kp}`` of an ``n``-step path (``0 <= kp <= k <= n``)."""
        if n == 0:
            return 0j
        return self.pair(k - kp, row_end=(k == n), col_origin=(kp == 0))

    def matrix(self, n: int) -> np.ndarray:
        """Lower-triangular ``(n+1) x (n+1)`` coefficient matrix of an ``n``-step path."""
        out = np.zeros((n + 1, n + 1), dtype=complex)
        for k in range(n + 1):
            for kp in range(max(0, k - self.k_max), k + 1):
                out[k, kp] = self.coefficient(k, kp, n)
        return out


def eta_table(bath: BathSpec | SpectralDensity, dt: float, k_max: int, n_steps: int | None = None,
              beta: float | None = None, scheme: Scheme = "trailing", epsabs: float = QUAD_EPSABS) -> EtaTable:
    """Build the eta coefficients up to lag ``k_max``.

    ``bath`` may be a :class:`BathSpec` or a bare :class:`SpectralDensity`
    together with ``beta``.
    """
    if isinstance(bath, BathSpec):
        spec, beta = bath.spectral_density, bath.beta
    else:
        spec = bath
        if beta is None:
            raise ValidationError("beta is required with a bare spectral density")
    _check_beta(beta)
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if k_max < 1 or (n_steps is not None and k_max > n_steps):
        raise ValidationError(f"need 1 <= k_max <= n_steps, got k_max={k_max}, n_steps={n_steps}")
    if scheme not in ("centered", "trailing"):
        raise ValidationError(f"unknown discretization scheme {scheme!r}")

    zeros = np.zeros(k_max + 1, dtype=complex)
    if spec.xi == 0:
        return EtaTable(dt, k_max, scheme, zeros, zeros.copy(), zeros.copy(), 0j)

    lag = zeros.copy()
    lag[0] = _eta_self(spec, beta, dt, epsabs)
    for l in range(1, k_max + 1):
        lag[l] = _eta_pair(spec, beta, l * dt, dt, dt, epsabs)
    if scheme == "trailing":
        return EtaTable(dt, k_max, scheme, lag, zeros.copy(), zeros.copy(), 0j)

    half, half_half = zeros.copy(), zeros.copy()
    for l in range(1, k_max + 1):
        half[l] = _eta_pair(spec, beta, l * dt - 0.25 * dt, dt, 0.5 * dt, epsabs)
        half_half[l] = _eta_pair(spec, beta, l * dt - 0.5 * dt, 0.5 * dt, 0.5 * dt, epsabs)
    half_self = _eta_self(spec, beta, 0.5 * dt, epsabs)
    return EtaTable(dt, k_max, scheme, lag, half, half_half, half_self)


def influence_weight(eta, s_plus, s_minus) -> complex:
    """Influence functional of one bath along a discrete path.

    ``F = exp(-sum_{k >= k'} (s+_k - s-_k)(eta_kk' s+_k' - conj(eta_kk') s-_k'))``

    ``eta`` is either an :class:`EtaTable` (its matrix for a path of this
    length is used) or an explicit lower-triangular coefficient matrix.
    """
    sp = np.asarray(s_plus, dtype=float)
    sm = np.asarray(s_minus, dtype=float)
    if isinstance(eta, EtaTable):
        eta = eta.matrix(len(sp) - 1)
    eta = np.tril(np.asarray(eta, dtype=complex)[: len(sp), : len(sp)])
    phase = (sp - sm) @ (eta @ sp - eta.conj() @ sm)
    return complex(np.exp(-phase))
