"""Hilbert- and Liouville-space objects and the vectorized Liouvillians.

Conventions
-----------
* hbar = 1.
* Density matrices are vectorized row-major: element ``(i, j)`` of a
  ``d x d`` matrix sits at index ``i*d + j``.  Left multiplication ``A rho``
  is then ``kron(A, I)`` and right multiplication ``rho B`` is
  ``kron(I, B.T)``.
* A Liouvillian ``L`` is stored so that ``d vec(rho)/dt = -1j * L @ vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .exceptions import ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12

Rate = Union[float, Callable[[float], float]]


def _square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    return a


def check_hermitian(a, name="matrix", tol=HERMITIAN_TOL) -> np.ndarray:
    """Return ``a`` as a complex array, raising if it is not Hermitian.

    No symmetrization is attempted; a non-Hermitian input is a caller bug.
    """
    a = _square(a, name)
    resid = np.max(np.abs(a - a.conj().T), initial=0.0)
    if resid > tol:
        raise ValidationError(f"{name} is not Hermitian (residual {resid:.3e} > {tol:.0e})")
    return a


def density_matrix(rho, tol=TRACE_TOL) -> np.ndarray:
    """Validate a density matrix: square, Hermitian, unit trace."""
    rho = check_hermitian(rho, "density matrix", tol)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix has trace {tr:.6g}, expected 1")
    return rho.copy()


def vectorize(rho, order="C") -> np.ndarray:
    """Row-major vectorization of a square matrix.

    Only ``order="C"`` is accepted; column-major stacking would silently
    transpose every superoperator built here.
    """
    if order != "C":
        raise ValidationError("only row-major (order='C') vectorization is supported")
    rho = _square(rho, "density matrix")
    return rho.reshape(-1).copy()


def unvectorize(vec, order="C") -> np.ndarray:
    if order != "C":
        raise ValidationError("only row-major (order='C') vectorization is supported")
    vec = np.asarray(vec, dtype=complex)
    d = int(round(np.sqrt(vec.shape[0])))
    if vec.ndim != 1 or d * d != vec.shape[0]:
        raise ValidationError(f"vector of length {vec.shape[0]} is not a vectorized square matrix")
    return vec.reshape(d, d).copy()


def left_super(a) -> np.ndarray:
    """Superoperator of ``rho -> a @ rho``."""
    a = _square(a)
    return np.kron(a, np.eye(a.shape[0]))


def right_super(b) -> np.ndarray:
    """Superoperator of ``rho -> rho @ b``."""
    b = _square(b)
    return np.kron(np.eye(b.shape[0]), b.T)


def build_L0(H) -> np.ndarray:
    """Commutator superoperator ``H (x) I - I (x) H*``."""
    H = check_hermitian(H, "Hamiltonian")
    eye = np.eye(H.shape[0])
    return np.kron(H, eye) - np.kron(eye, H.conj())


def dissipator(L) -> np.ndarray:
    """Superoperator of ``rho -> L rho L^dag - {L^dag L, rho}/2`` (unit rate)."""
    L = _square(L, "jump operator")
    eye = np.eye(L.shape[0])
    LdL = L.conj().T @ L
    return np.kron(L, L.conj()) - 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T))


# -- time-dependent pieces ----------------------------------------------------


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t):
        return self.value * np.ones_like(np.asarray(t, dtype=float))

    def integral(self, t0, t1):
        return self.value * (t1 - t0)


@dataclass(frozen=True)
class Cosine:
    """Envelope ``amplitude * cos(frequency * t + phase)``."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.cos(self.frequency * t + self.phase)

    def integral(self, t0, t1):
        if self.frequency == 0:
            return self.amplitude * np.cos(self.phase) * (t1 - t0)
        w, p = self.frequency, self.phase
        return self.amplitude * (np.sin(w * t1 + p) - np.sin(w * t0 + p)) / w


@dataclass(frozen=True)
class SystemHamiltonian:
    """``H(t) = static + sum_i envelope_i(t) * operator_i``.

    Every piece is checked for Hermiticity, so ``H(t)`` is Hermitian for any
    real envelope value.
    """

    static: np.ndarray
    field_terms: tuple = ()

    def __post_init__(self):
        static = check_hermitian(self.static, "static Hamiltonian")
        terms = []
        for env, op in self.field_terms:
            if not callable(env):
                raise ValidationError("field envelope must be callable")
            op = check_hermitian(op, "field operator")
            if op.shape != static.shape:
                raise ValidationError(
                    f"field operator shape {op.shape} does not match Hamiltonian {static.shape}")
            terms.append((env, op))
        object.__setattr__(self, "static", static)
        object.__setattr__(self, "field_terms", tuple(terms))

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    @property
    def is_time_dependent(self) -> bool:
        return bool(self.field_terms)

    def __call__(self, t: float) -> np.ndarray:
        H = self.static.copy()
        for env, op in self.field_terms:
            H = H + float(env(t)) * op
        return H


@dataclass(frozen=True)
class JumpOperator:
    """Lindblad channel ``rate(t) * D[matrix]``.

    The rate multiplies the dissipator rather than being absorbed into the
    operator, so negative rates are representable.  Complete positivity is
    then no longer guaranteed.
    """

    matrix: np.ndarray
    rate: Rate = 1.0

    def __post_init__(self):
        object.__setattr__(self, "matrix", _square(self.matrix, "jump operator"))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_time_dependent(self) -> bool:
        return callable(self.rate)

    def rate_at(self, t: float) -> float:
        return float(self.rate(t)) if callable(self.rate) else float(self.rate)

    def effective(self, t: float) -> tuple[np.ndarray, float]:
        """``(sqrt(|rate|) * matrix, sign(rate))`` at time ``t``."""
        g = self.rate_at(t)
        return np.sqrt(abs(g)) * self.matrix, float(np.sign(g))


def build_lindbladian(ops: Sequence[JumpOperator], t: float = 0.0, dim: int | None = None) -> np.ndarray:
    """Dissipative part of the Liouvillian, ``i * sum_n rate_n(t) D[L_n]``.

    ``-1j * build_lindbladian(ops, t)`` is the dissipator generator.  ``dim``
    sizes the zero superoperator when ``ops`` is empty.
    """
    ops = list(ops)
    if not ops:
        if dim is None:
            raise ValidationError("dim is required when no jump operators are given")
        return np.zeros((dim * dim, dim * dim), dtype=complex)
    d = ops[0].dim if dim is None else dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for op in ops:
        if op.dim != d:
            raise ValidationError(f"jump operator dimension {op.dim} does not match {d}")
        out += op.rate_at(t) * dissipator(op.matrix)
    return 1j * out


class Generator:
    """Time-dependent generator ``G(t) = -1j * (L0(t) + L_lindblad(t))``.

    Static, field and dissipative pieces are precomputed once so that
    ``G(t)`` costs a handful of scaled additions.
    """

    def __init__(self, hamiltonian: SystemHamiltonian, jumps: Sequence[JumpOperator] = ()):
        self.hamiltonian = hamiltonian
        self.jumps = tuple(jumps)
        d = hamiltonian.dim
        for op in self.jumps:
            if op.dim != d:
                raise ValidationError(f"jump operator dimension {op.dim} does not match Hamiltonian {d}")
        self.dim = d
        self._static = -1j * build_L0(hamiltonian.static)
        self._fields = [(env, -1j * build_L0(op)) for env, op in hamiltonian.field_terms]
        self._jumps = []
        for op in self.jumps:
            D = dissipator(op.matrix)
            if op.is_time_dependent:
                self._jumps.append((op.rate_at, D))
            else:
                self._static = self._static + op.rate_at(0.0) * D

    @property
    def is_time_dependent(self) -> bool:
        return bool(self._fields or self._jumps)

    def __call__(self, t: float) -> np.ndarray:
        G = self._static.copy()
        for env, F in self._fields:
            G += float(env(t)) * F
        for rate, D in self._jumps:
            G += rate(t) * D
        return G

    def liouvillian(self, t: float) -> np.ndarray:
        """``L(t)`` with ``G(t) = -1j L(t)``."""
        return 1j * self(t)


# -- diagnostics ---------------------------------------------------------------


def trace_functional(dim: int) -> np.ndarray:
    return vectorize(np.eye(dim))


def is_trace_preserving(S, tol=1e-10) -> bool:
    """True if ``vec(I)^dag S == vec(I)^dag`` within ``tol``."""
    S = np.asarray(S)
    d = int(round(np.sqrt(S.shape[0])))
    v = trace_functional(d)
    return bool(np.max(np.abs(v.conj() @ S - v.conj())) <= tol)


def choi_matrix(S) -> np.ndarray:
    """Choi matrix ``sum_kl |k><l| (x) S(|k><l|)`` of a row-major superoperator."""
    S = np.asarray(S)
    d = int(round(np.sqrt(S.shape[0])))
    # S[i*d+j, k*d+l] -> C[(k,i), (l,j)]
    return S.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def min_choi_eigenvalue(S) -> float:
    C = choi_matrix(S)
    return float(np.linalg.eigvalsh(0.5 * (C + C.conj().T)).min())


def maps_hermitian(S, tol=1e-10) -> bool:
    """True if ``S`` sends every Hermitian basis matrix to a Hermitian matrix."""
    S = np.asarray(S)
    d = int(round(np.sqrt(S.shape[0])))
    for i in range(d):
        for j in range(i, d):
            for h in ((1, 1), (1j, -1j)) if i != j else ((1, None),):
                H = np.zeros((d, d), dtype=complex)
                H[i, j] = h[0]
                if i != j:
                    H[j, i] = h[1]
                out = unvectorize(S @ vectorize(H))
                if np.max(np.abs(out - out.conj().T)) > tol:
                    return False
    return True
