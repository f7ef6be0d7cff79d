"""Model builders: driven excitonic dimer with pump/drain channels, spin-boson."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .liouville import Cosine, SystemHamiltonian

DIMER_BASIS = ("gg", "ge", "eg", "ee")
SPIN_BASIS = ("up", "down")


def _proj(labels, *states):
    P = np.zeros((len(labels), len(labels)))
    for s in states:
        i = labels.index(s)
        P[i, i] = 1.0
    return P


def _ket_bra(labels, ket, bra):
    M = np.zeros((len(labels), len(labels)))
    M[labels.index(ket), labels.index(bra)] = 1.0
    return M


@dataclass(frozen=True)
class Model:
    """A system Hamiltonian plus the named operators that configs refer to.

    ``couplings`` hold diagonal bath coupling operators, ``jumps`` bare jump
    matrices and ``observables`` Hermitian operators whose expectation
    values are reported.
    """

    hamiltonian: SystemHamiltonian
    labels: tuple
    couplings: dict = field(default_factory=dict)
    jumps: dict = field(default_factory=dict)
    observables: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def basis_state(self, label: str) -> np.ndarray:
        if label not in self.labels:
            raise ValidationError(f"unknown basis label {label!r}; known: {', '.join(self.labels)}")
        return _proj(list(self.labels), label).astype(complex)


@dataclass(frozen=True)
class DimerSpec:
    """Excitonic dimer; basis order is ``(gg, ge, eg, ee)`` and the first
    letter refers to monomer 1."""

    eps1: float = 5.0
    eps2: float = 5.0
    delta: float = 1.0
    drive_amplitude: float = 0.0
    drive_frequency: float = 10.0


def build_dimer(spec: DimerSpec = DimerSpec()) -> Model:
    """Dimer Hamiltonian, optional cosine drive on the one-exciton block,
    monomer bath couplings, and the pump (monomer 1) / drain (monomer 2)
    jump operators."""
    lab = list(DIMER_BASIS)
    H = (spec.eps1 * _proj(lab, "eg") + spec.eps2 * _proj(lab, "ge")
         + (spec.eps1 + spec.eps2) * _proj(lab, "ee")
         - spec.delta * (_ket_bra(lab, "eg", "ge") + _ket_bra(lab, "ge", "eg")))
    terms = ()
    if spec.drive_amplitude != 0:
        V = _proj(lab, "eg") - _proj(lab, "ge")
        terms = ((Cosine(spec.drive_amplitude, spec.drive_frequency), V),)
    ham = SystemHamiltonian(H, terms)

    monomer1 = _proj(lab, "eg", "ee")
    monomer2 = _proj(lab, "ge", "ee")
    pump = _ket_bra(lab, "eg", "gg") + _ket_bra(lab, "ee", "ge")
    drain = _ket_bra(lab, "gg", "ge") + _ket_bra(lab, "eg", "ee")
    obs = {f"pop_{s}": _proj(lab, s) for s in lab}
    obs.update(P1=monomer1, P2=monomer2)
    return Model(ham, DIMER_BASIS, couplings={"monomer1": monomer1, "monomer2": monomer2},
                 jumps={"pump": pump, "drain": drain}, observables=obs)


def build_spin_boson(eps: float = 0.0, delta: float = 1.0) -> Model:
    """``H = eps * sigma_z + delta * sigma_x`` with the bath on ``sigma_z``."""
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sy = np.array([[0.0, -1j], [1j, 0.0]])
    lab = list(SPIN_BASIS)
    lower = _ket_bra(lab, "down", "up")
    obs = {"pop_up": _proj(lab, "up"), "pop_down": _proj(lab, "down"),
           "sigma_x": sx, "sigma_y": sy, "sigma_z": sz}
    return Model(SystemHamiltonian(eps * sz + delta * sx), SPIN_BASIS,
                 couplings={"sigma_z": sz}, jumps={"lower": lower, "raise": lower.T.copy(), "dephase": sz},
                 observables=obs)


MODELS = {"dimer": lambda **kw: build_dimer(DimerSpec(**kw)), "spin_boson": build_spin_boson}


def evaluate_observables(rhos, observables: dict, names=None) -> dict:
    """Expectation values ``Re Tr(O rho)`` per step, plus trace and
    minimum-eigenvalue diagnostics.

    ``names`` selects entries of ``observables``; all of them by default.
    """
    rhos = np.asarray(rhos)
    names = list(observables) if names is None else list(names)
    out = {}
    for name in names:
        if name not in observables:
            raise ValidationError(f"unknown observable {name!r}; known: {', '.join(observables)}")
        O = np.asarray(observables[name])
        out[name] = np.real(np.einsum("ij,nji->n", O, rhos))
    out["trace"] = np.trace(rhos, axis1=1, axis2=2)
    herm = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    out["min_eigenvalue"] = np.linalg.eigvalsh(herm)[:, 0]
    return out
