"""
One bath simulation, many Lindblad variants
===========================================

For a time-independent Hamiltonian the bath-only dynamical maps can be
compressed into transfer tensors once and reused for any set of jump
operators.  Here a spin-boson bath simulation serves three decay rates and
each result is compared with a direct path-integral run that includes the
jump operator in every step propagator.
"""

import numpy as np

from pild import (BathSpec, Generator, JumpOperator, SpectralDensity, build_lindbladian, direct_pild,
                  dynamical_maps, eta_table, extract_transfer_tensors, propagate_ttm_lindblad,
                  propagator_series)
from pild.models import build_spin_boson

dt, n_steps, k_max = 0.05, 60, 4
m = build_spin_boson()
bath = BathSpec(SpectralDensity(0.16, 7.5), 1.0, m.couplings["sigma_z"])
rho0 = m.basis_state("up")

# bath-only maps from the bare Hamiltonian, then their transfer tensors
Ks = propagator_series(Generator(m.hamiltonian), dt, n_steps)
maps = dynamical_maps(Ks, [eta_table(bath, dt, k_max)], [bath], n_steps, k_max)
tt = extract_transfer_tensors(maps, tail_threshold=1e-10)
print(f"kept {len(tt)} transfer tensors; norms {np.round(tt.norms()[:6], 4)}")

for rate in (0.1, 0.4, 1.0):
    jumps = [JumpOperator(m.jumps["lower"], rate)]
    split = propagate_ttm_lindblad(tt, build_lindbladian(jumps), rho0, n_steps)
    _, direct = direct_pild(m.hamiltonian, jumps, [bath], rho0, dt, n_steps, k_max)
    gap = np.max(np.abs(split[:, 0, 0] - direct[:, 0, 0]))
    print(f"decay rate {rate:4.1f}: max population gap {gap:.2e}")
