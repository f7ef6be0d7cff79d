"""
Pumped and drained dimer
========================

Monomer 1 is pumped and monomer 2 drained by Lindblad jump operators while
both monomers keep their harmonic baths.  Starting from the ground state the
system settles into a steady state.  The cosine field slows the transfer
from the first monomer to the second, so ``P2`` stays close to zero.

The same runs are available from the command line::

    pild run configs/dimer_pumped_undriven.yaml --output results
    pild run configs/dimer_pumped_driven.yaml --output results
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pild import BathSpec, JumpOperator, SpectralDensity, direct_pild, evaluate_observables
from pild.models import DimerSpec, build_dimer

fig, (ax_d, ax_m) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
for amplitude, style in ((0.0, "-"), (11.96575, "--")):
    m = build_dimer(DimerSpec(drive_amplitude=amplitude))
    baths = [BathSpec(SpectralDensity(0.16, 7.5), 1.0, m.couplings[k]) for k in ("monomer1", "monomer2")]
    jumps = [JumpOperator(m.jumps["pump"]), JumpOperator(m.jumps["drain"])]
    t, rhos = direct_pild(m.hamiltonian, jumps, baths, m.basis_state("gg"), 0.05, 200, k_max=3)
    obs = evaluate_observables(rhos, m.observables)
    for name, color in zip(("pop_gg", "pop_ge", "pop_eg", "pop_ee"), "krbg"):
        ax_d.plot(t, obs[name], style, color=color, label=name[4:] if amplitude == 0 else None)
    ax_m.plot(t, obs["P1"], style, color="b", label="P1" if amplitude == 0 else None)
    ax_m.plot(t, obs["P2"], style, color="r", label="P2" if amplitude == 0 else None)
    print(f"A = {amplitude:8.5f}: final P1 {obs['P1'][-1]:.4f}, P2 {obs['P2'][-1]:.4f}")

ax_d.set_ylabel("diabatic population")
ax_m.set_ylabel("monomer population")
ax_m.set_xlabel("t")
ax_d.legend()
ax_m.legend()
fig.tight_layout()
fig.savefig("pump_drain.png", dpi=150)
