"""Cable modeling walkthrough: netlists, diagnostics, model agreement.

Builds the lumped and ladder models of 1000 m of RG58 coax, prints the
quasi-static diagnostics that decide which model is trustworthy, and
sweeps the three wavelength regimes to show where the lumped model
breaks down.
"""

from kljnsim import (
    build_distributed,
    build_lumped,
    compare_models,
    cutoff_frequency,
    rg58,
    wavelength_ratio,
)
from kljnsim.compare import write_comparison_csv

cable = rg58(1000.0)
print(f"RG58, {cable.length_m:.0f} m: total R = {cable.total_r:.1f} ohm, "
      f"L = {cable.total_l * 1e6:.0f} uH, C = {cable.total_c * 1e9:.0f} nF")
print(f"characteristic impedance: {cable.characteristic_impedance():.0f} ohm")
print(f"capacitive cutoff vs 1k/9k: {cutoff_frequency(1e3, 9e3, cable.total_c):.0f} Hz")
print(f"cutoff for 100 m          : {cutoff_frequency(1e3, 9e3, rg58(100.0).total_c):.0f} Hz")

print("\nlumped model netlist:")
print(build_lumped(1000.0, 9000.0, cable).to_text())

ladder = build_distributed(1000.0, 9000.0, cable)
n_branches = len(ladder.branches)
print(f"ladder model: {cable.n_segments} sections, {n_branches} branches")

print("\nmodel agreement across wavelength regimes (same noise realization):")
print(f"{'bandwidth':>12} | {'gamma':>6} | {'nrmsd':>10} | verdict")
for bw in (250e3, 25e3, 250.0):
    gamma = wavelength_ratio(cable, bw)
    rep = compare_models(cable, 1000.0, 9000.0, bw, seed=3)
    print(f"{bw:>10.3g} Hz | {gamma:>6.3g} | {rep.nrmsd:>10.2e} | {rep.verdict}")
    write_comparison_csv(rep, f"model_compare_gamma{gamma:g}.csv")
print("\nwrote model_compare_gamma*.csv for plotting the waveform pairs")
