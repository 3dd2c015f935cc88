"""Noise generator walkthrough: sigma calibration, spectrum, normality.

The key exchange runs on band-limited white Gaussian noise whose rms is
set by the Johnson formula at an enormous effective temperature.  This
script generates the low-resistor source (1 V rms target), checks the
sample statistics, and writes the histogram/quantile CSV used for
normal-probability plotting.
"""

import numpy as np

from kljnsim import (
    NoiseSpec,
    effective_temperature,
    gaussianity_report,
    generate,
    rms_for_resistor,
    rms_ratio,
)
from kljnsim.noise import out_of_band_power_fraction, write_gaussianity_csv

R_LOW, R_HIGH = 1000.0, 9000.0
BANDWIDTH = 250.0

# Back-solve the effective temperature that puts 1 V rms on the 1 kohm
# generator, then confirm the 9 kohm generator lands on 3 V.
t_eff = effective_temperature(1.0, R_LOW, BANDWIDTH)
print(f"effective temperature : {t_eff:.4e} K")
print(f"rms @ 1 kohm          : {rms_for_resistor(R_LOW, t_eff, BANDWIDTH):.4f} V")
print(f"rms @ 9 kohm          : {rms_for_resistor(R_HIGH, t_eff, BANDWIDTH):.4f} V")
print(f"sigma ratio           : {rms_ratio(R_LOW, R_HIGH):.4f} (expect 1/3)")

spec = NoiseSpec(
    bandwidth_hz=BANDWIDTH,
    rms_volts=1.0,
    duration_s=1000.0,  # one million samples at the 1 ms measurement rate
    sample_interval_s=1e-3,
    seed=7,
)
wave = generate(spec)
print(f"\ngenerated {len(wave)} samples")
print(f"sample sigma          : {np.std(wave.samples):.4f} V")
print(f"out-of-band power     : {out_of_band_power_fraction(wave, BANDWIDTH):.2e}")

report = gaussianity_report(wave, n_bins=50)
print(f"chi-squared p-value   : {report.chi2_pvalue:.3f}")
q_dev = np.max(np.abs(report.theoretical_q - report.empirical_q))
print(f"max quantile deviation: {q_dev:.4f} V (straight line = Gaussian)")

write_gaussianity_csv(report, "noise_statistics.csv")
print("\nwrote noise_statistics.csv (histogram block + quantile block)")
