"""Eavesdropper statistic: derivative, correlation, decision, symmetry."""

import numpy as np
import pytest

from kljnsim.attack import (
    cross_correlation,
    eve_decide,
    run_attack,
    success_rate,
    time_derivative,
)
from kljnsim.network import build_distributed, rg58
from kljnsim.noise import NoiseSpec, Waveform, generate
from kljnsim.protocol import BepMeasurement, KeyExchangeSession, ProtocolConfig, run_bep


class TestTimeDerivative:
    def test_linear_ramp_exact(self):
        ts = 1e-3
        t = np.arange(50) * ts
        d = time_derivative(Waveform(2.5 * t, ts))
        np.testing.assert_allclose(d.samples, 2.5, rtol=1e-9)

    def test_constant_zero(self):
        d = time_derivative(Waveform(np.full(10, 3.3), 1e-3))
        np.testing.assert_allclose(d.samples, 0.0, atol=1e-12)

    def test_sinusoid_small_step(self):
        ts = 1e-3
        f = 10.0  # f * ts = 0.01
        t = np.arange(2000) * ts
        d = time_derivative(Waveform(np.sin(2 * np.pi * f * t), ts))
        exact = 2 * np.pi * f * np.cos(2 * np.pi * f * t)
        interior = slice(1, -1)
        err = np.max(np.abs(d.samples[interior] - exact[interior]))
        assert err < 1e-3 * 2 * np.pi * f

    def test_too_short(self):
        with pytest.raises(ValueError):
            time_derivative(Waveform(np.zeros(2), 1e-3))


class TestCrossCorrelation:
    def test_orthogonal_sinusoids(self):
        ts = 1e-4
        t = np.arange(10000) * ts
        a = Waveform(np.sin(2 * np.pi * 10 * t), ts)
        b = Waveform(np.cos(2 * np.pi * 10 * t), ts)
        assert abs(cross_correlation(a, b)) < 1e-12

    def test_capacitor_oracle(self):
        # U = A sin(wt), I = C dU/dt  ->  <I dU/dt> = C A^2 w^2 / 2
        ts = 1e-5
        amp, f, c = 2.0, 50.0, 100e-9
        w = 2 * np.pi * f
        t = np.arange(20000) * ts  # whole periods
        du = Waveform(amp * w * np.cos(w * t), ts)
        i = Waveform(c * amp * w * np.cos(w * t), ts)
        assert cross_correlation(i, du) == pytest.approx(c * amp**2 * w**2 / 2, rel=1e-6)

    def test_identical_probes_give_equal_rho(self):
        rng = np.random.default_rng(0)
        i = Waveform(rng.standard_normal(100), 1e-3)
        du = Waveform(rng.standard_normal(100), 1e-3)
        assert cross_correlation(i, du) == cross_correlation(i, du)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cross_correlation(Waveform(np.zeros(5), 1e-3), Waveform(np.zeros(6), 1e-3))


class TestEveDecide:
    def test_signs(self):
        assert eve_decide(1e-9) == "LH"
        assert eve_decide(-1e-9) == "HL"

    def test_tie_rule_is_fair(self):
        guesses = [eve_decide(0.0, tie_seed=k) for k in range(10000)]
        frac = np.mean([g == "LH" for g in guesses])
        assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / 10000)


class TestSuccessRate:
    def test_all_correct(self):
        agg = success_rate([1] * 10)
        assert agg["p_E"] == 1.0
        assert agg["epsilon"] == 0.5
        assert agg["binomial_std"] == 0.0

    def test_fair_coin(self):
        rng = np.random.default_rng(2)
        q = rng.integers(0, 2, 1000)
        agg = success_rate(q)
        assert abs(agg["p_E"] - 0.5) < 3 * np.sqrt(0.25 / 1000)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            success_rate([])


def _crafted_measurement(bit, rho_sign, truth=("L", "H")):
    """Measurement whose probes produce a rho of the requested sign."""
    ts = 1e-3
    n = 32
    t = np.arange(n) * ts
    u = np.sin(2 * np.pi * 31.25 * t)  # whole period across the window
    du = 2 * np.pi * 31.25 * np.cos(2 * np.pi * 31.25 * t)
    i_a = rho_sign * 1e-7 * du  # capacitive-looking current at Alice's end
    i_b = np.zeros(n)
    wf = lambda x: Waveform(x, ts)
    return BepMeasurement(
        bit_index=bit,
        alice_choice=truth[0],
        bob_choice=truth[1],
        mean_sq_u=float(np.mean(u**2)),
        mean_sq_i=float(np.mean(i_a**2)),
        u_cha=wf(u),
        i_cha=wf(i_a),
        u_chb=wf(u),
        i_chb=wf(i_b),
    )


class TestRunAttack:
    def test_crafted_signs_score_correctly(self):
        ms = [_crafted_measurement(0, +1), _crafted_measurement(1, -1)]
        out = run_attack(ms)
        assert out.guesses == ["LH", "HL"]
        assert list(out.q) == [1, 0]
        assert out.p_e == 0.5

    def test_scale_invariance_of_guesses(self):
        ms = [_crafted_measurement(k, (-1) ** k) for k in range(6)]
        out1 = run_attack(ms)
        scaled = []
        for m in ms:
            scaled.append(
                BepMeasurement(
                    bit_index=m.bit_index,
                    alice_choice=m.alice_choice,
                    bob_choice=m.bob_choice,
                    mean_sq_u=m.mean_sq_u,
                    mean_sq_i=m.mean_sq_i,
                    u_cha=Waveform(7.0 * m.u_cha.samples, 1e-3),
                    i_cha=Waveform(7.0 * m.i_cha.samples, 1e-3),
                    u_chb=Waveform(7.0 * m.u_chb.samples, 1e-3),
                    i_chb=Waveform(7.0 * m.i_chb.samples, 1e-3),
                )
            )
        out2 = run_attack(scaled)
        assert out1.guesses == out2.guesses

    def test_sign_symmetry_under_mirroring(self):
        # swapping LH <-> HL with mirrored noise negates every rho
        cfg = ProtocolConfig(bep_units=20)
        dt = cfg.t_s / 32.0
        wf_l = generate(NoiseSpec(250.0, cfg.generator_rms("L"), 0.02, dt, seed=41))
        wf_h = generate(NoiseSpec(250.0, cfg.generator_rms("H"), 0.02, dt, seed=42))
        cable = rg58(1000.0)
        builder = lambda ra, rb: build_distributed(ra, rb, cable)
        m_lh = run_bep(builder, cfg, 0, ("L", "H"), 0,
                       noise_overrides={"alice": wf_l, "bob": wf_h})
        m_hl = run_bep(builder, cfg, 0, ("H", "L"), 0,
                       noise_overrides={"alice": wf_h, "bob": wf_l})
        out_lh = run_attack([m_lh])
        out_hl = run_attack([m_hl])
        assert out_hl.rho[0] == pytest.approx(-out_lh.rho[0], rel=1e-9)
        # Eve's score is unchanged by the swap: her guess flips with truth
        assert out_hl.q[0] == out_lh.q[0]

    def test_positive_mean_rho_under_lh(self):
        # the capacitive leak points the right way: Alice holding the
        # low resistor makes rho positive on average
        cfg = ProtocolConfig(bep_units=100)
        cable = rg58(1000.0)
        sess = KeyExchangeSession(
            lambda ra, rb: build_distributed(ra, rb, cable), cfg, master_seed=11
        )
        out = run_attack(sess.run_bits(60, warmup_units=5))
        assert np.mean(out.rho) > 0
        assert out.p_e > 0.6
