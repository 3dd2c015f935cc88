"""Bit-exchange protocol: resistor selection, measurement, inference.

Each bit exchange period (BEP) attaches fresh noise realizations to the
resistors the two parties selected, advances the transient solver for
the BEP duration while keeping the cable state continuous across bit
boundaries, and records the mean-square voltage and current each party
observes plus the four channel probes an eavesdropper could tap.

One BEP duration unit equals the noise autocorrelation time
1 / (4 B_noise), which is also the measurement interval t_s; with the
default 0.25 kHz bandwidth that is 1 ms, so 20-unit bits run at
50 bits/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import noise as _noise
from .noise import NoiseSpec, Waveform, generate, rms_for_resistor
from .solver import SolverConfig, TransientSolver

LOW, HIGH = "L", "H"

# Effective temperature anchoring the canonical operating point:
# 1 V rms across 1 kohm at 250 Hz noise bandwidth.
T_EFF_DEFAULT = _noise.effective_temperature(1.0, 1000.0, 250.0)

# Internal integration runs this many steps per measurement interval.
DEFAULT_OVERSAMPLE = 32

# Sub-stream purposes when deriving per-bit seeds from a master seed.
_NOISE_ALICE, _NOISE_BOB, _COIN_ALICE, _COIN_BOB, _EVE_TIE = range(5)
_WARMUP_SLOT = 0  # bit i uses slot 1 + i


def derive_seed(*keys: int) -> int:
    """Deterministic independent sub-seed from a tuple of integers."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int.from_bytes(ss.generate_state(4, np.uint32).tobytes(), "little")


@dataclass(frozen=True)
class ProtocolConfig:
    """Operating point of the key exchange."""

    r_low: float = 1000.0
    r_high: float = 9000.0
    t_eff: float = T_EFF_DEFAULT
    bandwidth_hz: float = 250.0
    t_s: float = 1e-3
    bep_units: int = 100
    arrangement: str = "fixed_lh"  # or "random"

    def __post_init__(self):
        if self.r_low <= 0 or self.r_high <= 0:
            raise ValueError("resistances must be positive")
        if self.r_low == self.r_high:
            raise ValueError("r_low and r_high must differ")
        if self.t_eff < 0:
            raise ValueError("t_eff must be non-negative")
        if self.bandwidth_hz <= 0 or self.t_s <= 0:
            raise ValueError("bandwidth and t_s must be positive")
        if self.bep_units < 1:
            raise ValueError("bep_units must be positive")
        if self.arrangement not in ("fixed_lh", "random"):
            raise ValueError("arrangement must be 'fixed_lh' or 'random'")

    def resistance(self, choice: str) -> float:
        if choice == LOW:
            return self.r_low
        if choice == HIGH:
            return self.r_high
        raise ValueError(f"choice must be 'L' or 'H', got {choice!r}")

    @property
    def bep_seconds(self) -> float:
        return self.bep_units * self.t_s

    def generator_rms(self, choice: str) -> float:
        return rms_for_resistor(self.resistance(choice), self.t_eff, self.bandwidth_hz)


@dataclass(frozen=True)
class NoiseLevels:
    """Expected mean-square channel levels per arrangement class.

    LH and HL are degenerate and share one entry; that degeneracy is
    what hides the bit from a passive observer.
    """

    uu_ll: float
    uu_lh: float
    uu_hh: float
    ii_ll: float
    ii_lh: float
    ii_hh: float
    r_low: float
    r_high: float

    def as_dict(self) -> dict[str, float]:
        return {
            "UU_LL": self.uu_ll,
            "UU_LH": self.uu_lh,
            "UU_HH": self.uu_hh,
            "II_LL": self.ii_ll,
            "II_LH": self.ii_lh,
            "II_HH": self.ii_hh,
        }


def expected_levels(config: ProtocolConfig) -> NoiseLevels:
    """Johnson-formula levels: 4kTB R_par (voltage), 4kTB / (R_A + R_B)."""
    four_ktb = 4.0 * _noise.BOLTZMANN * config.t_eff * config.bandwidth_hz
    rl, rh = config.r_low, config.r_high

    def upar(ra: float, rb: float) -> float:
        return four_ktb * (ra * rb / (ra + rb))

    def ipar(ra: float, rb: float) -> float:
        return four_ktb / (ra + rb)

    return NoiseLevels(
        uu_ll=upar(rl, rl),
        uu_lh=upar(rl, rh),
        uu_hh=upar(rh, rh),
        ii_ll=ipar(rl, rl),
        ii_lh=ipar(rl, rh),
        ii_hh=ipar(rh, rh),
        r_low=rl,
        r_high=rh,
    )


def classify_exchange(alice_choice: str, bob_choice: str) -> str:
    """LL and HH expose the bit and are discarded; LH and HL are secure."""
    for c in (alice_choice, bob_choice):
        if c not in (LOW, HIGH):
            raise ValueError(f"choice must be 'L' or 'H', got {c!r}")
    return "discard" if alice_choice == bob_choice else "secure"


def _own_choice(own_resistance: float, levels: NoiseLevels) -> str:
    if abs(own_resistance - levels.r_low) <= abs(own_resistance - levels.r_high):
        return LOW
    return HIGH


def infer_remote_bit(
    own_resistance: float,
    mean_sq: float,
    levels: NoiseLevels,
    quantity: str = "voltage",
) -> str:
    """Classify one mean-square reading to the nearest expected level.

    Knowing its own resistor, a party faces two candidate levels (remote
    low or remote high).  The threshold sits at their geometric mean;
    a reading exactly on the threshold resolves to the larger level.
    """
    if quantity not in ("voltage", "current"):
        raise ValueError("quantity must be 'voltage' or 'current'")
    own = _own_choice(own_resistance, levels)
    if quantity == "voltage":
        cand = {LOW: levels.uu_ll, HIGH: levels.uu_lh} if own == LOW else {
            LOW: levels.uu_lh,
            HIGH: levels.uu_hh,
        }
    else:
        cand = {LOW: levels.ii_ll, HIGH: levels.ii_lh} if own == LOW else {
            LOW: levels.ii_lh,
            HIGH: levels.ii_hh,
        }
    threshold = math.sqrt(cand[LOW] * cand[HIGH])
    upper = LOW if cand[LOW] >= cand[HIGH] else HIGH
    lower = HIGH if upper == LOW else LOW
    return upper if mean_sq >= threshold else lower


def infer_remote_resistance(
    own_resistance: float,
    mean_sq_u: float,
    mean_sq_i: float,
    levels: NoiseLevels,
) -> str:
    """Combined voltage/current inference.

    The ratio of the two mean squares estimates the resistance product
    R_A R_B independent of the temperature, so dividing by the known own
    resistance estimates the remote resistor directly.  Both parties get
    the same 9:1 hypothesis separation this way, which is what makes the
    legitimate bit error rate negligible at practical BEP durations.
    """
    if mean_sq_i <= 0:
        return HIGH if mean_sq_u >= math.sqrt(levels.uu_ll * levels.uu_hh) else LOW
    remote_est = (mean_sq_u / mean_sq_i) / own_resistance
    return HIGH if remote_est >= math.sqrt(levels.r_low * levels.r_high) else LOW


@dataclass
class BepMeasurement:
    """Per-bit record: choices, levels, and the four channel probes."""

    bit_index: int
    alice_choice: str
    bob_choice: str
    mean_sq_u: float
    mean_sq_i: float
    u_cha: Waveform
    i_cha: Waveform
    u_chb: Waveform
    i_chb: Waveform

    @property
    def arrangement(self) -> str:
        return self.alice_choice + self.bob_choice


class KeyExchangeSession:
    """Continuous timeline of bit exchanges over one netlist family.

    ``netlist_builder(r_alice, r_bob)`` must return netlists with an
    identical branch layout for every resistor pair so the reactive
    state can carry across arrangement switches.
    """

    def __init__(
        self,
        netlist_builder,
        config: ProtocolConfig,
        solver_config: SolverConfig | None = None,
        master_seed: int = 0,
    ):
        if master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        self.builder = netlist_builder
        self.config = config
        if solver_config is None:
            solver_config = SolverConfig(internal_step_s=config.t_s / DEFAULT_OVERSAMPLE)
        self.solver_config = solver_config
        os_f = config.t_s / solver_config.internal_step_s
        self.oversample = int(round(os_f))
        if abs(os_f - self.oversample) > 1e-9 or self.oversample < 1:
            raise ValueError("t_s must be an integer multiple of the internal step")
        self.master_seed = master_seed
        self._solvers: dict[tuple[str, str], TransientSolver] = {}
        self._state: np.ndarray | None = None
        self._time_units = 0  # elapsed measurement intervals

    def _solver_for(self, alice_choice: str, bob_choice: str) -> TransientSolver:
        key = (alice_choice, bob_choice)
        solver = self._solvers.get(key)
        if solver is None:
            netlist = self.builder(
                self.config.resistance(alice_choice), self.config.resistance(bob_choice)
            )
            solver = TransientSolver(
                netlist, self.solver_config.internal_step_s, self.solver_config.tolerance
            )
            self._solvers[key] = solver
        if self._state is not None:
            solver.set_state(self._state)
        else:
            solver.reset_state()
        return solver

    def _noise_block(
        self, slot: int, purpose: int, choice: str, n_units: int
    ) -> np.ndarray:
        rms = self.config.generator_rms(choice)
        spec = NoiseSpec(
            bandwidth_hz=self.config.bandwidth_hz,
            rms_volts=rms,
            duration_s=n_units * self.config.t_s,
            sample_interval_s=self.solver_config.internal_step_s,
            seed=derive_seed(self.master_seed, slot, purpose),
        )
        return generate(spec).samples

    def _advance(
        self,
        solver: TransientSolver,
        ua: np.ndarray,
        ub: np.ndarray,
        n_units: int,
    ) -> np.ndarray:
        n_steps = n_units * self.oversample
        u = solver.assemble_inputs(n_steps, {"ua": ua, "ub": ub})
        recs = solver.run(u, record_stride=self.oversample)
        self._state = solver.get_state()
        self._time_units += n_units
        return recs

    def run_warmup(self, n_units: int, arrangement: tuple[str, str] = (LOW, HIGH)) -> None:
        """Discarded settling interval before the first measured bit."""
        if n_units <= 0:
            return
        solver = self._solver_for(*arrangement)
        ua = self._noise_block(_WARMUP_SLOT, _NOISE_ALICE, arrangement[0], n_units)
        ub = self._noise_block(_WARMUP_SLOT, _NOISE_BOB, arrangement[1], n_units)
        self._advance(solver, ua, ub, n_units)

    def draw_arrangement(self, bit_index: int) -> tuple[str, str]:
        """Per-party fair coins (random mode) or the fixed LH pattern."""
        if self.config.arrangement == "fixed_lh":
            return (LOW, HIGH)
        slot = 1 + bit_index
        a = derive_seed(self.master_seed, slot, _COIN_ALICE) & 1
        b = derive_seed(self.master_seed, slot, _COIN_BOB) & 1
        return (HIGH if a else LOW, HIGH if b else LOW)

    def run_bit(
        self,
        bit_index: int,
        arrangement: tuple[str, str] | None = None,
        noise_overrides: dict[str, Waveform] | None = None,
    ) -> BepMeasurement:
        """Exchange one bit and record what the parties and Eve can see."""
        cfg = self.config
        if arrangement is None:
            arrangement = self.draw_arrangement(bit_index)
        alice_choice, bob_choice = arrangement
        solver = self._solver_for(alice_choice, bob_choice)

        slot = 1 + bit_index
        if noise_overrides and "alice" in noise_overrides:
            ua = noise_overrides["alice"].samples
        else:
            ua = self._noise_block(slot, _NOISE_ALICE, alice_choice, cfg.bep_units)
        if noise_overrides and "bob" in noise_overrides:
            ub = noise_overrides["bob"].samples
        else:
            ub = self._noise_block(slot, _NOISE_BOB, bob_choice, cfg.bep_units)

        t_start = self._time_units * cfg.t_s
        recs = self._advance(solver, ua, ub, cfg.bep_units)

        cols = {name: recs[:, i] for i, name in enumerate(solver.probe_names)}
        u_cha = cols["u_cha"]
        i_cha = cols["i_cha"]

        def wf(x: np.ndarray) -> Waveform:
            return Waveform(x, sample_interval_s=cfg.t_s, start_time_s=t_start + cfg.t_s)

        return BepMeasurement(
            bit_index=bit_index,
            alice_choice=alice_choice,
            bob_choice=bob_choice,
            mean_sq_u=float(np.mean(u_cha**2)),
            mean_sq_i=float(np.mean(i_cha**2)),
            u_cha=wf(u_cha),
            i_cha=wf(i_cha),
            u_chb=wf(cols["u_chb"]),
            i_chb=wf(cols["i_chb"]),
        )

    def run_bits(
        self, n_bits: int, warmup_units: int = 0
    ) -> list[BepMeasurement]:
        self.run_warmup(warmup_units, self.draw_arrangement(0))
        return [self.run_bit(i) for i in range(n_bits)]


def run_bep(
    netlist_builder,
    config: ProtocolConfig,
    bit_index: int,
    true_arrangement: tuple[str, str],
    seed: int,
    solver_config: SolverConfig | None = None,
    warmup_units: int = 0,
    noise_overrides: dict[str, Waveform] | None = None,
) -> BepMeasurement:
    """Single standalone bit exchange from zero initial conditions."""
    session = KeyExchangeSession(netlist_builder, config, solver_config, master_seed=seed)
    if warmup_units:
        session.run_warmup(warmup_units, true_arrangement)
    return session.run_bit(bit_index, true_arrangement, noise_overrides)
