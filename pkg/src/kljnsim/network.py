"""Circuit netlists for the key exchange loop and its cable models.

Builds the loop (two noise generators behind the party resistors) around
either a single-section lumped cable or an N-section ladder, provides the
quasi-static diagnostics (wavelength ratio, capacitive cutoff), and the
shield-drive transform that cancels capacitive currents.

Current probes at the two ends are oriented *into* the cable from each
party's branch, so the attack statistic built on them is antisymmetric
under mirroring the loop.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

GROUND = "0"
SHIELD = "sh"

# RG58 coaxial per-meter constants and propagation velocity.
RG58_R_PER_M = 0.021  # ohm/m
RG58_L_PER_M = 250e-9  # H/m
RG58_C_PER_M = 100e-12  # F/m
RG58_VELOCITY = 2e8  # m/s


@dataclass(frozen=True)
class CableSpec:
    """Per-meter cable constants plus length and ladder discretization."""

    r_per_m: float
    l_per_m: float
    c_per_m: float
    length_m: float
    velocity_m_s: float
    n_segments: int = 1

    def __post_init__(self):
        if min(self.r_per_m, self.l_per_m, self.c_per_m) < 0:
            raise ValueError("per-meter values must be non-negative")
        if self.length_m <= 0:
            raise ValueError("length_m must be positive")
        if self.n_segments < 1:
            raise ValueError("n_segments must be at least 1")
        if self.l_per_m > 0 and self.c_per_m > 0 and self.velocity_m_s > 0:
            v = 1.0 / math.sqrt(self.l_per_m * self.c_per_m)
            if abs(v - self.velocity_m_s) > 0.01 * v:
                raise ValueError(
                    f"velocity {self.velocity_m_s} m/s inconsistent with "
                    f"1/sqrt(LC) = {v:.4g} m/s"
                )

    @property
    def total_r(self) -> float:
        return self.r_per_m * self.length_m

    @property
    def total_l(self) -> float:
        return self.l_per_m * self.length_m

    @property
    def total_c(self) -> float:
        return self.c_per_m * self.length_m

    def characteristic_impedance(self) -> float:
        if self.c_per_m == 0:
            raise ValueError("characteristic impedance undefined for zero capacitance")
        return math.sqrt(self.l_per_m / self.c_per_m)


def rg58(length_m: float, n_segments: int | None = None) -> CableSpec:
    """RG58 coaxial cable of the given length.

    Ladder discretization defaults to one section per 10 m.
    """
    if n_segments is None:
        n_segments = max(1, int(round(length_m / 10.0)))
    return CableSpec(
        r_per_m=RG58_R_PER_M,
        l_per_m=RG58_L_PER_M,
        c_per_m=RG58_C_PER_M,
        length_m=length_m,
        velocity_m_s=RG58_VELOCITY,
        n_segments=n_segments,
    )


@dataclass(frozen=True)
class Branch:
    """One netlist branch.

    Kinds: R (resistor), L (inductor), C (capacitor), V (independent
    voltage source, driven by a waveform keyed by the branch name),
    E (voltage-controlled voltage source; ``value`` is the gain and
    ``ctrl_a``/``ctrl_b`` the sensed node pair).

    Branch current convention is a -> b.
    """

    kind: str
    name: str
    a: str
    b: str
    value: float = 0.0
    ctrl_a: str | None = None
    ctrl_b: str | None = None
    source_ref: str | None = None  # V branches driven by a named waveform


@dataclass(frozen=True)
class Netlist:
    """Node/branch description plus named probes.

    Probes map a name to either ``("v", node)`` or ``("i", branch_name)``.
    """

    branches: tuple[Branch, ...]
    probes: dict[str, tuple[str, str]] = field(default_factory=dict)
    ground: str = GROUND

    def __post_init__(self):
        names = set()
        for br in self.branches:
            if br.name in names:
                raise ValueError(f"duplicate branch name {br.name!r}")
            names.add(br.name)
        for pname, (kind, ref) in self.probes.items():
            if kind == "v":
                if ref not in self.nodes():
                    raise ValueError(f"probe {pname!r} references unknown node {ref!r}")
            elif kind == "i":
                if ref not in names:
                    raise ValueError(f"probe {pname!r} references unknown branch {ref!r}")
            else:
                raise ValueError(f"probe {pname!r} has unknown kind {kind!r}")

    def nodes(self) -> list[str]:
        seen: dict[str, None] = {self.ground: None}
        for br in self.branches:
            seen.setdefault(br.a, None)
            seen.setdefault(br.b, None)
            if br.ctrl_a is not None:
                seen.setdefault(br.ctrl_a, None)
            if br.ctrl_b is not None:
                seen.setdefault(br.ctrl_b, None)
        return list(seen)

    def source_names(self) -> list[str]:
        return [br.name for br in self.branches if br.kind == "V"]

    def branch(self, name: str) -> Branch:
        for br in self.branches:
            if br.name == name:
                return br
        raise KeyError(name)

    def to_text(self) -> str:
        """Line-oriented dump: ``KIND name node_a node_b value_or_source``.

        Controlled sources append gain and the control node pair.
        """
        lines = []
        for br in self.branches:
            if br.kind == "V":
                ref = br.source_ref if br.source_ref is not None else f"{br.value:.9g}"
                lines.append(f"V {br.name} {br.a} {br.b} {ref}")
            elif br.kind == "E":
                lines.append(
                    f"E {br.name} {br.a} {br.b} {br.value:.9g} {br.ctrl_a} {br.ctrl_b}"
                )
            else:
                lines.append(f"{br.kind} {br.name} {br.a} {br.b} {br.value:.9g}")
        for pname, (kind, ref) in self.probes.items():
            lines.append(f"* probe {pname} {kind} {ref}")
        return "\n".join(lines) + "\n"


def _party_branches(r_alice: float, r_bob: float, node_a: str, node_b: str) -> list[Branch]:
    # Generator behind each party resistor; resistor current a->b reads
    # "into the cable" at both ends.
    return [
        Branch("V", "ua", "sa", GROUND, source_ref="ua"),
        Branch("R", "ra", "sa", node_a, r_alice),
        Branch("V", "ub", "sb", GROUND, source_ref="ub"),
        Branch("R", "rb", "sb", node_b, r_bob),
    ]


_KLJN_PROBES = {
    "u_cha": ("v", "a"),
    "i_cha": ("i", "ra"),
    "u_chb": ("v", "b"),
    "i_chb": ("i", "rb"),
}


def build_lumped(r_alice: float, r_bob: float, cable: CableSpec) -> Netlist:
    """Single-section cable model: series half-R, half-L, then shunt C.

    The series elements carry half the cable totals and the shunt
    capacitor the full total, placed at the load end (a half-T section).
    For 1000 m of RG58 this gives 10.5 ohm, 125 uH and 100 nF.
    """
    if r_alice <= 0 or r_bob <= 0:
        raise ValueError("party resistances must be positive")
    r_s = cable.total_r / 2.0
    l_s = cable.total_l / 2.0
    c_p = cable.total_c

    branches: list[Branch] = []
    node = "a"
    if r_s > 0:
        branches.append(Branch("R", "rs", node, "n1", r_s))
        node = "n1"
    if l_s > 0:
        branches.append(Branch("L", "ls", node, "b", l_s))
        node = "b"
    if node != "b":
        # Degenerate zero-impedance cable: both ends are one node.
        node = "a"
    b_node = "b" if node == "b" else "a"
    if c_p > 0:
        branches.append(Branch("C", "cp", b_node, SHIELD, c_p))
        branches.append(Branch("V", "vsh", SHIELD, GROUND))

    branches = _party_branches(r_alice, r_bob, "a", b_node) + branches
    probes = dict(_KLJN_PROBES)
    probes["u_chb"] = ("v", b_node)
    return Netlist(branches=tuple(branches), probes=probes)


def build_distributed(r_alice: float, r_bob: float, cable: CableSpec) -> Netlist:
    """N-section ladder; each section is a pi: C/2, series R and L, C/2.

    Shunt capacitance lands on the wire nodes (half sections at the two
    ends), so section totals sum exactly to the per-meter values times
    length and the ladder is mirror symmetric.
    """
    if r_alice <= 0 or r_bob <= 0:
        raise ValueError("party resistances must be positive")
    n = cable.n_segments
    dx = cable.length_m / n
    r_seg = cable.r_per_m * dx
    l_seg = cable.l_per_m * dx
    c_seg = cable.c_per_m * dx

    def wire_node(i: int) -> str:
        if i == 0:
            return "a"
        if i == n:
            return "b"
        return f"w{i}"

    branches: list[Branch] = []
    alias: dict[str, str] = {}

    def resolve(node: str) -> str:
        while node in alias:
            node = alias[node]
        return node

    for i in range(n):
        left = resolve(wire_node(i))
        right = wire_node(i + 1)
        node = left
        if r_seg > 0:
            mid = f"m{i}" if l_seg > 0 else right
            branches.append(Branch("R", f"rs{i}", node, mid, r_seg))
            node = mid
        if l_seg > 0:
            branches.append(Branch("L", f"ls{i}", node, right, l_seg))
            node = right
        if node != right:
            # Zero series impedance: merge the right node into the left.
            alias[right] = left

    end_b = resolve(wire_node(n))
    if c_seg > 0:
        for i in range(n + 1):
            node = resolve(wire_node(i))
            c_val = c_seg if 0 < i < n else c_seg / 2.0
            branches.append(Branch("C", f"cs{i}", node, SHIELD, c_val))
        branches.append(Branch("V", "vsh", SHIELD, GROUND))

    branches = _party_branches(r_alice, r_bob, "a", end_b) + branches
    probes = dict(_KLJN_PROBES)
    probes["u_chb"] = ("v", end_b)
    return Netlist(branches=tuple(branches), probes=probes)


def wavelength_ratio(cable: CableSpec, bandwidth_hz: float) -> float:
    """Quasi-static ratio gamma = (velocity / bandwidth) / cable length."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be positive")
    return (cable.velocity_m_s / bandwidth_hz) / cable.length_m


def cutoff_frequency(r_low: float, r_high: float, total_capacitance: float) -> float:
    """Pole set by the cable capacitance against the parallel resistors."""
    if r_low <= 0 or r_high <= 0:
        raise ValueError("resistances must be positive")
    if total_capacitance <= 0:
        raise ValueError("capacitance must be positive (cutoff would be infinite)")
    r_par = r_low * r_high / (r_low + r_high)
    return 1.0 / (2.0 * math.pi * r_par * total_capacitance)


def apply_capacitor_killer(netlist: Netlist, tap_end: str = "alice") -> Netlist:
    """Drive the cable shield with the inner-wire voltage at one end.

    The shield is lifted off ground and driven by a unity-gain controlled
    source sensing the inner wire at ``tap_end``; every shunt capacitor
    then bridges inner wire to driven shield, so the capacitive current
    vanishes at the tap and is strongly suppressed elsewhere.
    """
    has_shield_caps = any(
        br.kind == "C" and SHIELD in (br.a, br.b) for br in netlist.branches
    )
    if not has_shield_caps:
        warnings.warn("netlist has no shield capacitors; killer transform is a no-op")
        return netlist

    if tap_end == "alice":
        tap_node = netlist.probes["u_cha"][1]
    elif tap_end == "bob":
        tap_node = netlist.probes["u_chb"][1]
    else:
        raise ValueError("tap_end must be 'alice' or 'bob'")

    branches = []
    for br in netlist.branches:
        if br.name == "vsh":
            branches.append(
                Branch("E", "ekill", SHIELD, GROUND, 1.0, ctrl_a=tap_node, ctrl_b=GROUND)
            )
        else:
            branches.append(br)
    return replace(netlist, branches=tuple(branches))
