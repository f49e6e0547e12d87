"""Protocol runners, parameter sweeps and invariant verification.

A protocol run simulates exactly the set of passes its kind prescribes,
composes the double-pass propagators, applies the matching inversion
formula and returns one MeasurementRecord.  Sweeps repeat a protocol
over a parameter grid; per-point inversion failures are recorded in the
row status instead of aborting the sweep.  ``verify`` replays the
package's numeric invariants over seeded random drives and produces a
deterministic report.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from . import su2relations
from .drive import (
    DetuningShape,
    DriveProfile2,
    DriveProfile3,
    PulseShape,
    backward_profile_2,
    backward_profile_3,
    pulse_area,
)
from .evolve import cayley_klein, propagate_profile, unitarity_defect
from .su2relations import (
    InversionRangeError,
    PassProbabilities2,
    RadicandClampWarning,
    average_return,
    invert_p_const_detuning,
    invert_p_general,
    invert_p_rap,
)
from .su3relations import (
    PHASE_GRID,
    PassProbabilities3,
    extract_resonant_ck,
    four_phase_average,
    invert_case1,
    invert_case2,
    invert_detuned,
    invert_general,
)

Profile = Union[DriveProfile2, DriveProfile3]

# Spread beyond which the role-swapped return probability is considered
# phase dependent (it must not be; see the general-protocol runner).
_R_PHASE_TOL = 1e-9


class ProtocolKind(str, Enum):
    """The supported measurement protocols.

    Each kind fixes the exact set of passes, sign flips and phases that
    are simulated and which inversion formula is applied.
    """

    TWO_STATE_GENERAL = "two-state-general"
    TWO_STATE_RAP = "two-state-rap"
    TWO_STATE_CONST_DETUNING = "two-state-const-detuning"
    STIRAP_RESONANT_CASE1 = "stirap-resonant-case1"
    STIRAP_RESONANT_CASE2 = "stirap-resonant-case2"
    STIRAP_DETUNED = "stirap-detuned"
    THREE_STATE_GENERAL = "three-state-general"


TWO_STATE_KINDS = (
    ProtocolKind.TWO_STATE_GENERAL,
    ProtocolKind.TWO_STATE_RAP,
    ProtocolKind.TWO_STATE_CONST_DETUNING,
)


class ProtocolPreconditionError(ValueError):
    """A protocol precondition (dimensionality, parity, resonance) failed."""


CSV_COLUMNS = (
    "swept_value",
    "p_direct",
    "q",
    "r",
    "Q00",
    "Qpi0",
    "Q0pi",
    "Qpipi",
    "Q_bar",
    "p_estimated",
    "classical_estimate",
    "residual",
    "status",
)


@dataclass(frozen=True)
class MeasurementRecord:
    """One protocol outcome.

    The four Q columns are keyed by what was done to the second pass:
    Q00 unchanged; Qpi0 coupling sign flipped (pump phase pi); Q0pi
    detuning sign flipped (two-state) or Stokes phase pi (three-state);
    Qpipi both.  Fields a protocol does not measure stay None.
    """

    swept_value: Optional[float] = None
    p_direct: Optional[float] = None
    q: Optional[float] = None
    r: Optional[float] = None
    q00: Optional[float] = None
    qpi0: Optional[float] = None
    q0pi: Optional[float] = None
    qpipi: Optional[float] = None
    q_bar: Optional[float] = None
    p_estimated: Optional[float] = None
    classical_estimate: Optional[float] = None
    status: str = "ok"

    @property
    def residual(self) -> Optional[float]:
        """|p_direct - p_estimated|, recomputed on access."""
        if self.p_direct is None or self.p_estimated is None:
            return None
        return abs(self.p_direct - self.p_estimated)


def _format_value(value: Optional[float]) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def record_to_row(record: MeasurementRecord) -> List[str]:
    return [
        _format_value(record.swept_value),
        _format_value(record.p_direct),
        _format_value(record.q),
        _format_value(record.r),
        _format_value(record.q00),
        _format_value(record.qpi0),
        _format_value(record.q0pi),
        _format_value(record.qpipi),
        _format_value(record.q_bar),
        _format_value(record.p_estimated),
        _format_value(record.classical_estimate),
        _format_value(record.residual),
        record.status,
    ]


def write_csv(records: Sequence[MeasurementRecord], stream: TextIO) -> None:
    """Write records in the fixed column layout, 17 significant digits."""
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for record in records:
        stream.write(",".join(record_to_row(record)) + "\n")


def _invert_with_status(inverter: Callable[..., float], *args, **kwargs) -> Tuple[float, str]:
    """Run an inversion formula, translating clamp warnings into a status."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RadicandClampWarning)
        value = inverter(*args, **kwargs)
    clamped = any(issubclass(w.category, RadicandClampWarning) for w in caught)
    return value, ("clamped" if clamped else "ok")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ProtocolPreconditionError(message)


def _population(u: np.ndarray, row: int) -> float:
    return float(abs(u[row, 0]) ** 2)


def _run_two_state(
    kind: ProtocolKind, profile: DriveProfile2, slack: float, swept_value: Optional[float]
) -> MeasurementRecord:
    u_fwd = propagate_profile(profile)
    cayley_klein(u_fwd)  # structural check: the pass must be sign-flip relatable
    p = _population(u_fwd, 1)
    q = _population(u_fwd, 0)

    if kind is ProtocolKind.TWO_STATE_GENERAL:
        u_same = propagate_profile(backward_profile_2(profile))
        u_flip = propagate_profile(backward_profile_2(profile, flip_rabi=True))
        q00 = _population(u_same @ u_fwd, 0)
        qpi0 = _population(u_flip @ u_fwd, 0)
        q_bar = average_return(q00, qpi0)
        PassProbabilities2(p=p, q=q, q_same=q00, q_flip_rabi=qpi0, q_bar=q_bar)
        p_est, status = _invert_with_status(invert_p_general, q_bar, slack=slack)
        return MeasurementRecord(
            swept_value=swept_value,
            p_direct=p,
            q=q,
            q00=q00,
            qpi0=qpi0,
            q_bar=q_bar,
            p_estimated=p_est,
            classical_estimate=math.sqrt(q_bar),
            status=status,
        )

    if kind is ProtocolKind.TWO_STATE_RAP:
        _require(
            profile.rabi_even_about_midpoint() and profile.detuning_odd_about_midpoint(),
            "swept-crossing protocol needs an even coupling and an odd detuning "
            "about the window midpoint",
        )
        u_same = propagate_profile(backward_profile_2(profile))
        q00 = _population(u_same @ u_fwd, 0)
        PassProbabilities2(p=p, q=q, q_same=q00)
        p_est, status = _invert_with_status(invert_p_rap, q00, slack=slack)
        return MeasurementRecord(
            swept_value=swept_value,
            p_direct=p,
            q=q,
            q00=q00,
            p_estimated=p_est,
            classical_estimate=math.sqrt(q00),
            status=status,
        )

    # constant-detuning special case
    _require(
        profile.rabi_even_about_midpoint() and profile.detuning_even_about_midpoint(),
        "even-detuning protocol needs an even coupling and an even detuning "
        "about the window midpoint",
    )
    u_flip = propagate_profile(backward_profile_2(profile, flip_detuning=True))
    q0pi = _population(u_flip @ u_fwd, 0)
    PassProbabilities2(p=p, q=q, q_flip_detuning=q0pi)
    p_est, status = _invert_with_status(invert_p_const_detuning, q0pi, slack=slack)
    return MeasurementRecord(
        swept_value=swept_value,
        p_direct=p,
        q=q,
        q0pi=q0pi,
        p_estimated=p_est,
        classical_estimate=math.sqrt(q0pi),
        status=status,
    )


def _run_three_state(
    kind: ProtocolKind, profile: DriveProfile3, slack: float, swept_value: Optional[float]
) -> MeasurementRecord:
    _require(
        profile.pump_phase == 0.0 and profile.stokes_phase == 0.0,
        "forward pass must have zero pump and Stokes phases",
    )
    u_fwd = propagate_profile(profile)
    p = _population(u_fwd, 2)
    q = _population(u_fwd, 0)

    if kind in (ProtocolKind.STIRAP_RESONANT_CASE1, ProtocolKind.STIRAP_RESONANT_CASE2):
        _require(profile.is_resonant(), "resonant protocol requires zero detunings")
        _require(
            profile.symmetric_pair(),
            "resonant protocol requires pump and Stokes pulses of identical "
            "shape, peak and width",
        )
        extract_resonant_ck(u_fwd)  # structural check of the resonant template
        if kind is ProtocolKind.STIRAP_RESONANT_CASE1:
            u_back = propagate_profile(backward_profile_3(profile, 0.0, 0.0))
            q00 = _population(u_back @ u_fwd, 0)
            PassProbabilities3(p=p, q=q)
            p_est, status = _invert_with_status(invert_case1, q00, q, slack=slack)
            return MeasurementRecord(
                swept_value=swept_value,
                p_direct=p,
                q=q,
                q00=q00,
                p_estimated=p_est,
                classical_estimate=math.sqrt(q00),
                status=status,
            )
        u_back = propagate_profile(backward_profile_3(profile, math.pi, 0.0))
        qpi0 = _population(u_back @ u_fwd, 0)
        p_est, status = _invert_with_status(invert_case2, qpi0, slack=slack)
        return MeasurementRecord(
            swept_value=swept_value,
            p_direct=p,
            q=q,
            qpi0=qpi0,
            p_estimated=p_est,
            classical_estimate=math.sqrt(qpi0),
            status=status,
        )

    if kind is ProtocolKind.STIRAP_DETUNED:
        _require(
            profile.two_photon_detuning == 0.0,
            "symmetric-pair protocol requires two-photon resonance",
        )
        _require(
            profile.symmetric_pair(),
            "symmetric-pair protocol requires pump and Stokes pulses of "
            "identical shape, peak and width",
        )
        _require(
            profile.detuning_even_about_midpoint(),
            "symmetric-pair protocol requires a detuning even about the "
            "window midpoint",
        )
        q_set = []
        for xi, eta in PHASE_GRID:
            u_back = propagate_profile(backward_profile_3(profile, xi, eta))
            q_set.append(_population(u_back @ u_fwd, 0))
        q_bar = four_phase_average(q_set)
        PassProbabilities3(p=p, q=q, q_set=tuple(q_set), q_bar=q_bar)
        p_est, status = _invert_with_status(invert_detuned, q_bar, q, slack=slack)
        return MeasurementRecord(
            swept_value=swept_value,
            p_direct=p,
            q=q,
            q00=q_set[0],
            qpi0=q_set[1],
            q0pi=q_set[2],
            qpipi=q_set[3],
            q_bar=q_bar,
            p_estimated=p_est,
            classical_estimate=math.sqrt(q_bar),
            status=status,
        )

    # fully general protocol: one extra pass measures r, the return
    # probability of the role-swapped pulse order alone
    _require(
        profile.two_photon_detuning == 0.0
        or profile.single_photon_detuning.kind in ("zero", "constant"),
        "general protocol with a two-photon detuning requires a constant "
        "single-photon detuning (the role swap exchanges the detunings)",
    )
    u_swapped = propagate_profile(backward_profile_3(profile, 0.0, 0.0))
    r = float(abs(u_swapped[0, 0]) ** 2)
    q_set = []
    r_again = []
    for xi, eta in PHASE_GRID:
        u_back = propagate_profile(backward_profile_3(profile, xi, eta))
        q_set.append(_population(u_back @ u_fwd, 0))
        r_again.append(float(abs(u_back[0, 0]) ** 2))
    # r must not depend on the phases; assert it instead of assuming it
    spread = max(abs(value - r) for value in r_again)
    if spread > _R_PHASE_TOL:
        raise RuntimeError(
            f"role-swapped return probability varies with the phases "
            f"(spread {spread:.3e}); the pass is not coherent"
        )
    q_bar = four_phase_average(q_set)
    PassProbabilities3(p=p, q=q, r=r, q_set=tuple(q_set), q_bar=q_bar)
    p_est, status = _invert_with_status(invert_general, q_bar, q, r, slack=slack)
    return MeasurementRecord(
        swept_value=swept_value,
        p_direct=p,
        q=q,
        r=r,
        q00=q_set[0],
        qpi0=q_set[1],
        q0pi=q_set[2],
        qpipi=q_set[3],
        q_bar=q_bar,
        p_estimated=p_est,
        classical_estimate=math.sqrt(q_bar),
        status=status,
    )


def run_protocol(
    kind: Union[ProtocolKind, str],
    profile: Profile,
    *,
    slack: float = su2relations.DEFAULT_SLACK,
    swept_value: Optional[float] = None,
) -> MeasurementRecord:
    """Execute one measurement protocol and return its record.

    Precondition violations raise ProtocolPreconditionError; inversion
    inconsistencies beyond the slack raise InversionRangeError.  Clamped
    inversions are reported in the record status, not raised.
    """
    kind = ProtocolKind(kind)
    if kind in TWO_STATE_KINDS:
        _require(
            isinstance(profile, DriveProfile2),
            f"protocol {kind.value} needs a two-state drive profile",
        )
        return _run_two_state(kind, profile, slack, swept_value)
    _require(
        isinstance(profile, DriveProfile3),
        f"protocol {kind.value} needs a three-state drive profile",
    )
    return _run_three_state(kind, profile, slack, swept_value)


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

SWEEP_PARAMETERS = ("pulse-area", "delay", "detuning")


@dataclass(frozen=True)
class SweepSpec:
    """A protocol repeated over a one-parameter grid.

    ``parameter`` is "pulse-area" (rescales the pulse peaks so each
    envelope integrates to the swept value), "delay" (three-state only:
    re-times the pump relative to the Stokes pulse) or "detuning" (sets
    the magnitude/slope of the existing detuning shape).
    """

    profile: Profile
    parameter: str
    start: float
    stop: float
    points: int
    protocol: ProtocolKind

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"unknown sweep parameter {self.parameter!r}; "
                f"expected one of {SWEEP_PARAMETERS}"
            )
        if self.points < 2:
            raise ValueError("points must be >= 2")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("sweep range must be finite")
        object.__setattr__(self, "protocol", ProtocolKind(self.protocol))


def _with_area(shape: PulseShape, area: float, window) -> PulseShape:
    unit = pulse_area(replace(shape, peak=1.0), window)
    if unit <= 0.0:
        raise ValueError(f"cannot scale a {shape.kind!r} pulse to a target area")
    return replace(shape, peak=area / unit)


def _with_detuning(shape: DetuningShape, value: float) -> DetuningShape:
    if shape.kind == "zero":
        return DetuningShape.constant(value)
    if shape.kind == "linear-chirp":
        return replace(shape, rate_or_width=value)
    return replace(shape, magnitude=value)


def apply_sweep_parameter(profile: Profile, parameter: str, value: float) -> Profile:
    """Base profile with one parameter replaced by the swept value."""
    if parameter == "pulse-area":
        if value < 0.0:
            raise ValueError("pulse area must be >= 0")
        if isinstance(profile, DriveProfile2):
            return replace(profile, rabi=_with_area(profile.rabi, value, profile.window))
        return replace(
            profile,
            pump=_with_area(profile.pump, value, profile.window),
            stokes=_with_area(profile.stokes, value, profile.window),
        )
    if parameter == "delay":
        if not isinstance(profile, DriveProfile3):
            raise ValueError("delay sweeps need a three-state profile")
        pump = replace(profile.pump, offset=profile.stokes.offset + value)
        # support moves, so the padded default window is rederived
        return replace(profile, pump=pump, window=None)
    # detuning
    if isinstance(profile, DriveProfile2):
        return replace(profile, detuning=_with_detuning(profile.detuning, value))
    return replace(
        profile,
        single_photon_detuning=_with_detuning(profile.single_photon_detuning, value),
    )


def sweep(spec: SweepSpec, *, slack: float = su2relations.DEFAULT_SLACK) -> List[MeasurementRecord]:
    """One record per grid point, ordered by swept value.

    A zero-length range collapses to a single point.  Per-point
    precondition or inversion failures are recorded in the row status
    and the sweep continues.
    """
    if spec.start == spec.stop:
        values = [spec.start]
    else:
        values = list(np.linspace(spec.start, spec.stop, spec.points))
    records = []
    for value in values:
        value = float(value)
        try:
            point = apply_sweep_parameter(spec.profile, spec.parameter, value)
            record = run_protocol(spec.protocol, point, slack=slack, swept_value=value)
        except (ProtocolPreconditionError, InversionRangeError, ValueError) as exc:
            record = MeasurementRecord(swept_value=value, status=f"error: {exc}")
        records.append(record)
    return records


# ---------------------------------------------------------------------------
# random drives for the verification suites
# ---------------------------------------------------------------------------

def _rng(seed: int) -> np.random.Generator:
    # counter-based generator: reproducible regardless of draw order
    return np.random.Generator(np.random.Philox(seed))


def random_two_state_profile(
    rng: np.random.Generator, symmetry: Optional[str] = None
) -> DriveProfile2:
    """One random two-state drive spanning diabatic to adiabatic regimes.

    ``symmetry`` selects the parity class: "chirp" (even coupling, odd
    detuning), "even" (even coupling, even detuning) or None for a
    generic drive.  Generic drives break the parities by padding the
    window asymmetrically, since every catalogued shape is even about
    its own centre.
    """
    kind = rng.choice(("sin2", "gaussian", "sech"))
    peak = rng.uniform(0.5, 20.0)
    width = 1.0 if kind == "sin2" else rng.uniform(0.15, 0.35)
    if kind == "sin2":
        shape = PulseShape.sin2(peak, width, offset=0.0)
    elif kind == "gaussian":
        shape = PulseShape.gaussian(peak, width, center=0.0)
    else:
        shape = PulseShape.sech(peak, width, center=0.0)
    lo, hi = shape.support()
    span = hi - lo

    if symmetry == "chirp":
        if rng.random() < 0.5:
            detuning = DetuningShape.linear_chirp(rng.uniform(-20.0, 20.0))
        else:
            detuning = DetuningShape.tanh_chirp(
                rng.uniform(-20.0, 20.0), rng.uniform(0.1, 0.5)
            )
        window = (lo - 0.1 * span, hi + 0.1 * span)
    elif symmetry == "even":
        detuning = DetuningShape.constant(rng.uniform(-20.0, 20.0))
        window = (lo - 0.1 * span, hi + 0.1 * span)
    elif symmetry is None:
        choice = rng.integers(3)
        if choice == 0:
            detuning = DetuningShape.constant(rng.uniform(-20.0, 20.0))
        elif choice == 1:
            detuning = DetuningShape.linear_chirp(rng.uniform(-20.0, 20.0))
        else:
            detuning = DetuningShape.tanh_chirp(
                rng.uniform(-20.0, 20.0), rng.uniform(0.1, 0.5)
            )
        # unequal pads shift the window midpoint off the pulse centre
        window = (lo - rng.uniform(0.1, 0.5) * span, hi + rng.uniform(0.1, 0.5) * span)
    else:
        raise ValueError(f"unknown symmetry class {symmetry!r}")
    return DriveProfile2(rabi=shape, detuning=detuning, window=window)


def random_symmetric_pair_profile(
    rng: np.random.Generator, detuning: Optional[float] = None
) -> DriveProfile3:
    """Random equal-peak delayed pulse pair (Stokes first), optionally at a
    fixed constant single-photon detuning."""
    kind = rng.choice(("sin2", "gaussian"))
    peak = rng.uniform(0.5, 20.0)
    delay = rng.uniform(0.05, 0.5)
    if kind == "sin2":
        stokes = PulseShape.sin2(peak, 1.0, offset=0.0)
        pump = PulseShape.sin2(peak, 1.0, offset=delay)
    else:
        width = rng.uniform(0.15, 0.35)
        stokes = PulseShape.gaussian(peak, width, center=0.0)
        pump = PulseShape.gaussian(peak, width, center=delay)
    if detuning is None:
        detuning = rng.uniform(-20.0, 20.0)
    return DriveProfile3(
        pump=pump,
        stokes=stokes,
        single_photon_detuning=DetuningShape.constant(detuning),
    )


def random_resonant_pair_profile(rng: np.random.Generator) -> DriveProfile3:
    return random_symmetric_pair_profile(rng, detuning=0.0)


def random_general_three_state_profile(rng: np.random.Generator) -> DriveProfile3:
    """Random asymmetric pulse pair with single- and two-photon detunings."""
    peak_p, peak_s = rng.uniform(0.5, 20.0, size=2)
    width_p = rng.uniform(0.6, 1.2)
    width_s = rng.uniform(0.15, 0.3)
    delay = rng.uniform(0.05, 0.5)
    pump = PulseShape.sin2(peak_p, width_p, offset=delay)
    stokes = PulseShape.gaussian(peak_s, width_s, center=0.4 * width_s * 4.0)
    return DriveProfile3(
        pump=pump,
        stokes=stokes,
        single_photon_detuning=DetuningShape.constant(rng.uniform(-20.0, 20.0)),
        two_photon_detuning=rng.uniform(-5.0, 5.0),
    )


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

SuiteFn = Callable[[int, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class SuiteDef:
    tolerance: float
    fn: SuiteFn
    description: str


def _suite_unitarity(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        if i % 2 == 0:
            u = propagate_profile(random_two_state_profile(rng))
        else:
            u = propagate_profile(random_general_three_state_profile(rng))
        det_defect = abs(abs(np.linalg.det(u)) - 1.0)
        residuals[i] = max(unitarity_defect(u), det_defect)
    return residuals


def _suite_composition(draws: int, rng: np.random.Generator) -> np.ndarray:
    from .evolve import hamiltonian2, propagate

    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng)
        t0, t2 = profile.window
        t1 = 0.5 * (t0 + t2)
        h = lambda ts: hamiltonian2(profile, ts)
        whole = propagate(h, (t0, t2), 2000)
        first = propagate(h, (t0, t1), 1000)
        second = propagate(h, (t1, t2), 1000)
        residuals[i] = np.abs(whole - second @ first).max()
    return residuals


def _suite_sign_flips(draws: int, rng: np.random.Generator) -> np.ndarray:
    from .evolve import sign_flip_transform

    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng)
        ck = cayley_klein(propagate_profile(profile))
        worst = 0.0
        for flips in ((True, False), (False, True), (True, True)):
            direct = propagate_profile(backward_profile_2(profile, *flips))
            analytic = sign_flip_transform(ck, *flips)
            worst = max(worst, float(np.abs(direct - analytic).max()))
        residuals[i] = worst
    return residuals


def _suite_chirp_symmetry(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng, symmetry="chirp")
        ck = cayley_klein(propagate_profile(profile))
        residuals[i] = abs(ck.a.imag)
    return residuals


def _suite_even_detuning_symmetry(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng, symmetry="even")
        ck = cayley_klein(propagate_profile(profile))
        residuals[i] = abs(ck.b.real)
    return residuals


def _double_pass_returns(profile: DriveProfile2) -> Tuple[float, float, float]:
    """Simulated (p, Q_same, Q_flip_rabi) for one two-state drive."""
    u = propagate_profile(profile)
    u_same = propagate_profile(backward_profile_2(profile))
    u_flip = propagate_profile(backward_profile_2(profile, flip_rabi=True))
    p = _population(u, 1)
    return p, _population(u_same @ u, 0), _population(u_flip @ u, 0)


def _suite_average_return(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng)
        p, q_same, q_flip = _double_pass_returns(profile)
        q_bar = average_return(q_same, q_flip)
        residuals[i] = abs(q_bar - (p * p + (1.0 - p) ** 2))
    return residuals


def _suite_mirror_branch(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng)
        p, q_same, q_flip = _double_pass_returns(profile)
        recovered = invert_p_general(average_return(q_same, q_flip))
        expected = p if p >= 0.5 else 1.0 - p
        residuals[i] = abs(recovered - expected)
    return residuals


def _suite_chirp_return(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng, symmetry="chirp")
        p, q_same, q_flip = _double_pass_returns(profile)
        residuals[i] = max(abs(q_flip - 1.0), abs(q_same - (1.0 - 2.0 * p) ** 2))
    return residuals


def _suite_even_detuning_return(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_two_state_profile(rng, symmetry="even")
        u = propagate_profile(profile)
        u_flip = propagate_profile(backward_profile_2(profile, flip_detuning=True))
        p = _population(u, 1)
        q_flip = _population(u_flip @ u, 0)
        residuals[i] = abs(q_flip - (1.0 - 2.0 * p) ** 2)
    return residuals


def _suite_degradation(draws: int, rng: np.random.Generator) -> np.ndarray:
    # near-complete transfer: Q_bar = 1 - 2 eps + 2 eps^2 exactly
    residuals = np.empty(draws)
    for i in range(draws):
        eps = rng.uniform(0.0, 1e-2)
        q_bar = (1.0 - eps) ** 2 + eps**2
        residuals[i] = max(0.0, abs(q_bar - (1.0 - 2.0 * eps)) - 2.0 * eps**2)
    return residuals


def _suite_swap_unitarity(draws: int, rng: np.random.Generator) -> np.ndarray:
    from .su3relations import backward_propagator

    residuals = np.empty(draws)
    for i in range(draws):
        u = propagate_profile(random_general_three_state_profile(rng))
        xi, eta = rng.uniform(0.0, 2.0 * math.pi, size=2)
        residuals[i] = unitarity_defect(backward_propagator(u, (xi, eta)))
    return residuals


def _suite_element_pairs(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        u = propagate_profile(random_symmetric_pair_profile(rng))
        residuals[i] = max(
            abs(u[0, 0] - u[2, 2]), abs(u[0, 1] - u[1, 2]), abs(u[1, 0] - u[2, 1])
        )
    return residuals


def _suite_resonant_template(draws: int, rng: np.random.Generator) -> np.ndarray:
    from .su3relations import resonant_propagator

    residuals = np.empty(draws)
    for i in range(draws):
        u = propagate_profile(random_resonant_pair_profile(rng))
        ck3 = extract_resonant_ck(u)
        fit = np.abs(u - resonant_propagator(ck3)).max()
        p_formula = ck3.single_pass_p()
        q_formula = ck3.single_pass_q()
        residuals[i] = max(
            fit,
            abs(_population(u, 2) - p_formula),
            abs(_population(u, 0) - q_formula),
        )
    return residuals


def _resonant_double_pass(
    profile: DriveProfile3, xi: float, eta: float
) -> Tuple[float, float, float]:
    u = propagate_profile(profile)
    u_back = propagate_profile(backward_profile_3(profile, xi, eta))
    return (
        _population(u, 2),
        _population(u, 0),
        _population(u_back @ u, 0),
    )


def _suite_resonant_case1(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_resonant_pair_profile(rng)
        p, q, q_ret = _resonant_double_pass(profile, 0.0, 0.0)
        residuals[i] = abs(q_ret - (2.0 * p + 2.0 * q - 1.0) ** 2)
    return residuals


def _suite_resonant_case2(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_resonant_pair_profile(rng)
        p, _, q_ret = _resonant_double_pass(profile, math.pi, 0.0)
        residuals[i] = abs(q_ret - (1.0 - 2.0 * p) ** 2)
    return residuals


def _four_phase_measurement(profile: DriveProfile3) -> Tuple[np.ndarray, List[float]]:
    u = propagate_profile(profile)
    q_set = []
    for xi, eta in PHASE_GRID:
        u_back = propagate_profile(backward_profile_3(profile, xi, eta))
        q_set.append(_population(u_back @ u, 0))
    return u, q_set


def _suite_four_phase_product(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_symmetric_pair_profile(rng)
        u, q_set = _four_phase_measurement(profile)
        from_elements = (
            abs(u[2, 0]) ** 4
            + abs(u[1, 0]) ** 2 * abs(u[2, 1]) ** 2
            + abs(u[0, 0]) ** 2 * abs(u[2, 2]) ** 2
        )
        residuals[i] = abs(four_phase_average(q_set) - from_elements)
    return residuals


def _suite_detuned_average(draws: int, rng: np.random.Generator) -> np.ndarray:
    detunings = (0.0, 1.0, -1.0, 5.0, -5.0, 20.0, -20.0)
    residuals = np.empty(draws)
    for i in range(draws):
        delta = detunings[i % len(detunings)]
        profile = random_symmetric_pair_profile(rng, detuning=delta)
        u, q_set = _four_phase_measurement(profile)
        p = _population(u, 2)
        q = _population(u, 0)
        expected = p * p + q * q + (1.0 - p - q) ** 2
        residuals[i] = abs(four_phase_average(q_set) - expected)
    return residuals


def _suite_general_average(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_general_three_state_profile(rng)
        u, q_set = _four_phase_measurement(profile)
        p = _population(u, 2)
        q = _population(u, 0)
        r = float(abs(u[2, 2]) ** 2)
        expected = p * p + q * r + (1.0 - p - q) * (1.0 - p - r)
        residuals[i] = abs(four_phase_average(q_set) - expected)
    return residuals


def _suite_swap_return_phase_free(draws: int, rng: np.random.Generator) -> np.ndarray:
    residuals = np.empty(draws)
    for i in range(draws):
        profile = random_general_three_state_profile(rng)
        returns = []
        for xi, eta in PHASE_GRID:
            u_back = propagate_profile(backward_profile_3(profile, xi, eta))
            returns.append(float(abs(u_back[0, 0]) ** 2))
        residuals[i] = max(returns) - min(returns)
    return residuals


SUITES: Dict[str, SuiteDef] = {
    "unitarity": SuiteDef(1e-10, _suite_unitarity, "propagators are unitary with unit determinant"),
    "composition": SuiteDef(1e-9, _suite_composition, "propagation composes over subwindows"),
    "sign-flips": SuiteDef(1e-8, _suite_sign_flips, "analytic sign-flip propagators match direct propagation"),
    "chirp-symmetry": SuiteDef(1e-8, _suite_chirp_symmetry, "even coupling + odd detuning gives a real diagonal parameter"),
    "even-detuning-symmetry": SuiteDef(1e-8, _suite_even_detuning_symmetry, "even coupling + even detuning gives an imaginary transfer parameter"),
    "average-return": SuiteDef(1e-8, _suite_average_return, "two-pass average return equals p^2 + (1-p)^2"),
    "mirror-branch": SuiteDef(1e-7, _suite_mirror_branch, "upper-branch inversion recovers p or its mirror"),
    "chirp-return": SuiteDef(1e-7, _suite_chirp_return, "chirp-symmetric drives: flipped return is 1, unflipped is (1-2p)^2"),
    "even-detuning-return": SuiteDef(1e-7, _suite_even_detuning_return, "even-detuning drives: detuning-flipped return is (1-2p)^2"),
    "degradation": SuiteDef(1e-12, _suite_degradation, "near-complete transfer degrades as 1 - 2 eps + O(eps^2)"),
    "swap-unitarity": SuiteDef(1e-12, _suite_swap_unitarity, "role-swapped propagators stay unitary"),
    "element-pairs": SuiteDef(1e-7, _suite_element_pairs, "symmetric pairs give three equal element pairs"),
    "resonant-template": SuiteDef(1e-7, _suite_resonant_template, "resonant symmetric pairs fit the real-triple template"),
    "resonant-case1": SuiteDef(1e-7, _suite_resonant_case1, "unchanged-sign resonant return equals (2p+2q-1)^2"),
    "resonant-case2": SuiteDef(1e-7, _suite_resonant_case2, "pump-flipped resonant return equals (1-2p)^2"),
    "four-phase-product": SuiteDef(1e-9, _suite_four_phase_product, "four-phase average matches the element products"),
    "detuned-average": SuiteDef(1e-7, _suite_detuned_average, "symmetric-pair average equals p^2 + q^2 + (1-p-q)^2 across detunings"),
    "general-average": SuiteDef(1e-6, _suite_general_average, "general average equals p^2 + qr + (1-p-q)(1-p-r)"),
    "swap-return-phase-free": SuiteDef(1e-9, _suite_swap_return_phase_free, "role-swapped return probability ignores the phases"),
}


def verify(suite: str, draws: int, seed: int) -> Dict[str, object]:
    """Run one named invariant suite over seeded random drives.

    The report is a plain dict (JSON-ready) and is a pure function of
    (suite, draws, seed).  Failures are report content, not exceptions.
    """
    if suite not in SUITES:
        raise KeyError(
            f"unknown suite {suite!r}; registered: {', '.join(sorted(SUITES))}"
        )
    if draws < 1:
        raise ValueError("draws must be >= 1")
    definition = SUITES[suite]
    residuals = np.asarray(definition.fn(draws, _rng(seed)), dtype=float)
    worst = int(np.argmax(residuals))
    failures = int(np.count_nonzero(residuals >= definition.tolerance))
    return {
        "suite": suite,
        "description": definition.description,
        "draws": draws,
        "seed": seed,
        "tolerance": definition.tolerance,
        "passed": bool(failures == 0),
        "failures": failures,
        "worst_residual": float(residuals[worst]),
        "worst_index": worst,
    }
