"""Three-state double-pass algebra for lambda-linkage drives.

For one forward pass, p is the 1->3 transition probability, q the 1->1
return probability, and r the 1->1 return probability of the
role-swapped (backward pulse order) pass alone.  The backward-pass
propagator is the forward one with indices 1 and 3 swapped and phase
factors attached; averaging the double-pass return probability over the
four sign combinations of the second-pass fields removes all
interference terms and leaves closed-form relations between the
double-pass average and (p, q, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .drive import _reduce_phase
from .evolve import TemplateMismatchError, unitarity_defect
from .su2relations import (
    DEFAULT_SLACK,
    InversionRangeError,
    RadicandClampWarning,
    checked_probability,
    clamped_sqrt,
    _pick_branch,
)

_CONSTRAINT_TOL = 1e-9
_PROB_TOL = 1e-9

# The four second-pass phase pairs whose return probabilities are averaged.
PHASE_GRID: Tuple[Tuple[float, float], ...] = (
    (0.0, 0.0),
    (math.pi, 0.0),
    (0.0, math.pi),
    (math.pi, math.pi),
)


@dataclass(frozen=True)
class PhasePair:
    """Pump and Stokes phase shifts of the second pass, in [0, 2*pi)."""

    xi: float
    eta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", _reduce_phase(self.xi))
        object.__setattr__(self, "eta", _reduce_phase(self.eta))


@dataclass(frozen=True)
class ResonantCK:
    """The real (alpha, beta, gamma) triple parameterizing the propagator of
    a resonant pass driven by a symmetric equal-peak delayed pulse pair.

    Probability conservation pins alpha^2 + beta^2 + 2 gamma^2 = 1.  The
    parameterization is unique up to a global sign flip of the triple.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        defect = abs(self.alpha**2 + self.beta**2 + 2.0 * self.gamma**2 - 1.0)
        if defect >= _CONSTRAINT_TOL:
            raise ValueError(
                f"alpha^2 + beta^2 + 2 gamma^2 deviates from 1 by {defect:.3e}"
            )

    def single_pass_q(self) -> float:
        """1->1 probability of the forward pass, (alpha^2 - beta^2)^2."""
        return (self.alpha**2 - self.beta**2) ** 2

    def single_pass_p(self) -> float:
        """1->3 probability of the forward pass, ((alpha - beta)^2 - 1)^2."""
        return ((self.alpha - self.beta) ** 2 - 1.0) ** 2


@dataclass(frozen=True)
class PassProbabilities3:
    """Probabilities collected by one three-state protocol run.

    ``q_set`` holds the four double-pass return probabilities at the
    PHASE_GRID phase pairs, in that order.  p + q may fall short of 1;
    the remainder is the transition probability into the middle state.
    """

    p: float
    q: float
    r: Optional[float] = None
    q_set: Optional[Tuple[float, float, float, float]] = None
    q_bar: Optional[float] = None

    def __post_init__(self) -> None:
        values = [("p", self.p), ("q", self.q), ("r", self.r), ("q_bar", self.q_bar)]
        if self.q_set is not None:
            if len(self.q_set) != 4:
                raise ValueError("q_set must hold exactly four probabilities")
            values += [(f"q_set[{i}]", v) for i, v in enumerate(self.q_set)]
        for name, value in values:
            if value is None:
                continue
            if not -_PROB_TOL <= value <= 1.0 + _PROB_TOL:
                raise ValueError(f"{name} = {value!r} is not a probability")
        if self.p + self.q > 1.0 + _PROB_TOL:
            raise ValueError(f"p + q = {self.p + self.q!r} exceeds 1")


def resonant_propagator(ck3: ResonantCK) -> np.ndarray:
    """Propagator template of a resonant symmetric-pair pass.

    The matrix is unitary for every triple satisfying the constraint;
    the corners are real, (2,2) is real, and the remaining off-diagonal
    elements are purely imaginary with (1,2) = (2,3) and (2,1) = (3,2).
    """
    al, be, ga = ck3.alpha, ck3.beta, ck3.gamma
    return np.array(
        [
            [al**2 - be**2, -2j * (al + be) * ga, 2.0 * (al * be - ga**2)],
            [2j * (be - al) * ga, 1.0 - 4.0 * ga**2, -2j * (al + be) * ga],
            [-2.0 * (al * be + ga**2), 2j * (be - al) * ga, al**2 - be**2],
        ],
        dtype=complex,
    )


def extract_resonant_ck(u: np.ndarray, tol: float = 1e-7) -> ResonantCK:
    """Recover (alpha, beta, gamma) from a resonant symmetric-pair
    propagator, up to the global sign of the triple.

    The pairwise products of the triple are read off the matrix elements
    and the triple is reconstructed by dividing through its largest
    component, which fixes the sign class canonically.  The matrix
    resynthesized from the result must match ``u`` within ``tol``;
    propagators of other dynamics (detuned, asymmetric pulses) are
    rejected with TemplateMismatchError and the residual is reported.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {u.shape}")
    defect = unitarity_defect(u)
    if defect >= max(tol, 1e-8):
        raise TemplateMismatchError(f"matrix is not unitary (defect {defect:.3e})")

    gg = max((1.0 - u[1, 1].real) / 4.0, 0.0)
    aa = max((1.0 - 2.0 * gg + u[0, 0].real) / 2.0, 0.0)
    bb = max((1.0 - 2.0 * gg - u[0, 0].real) / 2.0, 0.0)
    ab = (u[0, 2].real - u[2, 0].real) / 4.0
    ag = -(u[0, 1].imag + u[1, 0].imag) / 4.0
    bg = (u[1, 0].imag - u[0, 1].imag) / 4.0

    # the constraint guarantees max(aa, bb, gg) >= 1/4, so the division
    # below is well conditioned
    largest = max(aa, bb, gg)
    if aa == largest:
        alpha = math.sqrt(aa)
        beta = ab / alpha
        gamma = ag / alpha
    elif bb == largest:
        beta = math.sqrt(bb)
        alpha = ab / beta
        gamma = bg / beta
    else:
        gamma = math.sqrt(gg)
        alpha = ag / gamma
        beta = bg / gamma

    try:
        ck3 = ResonantCK(alpha, beta, gamma)
    except ValueError as exc:
        raise TemplateMismatchError(str(exc)) from exc
    residual = float(np.abs(u - resonant_propagator(ck3)).max())
    if residual >= tol:
        raise TemplateMismatchError(
            f"matrix does not match the resonant symmetric-pair template "
            f"(residual {residual:.3e} >= {tol:.1e})"
        )
    return ck3


def backward_propagator(
    u: np.ndarray, phases: Union[PhasePair, Tuple[float, float]]
) -> np.ndarray:
    """Propagator of the role-swapped second pass with phases attached.

    Indices 1 and 3 of the forward propagator are swapped (transpose
    about the main diagonal, then about the anti-diagonal) and the
    elements pick up unimodular phase factors, so unitarity is preserved
    exactly:

        [[u33,            u32 e^{i xi},   u31 e^{i(xi-eta)}],
         [u23 e^{-i xi},  u22,            u21 e^{-i eta}  ],
         [u13 e^{i(eta-xi)}, u12 e^{i eta}, u11           ]]
    """
    if not isinstance(phases, PhasePair):
        phases = PhasePair(*phases)
    u = np.asarray(u, dtype=complex)
    if u.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {u.shape}")
    exi = np.exp(1j * phases.xi)
    eeta = np.exp(1j * phases.eta)
    return np.array(
        [
            [u[2, 2], u[2, 1] * exi, u[2, 0] * exi / eeta],
            [u[1, 2] / exi, u[1, 1], u[1, 0] / eeta],
            [u[0, 2] * eeta / exi, u[0, 1] * eeta, u[0, 0]],
        ],
        dtype=complex,
    )


def case1_return_probability(p: float, q: float) -> float:
    """Resonant double pass with unchanged field signs:
    Q = (2p + 2q - 1)^2."""
    return (2.0 * p + 2.0 * q - 1.0) ** 2


def invert_case1(
    q_return: float, q: float, *, slack: float = DEFAULT_SLACK, branch: str = "upper"
) -> float:
    """p = (1 + sqrt(Q)) / 2 - q for the unchanged-sign resonant double
    pass.  Requires the separately measured single-pass q; Q alone does
    not determine p in this arrangement."""
    q_return = checked_probability(q_return, "q_return", slack)
    q = checked_probability(q, "q", slack)
    root = clamped_sqrt(q_return, slack, "resonant case-1 inversion")
    return _pick_branch(0.5 * (1.0 - root) - q, 0.5 * (1.0 + root) - q, branch)


def case2_return_probability(p: float) -> float:
    """Resonant double pass with the pump sign flipped: Q = (1 - 2p)^2."""
    return (1.0 - 2.0 * p) ** 2


def invert_case2(
    q_return: float, *, slack: float = DEFAULT_SLACK, branch: str = "upper"
) -> float:
    """p = (1 + sqrt(Q)) / 2 for the pump-flipped resonant double pass.

    Q and p are linked directly here, and the result always exceeds the
    interference-blind estimate sqrt(Q)."""
    q_return = checked_probability(q_return, "q_return", slack)
    root = clamped_sqrt(q_return, slack, "resonant case-2 inversion")
    return _pick_branch(0.5 * (1.0 - root), 0.5 * (1.0 + root), branch)


def four_phase_average(q_set: Sequence[float]) -> float:
    """Mean of the four double-pass return probabilities measured at the
    PHASE_GRID phase pairs (0,0), (pi,0), (0,pi), (pi,pi)."""
    if len(q_set) != 4:
        raise ValueError(f"expected four probabilities, got {len(q_set)}")
    return (q_set[0] + q_set[1] + q_set[2] + q_set[3]) / 4.0


def detuned_average_return(p: float, q: float) -> float:
    """Four-phase average for a symmetric-pair pass (any single-photon
    detuning): Q_bar = p^2 + q^2 + (1 - p - q)^2."""
    return p * p + q * q + (1.0 - p - q) ** 2


def invert_detuned(
    q_bar: float, q: float, *, slack: float = DEFAULT_SLACK, branch: str = "upper"
) -> float:
    """p = (1 - q + sqrt(2 Q_bar - 3 q^2 + 2 q - 1)) / 2 for symmetric-pair
    passes, from the four-phase average and the single-pass q."""
    q_bar = checked_probability(q_bar, "q_bar", slack)
    q = checked_probability(q, "q", slack)
    root = clamped_sqrt(
        2.0 * q_bar - 3.0 * q * q + 2.0 * q - 1.0, slack, "symmetric-pair inversion"
    )
    return _pick_branch(0.5 * (1.0 - q - root), 0.5 * (1.0 - q + root), branch)


def general_average_return(p: float, q: float, r: float) -> float:
    """Four-phase average for an arbitrary lossless pass:
    Q_bar = p^2 + q r + (1 - p - q)(1 - p - r).

    Reduces to the symmetric-pair expression when r = q.  Only unitarity
    enters the derivation, so this holds for any coherent three-state
    process and any Hermitian coupling pattern.
    """
    return p * p + q * r + (1.0 - p - q) * (1.0 - p - r)


def invert_general(
    q_bar: float,
    q: float,
    r: float,
    *,
    slack: float = DEFAULT_SLACK,
    branch: str = "upper",
) -> float:
    """p from (Q_bar, q, r), all three measured on the initial state:

    p = (2 - q - r + sqrt(8 Q_bar - 4 + 4q + 4r + q^2 + r^2 - 14 q r)) / 4
    """
    q_bar = checked_probability(q_bar, "q_bar", slack)
    q = checked_probability(q, "q", slack)
    r = checked_probability(r, "r", slack)
    radicand = (
        8.0 * q_bar - 4.0 + 4.0 * q + 4.0 * r + q * q + r * r - 14.0 * q * r
    )
    root = clamped_sqrt(radicand, slack, "general three-state inversion")
    return _pick_branch(
        0.25 * (2.0 - q - r - root), 0.25 * (2.0 - q - r + root), branch
    )
