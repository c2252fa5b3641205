"""Information functionals of measurements and the dynamical-entropy sequence.

The information of a partition (zeta_i) in a normalized state phi is the
average divergence of the outcome functionals from the mean output,

    H_phi(zeta) = sum_i p_i S(phi.zeta_i / p_i, phi.zeta),   p_i = phi(zeta_i(I)),

which splits exactly into a classical Shannon part over the outcome weights
and a quantum part summing divergences of the unnormalized branch
functionals:

    H = H^c + H^q,   H^c = -sum_i p_i ln p_i,   H^q = sum_i S(phi.zeta_i, phi.zeta).

Under an automorphism theta the sequence a_n = H_phi(zeta | zeta composed
with its n past transports) is monotone nonincreasing and bounded by
H_phi(zeta); its tail estimates the dynamical entropy of (theta, phi, zeta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from . import defaults
from .errors import (
    DimensionMismatch,
    PropertyViolation,
    ResourceCapExceeded,
    ValidationFailure,
)
from .linalg import BlockAlgebra, direct_sum, frobenius
from .partitions import Automorphism, KrausMap, Partition, compose, compress_kraus, conjugate
from .states import DivergenceEngine, StateFunctional, relative_entropy


@dataclass(frozen=True)
class InformationReport:
    """Total information of a measurement with its classical/quantum split."""

    total_H: float
    classical_Hc: float
    quantum_Hq: float
    weights: dict
    per_outcome_divergence: dict
    infinite_flag: bool

    @property
    def split_residual(self) -> float:
        """|H - (H^c + H^q)|; an exact identity up to floating error."""
        if self.infinite_flag:
            return 0.0
        return abs(self.total_H - (self.classical_Hc + self.quantum_Hq))


def information(
    phi: StateFunctional,
    zeta: Partition,
    cutoff: float = defaults.SUPPORT_CUTOFF,
) -> InformationReport:
    """Information gained by the partition zeta in the state phi, in nats."""
    phi.require_normalized()
    if phi.dim != zeta.dim_in:
        raise DimensionMismatch(f"state dimension {phi.dim} vs partition input {zeta.dim_in}")
    branches = zeta.branch_preduals(phi)
    total = branches[0]
    for b in branches[1:]:
        total = total + b
    engine = DivergenceEngine(total, cutoff)

    weights = {}
    divergences = {}
    h_total = 0.0
    h_classical = 0.0
    h_quantum = 0.0
    infinite = False
    for m, branch in zip(zeta.maps, branches):
        p = branch.weight
        weights[m.label] = p
        if p <= defaults.WEIGHT_FLOOR:
            divergences[m.label] = 0.0
            continue
        div = engine.value(branch.scale(1.0 / p))
        divergences[m.label] = div
        if math.isinf(div):
            infinite = True
            continue
        h_total += p * div
        h_classical += -p * math.log(p)
        h_quantum += engine.value(branch)
    if infinite:
        h_total = math.inf
        h_quantum = math.inf
    return InformationReport(
        total_H=h_total,
        classical_Hc=h_classical,
        quantum_Hq=h_quantum,
        weights=weights,
        per_outcome_divergence=divergences,
        infinite_flag=infinite,
    )


def information_via_direct_sum(
    phi: StateFunctional,
    zeta: Partition,
    cutoff: float = defaults.SUPPORT_CUTOFF,
) -> float:
    """Same quantity as a single relative entropy on the outcome-indexed direct sum.

    The branch functionals fill the blocks of one density, the reference
    stacks weight-scaled copies of the mean output; their divergence equals
    the information.  Used as a cross-check oracle for `information`.
    """
    phi.require_normalized()
    if phi.dim != zeta.dim_in:
        raise DimensionMismatch(f"state dimension {phi.dim} vs partition input {zeta.dim_in}")
    branches = zeta.branch_preduals(phi)
    total = branches[0].density.copy()
    for b in branches[1:]:
        total = total + b.density
    algebra = BlockAlgebra(tuple(zeta.dim_out for _ in branches))
    first = direct_sum([b.density for b in branches])
    second = direct_sum([b.weight * total for b in branches])
    return relative_entropy(
        StateFunctional._trusted(first, algebra),
        StateFunctional._trusted(second, algebra),
        cutoff,
    )


def conditional_information(
    phi: StateFunctional,
    zeta: Partition,
    eta: Partition,
    cutoff: float = defaults.SUPPORT_CUTOFF,
) -> float:
    """H_phi(zeta composed with eta) - H_{phi after zeta}(eta).

    Nonnegative for completely positive sub-unital partitions: the extra
    information carried by the first measurement given the second.
    """
    joint = information(phi, compose(zeta, eta), cutoff).total_H
    after = zeta.total_predual(phi)
    second = information(after, eta, cutoff).total_H
    return joint - second


def refinement(
    theta: Automorphism,
    zeta: Partition,
    n: int,
    branch_cap: int = defaults.BRANCH_CAP,
) -> Partition:
    """Joint partition of the n past transports theta^{-1}(zeta) ... theta^{-n}(zeta).

    Outcomes are labeled by words (i_1, ..., i_n), earliest factor first.
    """
    if n < 1:
        raise ValidationFailure("refinement depth must be at least 1")
    count = zeta.size**n
    if count > branch_cap:
        raise ResourceCapExceeded(
            f"refinement would enumerate {count} branches, cap is {branch_cap}"
        )
    factors = [conjugate(theta.power(-k), zeta) for k in range(1, n + 1)]
    words = [(m, (m.label,)) for m in factors[0].maps]
    for factor in factors[1:]:
        extended = []
        for acc, word in words:
            for m in factor.maps:
                kraus = tuple(l @ k for k in acc.kraus for l in m.kraus)
                extended.append(
                    (compress_kraus(KrausMap(kraus, label=None)), word + (m.label,))
                )
        words = extended
    return Partition(tuple(m.relabel(word) for m, word in words))


@dataclass(frozen=True)
class EntropySequence:
    """Conditional informations a_1..a_N with the monotone certificate."""

    values: tuple[float, ...]
    h_estimate: float
    converged: bool
    monotonicity_residual: float
    information_bound: float

    @property
    def depth(self) -> int:
        return len(self.values)


def _sequence_from(values, information_bound) -> EntropySequence:
    diffs = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    resid = max([0.0] + diffs)
    converged = (
        len(values) >= 2 and abs(values[-1] - values[-2]) <= defaults.CONVERGENCE_TOL
    )
    return EntropySequence(
        values=tuple(values),
        h_estimate=values[-1],
        converged=converged,
        monotonicity_residual=resid,
        information_bound=information_bound,
    )


def an_sequence(
    phi: StateFunctional,
    theta: Automorphism,
    zeta: Partition,
    depth: int = defaults.DEFAULT_DEPTH,
    *,
    branch_cap: int = defaults.BRANCH_CAP,
    cutoff: float = defaults.SUPPORT_CUTOFF,
    check_equivalence: bool = True,
) -> EntropySequence:
    """a_n = H_phi(zeta | past refinement of depth n) for n = 1..depth.

    When phi is theta-invariant the transported form
    H_phi(theta^n(zeta) | theta^{n-1}(zeta) ... zeta) is computed as well and
    must agree within 1e-8.  Requires finite information; a non-invariant phi
    only triggers a warning since the definition still evaluates.
    """
    if zeta.dim_in != zeta.dim_out:
        raise DimensionMismatch("dynamics needs measurements on a single algebra")
    if depth < 1:
        raise ValidationFailure("depth must be at least 1")
    count = zeta.size ** (depth + 1)
    if count > branch_cap:
        raise ResourceCapExceeded(
            f"depth {depth} would enumerate {count} branches, cap is {branch_cap}"
        )
    base = information(phi, zeta, cutoff)
    if base.infinite_flag:
        raise ValidationFailure("the base information is infinite; the sequence is undefined")
    invariance_gap = frobenius(theta.predual(phi.density) - phi.density)
    invariant = invariance_gap <= defaults.INVARIANCE_TOL
    if not invariant:
        warnings.warn(
            f"state is not invariant under the automorphism (residual {invariance_gap:.3e})",
            stacklevel=2,
        )

    values = []
    past = None
    transported = zeta  # theta^{n-1}(zeta) composed ... composed zeta
    for n in range(1, depth + 1):
        step = conjugate(theta.power(-n), zeta)
        past = step if past is None else compose(past, step)
        a_n = conditional_information(phi, zeta, past, cutoff)
        if check_equivalence and invariant:
            if n > 1:
                transported = compose(conjugate(theta.power(n - 1), zeta), transported)
            b_n = conditional_information(phi, conjugate(theta.power(n), zeta), transported, cutoff)
            if abs(a_n - b_n) > 1e-8:
                raise PropertyViolation(
                    f"transported conditional information disagrees at n={n}: "
                    f"{a_n:.12f} vs {b_n:.12f}"
                )
        values.append(a_n)
    return _sequence_from(values, base.total_H)


def admissibility_check(
    phi: StateFunctional,
    zeta: Partition,
    depth: int = 3,
    tol: float = defaults.ADMISSIBILITY_TOL,
    **kwargs,
) -> tuple[bool, EntropySequence]:
    """True when the partition generates no information under trivial dynamics."""
    seq = an_sequence(phi, Automorphism.identity(zeta.dim_in), zeta, depth, **kwargs)
    return seq.h_estimate <= tol, seq


def invariance_check(phi: StateFunctional, zeta: Partition) -> float:
    """Frobenius distance between phi and phi after the total map."""
    return frobenius(zeta.total_predual(phi).density - phi.density)


@dataclass(frozen=True)
class ConvexityReport:
    lambdas: tuple[float, ...]
    values: tuple[float, ...]
    max_above_chord: float


def convexity_probe(
    phi0: StateFunctional,
    phi1: StateFunctional,
    zeta: Partition,
    theta: Automorphism,
    depth: int = defaults.DEFAULT_DEPTH,
    grid=(0.0, 0.25, 0.5, 0.75, 1.0),
    **kwargs,
) -> ConvexityReport:
    """Entropy estimates along the segment between two invariant states.

    Reports the largest positive deviation of the estimate above the chord;
    convexity predicts none beyond numerical noise.
    """
    from .states import mix

    for which, phi in (("first", phi0), ("second", phi1)):
        gap = frobenius(theta.predual(phi.density) - phi.density)
        if gap > defaults.INVARIANCE_TOL:
            raise ValidationFailure(f"{which} endpoint is not invariant (residual {gap:.3e})")
    lambdas = tuple(float(l) for l in grid)
    values = []
    for lam in lambdas:
        seq = an_sequence(mix(phi0, phi1, lam), theta, zeta, depth, **kwargs)
        values.append(seq.h_estimate)
    endpoints = dict(zip(lambdas, values))
    h0 = endpoints.get(0.0)
    if h0 is None:
        h0 = an_sequence(phi0, theta, zeta, depth, **kwargs).h_estimate
    h1 = endpoints.get(1.0)
    if h1 is None:
        h1 = an_sequence(phi1, theta, zeta, depth, **kwargs).h_estimate
    above = max(v - ((1.0 - lam) * h0 + lam * h1) for lam, v in zip(lambdas, values))
    return ConvexityReport(lambdas, tuple(values), max(0.0, above))
