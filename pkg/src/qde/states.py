"""Positive functionals and relative entropy.

A functional on a block algebra is carried by a positive semidefinite density
matrix; sub-normalized functionals (weight below 1) are first class.  The
relative entropy of densities rho and sigma is the trace formula

    S(omega, phi) = tr(rho (ln rho - ln sigma)),

evaluated on the support of sigma and equal to +inf when the support of rho
is not contained in it.  For sub-normalized omega the value may be negative;
the scaling identity S(c*omega, phi) = c ln c + c S(omega, phi) holds with no
normalization correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import defaults
from .errors import DimensionMismatch, ValidationFailure
from .linalg import (
    BlockAlgebra,
    as_hermitian,
    clamp_psd_spectrum,
    dagger,
    frobenius,
    spectral_decompose,
    tensor,
    trace_norm,
)


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Positive functional held as a (possibly sub-normalized) density matrix."""

    algebra: BlockAlgebra
    density: np.ndarray

    @classmethod
    def from_density(
        cls,
        density: np.ndarray,
        algebra: BlockAlgebra | None = None,
        *,
        check_positive: bool = True,
    ) -> "StateFunctional":
        density = as_hermitian(density)
        if algebra is None:
            algebra = BlockAlgebra.full(density.shape[0])
        if algebra.dim != density.shape[0]:
            raise DimensionMismatch(
                f"density of dimension {density.shape[0]} on algebra of dimension {algebra.dim}"
            )
        off = algebra.off_block_norm(density)
        if off > defaults.HERMITICITY_TOL:
            raise ValidationFailure(f"density has off-block mass {off:.3e}")
        density = algebra.project(density)
        if check_positive:
            clamp_psd_spectrum(np.linalg.eigvalsh(density))
        density = density.copy()
        density.setflags(write=False)
        return cls(algebra, density)

    @classmethod
    def _trusted(cls, density: np.ndarray, algebra: BlockAlgebra) -> "StateFunctional":
        # Fast path for densities that are PSD by construction (predual images).
        density = 0.5 * (density + dagger(density))
        density.setflags(write=False)
        return cls(algebra, density)

    @classmethod
    def diagonal(cls, probs, algebra: BlockAlgebra | None = None) -> "StateFunctional":
        return cls.from_density(np.diag(np.asarray(probs, dtype=complex)), algebra)

    @classmethod
    def pure(cls, vector) -> "StateFunctional":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls.from_density(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "StateFunctional":
        return cls.from_density(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    @cached_property
    def weight(self) -> float:
        return float(np.real(np.trace(self.density)))

    def is_normalized(self, tol: float = 1e-8) -> bool:
        return abs(self.weight - 1.0) <= tol

    def require_normalized(self, what: str = "state") -> None:
        if not self.is_normalized():
            raise ValidationFailure(f"{what} has weight {self.weight:.12f}, expected 1")

    def scale(self, factor: float) -> "StateFunctional":
        if factor < 0:
            raise ValidationFailure("negative scaling of a positive functional")
        return StateFunctional._trusted(factor * self.density, self.algebra)

    def __add__(self, other: "StateFunctional") -> "StateFunctional":
        if self.dim != other.dim:
            raise DimensionMismatch("adding functionals of different dimension")
        return StateFunctional._trusted(self.density + other.density, self.algebra)

    def evaluate(self, observable: np.ndarray) -> float:
        """phi(x) = tr(rho x) for hermitian x."""
        x = np.asarray(observable, dtype=complex)
        if x.shape != self.density.shape:
            raise DimensionMismatch(
                f"observable shape {x.shape} vs density shape {self.density.shape}"
            )
        return float(np.real(np.trace(self.density @ x)))


def evaluate(phi: StateFunctional, observable: np.ndarray) -> float:
    return phi.evaluate(observable)


def mix(a: StateFunctional, b: StateFunctional, lam: float) -> StateFunctional:
    """Convex combination (1-lam)*a + lam*b."""
    if a.dim != b.dim:
        raise DimensionMismatch("mixing functionals of different dimension")
    return StateFunctional._trusted((1.0 - lam) * a.density + lam * b.density, a.algebra)


def product_state(a: StateFunctional, b: StateFunctional) -> StateFunctional:
    """Tensor product of functionals on full matrix algebras."""
    if len(a.algebra.blocks) != 1 or len(b.algebra.blocks) != 1:
        raise ValidationFailure("product states are supported on full matrix algebras only")
    return StateFunctional._trusted(tensor(a.density, b.density), BlockAlgebra.full(a.dim * b.dim))


def von_neumann_entropy(phi: StateFunctional) -> float:
    """S(phi) = -tr(rho ln rho) for a normalized state, in nats."""
    phi.require_normalized()
    w = clamp_psd_spectrum(np.linalg.eigvalsh(phi.density))
    w = w[w > 0.0]
    return float(-np.sum(w * np.log(w)))


@dataclass(frozen=True)
class DivergenceReport:
    """Relative entropy value plus the support-decision margins."""

    value: float
    off_support_mass: float
    smallest_retained_reference: float
    smallest_retained_argument: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


class DivergenceEngine:
    """Relative entropies against a fixed reference, eigendecomposed once.

    The support of the reference keeps eigenvalues above cutoff * max;
    argument mass outside it beyond the leak tolerance makes the value +inf.
    """

    def __init__(self, phi: StateFunctional, cutoff: float = defaults.SUPPORT_CUTOFF):
        self.phi = phi
        self.cutoff = cutoff
        self.degenerate = phi.weight <= defaults.WEIGHT_FLOOR
        if self.degenerate:
            return
        q, v = spectral_decompose(phi.density)
        q = clamp_psd_spectrum(q)
        self._keep = q > cutoff * q[0]
        self._basis = v
        self._log_q = np.log(q[self._keep])
        self.smallest_retained = float(q[self._keep].min())

    def report(self, omega: StateFunctional) -> DivergenceReport:
        if omega.dim != self.phi.dim:
            raise DimensionMismatch(f"dimensions {omega.dim} vs {self.phi.dim}")
        if omega.weight <= defaults.WEIGHT_FLOOR:
            return DivergenceReport(0.0, 0.0, 0.0, 0.0)
        if self.degenerate:
            return DivergenceReport(math.inf, omega.weight, 0.0, 0.0)
        rho = omega.density
        p = clamp_psd_spectrum(np.linalg.eigvalsh(rho)[::-1])
        keep_p = p > self.cutoff * p[0]
        smallest_p = float(p[keep_p].min()) if keep_p.any() else 0.0

        # the argument in the eigenbasis of the reference
        v = self._basis
        m = np.clip(np.real(np.einsum("ji,jk,ki->i", v.conj(), rho, v)), 0.0, None)
        off_mass = float(np.sum(m[~self._keep]))
        leak_tol = 16.0 * omega.dim * self.cutoff * max(1.0, float(p[0]))
        if off_mass > leak_tol:
            return DivergenceReport(math.inf, off_mass, self.smallest_retained, smallest_p)

        term_self = float(np.sum(p[keep_p] * np.log(p[keep_p])))
        term_cross = float(np.dot(m[self._keep], self._log_q))
        return DivergenceReport(
            term_self - term_cross, off_mass, self.smallest_retained, smallest_p
        )

    def value(self, omega: StateFunctional) -> float:
        return self.report(omega).value


def relative_entropy_report(
    omega: StateFunctional,
    phi: StateFunctional,
    cutoff: float = defaults.SUPPORT_CUTOFF,
) -> DivergenceReport:
    """Trace-formula relative entropy of possibly sub-normalized functionals."""
    return DivergenceEngine(phi, cutoff).report(omega)


def relative_entropy(
    omega: StateFunctional,
    phi: StateFunctional,
    cutoff: float = defaults.SUPPORT_CUTOFF,
) -> float:
    return relative_entropy_report(omega, phi, cutoff).value


def trace_distance(a: StateFunctional, b: StateFunctional) -> float:
    """Trace norm of the density difference."""
    return trace_norm(a.density - b.density)


def donald_residual(parts, phi: StateFunctional) -> float:
    """Deviation from the split identity S(w,phi) + sum S(w_i,w) = sum S(w_i,phi).

    `parts` is a family of positive functionals, w their sum.  Returns +inf
    when any of the three quantities is infinite.
    """
    parts = list(parts)
    if not parts:
        raise ValidationFailure("empty decomposition")
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    s_total = relative_entropy(total, phi)
    s_inner = sum(relative_entropy(part, total) for part in parts)
    s_outer = sum(relative_entropy(part, phi) for part in parts)
    if not all(map(math.isfinite, (s_total, s_inner, s_outer))):
        return math.inf
    return abs(s_total + s_inner - s_outer)


def decomposition_entropy_gap(parts, phi: StateFunctional) -> float:
    """S(phi) minus the average divergence of the normalized parts from phi.

    Requires the parts to sum to phi; the gap equals the entropy balance
    sum_i p_i S(part_i / p_i) and is nonnegative, zero exactly when every
    normalized part is pure.
    """
    parts = list(parts)
    if not parts:
        raise ValidationFailure("empty decomposition")
    phi.require_normalized()
    total = sum(part.density for part in parts)
    mismatch = frobenius(total - phi.density)
    if mismatch > 1e-9:
        raise ValidationFailure(f"parts do not sum to the state: residual {mismatch:.3e}")
    avg = 0.0
    for part in parts:
        p = part.weight
        if p <= defaults.WEIGHT_FLOOR:
            continue
        avg += p * relative_entropy(part.scale(1.0 / p), phi)
    return von_neumann_entropy(phi) - avg
