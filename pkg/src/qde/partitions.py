"""Kraus-form positive maps, partitions of unity, and automorphisms.

Conventions.  A map carries a Kraus family of (dim_out x dim_in) matrices;
states flow dim_in -> dim_out through the predual

    rho  |->  sum_k K_k rho K_k^dag,

while observables travel the opposite way in the Heisenberg picture,

    x  |->  sum_k K_k^dag x K_k        (x is dim_out x dim_out).

A partition is a family of such maps whose unit images sum to the identity
on the dim_in side.  All maps here are completely positive and sub-unital,
which guarantees the Schwarz inequality zeta(x)^dag zeta(x) <= zeta(x^dag x).

Composition respects time order: in compose(zeta, eta) the partition zeta
acts first on states, so the composite Kraus elements are L @ K with K from
zeta and L from eta.
"""

from __future__ import annotations

import itertools
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
)
from .states import StateFunctional


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Completely positive sub-unital map given by a finite Kraus family."""

    kraus: tuple[np.ndarray, ...]
    label: object = None

    def __post_init__(self):
        if not self.kraus:
            raise ValidationFailure("empty Kraus family")
        mats = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        shape = mats[0].shape
        if any(m.shape != shape for m in mats):
            raise DimensionMismatch("Kraus elements of mixed shapes")
        for m in mats:
            if not np.isfinite(m).all():
                raise ValidationFailure("Kraus element with non-finite entries")
            m.setflags(write=False)
        object.__setattr__(self, "kraus", mats)
        top = float(np.max(np.linalg.eigvalsh(self.unit_image)))
        if top > 1.0 + defaults.SUB_UNITALITY_TOL:
            raise ValidationFailure(f"map is not sub-unital: max eigenvalue {top:.12f}")

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @cached_property
    def unit_image(self) -> np.ndarray:
        """zeta(I) = sum K^dag K, a dim_in x dim_in positive contraction."""
        s = sum(dagger(k) @ k for k in self.kraus)
        return 0.5 * (s + dagger(s))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg action on an observable of the output algebra."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_out, self.dim_out):
            raise DimensionMismatch(
                f"observable shape {x.shape}, expected ({self.dim_out}, {self.dim_out})"
            )
        return sum(dagger(k) @ x @ k for k in self.kraus)

    def predual(self, rho: np.ndarray) -> np.ndarray:
        """Schroedinger action on a density of the input algebra."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatch(
                f"density shape {rho.shape}, expected ({self.dim_in}, {self.dim_in})"
            )
        return sum(k @ rho @ dagger(k) for k in self.kraus)

    def relabel(self, label) -> "KrausMap":
        return KrausMap(self.kraus, label)


def predual_apply(zeta_i: KrausMap, omega: StateFunctional) -> StateFunctional:
    """The functional omega composed with the map, as an unnormalized density."""
    if omega.dim != zeta_i.dim_in:
        raise DimensionMismatch(f"state dimension {omega.dim} vs map input {zeta_i.dim_in}")
    return StateFunctional._trusted(
        zeta_i.predual(omega.density), BlockAlgebra.full(zeta_i.dim_out)
    )


def choi_matrix(zeta_i: KrausMap) -> np.ndarray:
    """Choi matrix of the predual action; PSD exactly when the map is CP."""
    d_in, d_out = zeta_i.dim_in, zeta_i.dim_out
    j = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for k in zeta_i.kraus:
        v = k.T.reshape(-1)
        j += np.outer(v, v.conj())
    return 0.5 * (j + dagger(j))


def kraus_from_choi(choi: np.ndarray, dim_in: int, dim_out: int, label=None) -> KrausMap:
    """Minimal Kraus family (at most dim_in * dim_out elements) from a Choi matrix."""
    w, v = spectral_decompose(as_hermitian(choi))
    w = clamp_psd_spectrum(w, tol=1e-8)
    mats = []
    top = w[0] if w.size else 0.0
    for lam, col in zip(w, v.T):
        if lam <= 1e-14 * max(top, 1.0):
            continue
        mats.append(np.sqrt(lam) * col.reshape(dim_in, dim_out).T)
    if not mats:
        mats = [np.zeros((dim_out, dim_in), dtype=complex)]
    return KrausMap(tuple(mats), label)


def compress_kraus(zeta_i: KrausMap) -> KrausMap:
    """Replace the Kraus family by a minimal one with the same action."""
    if len(zeta_i.kraus) <= zeta_i.dim_in * zeta_i.dim_out:
        return zeta_i
    return kraus_from_choi(choi_matrix(zeta_i), zeta_i.dim_in, zeta_i.dim_out, zeta_i.label)


@dataclass(frozen=True, eq=False)
class Partition:
    """Ordered family of maps whose unit images sum to the identity."""

    maps: tuple[KrausMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise ValidationFailure("partition with no outcomes")
        d_in, d_out = self.maps[0].dim_in, self.maps[0].dim_out
        if any(m.dim_in != d_in or m.dim_out != d_out for m in self.maps):
            raise DimensionMismatch("partition maps with mixed dimensions")
        maps = self.maps
        if any(m.label is None for m in maps):
            maps = tuple(
                m if m.label is not None else m.relabel(i) for i, m in enumerate(maps)
            )
            object.__setattr__(self, "maps", maps)
        labels = [m.label for m in maps]
        if len(set(labels)) != len(labels):
            raise ValidationFailure("duplicate outcome labels")
        resid = self.unit_sum_residual
        if resid > defaults.UNIT_SUM_TOL:
            raise ValidationFailure(f"unit images sum off identity by {resid:.3e}")

    @classmethod
    def trivial(cls, dim: int) -> "Partition":
        return cls((KrausMap((np.eye(dim, dtype=complex),), label=0),))

    @classmethod
    def proportional(cls, weights, dim: int) -> "Partition":
        """Code of scaled identity maps with the given positive weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > defaults.UNIT_SUM_TOL:
            raise ValidationFailure("proportional weights must be nonnegative and sum to 1")
        eye = np.eye(dim, dtype=complex)
        return cls(tuple(KrausMap((np.sqrt(x) * eye,), label=i) for i, x in enumerate(w)))

    @property
    def dim_in(self) -> int:
        return self.maps[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.maps[0].dim_out

    @property
    def size(self) -> int:
        return len(self.maps)

    @property
    def labels(self) -> tuple:
        return tuple(m.label for m in self.maps)

    def __iter__(self):
        return iter(self.maps)

    @cached_property
    def unit_sum_residual(self) -> float:
        total = sum(m.unit_image for m in self.maps)
        return frobenius(total - np.eye(self.dim_in))

    def total_predual(self, omega: StateFunctional) -> StateFunctional:
        """State after the total (unital) map; preserves the weight."""
        if omega.dim != self.dim_in:
            raise DimensionMismatch(f"state dimension {omega.dim} vs partition input {self.dim_in}")
        out = sum(m.predual(omega.density) for m in self.maps)
        return StateFunctional._trusted(out, BlockAlgebra.full(self.dim_out))

    def branch_preduals(self, omega: StateFunctional) -> list[StateFunctional]:
        return [predual_apply(m, omega) for m in self.maps]


def compose(zeta: Partition, eta: Partition, compress: bool = True) -> Partition:
    """Joint partition with zeta acting first in time.

    Outcome (i, j) has Kraus family {L @ K}; its predual applies zeta_i then
    eta_j to states.
    """
    if eta.dim_in != zeta.dim_out:
        raise DimensionMismatch(
            f"cannot compose: second partition input {eta.dim_in} vs first output {zeta.dim_out}"
        )
    maps = []
    for mi in zeta.maps:
        for mj in eta.maps:
            kraus = tuple(l @ k for k in mi.kraus for l in mj.kraus)
            composite = KrausMap(kraus, label=(mi.label, mj.label))
            if compress:
                composite = compress_kraus(composite)
            maps.append(composite)
    return Partition(tuple(maps))


def tensor_partition(
    zeta1: Partition, zeta2: Partition, dim_cap: int = defaults.TENSOR_DIM_CAP
) -> Partition:
    """Product measurement; outcome labels are pairs, Kraus factors Kronecker-multiplied."""
    maps = []
    for m1 in zeta1.maps:
        for m2 in zeta2.maps:
            kraus = tuple(tensor(k1, k2, dim_cap) for k1 in m1.kraus for k2 in m2.kraus)
            maps.append(KrausMap(kraus, label=(m1.label, m2.label)))
    return Partition(tuple(maps))


def partition_power(zeta: Partition, n: int, dim_cap: int = defaults.TENSOR_DIM_CAP) -> Partition:
    """n-fold tensor power with word labels."""
    out = zeta
    for _ in range(n - 1):
        out = tensor_partition(out, zeta, dim_cap)
    return out


@dataclass(frozen=True, eq=False)
class Automorphism:
    """Unitary conjugation x -> u x u^dag on a full matrix algebra."""

    unitary: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        dev = frobenius(dagger(u) @ u - np.eye(u.shape[0]))
        if dev > defaults.UNITARITY_TOL * u.shape[0]:
            raise ValidationFailure(f"matrix is not unitary: residual {dev:.3e}")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @classmethod
    def identity(cls, dim: int) -> "Automorphism":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.unitary @ x @ dagger(self.unitary)

    def predual(self, rho: np.ndarray) -> np.ndarray:
        # state transform of x -> u x u^dag is rho -> u^dag rho u
        return dagger(self.unitary) @ rho @ self.unitary

    def transform_state(self, phi: StateFunctional) -> StateFunctional:
        return StateFunctional._trusted(self.predual(phi.density), phi.algebra)

    def inverse(self) -> "Automorphism":
        return Automorphism(dagger(self.unitary))

    def power(self, n: int) -> "Automorphism":
        if n == 0:
            return Automorphism.identity(self.dim)
        u = self.unitary if n > 0 else dagger(self.unitary)
        return Automorphism(np.linalg.matrix_power(u, abs(n)))


def conjugate(theta: Automorphism, zeta: Partition) -> Partition:
    """The transported partition theta . zeta_i . theta^{-1}; Kraus K -> u K u^dag."""
    if theta.dim != zeta.dim_in or theta.dim != zeta.dim_out:
        raise DimensionMismatch("automorphism dimension does not match the partition")
    u = theta.unitary
    maps = tuple(
        KrausMap(tuple(u @ k @ dagger(u) for k in m.kraus), label=m.label) for m in zeta.maps
    )
    return Partition(maps)


def vn_partition(projectors, labels=None) -> Partition:
    """Projective partition: each outcome acts as x -> P x P."""
    projs = [as_hermitian(p, tol=defaults.PROJECTOR_TOL) for p in projectors]
    if not projs:
        raise ValidationFailure("empty projector family")
    dim = projs[0].shape[0]
    for p in projs:
        if frobenius(p @ p - p) > defaults.PROJECTOR_TOL:
            raise ValidationFailure("input is not an orthogonal projector")
    for a, b in itertools.combinations(projs, 2):
        if frobenius(a @ b) > defaults.PROJECTOR_TOL:
            raise ValidationFailure("projectors are not mutually orthogonal")
    if frobenius(sum(projs) - np.eye(dim)) > defaults.PROJECTOR_TOL:
        raise ValidationFailure("projectors do not sum to the identity")
    if labels is None:
        labels = range(len(projs))
    return Partition(tuple(KrausMap((p,), label=l) for p, l in zip(projs, labels)))


def basis_projectors(vectors) -> list[np.ndarray]:
    """Rank-1 projectors onto the given (orthonormal) vectors."""
    return [np.outer(v, np.asarray(v).conj()) for v in vectors]


def pinching_invariant_partition(
    projectors, phi: StateFunctional, labels=None
) -> Partition:
    """Measure-and-reprepare partition that leaves phi invariant.

    For projectors commuting with the density of phi, outcome i acts on
    observables as x -> phi(P_i)^{-1} phi(P_i x P_i) P_i.  The predual sends
    rho' to tr(P_i rho') sigma_i with sigma_i the normalized restriction of
    phi to the block, so phi itself is reproduced exactly.  Blocks where phi
    vanishes are completed with the maximally mixed block state to keep the
    unit sum.
    """
    rho = phi.density
    projs = [as_hermitian(p, tol=defaults.PROJECTOR_TOL) for p in projectors]
    dim = projs[0].shape[0]
    for p in projs:
        if frobenius(p @ p - p) > defaults.PROJECTOR_TOL:
            raise ValidationFailure("input is not an orthogonal projector")
        if frobenius(rho @ p - p @ rho) > defaults.INVARIANCE_TOL:
            raise ValidationFailure(
                "projector does not commute with the state; "
                "only the pinching conditional expectation is supported"
            )
    if frobenius(sum(projs) - np.eye(dim)) > defaults.PROJECTOR_TOL:
        raise ValidationFailure("projectors do not sum to the identity")
    if labels is None:
        labels = range(len(projs))

    maps = []
    for p, label in zip(projs, labels):
        weight = float(np.real(np.trace(rho @ p)))
        if weight > defaults.WEIGHT_FLOOR:
            sigma = (p @ rho @ p) / weight
        else:
            sigma = p / np.real(np.trace(p))
        s_vals, s_vecs = spectral_decompose(sigma)
        s_vals = clamp_psd_spectrum(s_vals)
        p_vals, p_vecs = spectral_decompose(p)
        block = [p_vecs[:, j] for j in range(dim) if p_vals[j] > 0.5]
        kraus = []
        for val, vec in zip(s_vals, s_vecs.T):
            if val <= 1e-14:
                continue
            for w in block:
                kraus.append(np.sqrt(val) * np.outer(vec, w.conj()))
        maps.append(KrausMap(tuple(kraus), label=label))
    return Partition(tuple(maps))


@dataclass(frozen=True)
class PartitionReport:
    """Validation summary for a partition of unity."""

    unit_sum_residual: float
    choi_min_eigenvalues: tuple[float, ...]
    sub_unitality_margins: tuple[float, ...]
    schwartz_min: float
    samples: int

    @property
    def passed(self) -> bool:
        return (
            self.unit_sum_residual <= defaults.UNIT_SUM_TOL
            and min(self.choi_min_eigenvalues) >= -defaults.CHOI_POSITIVITY_TOL
            and min(self.sub_unitality_margins) >= -defaults.SUB_UNITALITY_TOL
            and self.schwartz_min >= -1e-8
        )


def validate_partition(zeta: Partition, samples: int = 50, seed: int = 0) -> PartitionReport:
    """Full validation report: unit sum, Choi positivity, sub-unitality, Schwarz check.

    The Schwarz check samples random complex x and records the minimum
    eigenvalue of zeta_i(x^dag x) - zeta_i(x)^dag zeta_i(x); complete
    positivity makes this a redundant guard, not the primary validator.
    """
    choi_mins = []
    margins = []
    for m in zeta.maps:
        choi_mins.append(float(np.min(np.linalg.eigvalsh(choi_matrix(m)))))
        margins.append(1.0 - float(np.max(np.linalg.eigvalsh(m.unit_image))))
    rng = np.random.default_rng(seed)
    d = zeta.dim_out
    schwartz = np.inf
    for _ in range(samples):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        for m in zeta.maps:
            gap = m.apply(dagger(x) @ x) - dagger(m.apply(x)) @ m.apply(x)
            schwartz = min(schwartz, float(np.min(np.linalg.eigvalsh(as_hermitian(gap, tol=1e-8)))))
    return PartitionReport(
        unit_sum_residual=zeta.unit_sum_residual,
        choi_min_eigenvalues=tuple(choi_mins),
        sub_unitality_margins=tuple(margins),
        schwartz_min=schwartz,
        samples=samples,
    )
