"""Channels, codes, measured information gain, and finite-block capacities.

A channel is a unital completely positive map with a code: a partition of
the channel into sub-channels (signal letters).  The information a
measurement eta on the output extracts about the code is

    I(code | eta)  = H(code) + H_after(eta) - H(code then eta),
    Ic(code | eta) = the same combination of the classical Shannon parts,

both nonnegative and bounded by H(code).  The finite-block capacities C_n
and D_n are suprema of I and Ic over measurements on the n-fold product
output; this module reports certified lower bounds from a multi-restart
simplex search over rotated projective measurements (optionally a fixed
measurement list), with deterministic seeding.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from . import defaults
from .dynamics import information
from .errors import (
    DimensionMismatch,
    PropertyViolation,
    ResourceCapExceeded,
    ValidationFailure,
)
from .linalg import dagger, frobenius, hermitian_basis
from .partitions import (
    KrausMap,
    Partition,
    compose,
    partition_power,
    vn_partition,
)
from .states import StateFunctional, product_state, von_neumann_entropy


@dataclass(frozen=True, eq=False)
class Channel:
    """Unital map together with a code decomposing it."""

    total: KrausMap
    code: Partition

    def __post_init__(self):
        eye = np.eye(self.total.dim_in)
        unital = frobenius(self.total.unit_image - eye)
        if unital > defaults.UNIT_SUM_TOL:
            raise ValidationFailure(f"channel is not unital (residual {unital:.3e})")
        if (self.code.dim_in, self.code.dim_out) != (self.total.dim_in, self.total.dim_out):
            raise DimensionMismatch("code and channel dimensions differ")
        rng = np.random.default_rng(7)
        d = self.total.dim_out
        for _ in range(4):
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            x = g + dagger(g)
            gap = frobenius(
                sum(m.apply(x) for m in self.code.maps) - self.total.apply(x)
            )
            if gap > 1e-9 * max(1.0, frobenius(x)):
                raise ValidationFailure(f"code does not sum to the channel (gap {gap:.3e})")

    @classmethod
    def from_code(cls, code: Partition) -> "Channel":
        total = KrausMap(tuple(k for m in code.maps for k in m.kraus), label="total")
        return cls(total, code)

    @property
    def input_dim(self) -> int:
        return self.total.dim_in

    @property
    def output_dim(self) -> int:
        return self.total.dim_out


def unit_input_state() -> StateFunctional:
    """The trivial state on the one-dimensional input algebra of a preparation."""
    return StateFunctional.from_density(np.eye(1, dtype=complex))


def ensemble_channel(densities, probs) -> Channel:
    """Preparation channel emitting density i with probability p_i.

    The input algebra is one-dimensional; letter i has Kraus columns
    sqrt(p_i * s_a) u_a over the spectral decomposition of its density.
    """
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-10:
        raise ValidationFailure("ensemble probabilities must be nonnegative and sum to 1")
    maps = []
    for i, (dens, p) in enumerate(zip(densities, probs)):
        rho = np.asarray(dens, dtype=complex)
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > 1e-10:
            raise ValidationFailure(f"ensemble member {i} has trace {tr:.12f}")
        w, v = np.linalg.eigh(rho)
        kraus = [
            np.sqrt(p * lam) * v[:, [j]]
            for j, lam in enumerate(w)
            if lam > 1e-14
        ]
        if not kraus:
            kraus = [np.zeros((rho.shape[0], 1), dtype=complex)]
        maps.append(KrausMap(tuple(kraus), label=i))
    return Channel.from_code(Partition(tuple(maps)))


_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def depolarizing_channel(p: float, dim: int = 2) -> Channel:
    """Depolarizing channel with its canonical code.

    For a qubit the code is the four weighted Pauli conjugations; in general
    it splits into the surviving identity part and the trace part.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationFailure("depolarizing strength must lie in [0, 1]")
    if dim == 2:
        weights = [1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0]
        maps = tuple(
            KrausMap((np.sqrt(w) * _PAULI[s],), label=s)
            for s, w in zip("ixyz", weights)
        )
        return Channel.from_code(Partition(maps))
    keep = KrausMap((np.sqrt(1.0 - p) * np.eye(dim, dtype=complex),), label="keep")
    units = []
    for j in range(dim):
        for k in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[j, k] = np.sqrt(p / dim)
            units.append(e)
    return Channel.from_code(Partition((keep, KrausMap(tuple(units), label="mix"))))


def dephasing_channel(p: float) -> Channel:
    """Qubit phase-flip channel with the two-letter flip/no-flip code."""
    if not 0.0 <= p <= 1.0:
        raise ValidationFailure("dephasing strength must lie in [0, 1]")
    maps = (
        KrausMap((np.sqrt(1.0 - p) * _PAULI["i"],), label="keep"),
        KrausMap((np.sqrt(p) * _PAULI["z"],), label="flip"),
    )
    return Channel.from_code(Partition(maps))


def proportional_code_channel(weights, dim: int) -> Channel:
    """Identity channel with the proportional code; carries zero information."""
    return Channel.from_code(Partition.proportional(weights, dim))


def channel_power(channel: Channel, n: int) -> Channel:
    if n == 1:
        return channel
    return Channel.from_code(partition_power(channel.code, n))


def state_power(phi: StateFunctional, n: int) -> StateFunctional:
    out = phi
    for _ in range(n - 1):
        out = product_state(out, phi)
    return out


def _gain_from_parts(base, after, phi, channel, eta):
    measured = information(after, eta)
    joint = information(phi, compose(channel.code, eta))
    if base.infinite_flag or measured.infinite_flag or joint.infinite_flag:
        raise ValidationFailure("information gain undefined: infinite divergence encountered")
    gain = base.total_H + measured.total_H - joint.total_H
    gain_classical = base.classical_Hc + measured.classical_Hc - joint.classical_Hc
    return gain, gain_classical


def information_gain(
    phi: StateFunctional, channel: Channel, eta: Partition
) -> tuple[float, float]:
    """(I, Ic): total and classical information the measurement gains about the code."""
    base = information(phi, channel.code)
    after = channel.code.total_predual(phi)
    return _gain_from_parts(base, after, phi, channel, eta)


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    """Searchable family of measurements on an output algebra.

    `projective-unitary-orbit` realizes the rotated standard basis through
    exp(i H(params)) with H running over the traceless hermitian basis;
    `fixed-list` indexes a user-supplied list of partitions.
    """

    kind: str
    dim: int
    partitions: tuple[Partition, ...] = ()

    def __post_init__(self):
        if self.kind not in ("projective-unitary-orbit", "fixed-list"):
            raise ValidationFailure(f"unknown measurement family kind {self.kind!r}")
        if self.kind == "fixed-list" and not self.partitions:
            raise ValidationFailure("fixed-list family needs at least one partition")

    @classmethod
    def projective_orbit(cls, dim: int) -> "MeasurementFamily":
        return cls("projective-unitary-orbit", dim)

    @classmethod
    def fixed_list(cls, partitions) -> "MeasurementFamily":
        partitions = tuple(partitions)
        return cls("fixed-list", partitions[0].dim_in, partitions)

    @property
    def parameter_count(self) -> int:
        if self.kind == "fixed-list":
            return 1
        return self.dim * self.dim - 1

    def realize(self, params: np.ndarray) -> Partition:
        if self.kind == "fixed-list":
            idx = int(round(float(np.atleast_1d(params)[0]))) % len(self.partitions)
            return self.partitions[idx]
        basis = hermitian_basis(self.dim)
        gen = sum(c * f for c, f in zip(np.asarray(params, dtype=float), basis))
        u = scipy.linalg.expm(1j * gen)
        projs = [np.outer(u[:, k], u[:, k].conj()) for k in range(self.dim)]
        return vn_partition(projs)


def product_parameters(params_a: np.ndarray, params_b: np.ndarray, dim: int) -> np.ndarray:
    """Orbit parameters whose unitary is the tensor product of two member unitaries."""
    basis_small = hermitian_basis(dim)
    gen_a = sum(c * f for c, f in zip(np.asarray(params_a, dtype=float), basis_small))
    gen_b = sum(c * f for c, f in zip(np.asarray(params_b, dtype=float), basis_small))
    eye = np.eye(dim)
    big = np.kron(gen_a, eye) + np.kron(eye, gen_b)
    coeffs = [float(np.real(np.trace(f @ big))) for f in hermitian_basis(dim * dim)]
    return np.asarray(coeffs)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iterations: int = 500
    seed: int = 0
    threads: int = 1
    allow_large_blocks: bool = False
    extra_initial_points: tuple = ()


@dataclass(frozen=True)
class CapacityReport:
    """Finite-block lower bounds with optimizer provenance.

    Bounds come from evaluated measurements only, so the chain
    0 <= D_n <= C_n <= H_upper holds by construction up to floating noise.
    """

    n: int
    C_n_lower: float
    D_n_lower: float
    best_measurement_parameters: dict
    H_upper: float
    searched: str
    trace: tuple


def _search(objective, family: MeasurementFamily, config: OptimizerConfig):
    """Deterministic multi-restart Nelder-Mead ascent; returns (value, params, trace)."""
    nparams = family.parameter_count
    rng = np.random.default_rng(config.seed)
    starts = [np.zeros(nparams)]
    starts += [np.asarray(p, dtype=float) for p in config.extra_initial_points]
    starts += [
        rng.uniform(-np.pi, np.pi, size=nparams) for _ in range(max(config.restarts - 1, 0))
    ]
    if family.kind == "fixed-list":
        starts = [np.array([float(i)]) for i in range(len(family.partitions))]

    def run(start):
        if family.kind == "fixed-list":
            return float(objective(start)), start, 1
        res = scipy.optimize.minimize(
            lambda x: -objective(x),
            start,
            method="Nelder-Mead",
            options={
                "maxiter": config.max_iterations,
                "xatol": 1e-7,
                "fatol": 1e-11,
            },
        )
        return float(-res.fun), np.asarray(res.x), int(res.nit)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    trace = tuple(
        {"restart": i, "value": v, "iterations": it} for i, (v, _, it) in enumerate(results)
    )
    best_idx = max(range(len(results)), key=lambda i: (results[i][0], -i))
    value, params, _ = results[best_idx]
    return value, params, trace


def _prepare_level(phi: StateFunctional, channel: Channel, n: int, config: OptimizerConfig):
    if n < 1:
        raise ValidationFailure("block length must be at least 1")
    if n > 2:
        if not config.allow_large_blocks:
            raise ResourceCapExceeded(
                f"block length {n} rejected by default (output dimension {channel.output_dim**n})"
            )
        warnings.warn(f"block length {n} enumerates dimension {channel.output_dim**n}", stacklevel=3)
    phi_n = state_power(phi, n)
    channel_n = channel_power(channel, n)
    h_upper = n * information(phi, channel.code).total_H
    return phi_n, channel_n, h_upper


def _optimize(
    phi: StateFunctional,
    channel: Channel,
    n: int,
    config: OptimizerConfig,
    which: str,
    family: MeasurementFamily | None,
) -> CapacityReport:
    phi_n, channel_n, h_upper = _prepare_level(phi, channel, n, config)
    if family is None:
        family = MeasurementFamily.projective_orbit(channel_n.output_dim)
    index = 0 if which == "information" else 1
    base = information(phi_n, channel_n.code)
    after = channel_n.code.total_predual(phi_n)

    def objective(params):
        return _gain_from_parts(base, after, phi_n, channel_n, family.realize(params))[index]

    value, params, trace = _search(objective, family, config)
    gains = _gain_from_parts(base, after, phi_n, channel_n, family.realize(params))
    if which == "information":
        c_low, d_low = value, gains[1]
    else:
        c_low, d_low = gains[0], value
    return CapacityReport(
        n=n,
        C_n_lower=c_low,
        D_n_lower=d_low,
        best_measurement_parameters={which: params.tolist()},
        H_upper=h_upper,
        searched=which,
        trace=trace,
    )


def optimize_Cn(
    phi: StateFunctional,
    channel: Channel,
    n: int = 1,
    config: OptimizerConfig = OptimizerConfig(),
    family: MeasurementFamily | None = None,
) -> CapacityReport:
    """Lower bound on C_n: best total gain found, classical gain cross-evaluated."""
    return _optimize(phi, channel, n, config, "information", family)


def optimize_Dn(
    phi: StateFunctional,
    channel: Channel,
    n: int = 1,
    config: OptimizerConfig = OptimizerConfig(),
    family: MeasurementFamily | None = None,
) -> CapacityReport:
    """Lower bound on D_n: best classical gain found, total gain cross-evaluated."""
    return _optimize(phi, channel, n, config, "classical", family)


def merged_capacity_report(
    phi: StateFunctional,
    channel: Channel,
    n: int = 1,
    config: OptimizerConfig = OptimizerConfig(),
    family: MeasurementFamily | None = None,
) -> CapacityReport:
    """Run both searches and merge so each bound is the tightest one evaluated."""
    rc = optimize_Cn(phi, channel, n, config, family)
    rd = optimize_Dn(phi, channel, n, config, family)
    return CapacityReport(
        n=n,
        C_n_lower=max(rc.C_n_lower, rd.C_n_lower),
        D_n_lower=max(rc.D_n_lower, rd.D_n_lower),
        best_measurement_parameters={
            **rc.best_measurement_parameters,
            **rd.best_measurement_parameters,
        },
        H_upper=rc.H_upper,
        searched="both",
        trace=rc.trace + rd.trace,
    )


@dataclass(frozen=True)
class CapacityRateReport:
    reports: dict
    rates_C: dict
    rates_D: dict
    superadditivity_residual: float


def capacity_rate(
    phi: StateFunctional,
    channel: Channel,
    n_max: int = 2,
    config: OptimizerConfig = OptimizerConfig(),
) -> CapacityRateReport:
    """Per-block rates C_n/n and D_n/n with the product-measurement consistency check.

    The n = 2 search is seeded with the product of the best n = 1
    measurements, so C_2 >= 2 C_1 - 2e-4 must hold; a violation is an
    optimizer failure and raises.
    """
    reports = {}
    prev_params = None
    for n in range(1, n_max + 1):
        cfg = config
        if n == 2 and prev_params is not None:
            seeds = []
            for key in ("information", "classical"):
                if key in prev_params:
                    p = np.asarray(prev_params[key])
                    seeds.append(product_parameters(p, p, channel.output_dim))
            cfg = OptimizerConfig(
                restarts=config.restarts,
                max_iterations=config.max_iterations,
                seed=config.seed,
                threads=config.threads,
                allow_large_blocks=config.allow_large_blocks,
                extra_initial_points=tuple(seeds),
            )
        report = merged_capacity_report(phi, channel, n, cfg)
        reports[n] = report
        prev_params = report.best_measurement_parameters
    residual = 0.0
    if n_max >= 2:
        residual = max(0.0, 2.0 * reports[1].C_n_lower - reports[2].C_n_lower)
        if residual > 2e-4:
            raise PropertyViolation(
                f"C_2 fell below twice C_1 by {residual:.3e}; product seeding failed"
            )
    return CapacityRateReport(
        reports=reports,
        rates_C={n: r.C_n_lower / n for n, r in reports.items()},
        rates_D={n: r.D_n_lower / n for n, r in reports.items()},
        superadditivity_residual=residual,
    )


@dataclass(frozen=True)
class SweepReport:
    """Per-entry capacity bounds over a user-supplied list of (state, channel)
    candidates.  The best values bound the suprema over states and codes from
    below; they are never the suprema themselves."""

    reports: tuple
    best_C_lower: float
    best_D_lower: float


def capacity_sweep(
    entries,
    n: int = 1,
    config: OptimizerConfig = OptimizerConfig(),
) -> SweepReport:
    """Evaluate merged capacity reports over explicit (state, channel) pairs."""
    reports = tuple(merged_capacity_report(phi, ch, n, config) for phi, ch in entries)
    if not reports:
        raise ValidationFailure("empty sweep")
    return SweepReport(
        reports=reports,
        best_C_lower=max(r.C_n_lower for r in reports),
        best_D_lower=max(r.D_n_lower for r in reports),
    )


def holevo_quantity(phi: StateFunctional, channel: Channel) -> float:
    """chi = S(mean output) - sum_i p_i S(output_i); equals the code information
    on a full matrix algebra, and that identity is verified to 1e-8."""
    branches = channel.code.branch_preduals(phi)
    total = branches[0]
    for b in branches[1:]:
        total = total + b
    chi = von_neumann_entropy(total)
    for b in branches:
        p = b.weight
        if p <= defaults.WEIGHT_FLOOR:
            continue
        chi -= p * von_neumann_entropy(b.scale(1.0 / p))
    direct = information(phi, channel.code).total_H
    if abs(chi - direct) > 1e-8:
        raise PropertyViolation(
            f"Holevo quantity {chi:.12f} disagrees with the code information {direct:.12f}"
        )
    return chi
