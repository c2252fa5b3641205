import math

import numpy as np
import pytest

from qde.dynamics import (
    admissibility_check,
    an_sequence,
    conditional_information,
    convexity_probe,
    information,
    information_via_direct_sum,
    invariance_check,
    refinement,
)
from qde.errors import ResourceCapExceeded, ValidationFailure
from qde.partitions import (
    Automorphism,
    Partition,
    compose,
    pinching_invariant_partition,
    predual_apply,
    tensor_partition,
    vn_partition,
)
from qde.properties import random_invariant_state, random_partition, random_unitary
from qde.states import StateFunctional, mix, product_state

from conftest import LN2, MINUS, P0, P1, PLUS, SX
from oracles import brute_force_an, classical_part, info_from_branches, shannon


def z_partition():
    return vn_partition([P0, P1])


def x_partition():
    return vn_partition([PLUS, MINUS])


# --- information -----------------------------------------------------------


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_information_commuting_reduces_to_shannon(p):
    phi = StateFunctional.diagonal([p, 1 - p])
    rep = information(phi, z_partition())
    assert rep.total_H == pytest.approx(shannon([p, 1 - p]), abs=1e-12)
    assert rep.quantum_Hq == pytest.approx(0.0, abs=1e-12)
    assert rep.weights[0] == pytest.approx(p)
    # brute force through explicit densities
    branches = [P0 @ phi.density @ P0, P1 @ phi.density @ P1]
    assert rep.total_H == pytest.approx(info_from_branches(branches), abs=1e-12)


def test_information_uniform_is_ln2():
    rep = information(StateFunctional.maximally_mixed(2), z_partition())
    assert rep.total_H == pytest.approx(LN2)


def test_information_proportional_code():
    weights = [0.2, 0.3, 0.5]
    zeta = Partition.proportional(weights, 2)
    rep = information(StateFunctional.from_density(PLUS), zeta)
    assert rep.total_H == pytest.approx(0.0, abs=1e-12)
    assert rep.classical_Hc == pytest.approx(shannon(weights))
    assert rep.quantum_Hq == pytest.approx(-shannon(weights))


def test_information_composed_z_then_x():
    # branch functionals are (1/4) x-basis pure states
    phi = StateFunctional.maximally_mixed(2)
    rep = information(phi, compose(z_partition(), x_partition()))
    assert rep.total_H == pytest.approx(LN2, abs=1e-12)
    assert rep.classical_Hc == pytest.approx(2 * LN2, abs=1e-12)
    assert rep.quantum_Hq == pytest.approx(-LN2, abs=1e-12)
    branches = [
        pj @ (0.5 * pi @ np.eye(2) @ pi) @ pj
        for pi in (P0, P1)
        for pj in (PLUS, MINUS)
    ]
    assert rep.total_H == pytest.approx(info_from_branches(branches), abs=1e-12)


def test_information_requires_normalized():
    with pytest.raises(ValidationFailure):
        information(StateFunctional.diagonal([0.5, 0.1]), z_partition())


def test_information_split_identity(rng):
    for _ in range(20):
        phi = random_invariant_state(rng, np.eye(2))
        zeta = random_partition(rng, 2, 2, outcomes=3)
        assert information(phi, zeta).split_residual <= 1e-10


def test_information_stable_under_relabeling(rng):
    phi = random_invariant_state(rng, np.eye(2))
    zeta = random_partition(rng, 2, 2, outcomes=3)
    shuffled = Partition(tuple(zeta.maps[i] for i in (2, 0, 1)))
    a = information(phi, zeta)
    b = information(phi, shuffled)
    assert a.total_H == pytest.approx(b.total_H, abs=1e-12)
    assert a.weights[0] == b.weights[0]


# --- direct-sum representation ---------------------------------------------


def test_direct_sum_matches_information(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        phi = random_invariant_state(rng, np.eye(d))
        zeta = random_partition(rng, d, d, outcomes=int(rng.integers(2, 4)))
        a = information(phi, zeta).total_H
        b = information_via_direct_sum(phi, zeta)
        assert a == pytest.approx(b, abs=1e-8)


def test_direct_sum_trivial_and_proportional():
    phi = StateFunctional.from_density(PLUS)
    assert information_via_direct_sum(phi, Partition.trivial(2)) == pytest.approx(0.0, abs=1e-12)
    zeta = Partition.proportional([0.4, 0.6], 2)
    assert information_via_direct_sum(phi, zeta) == pytest.approx(0.0, abs=1e-12)


# --- conditional information ------------------------------------------------


def test_conditional_with_trivial_is_information():
    phi = StateFunctional.diagonal([0.7, 0.3])
    zeta = z_partition()
    cond = conditional_information(phi, zeta, Partition.trivial(2))
    assert cond == pytest.approx(information(phi, zeta).total_H, abs=1e-12)


def test_conditional_projective_self_is_zero():
    phi = StateFunctional.from_density(PLUS)
    zeta = z_partition()
    assert conditional_information(phi, zeta, zeta) == pytest.approx(0.0, abs=1e-12)


def test_conditional_z_given_x_uniform():
    phi = StateFunctional.maximally_mixed(2)
    assert conditional_information(phi, z_partition(), x_partition()) == pytest.approx(
        0.0, abs=1e-12
    )


def test_conditional_nonnegative_random(rng):
    for _ in range(30):
        phi = random_invariant_state(rng, np.eye(2))
        zeta = random_partition(rng, 2, 2, outcomes=2)
        eta = random_partition(rng, 2, 2, outcomes=2)
        assert conditional_information(phi, zeta, eta) >= -1e-8


# --- refinement --------------------------------------------------------------


def test_refinement_depth_one_is_transport():
    theta = Automorphism(SX)
    zeta = z_partition()
    ref = refinement(theta, zeta, 1)
    # theta^{-1}(zeta) swaps the projectors
    assert np.allclose(ref.maps[0].kraus[0], P1)
    assert np.allclose(ref.maps[1].kraus[0], P0)
    assert ref.labels == ((0,), (1,))


def test_refinement_identity_projective_diagonal_words():
    ref = refinement(Automorphism.identity(2), z_partition(), 2)
    phi = StateFunctional.maximally_mixed(2)
    weights = {m.label: predual_apply(m, phi).weight for m in ref.maps}
    assert weights[(0, 0)] == pytest.approx(0.5)
    assert weights[(1, 1)] == pytest.approx(0.5)
    assert weights[(0, 1)] == pytest.approx(0.0, abs=1e-14)
    assert weights[(1, 0)] == pytest.approx(0.0, abs=1e-14)


def test_refinement_word_weights_sigma_x():
    # brute force over the 4 words: sigma_x keeps the computational basis, so
    # only words with matching flipped letters carry weight
    ref = refinement(Automorphism(SX), z_partition(), 2)
    phi = StateFunctional.maximally_mixed(2)
    weights = {m.label: predual_apply(m, phi).weight for m in ref.maps}
    brute = {}
    for i1 in (0, 1):
        for i2 in (0, 1):
            first = (P1, P0)[i1]  # sigma_x P_i sigma_x
            second = (P0, P1)[i2]  # sigma_x^2 = identity
            dens = second @ (first @ phi.density @ first) @ second
            brute[(i1, i2)] = float(np.real(np.trace(dens)))
    assert weights == pytest.approx(brute)
    assert sorted(weights.values()) == pytest.approx([0.0, 0.0, 0.5, 0.5])


def test_refinement_branch_cap():
    with pytest.raises(ResourceCapExceeded):
        refinement(Automorphism.identity(2), z_partition(), 13)


# --- the a_n sequence ---------------------------------------------------------


def test_an_identity_projective_all_zero():
    phi = StateFunctional.diagonal([0.7, 0.3])
    seq = an_sequence(phi, Automorphism.identity(2), z_partition(), depth=3)
    assert all(abs(v) <= 1e-12 for v in seq.values)
    assert seq.monotonicity_residual <= 1e-12


def test_an_sigma_x_conjugation_matches_brute_force():
    phi = StateFunctional.maximally_mixed(2)
    seq = an_sequence(phi, Automorphism(SX), z_partition(), depth=4)
    expected = brute_force_an(phi.density, SX, [[P0], [P1]], 4)
    assert list(seq.values) == pytest.approx(expected, abs=1e-10)
    assert seq.monotonicity_residual <= 1e-10
    assert all(v <= seq.information_bound + 1e-10 for v in seq.values)


def test_an_random_system_matches_brute_force(rng):
    u = random_unitary(rng, 2)
    phi = random_invariant_state(rng, u)
    zeta = random_partition(rng, 2, 2, outcomes=2, kraus_per_map=2)
    seq = an_sequence(phi, Automorphism(u), zeta, depth=3)
    expected = brute_force_an(phi.density, u, [m.kraus for m in zeta.maps], 3)
    assert list(seq.values) == pytest.approx(expected, abs=1e-9)


def test_an_warns_on_noninvariant_state():
    phi = StateFunctional.diagonal([0.9, 0.1])
    with pytest.warns(UserWarning, match="not invariant"):
        an_sequence(phi, Automorphism(SX), z_partition(), depth=2)


def test_an_branch_cap():
    with pytest.raises(ResourceCapExceeded):
        an_sequence(
            StateFunctional.maximally_mixed(2),
            Automorphism.identity(2),
            z_partition(),
            depth=12,
        )


def test_markov_diagonal_embedding_matches_conditional_entropy():
    # two-state chain embedded on the diagonal algebra of windows
    from qde.classical import SymbolicShift, embed_diagonal

    P = np.array([[0.9, 0.1], [0.1, 0.9]])
    shift = SymbolicShift(P)
    expected = -sum(
        shift.stationary[i] * P[i, j] * math.log(P[i, j]) for i in range(2) for j in range(2)
    )
    for n in (1, 2, 3):
        space = shift.word_space(n + 1)
        present = shift.coordinate_indicator(n + 1, [n])
        past = shift.coordinate_indicator(n + 1, range(n))
        state, q_present = embed_diagonal(space, present)
        _, q_past = embed_diagonal(space, past)
        a_n = conditional_information(state, q_present, q_past)
        assert a_n == pytest.approx(expected, abs=1e-10)


# --- admissibility, invariance, convexity ------------------------------------


def test_admissibility_vn():
    ok, seq = admissibility_check(StateFunctional.diagonal([0.6, 0.4]), z_partition(), depth=2)
    assert ok
    assert seq.values[0] == pytest.approx(0.0, abs=1e-12)


def test_admissibility_pinching():
    phi = StateFunctional.diagonal([0.8, 0.2])
    pin = pinching_invariant_partition([P0, P1], phi)
    ok, seq = admissibility_check(phi, pin, depth=3)
    assert ok
    assert seq.h_estimate <= 1e-6


def test_admissibility_proportional():
    ok, _ = admissibility_check(
        StateFunctional.from_density(PLUS), Partition.proportional([0.5, 0.5], 2), depth=2
    )
    assert ok


def test_invariance_check_values():
    phi = StateFunctional.diagonal([0.9, 0.1])
    pin = pinching_invariant_partition([P0, P1], phi)
    assert invariance_check(phi, pin) <= 1e-9
    plus = StateFunctional.from_density(PLUS)
    residual = invariance_check(plus, z_partition())
    # pinched density is I/2: ||I/2 - |+><+||_F = 1/sqrt(2)
    assert residual == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
    assert invariance_check(StateFunctional.maximally_mixed(2), z_partition()) <= 1e-12


def test_convexity_probe_equal_endpoints():
    phi = StateFunctional.diagonal([0.6, 0.4])
    rep = convexity_probe(phi, phi, z_partition(), Automorphism.identity(2), depth=2)
    assert rep.max_above_chord <= 1e-12


def test_convexity_probe_diagonal_pinching():
    phi0 = StateFunctional.diagonal([0.6, 0.4])
    phi1 = StateFunctional.diagonal([0.2, 0.8])
    zeta = z_partition()
    rep = convexity_probe(phi0, phi1, zeta, Automorphism.identity(2), depth=2)
    assert rep.values == pytest.approx([0.0] * 5, abs=1e-12)
    assert rep.max_above_chord <= 1e-12


def test_convexity_probe_rejects_noninvariant():
    phi0 = StateFunctional.diagonal([0.6, 0.4])
    phi1 = StateFunctional.from_density(PLUS)
    with pytest.raises(ValidationFailure):
        convexity_probe(phi0, phi1, z_partition(), Automorphism(SX), depth=2)


# --- product additivity -------------------------------------------------------


def test_information_additive_under_products(rng):
    for _ in range(5):
        phi1 = random_invariant_state(rng, np.eye(2))
        phi2 = random_invariant_state(rng, np.eye(2))
        z1 = random_partition(rng, 2, 2, outcomes=2)
        z2 = random_partition(rng, 2, 2, outcomes=2)
        lhs = information(product_state(phi1, phi2), tensor_partition(z1, z2)).total_H
        rhs = information(phi1, z1).total_H + information(phi2, z2).total_H
        assert lhs == pytest.approx(rhs, abs=1e-8)
