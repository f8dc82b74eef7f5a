"""Exact error measurements against independent dense oracles.

The projected error is recomputed through a dense projector product, the
propagators through ``scipy.linalg.expm``, and the pruned commutator sums
against an unpruned brute-force enumeration.
"""
import itertools
import math

import numpy as np
import pytest
import scipy.linalg

import trotterlab as tl
from trotterlab.errors import ErrorSample


def brute_commutator_sum(spec, depth, projector=None):
    # no pruning: every tuple, including identically-zero disjoint ones
    embedded = [tl.embed(term, spec.lattice).entries for term in spec.terms]
    total = 0.0
    for tup in itertools.product(range(len(embedded)), repeat=depth + 1):
        mat = embedded[tup[0]]
        for idx in tup[1:]:
            mat = embedded[idx] @ mat - mat @ embedded[idx]
        if projector is not None:
            mat = projector @ mat @ projector
        total += np.linalg.norm(mat, 2)
    return total


def test_full_error_against_expm_oracle(lab_cache):
    lab = lab_cache("aklt", 3)
    spec = lab.spec
    h, parts = tl.assemble(spec)
    t = 0.3
    plan = tl.suzuki_plan(1, spec.gamma_count)
    exact = scipy.linalg.expm(-1j * t * h.entries)
    trotter = np.eye(spec.lattice.hilbert_dim, dtype=complex)
    for gamma, alpha in plan.stages:
        trotter = scipy.linalg.expm(-1j * alpha * t * parts[gamma - 1].entries) @ trotter
    oracle = np.linalg.norm(exact - trotter, 2)
    assert lab.full_error(plan, t) == pytest.approx(oracle, abs=1e-12)


def test_projected_error_against_dense_projector(aklt4):
    plan = tl.suzuki_plan(1, 2)
    t = 0.1
    diff = aklt4.difference(plan, t)
    for delta in (0.5, 1.0, 2.0):
        dense = aklt4.projector(delta).entries
        oracle = np.linalg.norm(diff @ dense, 2)
        assert aklt4.projected_error(plan, t, delta) == pytest.approx(oracle, abs=1e-11)


def test_projected_error_none_and_inf_mean_full(aklt4):
    plan = tl.suzuki_plan(2, 2)
    full = aklt4.full_error(plan, 0.2)
    assert aklt4.projected_error(plan, 0.2, None) == full
    assert aklt4.projected_error(plan, 0.2, math.inf) == full
    assert aklt4.projected_error(plan, 0.2, aklt4.max_energy) == pytest.approx(full, abs=1e-12)


def test_projected_error_below_ground_is_zero(aklt4):
    plan = tl.suzuki_plan(1, 2)
    assert aklt4.projected_error(plan, 0.3, -0.5) == 0.0


def test_projected_monotone_in_delta_and_below_full(aklt4):
    plan = tl.suzuki_plan(1, 2)
    t = 0.1
    full = aklt4.full_error(plan, t)
    previous = 0.0
    for delta in (0.25, 0.5, 1.0, 2.0, 4.0):
        value = aklt4.projected_error(plan, t, delta)
        assert value >= previous - 1e-12
        assert value <= full + 1e-12
        previous = value


def test_module_level_wrappers(lab_cache):
    spec = lab_cache("mg", 4).spec
    plan = tl.suzuki_plan(1, spec.gamma_count)
    lab = lab_cache("mg", 4)
    assert tl.full_error(spec, plan, 0.2) == pytest.approx(lab.full_error(plan, 0.2), abs=1e-13)
    assert tl.projected_error(spec, plan, 0.2, 0.5) == pytest.approx(
        lab.projected_error(plan, 0.2, 0.5), abs=1e-13)


def test_stepped_error_single_step_matches(aklt4):
    plan = tl.suzuki_plan(1, 2)
    assert aklt4.stepped_error(plan, 0.3, 1) == pytest.approx(
        aklt4.full_error(plan, 0.3), abs=1e-12)
    assert aklt4.stepped_error(plan, 0.3, 1, 1.0) == pytest.approx(
        aklt4.projected_error(plan, 0.3, 1.0), abs=1e-12)


def test_stepped_error_accumulation(aklt4):
    plan = tl.suzuki_plan(2, 2)
    t = 0.5
    for steps in (1, 2, 4, 8):
        chained = aklt4.stepped_error(plan, t, steps, 1.0)
        assert chained <= steps * aklt4.projected_error(plan, t / steps, 1.0) + 1e-9


def test_leakage_norm_dual_route(aklt4):
    op = tl.embed(aklt4.spec.terms[1], aklt4.spec.lattice)
    delta, delta_prime = 0.5, 3.0
    measured = aklt4.leakage_norm(op, delta, delta_prime)
    low = aklt4.projector(delta).entries
    high = np.eye(op.dim) - aklt4.projector(delta_prime).entries
    oracle = np.linalg.norm(high @ op.entries @ low, 2)
    assert measured == pytest.approx(oracle, abs=1e-11)
    with pytest.raises(ValueError, match="exceed"):
        aklt4.leakage_norm(op, 1.0, 0.5)


def test_leakage_identity_and_high_cutoff(aklt4):
    eye = tl.operators.DenseOperator(81, np.eye(81), hermitian_hint=True)
    assert aklt4.leakage_norm(eye, 0.5, 1.5) == pytest.approx(0.0, abs=1e-12)
    op = tl.embed(aklt4.spec.terms[0], aklt4.spec.lattice)
    assert aklt4.leakage_norm(op, 0.5, aklt4.max_energy + 1.0) == 0.0


def test_excitation_tail_bound_formula():
    value = tl.excitation_tail_bound(1.25, 2, 2, 2.0, 0.5, 14.0)
    oracle = 1.25 * math.exp(-(14.0 - 0.5 - 3 * 2.0 * 2) / (4 * 2 * 2.0))
    assert value == pytest.approx(oracle, rel=1e-14)


def test_leakage_below_tail_bound(lab_cache):
    lab = lab_cache("aklt", 5)
    spec = lab.spec
    g = tl.extensiveness(spec)
    for term in spec.terms:
        op = tl.embed(term, spec.lattice)
        size = len(term.support)
        for shift in (0.0, 2.0, 5.0):
            delta = 0.5
            delta_prime = delta + 3 * g * size + shift
            measured = lab.leakage_norm(op, delta, delta_prime)
            cap = tl.excitation_tail_bound(term.norm, size, spec.locality_k, g,
                                           delta, delta_prime)
            assert measured <= cap + 1e-12


def test_nested_commutator_sum_matches_brute_force(aklt4, mg4):
    for lab in (aklt4, mg4):
        spec = lab.spec
        for depth in (1, 2):
            pruned = tl.nested_commutator_sum(spec, depth)
            brute = brute_commutator_sum(spec, depth)
            assert pruned == pytest.approx(brute, abs=1e-10)
        proj = lab.projector(1.0)
        pruned = tl.nested_commutator_sum(spec, 2, proj)
        brute = brute_commutator_sum(spec, 2, proj.entries)
        assert pruned == pytest.approx(brute, abs=1e-10)


def test_nested_commutator_sum_zero_for_commuting():
    z = np.diag([1.0, -1.0]).astype(complex)
    bond = (np.kron(z, z) + np.eye(4)) / 2
    terms = tuple(tl.LocalTerm((i, i + 1), bond) for i in range(3))
    spec = tl.HamiltonianSpec(tl.LatticeSpec(4, 2), terms, (1, 1, 1),
                              locality_k=2, model_tag="ising_zz")
    assert tl.nested_commutator_sum(spec, 1) == pytest.approx(0.0, abs=1e-12)


def test_nested_commutator_depth_limits(aklt4):
    with pytest.raises(ValueError, match="depth"):
        tl.nested_commutator_sum(aklt4.spec, 0)
    with pytest.raises(ValueError, match="depth"):
        tl.nested_commutator_sum(aklt4.spec, 4)


def test_commutator_sums_below_analytic_caps(aklt4, mg4):
    for lab in (aklt4, mg4):
        spec = lab.spec
        g = tl.extensiveness(spec)
        n = spec.lattice.num_sites
        for depth in (1, 2):
            unrestricted = tl.nested_commutator_sum(spec, depth)
            assert unrestricted <= tl.unrestricted_commutator_bound(
                depth, spec.locality_k, g, n)
            for delta in (0.5, 1.0):
                projected = tl.nested_commutator_sum(spec, depth, lab.projector(delta))
                assert projected <= tl.projected_commutator_bound(
                    depth, spec.locality_k, g, delta)


def test_expectation_sum_ground_state(aklt4):
    ground = aklt4.spectrum.eigenvectors[:, 0]
    value, bound = tl.low_energy_expectation_sum(aklt4.spec, 1, ground, 0.0)
    assert bound == 0.0
    assert value <= 1e-9


def test_expectation_sum_random_low_state(aklt4):
    rng = np.random.default_rng(3)
    k, g = aklt4.spec.locality_k, tl.extensiveness(aklt4.spec)
    for depth in (0, 1, 2):
        psi = aklt4.random_subspace_state(1.0, rng)
        value, bound = tl.low_energy_expectation_sum(aklt4.spec, depth, psi, 1.0)
        assert bound == pytest.approx(math.factorial(depth) * (2 * k * g) ** depth, rel=1e-12)
        assert value <= bound + 1e-9


def test_expectation_sum_depth_one_frozen_bound(aklt4):
    # k = 2, g = 2, delta = 1 -> 1! * (2*2*2)^1 * 1 = 8
    rng = np.random.default_rng(4)
    psi = aklt4.random_subspace_state(1.0, rng)
    _, bound = tl.low_energy_expectation_sum(aklt4.spec, 1, psi, 1.0)
    # g carries ~1e-15 eigensolver noise, so the frozen value is approximate
    assert bound == pytest.approx(8.0, rel=1e-12)


def test_expectation_sum_rejects_leaky_state(aklt4):
    top = aklt4.spectrum.eigenvectors[:, -1]
    with pytest.raises(ValueError, match="subspace"):
        tl.low_energy_expectation_sum(aklt4.spec, 1, top, 0.5)
    with pytest.raises(ValueError, match="normalized"):
        tl.low_energy_expectation_sum(aklt4.spec, 1, 2.0 * aklt4.spectrum.eigenvectors[:, 0], 0.5)


def test_random_subspace_state_properties(aklt4):
    rng = np.random.default_rng(5)
    psi = aklt4.random_subspace_state(1.0, rng)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
    proj = aklt4.projector(1.0).entries
    assert np.linalg.norm(proj @ psi - psi) < 1e-12
    assert aklt4.tail_weight(psi, 1.0) == pytest.approx(0.0, abs=1e-12)
    again = aklt4.random_subspace_state(1.0, np.random.default_rng(5))
    np.testing.assert_allclose(again, psi, atol=1e-14)


def test_tail_weight_eigenstate(aklt4):
    # highest eigenstate has all weight above any lower threshold
    top = aklt4.spectrum.eigenvectors[:, -1]
    assert aklt4.tail_weight(top, aklt4.max_energy - 0.5) == pytest.approx(1.0, abs=1e-12)
    assert aklt4.tail_weight(top, aklt4.max_energy) == pytest.approx(0.0, abs=1e-12)


def test_error_sample_validation():
    sample = ErrorSample("aklt", 4, 1, 2, 0.1, 0.5, 0.01, "projected")
    assert sample.delta == 0.5
    with pytest.raises(ValueError, match="kind"):
        ErrorSample("aklt", 4, 1, 2, 0.1, 0.5, 0.01, "weird")
    with pytest.raises(ValueError, match="outside"):
        ErrorSample("aklt", 4, 1, 2, 0.1, 0.5, 2.5, "full")
    with pytest.raises(ValueError, match="delta"):
        ErrorSample("aklt", 4, 1, 2, 0.1, None, 0.01, "projected")
