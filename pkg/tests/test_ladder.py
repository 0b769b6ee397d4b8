import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kbmlab import (
    CasimirBlock,
    LadderRangeError,
    casimir_residual,
    coupling_matrix,
    eig_dense,
    assemble_perturbed,
    finite_block,
    fixed_truncation,
    ladder_coeff_sq,
    ladder_coefficients,
    ladder_extent,
    lowering_coeff_sq,
    lowering_matrix,
    raising_matrix,
    truncate,
    vertical_matrix,
)

from conftest import match_spectra


def test_coeff_sq_direct_substitution():
    assert ladder_coeff_sq(2.0, 1.0, 0) == 0.5
    assert ladder_coeff_sq(0.0, -1.0, 0) == 0.0


@given(eta=st.floats(0.0, 50.0), k=st.integers(-50, 50))
def test_coeff_sq_flat_case_is_mode_independent(eta, k):
    assert ladder_coeff_sq(eta, 0.0, k) == eta / 4.0


@given(
    eta=st.floats(0.0, 50.0),
    K=st.floats(-4.0, 4.0),
    k=st.integers(-40, 40),
)
def test_raising_and_lowering_coefficients_are_consistent(eta, K, k):
    # the lowering coefficient at mode k is the raising coefficient one rung below
    assert lowering_coeff_sq(eta, K, k) == pytest.approx(
        ladder_coeff_sq(eta, K, k - 1), abs=1e-12
    )


@pytest.mark.parametrize(
    "eta,K,k_min,k_max",
    [(2.0, 1.0, -1, 1), (6.0, 1.0, -2, 2), (12.0, 1.0, -3, 3), (8.0, 4.0, -1, 1)],
)
def test_extent_sphere_cases(eta, K, k_min, k_max):
    ext = ladder_extent(eta, K)
    assert (ext.k_min, ext.k_max, ext.finite) == (k_min, k_max, True)


def test_extent_negative_curvature_is_unbounded():
    ext = ladder_extent(5.0, -1.0)
    assert ext.k_min is None and ext.k_max is None and not ext.finite


def test_extent_trivial_block_is_single_slot():
    assert ladder_extent(0.0, -1.0) == (0, 0, True)
    assert ladder_extent(0.0, 1.0) == (0, 0, True)


def test_extent_rejects_negative_eta():
    with pytest.raises(LadderRangeError):
        ladder_extent(-1.0, 1.0)


@given(l=st.integers(0, 12), K=st.floats(0.1, 4.0))
@settings(max_examples=60)
def test_extent_recovers_sphere_ladder(l, K):
    eta = K * l * (l + 1)
    ext = ladder_extent(eta, K)
    assert (ext.k_min, ext.k_max) == (-l, l)


def test_block_rejects_inexact_termination():
    # eta=3 with K=1 is not of the form l*(l+1): no finite ladder exists
    with pytest.raises(LadderRangeError):
        CasimirBlock(curvature=1.0, eta=3.0, k_min=-1, k_max=1, finite=True)


def test_block_rejects_truncation_of_positive_curvature():
    with pytest.raises(LadderRangeError):
        CasimirBlock(curvature=1.0, eta=2.0, k_min=-5, k_max=5, finite=False)


def test_coefficients_sphere_l1(sphere_l1):
    _, coeffs = sphere_l1
    assert np.allclose(coeffs.a, np.sqrt(0.5), atol=0, rtol=1e-15)


def test_coefficients_reject_range_outside_block():
    ok = CasimirBlock(curvature=-1.0, eta=5.0, k_min=-4, k_max=4, finite=False)
    ladder_coefficients(ok)  # K <= 0 coefficients never go negative
    with pytest.raises(LadderRangeError):
        # squared coefficient goes negative beyond the intrinsic top rung
        CasimirBlock(curvature=1.0, eta=2.0, k_min=-1, k_max=3, finite=True)


def test_casimir_residual_examples(sphere_l1, hyperbolic_block):
    _, coeffs = sphere_l1
    assert casimir_residual(coeffs) <= 1e-12
    _, coeffs_h = hyperbolic_block
    assert casimir_residual(coeffs_h) <= 1e-12
    trivial = ladder_coefficients(finite_block(0.0, -1.0))
    assert casimir_residual(trivial) == 0.0


def test_coupling_is_exactly_skew(sphere_l1, hyperbolic_block):
    for _, coeffs in (sphere_l1, hyperbolic_block):
        x = coupling_matrix(coeffs)
        assert np.max(np.abs(x + x.T)) == 0.0


def test_adjoint_relation(sphere_l1, hyperbolic_block):
    # raising* = -lowering in the fixed real gauge
    for _, coeffs in (sphere_l1, hyperbolic_block):
        assert np.array_equal(raising_matrix(coeffs).T.conj(), -lowering_matrix(coeffs))


def test_raising_lowering_scalar_products(hyperbolic_block):
    block, coeffs = hyperbolic_block
    prod = raising_matrix(coeffs) @ lowering_matrix(coeffs)
    diag = np.diag(prod)
    for j, k in enumerate(block.ks):
        if j == 0:  # the bottom row stencil crosses the truncation boundary
            continue
        assert diag[j] == pytest.approx(-lowering_coeff_sq(block.eta, block.curvature, int(k)), abs=1e-12)


def test_commutator_with_vertical_field(sphere_l1, hyperbolic_block):
    # [V, raising] = i*raising and [V, lowering] = -i*lowering on interior rows
    for block, coeffs in (sphere_l1, hyperbolic_block):
        v = vertical_matrix(block)
        xp = raising_matrix(coeffs).astype(complex)
        xm = lowering_matrix(coeffs).astype(complex)
        comm_p = v @ xp - xp @ v - 1j * xp
        comm_m = v @ xm - xm @ v + 1j * xm
        assert np.max(np.abs(comm_p)) <= 1e-12
        assert np.max(np.abs(comm_m)) <= 1e-12


def test_gauge_invariance_of_spectra(sphere_l1, hyperbolic_block):
    from kbmlab import assemble_generator

    rng = np.random.default_rng(11)
    ops = []
    for block, coeffs in (sphere_l1, hyperbolic_block):
        ops.append(assemble_perturbed(block, coeffs, 0.37))
        ops.append(assemble_generator(block, coeffs, 7.0))
    for op in ops:
        base = eig_dense(op)
        dense = op.to_dense()
        n = dense.shape[0]
        for _ in range(10):
            phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
            u = np.diag(phases)
            conj = np.conj(u.T) @ dense @ u
            eigs = np.linalg.eigvals(conj)
            assert match_spectra(base, eigs, 1e-10)


def test_interior_casimir_residual_on_wide_truncation():
    block = truncate(5.0, -1.0, fixed_truncation(40))
    coeffs = ladder_coefficients(block)
    assert casimir_residual(coeffs) <= 1e-12
