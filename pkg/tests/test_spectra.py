import math

import numpy as np
import pytest

from kbmlab import (
    SpectrumValidationError,
    custom_spectrum,
    eig_dense,
    assemble_generator,
    finite_block,
    fitted_decay_exponent,
    gamma_sweep,
    ladder_coefficients,
    make_gamma_grid,
    mixing_report,
    sphere_spectrum,
    tail_mask,
    torus_spectrum,
)


def closed_lambda(gamma):
    """lambda on the eta=2 sphere block for gamma > 4 (stable form)."""
    return 4.0 / (1.0 + math.sqrt(1.0 - 16.0 / (gamma * gamma)))


def test_sphere_spectrum_examples():
    s = sphere_spectrum(1.0, 2)
    assert [(e.eta, e.multiplicity) for e in s.entries] == [(0.0, 1), (2.0, 3), (6.0, 5)]
    s = sphere_spectrum(4.0, 1)
    assert [(e.eta, e.multiplicity) for e in s.entries] == [(0.0, 1), (8.0, 3)]
    s = sphere_spectrum(1.0, 0)
    assert [(e.eta, e.multiplicity) for e in s.entries] == [(0.0, 1)]


def test_sphere_spectrum_rejects_bad_input():
    with pytest.raises(SpectrumValidationError):
        sphere_spectrum(-1.0, 2)
    with pytest.raises(SpectrumValidationError):
        sphere_spectrum(1.0, -1)


def test_torus_spectrum_examples():
    s = torus_spectrum(2.0 * math.pi, 2.5)
    assert [(e.eta, e.multiplicity) for e in s.entries] == [(0.0, 1), (1.0, 4), (2.0, 4)]
    s = torus_spectrum(2.0 * math.pi, 0.5)
    assert [(e.eta, e.multiplicity) for e in s.entries] == [(0.0, 1)]
    s = torus_spectrum(math.pi, 5.0)
    assert [(e.eta, e.multiplicity) for e in s.entries] == [(0.0, 1), (4.0, 4)]


def test_custom_spectrum_validation():
    s = custom_spectrum(-1.0, [(0.0, 1), (3.838, 1)])
    assert s.source == "custom" and s.entries[1].eta == 3.838
    with pytest.raises(SpectrumValidationError):
        custom_spectrum(-1.0, [(-1.0, 1)])
    with pytest.raises(SpectrumValidationError):
        custom_spectrum(-1.0, [(2.0, 1)])  # zero mode missing


def test_gamma_grid_hits_decades_exactly():
    grid = make_gamma_grid(0.0, 4.0, 101)
    assert grid.size == 101
    for g in (1.0, 10.0, 100.0, 1000.0, 10000.0):
        assert g in grid


def test_sweep_closed_form_row():
    table = gamma_sweep(2.0, 1.0, [5.0])
    assert table.lam[0].real == pytest.approx(2.5, abs=1e-10)
    assert abs(table.lam[0].imag) <= 1e-12
    assert table.simple[0] and not table.collided[0]


def test_sweep_collision_row():
    table = gamma_sweep(2.0, 1.0, [4.0])
    assert not table.simple[0]
    assert table.lam[0].real == pytest.approx(4.0, abs=1e-6)


def test_sweep_trivial_eta_is_identically_zero():
    table = gamma_sweep(0.0, -1.0, [1.0, 10.0, 100.0])
    assert np.all(table.lam == 0) and np.all(table.abs_error == 0)
    assert np.all(table.simple) and not np.any(table.collided)


def test_sweep_closed_form_invariant_on_tail():
    grid = make_gamma_grid(np.log10(5.0), 3.0, 20)
    table = gamma_sweep(2.0, 1.0, grid)
    for g, lam in zip(table.gamma_grid, table.lam):
        if g > 4.0:
            assert lam.real == pytest.approx(closed_lambda(g), abs=1e-9)


def test_sweep_monotone_tail_and_rate():
    grid = make_gamma_grid(1.0, 4.0, 31)
    table = gamma_sweep(2.0, 1.0, grid)
    mask = tail_mask(grid, 2.0)
    tail = table.abs_error[mask]
    assert np.all(np.diff(tail) < 0.0)
    rate = fitted_decay_exponent(grid[mask], tail)
    assert rate is not None and rate <= -1.7


def test_sweep_empirical_r_detects_sphere_collision():
    table = gamma_sweep(2.0, 1.0, [3.0, 5.0, 10.0])
    assert table.empirical_r == pytest.approx(4.0, abs=0.05)
    clean = gamma_sweep(2.0, 1.0, [10.0, 100.0])
    assert clean.empirical_r is None


def test_sweep_multiplicity_is_metadata():
    table = gamma_sweep(2.0, 1.0, [10.0], multiplicity=3)
    assert table.multiplicity == 3


def test_sweep_value_in_generator_spectrum():
    block = finite_block(6.0, 1.0)
    coeffs = ladder_coefficients(block)
    table = gamma_sweep(6.0, 1.0, [25.0])
    eigs = eig_dense(assemble_generator(block, coeffs, 25.0))
    assert np.min(np.abs(eigs - table.lam[0])) <= 1e-8


def test_sweep_rejects_bad_grid():
    with pytest.raises(SpectrumValidationError):
        gamma_sweep(2.0, 1.0, [5.0, 4.0])
    with pytest.raises(SpectrumValidationError):
        gamma_sweep(2.0, 1.0, [-1.0, 2.0])


def test_mixing_report_closed_form_value():
    spectrum = sphere_spectrum(1.0, 1)
    grid = make_gamma_grid(1.0, 3.0, 11)  # includes gamma = 10 exactly
    tables = [gamma_sweep(e.eta, 1.0, grid, multiplicity=e.multiplicity) for e in spectrum.entries]
    report = mixing_report(spectrum, tables)
    assert report["eta1"] == 2.0
    i10 = report["gamma"].index(10.0)
    assert report["re_lambda_eta1"][i10] == pytest.approx(2.0871215252207998, abs=1e-9)
    assert report["approaches_from_above"] is True
    assert report["tail_value"] == pytest.approx(2.0, abs=1e-4)


def test_mixing_report_requires_eta1_table():
    spectrum = sphere_spectrum(1.0, 1)
    zero_only = [gamma_sweep(0.0, 1.0, [10.0, 100.0])]
    with pytest.raises(SpectrumValidationError):
        mixing_report(spectrum, zero_only)
