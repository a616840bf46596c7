import numpy as np
import pytest

from hillgaps import (
    BandEdges,
    DiscriminantConfig,
    GalerkinConfig,
    InputError,
    InterlacingError,
    band_edges_discriminant,
    band_edges_galerkin,
    cross_validate,
    discriminant,
    from_fourier,
    galerkin_matrix,
    mathieu,
    power_decay,
    random_hs,
    two_harmonic,
)
from hillgaps.spectrum import _Propagator

ZERO = from_fourier(0.0, [])


# ------------------------------------------------------------- matrices


def test_galerkin_matrix_free_periodic():
    m = galerkin_matrix(ZERO, "periodic", 2)
    want = np.diag([(2 * np.pi * j) ** 2 for j in (-2, -1, 0, 1, 2)])
    assert np.array_equal(m, want)


def test_galerkin_matrix_free_semiperiodic():
    m = galerkin_matrix(ZERO, "semiperiodic", 1)
    want = np.diag([(np.pi * (2 * j + 1)) ** 2 for j in (-1, 0)])
    assert np.array_equal(m, want)


def test_galerkin_matrix_mathieu_band_structure():
    q = mathieu(0.7)
    m = galerkin_matrix(q, "periodic", 4)
    off = m - np.diag(np.diag(m))
    js = np.arange(-4, 5)
    for a in range(9):
        for b in range(9):
            want = 0.7 if abs(js[a] - js[b]) == 1 else 0.0
            assert off[a, b] == want


def test_galerkin_matrix_hermitian_exactly():
    q = random_hs(1.0, 8, 3)
    for parity in ("periodic", "semiperiodic"):
        m = galerkin_matrix(q, parity, 16)
        assert np.array_equal(m, m.conj().T)


def test_galerkin_matrix_rejects_aliasing_and_mean():
    with pytest.raises(InputError, match="alias"):
        galerkin_matrix(power_decay(2.0, 8), "periodic", 4)
    with pytest.raises(InputError, match="mean"):
        galerkin_matrix(from_fourier(1.0, [(1, 0.1)]), "periodic", 8)
    with pytest.raises(InputError):
        galerkin_matrix(ZERO, "dirichlet", 8)


def test_galerkin_config_floor():
    with pytest.raises(InputError):
        band_edges_galerkin(ZERO, 30, GalerkinConfig(n_trunc=64))


# ------------------------------------------------------------- free operator


def test_free_operator_galerkin_exact():
    edges = band_edges_galerkin(ZERO, 5)
    assert edges.lambda0 == 0.0
    for n, (lo, hi) in enumerate(edges.pairs, start=1):
        assert lo == hi == (n * np.pi) ** 2


def test_constant_potential_is_shifted_free():
    edges = band_edges_galerkin(from_fourier(5.0, []), 5)
    assert edges.lambda0 == 5.0
    for n, (lo, hi) in enumerate(edges.pairs, start=1):
        assert lo == hi == pytest.approx((n * np.pi) ** 2 + 5.0, rel=1e-15)


def test_free_operator_discriminant_collapsed():
    edges = band_edges_discriminant(ZERO, 4)
    assert all(edges.collapsed)
    assert abs(edges.lambda0) < 1e-9
    for n, (lo, hi) in enumerate(edges.pairs, start=1):
        assert lo == hi
        assert lo == pytest.approx((n * np.pi) ** 2, rel=1e-7)


# ------------------------------------------------------------- discriminant values


def test_discriminant_closed_forms():
    assert discriminant(ZERO, np.pi**2 / 4) == pytest.approx(0.0, abs=1e-12)
    assert discriminant(ZERO, 0.0) == pytest.approx(2.0, rel=1e-13)
    assert discriminant(ZERO, -1.0) == pytest.approx(2 * np.cosh(1.0), rel=1e-13)


def test_wronskian_witness_tiny():
    prop = _Propagator(mathieu(0.5), 2048)
    drift = prop.wronskian_drift(np.array([np.pi**2 / 4, 0.0, -1.0, 500.0]))
    assert drift < 1e-9


def test_discriminant_config_validation():
    with pytest.raises(InputError):
        DiscriminantConfig(steps=128)
    with pytest.raises(InputError):
        DiscriminantConfig(root_tol=0.0)
    with pytest.raises(InputError):
        DiscriminantConfig(bracket_expand=1.0)


def test_discriminant_fourth_order_convergence():
    q = two_harmonic(2.0, 1.0)
    lam = 60.0
    ref = discriminant(q, lam, DiscriminantConfig(steps=8192))
    errs = [abs(discriminant(q, lam, DiscriminantConfig(steps=s)) - ref) for s in (256, 512)]
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.3)


# ------------------------------------------------------------- edge pairing and gaps


def test_mathieu_first_gap_near_leading_term():
    edges = band_edges_discriminant(mathieu(0.1), 3)
    gap1 = edges.gap(1)
    assert abs(gap1 - 0.2) / 0.2 < 0.05


def test_cross_method_agreement():
    cv = cross_validate(mathieu(0.5), 8)
    assert cv.max_rel_discrepancy < 1e-8
    cv2 = cross_validate(power_decay(2.0, 16), 12)
    assert cv2.max_rel_discrepancy < 1e-7


def test_shift_covariance_both_methods():
    base = two_harmonic(0.3, 0.2)
    shifted = from_fourier(5.0, [(1, 0.3), (2, 0.2)])
    for solver in (band_edges_galerkin, band_edges_discriminant):
        e1 = solver(base, 5)
        e2 = solver(shifted, 5)
        assert np.max(np.abs(e2.all_edges() - e1.all_edges() - 5.0)) < 1e-10


def test_truncation_stability():
    q = power_decay(2.0, 32)
    e1 = band_edges_galerkin(q, 8, GalerkinConfig(n_trunc=96))
    e2 = band_edges_galerkin(q, 8, GalerkinConfig(n_trunc=192))
    rel = np.abs(e1.all_edges() - e2.all_edges()) / np.maximum(1.0, np.abs(e2.all_edges()))
    assert np.max(rel) < 1e-9


def test_interlacing_on_random_potentials():
    for seed in range(10):
        edges = band_edges_galerkin(random_hs(1.0, 32, seed), 12)
        edges.validate()
        assert np.all(edges.gaps() >= -1e-10)


def test_validate_raises_with_offending_index():
    bad = BandEdges(lambda0=0.0, pairs=((1.0, 2.0), (1.5, 3.0)), method="synthetic", resolution=0)
    with pytest.raises(InterlacingError) as err:
        bad.validate()
    assert err.value.n == 2


def test_negative_gap_rejected():
    bad = BandEdges(lambda0=0.0, pairs=((2.0, 1.0),), method="synthetic", resolution=0)
    with pytest.raises(InterlacingError):
        bad.validate()


def test_parity_tags():
    assert BandEdges.parity(0) == "periodic"
    assert BandEdges.parity(1) == "semiperiodic"
    assert BandEdges.parity(2) == "periodic"


def test_nmax_validation():
    with pytest.raises(InputError):
        band_edges_galerkin(ZERO, 0)
    with pytest.raises(InputError):
        band_edges_discriminant(ZERO, 0)
