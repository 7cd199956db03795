import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from zsigil import analytic
from zsigil.analytic import (
    ChainParams,
    PowerLawSpectrum,
    ZetaZeroTable,
    chain_factor_value,
    chain_values,
    derive_chain,
    derive_chain_arrays,
    gamma_product,
    riemann_zeta_continued,
    sample_gue,
    semicircle_cdf,
    spectral_zeta_det,
    spectral_zeta_det_numeric,
)
from zsigil.errors import GenerationError

SEED = bytes(range(32))

# product of the first three zero ordinates, by mpmath at 30 digits
GAMMA_123 = 7431.7450348493


def test_gue_hermitian_exact():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4, 9):
        g = sample_gue(n, rng)
        assert np.array_equal(g.entries, g.entries.conj().T)
        assert abs(g.det) >= 1e-6


def test_gue_deterministic():
    a = sample_gue(4, np.random.default_rng(42))
    b = sample_gue(4, np.random.default_rng(42))
    assert np.array_equal(a.entries, b.entries) and a.det == b.det


def test_gue_second_moment():
    rng = np.random.default_rng(1)
    tr = [np.trace(g.entries @ g.entries).real for g in (sample_gue(2, rng) for _ in range(10_000))]
    assert abs(np.mean(tr) - 4.0) < 0.05 * 4.0


def test_gue_entry_variances():
    rng = np.random.default_rng(2)
    h = np.array([sample_gue(3, rng).entries for _ in range(20_000)])
    assert np.var(h[:, 0, 0].real) == pytest.approx(1.0, rel=0.05)
    assert np.var(h[:, 0, 1].real) == pytest.approx(0.5, rel=0.05)
    assert np.var(h[:, 0, 1].imag) == pytest.approx(0.5, rel=0.05)


def test_gue_semicircle():
    rng = np.random.default_rng(3)
    n = 64
    eig = np.concatenate([np.linalg.eigvalsh(sample_gue(n, rng).entries) / math.sqrt(n) for _ in range(100)])
    assert stats.kstest(eig, semicircle_cdf).statistic < 0.08


def test_gue_bad_size_and_budget(monkeypatch):
    with pytest.raises(ValueError):
        sample_gue(0, np.random.default_rng(0))
    monkeypatch.setattr(analytic, "DET_FLOOR", 1e300)
    with pytest.raises(GenerationError):
        sample_gue(2, np.random.default_rng(0))


def test_zeta_det_closed_form_examples():
    assert spectral_zeta_det(PowerLawSpectrum(1.0, 2.0)) == pytest.approx(2 * math.pi, abs=1e-12)
    assert spectral_zeta_det(PowerLawSpectrum(4.0, 2.0)) == pytest.approx(math.pi, abs=1e-12)


def test_spectrum_rejects_non_trace_class():
    with pytest.raises(ValueError):
        PowerLawSpectrum(2 * math.pi, 1.0)
    with pytest.raises(ValueError):
        PowerLawSpectrum(0.0, 2.0)


def test_spectrum_is_trace_class_and_decays():
    lam = PowerLawSpectrum(1.5, 2.0).eigenvalues(10_000)
    assert np.all(np.diff(lam) < 0) and lam[-1] < 1e-7
    assert lam.sum() == pytest.approx(1.5 * math.pi**2 / 6, rel=1e-3)


def test_continuation_matches_mpmath():
    for s in (-0.5, -1e-5, 0.0, 1e-5, 0.5, 2.0, 3.0):
        assert riemann_zeta_continued(s) == pytest.approx(float(mpmath.zeta(s)), abs=1e-12)


def test_continuation_pole():
    with pytest.raises(ValueError):
        riemann_zeta_continued(1.0)


def test_numeric_oracle_examples():
    assert spectral_zeta_det_numeric(PowerLawSpectrum(1.0, 2.0)) == pytest.approx(2 * math.pi, abs=1e-3)
    assert spectral_zeta_det_numeric(PowerLawSpectrum(4.0, 2.0)) == pytest.approx(math.pi, abs=1e-3)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("beta", [1.5, 2.0, 3.0])
def test_numeric_oracle_grid(c, beta):
    spectrum = PowerLawSpectrum(c, beta)
    closed, numeric = spectral_zeta_det(spectrum), spectral_zeta_det_numeric(spectrum)
    assert abs(numeric - closed) / closed < 1e-3


def test_numeric_oracle_needs_truncation():
    with pytest.raises(ValueError):
        spectral_zeta_det_numeric(PowerLawSpectrum(1.0, 2.0, truncation=100))


def test_zero_table_pinned_values():
    t = ZetaZeroTable()
    assert len(t) == 100
    assert round(t[1], 9) == 14.134725142
    assert round(t[2], 9) == 21.022039639
    assert round(t[3], 9) == 25.010857580
    assert np.all(np.diff(t.gammas) > 0)


def test_zero_table_against_mpmath():
    mpmath.mp.dps = 20
    for k in (1, 2, 3, 10, 50, 100):
        assert ZetaZeroTable()[k] == pytest.approx(float(mpmath.zetazero(k).imag), abs=1e-9)


def test_gamma_product():
    t = ZetaZeroTable()
    assert gamma_product(t, [1]) == t[1]
    assert gamma_product(t, [1, 2, 3]) == pytest.approx(GAMMA_123, rel=1e-12)
    assert gamma_product(t, [37]) == t[37]
    with pytest.raises(ValueError):
        gamma_product(t, [])
    with pytest.raises(IndexError):
        gamma_product(t, [101])


def test_chain_factor_worked_value():
    n = chain_factor_value(1.0, PowerLawSpectrum(1.0, 2.0), [1, 2, 3], ZetaZeroTable())
    assert n == pytest.approx(2 * math.pi * GAMMA_123, rel=1e-12)
    assert abs(n - 46695.0) < 0.5


def test_chain_deterministic():
    a, b = derive_chain(SEED, 50), derive_chain(SEED, 50)
    assert a == b


def test_chain_prefix_stable():
    assert np.array_equal(chain_values(SEED, 10), chain_values(SEED, 100)[:10])


def test_chain_guard_and_components():
    chain = derive_chain(SEED, 500)
    for i, f in enumerate(chain):
        assert f.index == i
        assert f.value != 0 and 1e-100 <= abs(f.value) <= 1e100
        assert abs(f.det_g) >= 1e-6
        assert 0.5 <= f.spectral_scale <= 2.0
        assert len(set(f.zero_indices)) == 3 and all(1 <= k <= 100 for k in f.zero_indices)
        assert f.det_zeta == pytest.approx(spectral_zeta_det(PowerLawSpectrum(f.spectral_scale, 2.0)), rel=1e-14)
        assert f.gamma_product == pytest.approx(gamma_product(ZetaZeroTable(), f.zero_indices), rel=1e-14)
        assert f.value == pytest.approx(f.det_g * f.det_zeta * f.gamma_product, rel=1e-14)


def test_chain_zero_indices_cover_table():
    zi = derive_chain_arrays(SEED, 5000)["zero_indices"]
    assert zi.min() == 1 and zi.max() == 100


@settings(max_examples=30, deadline=None)
@given(pos=st.integers(0, 31), flip=st.integers(1, 255))
def test_chain_sensitive_to_every_seed_byte(pos, flip):
    other = bytearray(SEED)
    other[pos] ^= flip
    assert not np.array_equal(chain_values(SEED, 8), chain_values(bytes(other), 8))


def test_chain_rejects_bad_input():
    with pytest.raises(ValueError):
        derive_chain(SEED, 0)
    with pytest.raises(ValueError):
        chain_values(b"x", 3)


def test_chain_guard_budget():
    params = ChainParams(magnitude_guard=(1e99, 1e100))
    with pytest.raises(GenerationError):
        chain_values(SEED, 3, params)
