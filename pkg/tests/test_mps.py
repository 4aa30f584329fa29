import numpy as np
import pytest
from numpy.testing import assert_allclose

from mprho import mps
from mprho.errors import GaugeError, SizeError, ValidityError
from mprho.mps import (
    MatrixProductState,
    basis_state,
    bond_spectra,
    check_canonical,
    dense_amplitudes,
    inject_gauge,
    normalize,
    orthogonalize,
    overlap,
    random_mps,
    superpose,
)


def bell_pair():
    return normalize(superpose(basis_state("00"), basis_state("11")))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def test_basis_state_amplitudes():
    v = dense_amplitudes(basis_state("010"))
    expected = np.zeros(8)
    expected[0b010] = 1.0
    assert_allclose(v, expected)


def test_chain_validation():
    good = basis_state("00")
    with pytest.raises(SizeError):
        MatrixProductState(good.sites[:1], 1)
    with pytest.raises(ValidityError):
        MatrixProductState.from_arrays(
            [np.zeros((1, 2, 3)), np.zeros((2, 2, 1))], 1
        )


@pytest.mark.parametrize("n_sites,chi", [(4, 2), (8, 5), (6, 64)])
def test_random_mps_is_left_canonical_and_normalized(n_sites, chi):
    psi = random_mps(n_sites, chi, seed=7)
    assert psi.oc == n_sites
    expected = tuple(
        min(chi, 2**i, 2 ** (n_sites - i)) for i in range(n_sites + 1)
    )
    assert psi.bond_dims == expected
    report = check_canonical(psi)
    assert report.norm_residual <= 1e-10
    assert report.max_isometry_residual <= 1e-10
    assert report.max_bond_residual <= 1e-10


def test_random_mps_is_deterministic_per_seed():
    a = random_mps(6, 4, seed=123)
    b = random_mps(6, 4, seed=123)
    for x, y in zip(a.arrays(), b.arrays()):
        assert_allclose(x, y)
    c = random_mps(6, 4, seed=124)
    assert abs(overlap(a, c)) < 1 - 1e-6


def test_two_long_random_states_are_nearly_orthogonal():
    # fidelity between independently seeded 50-site states sits at
    # numerical-noise level
    a = random_mps(50, 16, seed=1)
    b = random_mps(50, 16, seed=2)
    assert abs(overlap(a, b)) ** 2 <= 1e-14


# ---------------------------------------------------------------------------
# overlaps against the dense oracle
# ---------------------------------------------------------------------------


def test_overlap_matches_dense_vectors():
    psi = random_mps(6, 5, seed=3)
    phi = random_mps(6, 3, seed=4)
    got = overlap(psi, phi)
    want = np.vdot(dense_amplitudes(psi), dense_amplitudes(phi))
    assert got == pytest.approx(want, abs=1e-13)


def test_overlap_of_basis_states():
    zeros, ones = basis_state("000"), basis_state("111")
    assert overlap(zeros, ones) == 0
    assert overlap(zeros, zeros) == pytest.approx(1.0)
    assert abs(overlap(random_mps(8, 4, seed=5), random_mps(8, 4, seed=5))) == pytest.approx(1.0, abs=1e-10)


def test_superpose_is_linear_in_dense_amplitudes():
    psi = random_mps(5, 3, seed=6)
    phi = random_mps(5, 2, seed=7)
    c1, c2 = 0.3 - 0.1j, -0.8 + 0.5j
    combo = superpose(psi, phi, c1, c2)
    assert_allclose(
        dense_amplitudes(combo),
        c1 * dense_amplitudes(psi) + c2 * dense_amplitudes(phi),
        atol=1e-13,
    )
    assert combo.oc is None
    n = normalize(combo)
    assert mps.norm(n) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("target", [1, 3, 8])
def test_orthogonalize_moves_center_without_changing_state(target):
    psi = random_mps(8, 6, seed=8)
    v0 = dense_amplitudes(psi)
    moved = orthogonalize(psi, target)
    assert moved.oc == target
    assert_allclose(dense_amplitudes(moved), v0, atol=1e-12)
    report = check_canonical(moved)
    assert report.max_isometry_residual <= 1e-12
    # shuttle it around and come back
    back = orthogonalize(orthogonalize(moved, 1), 8)
    assert_allclose(dense_amplitudes(back), v0, atol=1e-12)


def test_check_canonical_flags_a_corrupted_tensor():
    psi = random_mps(6, 4, seed=9)  # oc at site 6
    arrays = psi.arrays()
    arrays[0] = 2.0 * arrays[0]
    bad = MatrixProductState.from_arrays(arrays, psi.oc)
    report = check_canonical(bad)
    # scaled left isometry: A A^dag = 4 * identity
    assert report.site_isometry_residuals[0] == pytest.approx(3.0, abs=1e-10)
    assert report.norm_residual == pytest.approx(1.0, abs=1e-10)


def test_bond_spectra_of_bell_pair():
    spectra = bond_spectra(bell_pair())
    assert len(spectra) == 1
    assert spectra[0].bond == 1
    assert_allclose(sorted(spectra[0].weights), [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_bond_spectra_are_distributions(seed):
    psi = random_mps(7, 5, seed=30 + seed)
    for sp in bond_spectra(psi):
        w = sp.weights
        assert np.all(w >= -1e-14)
        assert np.sum(w) == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(w) <= 1e-14)  # descending


# ---------------------------------------------------------------------------
# gauge injection
# ---------------------------------------------------------------------------


def test_inject_identity_gauge_is_a_no_op():
    psi = random_mps(5, 4, seed=10)
    d = psi.sites[1].dims[2]
    out = inject_gauge(psi, 2, np.eye(d))
    for a, b in zip(psi.arrays(), out.arrays()):
        assert_allclose(a, b, atol=1e-15)
    assert out.oc is None


@pytest.mark.parametrize("bond", [1, 2, 4])
def test_inject_gauge_preserves_the_state(bond):
    psi = random_mps(5, 4, seed=11)
    rng = np.random.default_rng(12)
    d = psi.sites[bond - 1].dims[2]
    r = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    out = inject_gauge(psi, bond, r)
    assert_allclose(dense_amplitudes(out), dense_amplitudes(psi), atol=1e-11)
    # re-orthogonalization restores a clean canonical form
    restored = orthogonalize(out, 3)
    assert check_canonical(restored).max_isometry_residual <= 1e-10
    assert_allclose(dense_amplitudes(restored), dense_amplitudes(psi), atol=1e-11)


def test_inject_gauge_rejects_singular_matrices():
    psi = random_mps(5, 4, seed=13)
    d = psi.sites[1].dims[2]
    with pytest.raises(GaugeError):
        inject_gauge(psi, 2, np.zeros((d, d)))
    with pytest.raises(GaugeError):
        inject_gauge(psi, 2, np.eye(d + 1))


def test_dense_amplitudes_refuses_large_chains():
    psi = basis_state("0" * 21)
    with pytest.raises(SizeError):
        dense_amplitudes(psi)
