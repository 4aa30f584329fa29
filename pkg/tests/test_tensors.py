import numpy as np
import pytest
from numpy.testing import assert_allclose

from mprho.errors import ContractionError, LabelError, PartitionError, ReshapeError
from mprho.tensors import (
    IndexKind,
    IndexLabel,
    LabeledTensor,
    contract,
    dagger,
    merge_labels,
    primed,
    relabel,
    reorder,
    split_label,
    svd,
    truncated_matrix_svd,
)


def rand_tensor(rng, dims, names=None, kinds=None):
    names = names or [f"i{k}" for k in range(len(dims))]
    kinds = kinds or [IndexKind.VIRTUAL] * len(dims)
    labels = [IndexLabel(n, d, k) for n, d, k in zip(names, dims, kinds)]
    data = rng.standard_normal(dims) + 1j * rng.standard_normal(dims)
    return LabeledTensor(labels, data)


def reassemble(res):
    """u * diag(s) * vt, contracted back over the new bond."""
    scaled = LabeledTensor(res.u.labels, res.u.data * res.s)
    return contract(scaled, res.vt)


# ---------------------------------------------------------------------------
# construction and bookkeeping
# ---------------------------------------------------------------------------


def test_construction_checks_shape_and_names():
    lab = [IndexLabel("a", 2), IndexLabel("b", 3)]
    t = LabeledTensor(lab, np.zeros((2, 3)))
    assert t.dims == (2, 3)
    assert t.names == ("a", "b")
    with pytest.raises(ReshapeError):
        LabeledTensor(lab, np.zeros((3, 2)))
    with pytest.raises(LabelError):
        LabeledTensor([IndexLabel("a", 2), IndexLabel("a", 2)], np.zeros((2, 2)))
    with pytest.raises(LabelError):
        IndexLabel("a", 0)
    with pytest.raises(LabelError):
        t.axis("missing")


def test_primed_is_an_involution():
    assert primed("chi_3") == "chi_3'"
    assert primed("chi_3'") == "chi_3"


def test_dagger_conjugates_and_primes():
    rng = np.random.default_rng(0)
    t = rand_tensor(rng, (2, 3))
    td = dagger(t)
    assert td.names == ("i0'", "i1'")
    assert_allclose(td.data, t.data.conj())
    tdd = dagger(td)
    assert tdd.names == t.names
    assert_allclose(tdd.data, t.data)


def test_reorder_and_relabel():
    rng = np.random.default_rng(1)
    t = rand_tensor(rng, (2, 3, 4))
    r = reorder(t, ["i2", "i0", "i1"])
    assert r.dims == (4, 2, 3)
    assert_allclose(r.data, t.data.transpose(2, 0, 1))
    s = relabel(t, {"i0": "left"})
    assert s.names == ("left", "i1", "i2")
    with pytest.raises(LabelError):
        relabel(t, {"nope": "x"})
    with pytest.raises(LabelError):
        reorder(t, ["i0", "i1"])


# ---------------------------------------------------------------------------
# contraction
# ---------------------------------------------------------------------------


def test_contract_matches_matrix_product():
    rng = np.random.default_rng(2)
    a = rand_tensor(rng, (3, 4), names=["r", "k"])
    b = rand_tensor(rng, (4, 5), names=["k", "c"])
    c = contract(a, b)
    assert c.names == ("r", "c")
    assert_allclose(c.data, a.data @ b.data, atol=1e-13)


def test_contract_explicit_pairing_and_outer_product():
    rng = np.random.default_rng(3)
    a = rand_tensor(rng, (2, 3), names=["x", "y"])
    b = rand_tensor(rng, (3, 2), names=["p", "q"])
    c = contract(a, b, ["y"], ["p"])
    assert c.names == ("x", "q")
    assert_allclose(c.data, a.data @ b.data, atol=1e-13)
    # no shared names -> outer product
    outer = contract(a, relabel(b, {"p": "u", "q": "v"}))
    assert outer.dims == (2, 3, 3, 2)
    assert_allclose(outer.data, np.tensordot(a.data, b.data, axes=0))


def test_contract_dimension_mismatch_raises():
    rng = np.random.default_rng(4)
    a = rand_tensor(rng, (2, 3), names=["x", "k"])
    b = rand_tensor(rng, (4, 2), names=["k", "y"])
    with pytest.raises(ContractionError):
        contract(a, b)
    with pytest.raises(ContractionError):
        contract(a, b, ["x"], ["k", "y"])


def test_contract_over_all_labels_gives_squared_norm():
    rng = np.random.default_rng(5)
    t = rand_tensor(rng, (2, 3, 2))
    td = dagger(t)
    out = contract(t, td, list(t.names), [primed(n) for n in t.names])
    val = out.item()
    assert out.ndim == 0
    assert abs(val.imag) < 1e-13
    assert val.real == pytest.approx(t.norm() ** 2, rel=1e-13)


def test_contract_is_bilinear():
    rng = np.random.default_rng(6)
    a1 = rand_tensor(rng, (2, 3), names=["x", "k"])
    a2 = rand_tensor(rng, (2, 3), names=["x", "k"])
    b = rand_tensor(rng, (3, 4), names=["k", "y"])
    alpha, beta = 0.7 - 0.2j, -1.1 + 0.4j
    lhs = contract(
        LabeledTensor(a1.labels, alpha * a1.data + beta * a2.data), b
    )
    rhs = alpha * contract(a1, b).data + beta * contract(a2, b).data
    assert_allclose(lhs.data, rhs, atol=1e-12)


def test_contract_chain_is_order_independent():
    rng = np.random.default_rng(7)
    a = rand_tensor(rng, (2, 3), names=["a", "ab"])
    b = rand_tensor(rng, (3, 4), names=["ab", "bc"])
    c = rand_tensor(rng, (4, 2), names=["bc", "c"])
    left = contract(contract(a, b), c)
    right = contract(a, contract(b, c))
    assert left.names == right.names
    assert_allclose(left.data, right.data, atol=1e-12)


# ---------------------------------------------------------------------------
# merge / split
# ---------------------------------------------------------------------------


def test_merge_linearization_is_row_major_in_argument_order():
    s = IndexLabel("s", 2, IndexKind.PHYSICAL)
    k = IndexLabel("kappa", 2, IndexKind.MIXTURE)
    data = np.zeros((2, 2))
    data[1, 0] = 1.0  # (s=1, kappa=0)
    t = LabeledTensor([s, k], data)
    m = merge_labels(t, ["s", "kappa"], "sk")
    # row-major over (s, kappa): flat position = s * 2 + kappa = 2
    assert m.dims == (4,)
    assert_allclose(m.data, [0, 0, 1, 0])
    # argument order matters: (kappa, s) puts it at kappa * 2 + s = 1
    m2 = merge_labels(t, ["kappa", "s"], "ks")
    assert_allclose(m2.data, [0, 1, 0, 0])


def test_merge_then_split_round_trips():
    rng = np.random.default_rng(8)
    t = rand_tensor(rng, (2, 3, 4, 2))
    m = merge_labels(t, ["i1", "i2"], "m", kind=IndexKind.MIXTURE)
    assert m.dims == (2, 12, 2)
    assert m.label("m").kind == IndexKind.MIXTURE
    back = split_label(
        m, "m", [IndexLabel("i1", 3), IndexLabel("i2", 4)]
    )
    assert back.names == t.names
    assert_allclose(back.data, t.data)


def test_merge_preserves_entries_under_any_position():
    rng = np.random.default_rng(9)
    t = rand_tensor(rng, (2, 3, 4))
    m = merge_labels(t, ["i2", "i0"], "f")
    # merged index sits where the first listed label sat among survivors
    assert m.names == ("i1", "f")
    # spot check one entry: (i0=1, i1=2, i2=3) -> f = i2 * 2 + i0 = 7
    assert m.data[2, 7] == pytest.approx(t.data[1, 2, 3])


def test_split_dimension_mismatch_raises():
    rng = np.random.default_rng(10)
    t = rand_tensor(rng, (2, 6))
    with pytest.raises(ReshapeError):
        split_label(t, "i1", [IndexLabel("a", 2), IndexLabel("b", 4)])
    with pytest.raises(LabelError):
        split_label(t, "i1", [IndexLabel("i0", 2), IndexLabel("b", 3)])
    with pytest.raises(LabelError):
        merge_labels(t, ["i1"], "i0")


# ---------------------------------------------------------------------------
# svd
# ---------------------------------------------------------------------------


def test_svd_of_bell_pair_gives_two_equal_singular_values():
    # |00> + |11>, normalized; Schmidt values across the site split are
    # both 1/sqrt(2).
    data = np.zeros((2, 2), dtype=complex)
    data[0, 0] = data[1, 1] = 1 / np.sqrt(2)
    t = LabeledTensor(
        [IndexLabel("s1", 2, IndexKind.PHYSICAL), IndexLabel("s2", 2, IndexKind.PHYSICAL)],
        data,
    )
    res = svd(t, ["s1"])
    assert_allclose(res.s, [np.sqrt(0.5), np.sqrt(0.5)], atol=1e-15)
    assert res.discarded_weight == 0.0


@pytest.mark.parametrize("seed", range(6))
def test_svd_reconstructs_random_tensors(seed):
    rng = np.random.default_rng(seed)
    ndim = rng.integers(2, 5)
    dims = tuple(int(d) for d in rng.integers(1, 9, size=ndim))
    while int(np.prod(dims)) > 2**12:
        dims = dims[:-1]
    t = rand_tensor(rng, dims)
    nrows = int(rng.integers(1, len(dims)))
    rows = list(t.names[:nrows])
    res = svd(t, rows, cutoff=1e-12)
    rebuilt = reassemble(res)
    back = reorder(rebuilt, t.names)
    assert np.linalg.norm(back.data - t.data) <= 1e-12 * max(t.norm(), 1.0)
    # u and vt are isometries over (rows | bond) and (bond | cols)
    u = res.u
    gram_u = contract(u, dagger(u), rows, [primed(n) for n in rows])
    assert_allclose(gram_u.data, np.eye(res.rank), atol=1e-12)
    cols = [n for n in t.names if n not in rows]
    vt = res.vt
    gram_v = contract(vt, dagger(vt), cols, [primed(n) for n in cols])
    assert_allclose(gram_v.data, np.eye(res.rank), atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_svd_truncation_accounts_discarded_weight(seed):
    rng = np.random.default_rng(100 + seed)
    t = rand_tensor(rng, (6, 5, 4))
    full = svd(t, ["i0", "i1"], cutoff=0.0)
    max_rank = 3
    res = svd(t, ["i0", "i1"], cutoff=0.0, max_rank=max_rank)
    assert res.rank == max_rank
    expected_discard = float(np.sum(full.s[max_rank:] ** 2))
    assert res.discarded_weight == pytest.approx(expected_discard, rel=1e-12)
    # discarded weight equals the squared Frobenius error of the rebuild
    err = np.linalg.norm(reorder(reassemble(res), t.names).data - t.data) ** 2
    assert err == pytest.approx(res.discarded_weight, rel=1e-9, abs=1e-13)


def test_svd_relative_cutoff_drops_small_values():
    u = np.linalg.qr(np.random.default_rng(11).standard_normal((4, 4)))[0]
    s = np.array([1.0, 0.5, 1e-13, 1e-16])
    m = (u * s) @ u.T
    t = LabeledTensor([IndexLabel("r", 4), IndexLabel("c", 4)], m)
    res = svd(t, ["r"], cutoff=1e-12)
    assert res.rank == 2
    assert res.discarded_weight == pytest.approx(1e-26 + 1e-32, rel=1e-6)


def test_svd_partition_errors():
    rng = np.random.default_rng(12)
    t = rand_tensor(rng, (2, 3))
    with pytest.raises(PartitionError):
        svd(t, [])
    with pytest.raises(PartitionError):
        svd(t, ["i0", "i1"])
    with pytest.raises(LabelError):
        svd(t, ["i0"], new_name="i1")


def test_truncated_matrix_svd_edge_cases():
    # a zero matrix has no scale for the relative cutoff: nothing is dropped
    u, s, vt, disc = truncated_matrix_svd(np.zeros((3, 3)), cutoff=1e-12)
    assert s.shape == (3,)
    assert_allclose(s, 0.0)
    assert disc == 0.0
    # a hard rank cap always keeps at least one value
    rng = np.random.default_rng(13)
    m = rng.standard_normal((4, 4))
    _, s1, _, _ = truncated_matrix_svd(m, cutoff=0.0, max_rank=0)
    assert s1.shape == (1,)
