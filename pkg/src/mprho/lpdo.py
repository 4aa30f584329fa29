"""Locally purified matrix-product density operators.

A density operator on an ``N``-qubit chain is stored through a purifying
ket: one rank-4 tensor per site with labels
``(chi_i, s_i, kappa_i, chi_{i+1})``.  Contracting every ``kappa`` index
ket-against-bra yields the represented operator

    rho = sum_kappa  (chain of A) (chain of A)^dag ,

which is positive semidefinite by construction and is never materialized
globally; traces, purities and overlaps are evaluated with transfer
contractions whose cost is polynomial in the chain length and the bond
and mixture dimensions.

The canonical-form conventions follow :mod:`mprho.mps`: sites are
1-based, ``chi_1`` and ``chi_{N+1}`` are dummy edges, and every tensor
away from the orthogonality center ``oc`` is an isometry once its
``kappa`` index is grouped with the bond pointing away from the center.
Operations are pure and return new states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    CanonicalFormError,
    GaugeError,
    SizeError,
    ValidityError,
)
from .mps import MatrixProductState
from .tensors import (
    DEFAULT_CUTOFF,
    IndexKind,
    IndexLabel,
    LabeledTensor,
    truncated_matrix_svd,
)

__all__ = [
    "MatrixProductDensityOperator",
    "MixtureSpectrum",
    "all_bitstring_probabilities",
    "all_pauli_expectations",
    "apply_kappa_isometry",
    "bitstring_probability",
    "check_isometry",
    "compress_kappa",
    "expectation",
    "fidelity_p",
    "from_mps",
    "ghz",
    "hsip",
    "mixture_spectrum",
    "orthogonalize",
    "partial_trace_site",
    "pauli_tomography",
    "purity",
    "trace",
    "transport_kappa",
]

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def _site_labels(i: int, dl: int, kappa: int, dr: int) -> tuple[IndexLabel, ...]:
    return (
        IndexLabel(f"chi_{i}", dl, IndexKind.VIRTUAL),
        IndexLabel(f"s_{i}", 2, IndexKind.PHYSICAL),
        IndexLabel(f"kappa_{i}", kappa, IndexKind.MIXTURE),
        IndexLabel(f"chi_{i + 1}", dr, IndexKind.VIRTUAL),
    )


class MatrixProductDensityOperator:
    """Purified density-operator chain with a tracked center."""

    __slots__ = ("sites", "oc")

    def __init__(self, sites: Sequence[LabeledTensor], oc: int):
        sites = list(sites)
        if not sites:
            raise SizeError("need at least 1 site")
        for i, t in enumerate(sites, start=1):
            if t.ndim != 4 or t.dims[1] != 2:
                raise ValidityError(
                    f"site {i} must be rank-4 with a dim-2 physical index, got {t.dims}"
                )
        if sites[0].dims[0] != 1 or sites[-1].dims[3] != 1:
            raise ValidityError("edge bonds must have dimension 1")
        for i in range(len(sites) - 1):
            if sites[i].dims[3] != sites[i + 1].dims[0]:
                raise ValidityError(
                    f"bond mismatch between sites {i + 1} and {i + 2}: "
                    f"{sites[i].dims[3]} vs {sites[i + 1].dims[0]}"
                )
        if not 1 <= oc <= len(sites):
            raise SizeError(f"oc {oc} out of range 1..{len(sites)}")
        self.sites = sites
        self.oc = oc

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], oc: int) -> "MatrixProductDensityOperator":
        sites = [
            LabeledTensor(_site_labels(i, a.shape[0], a.shape[2], a.shape[3]), a)
            for i, a in enumerate(arrays, start=1)
        ]
        return cls(sites, oc)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(t.dims[0] for t in self.sites) + (1,)

    @property
    def kappa_dims(self) -> tuple[int, ...]:
        return tuple(t.dims[2] for t in self.sites)

    def site(self, i: int) -> LabeledTensor:
        if not 1 <= i <= self.n_sites:
            raise SizeError(f"site {i} out of range 1..{self.n_sites}")
        return self.sites[i - 1]

    def arrays(self) -> list[np.ndarray]:
        return [t.data for t in self.sites]

    def copy(self) -> "MatrixProductDensityOperator":
        return MatrixProductDensityOperator.from_arrays(
            [a.copy() for a in self.arrays()], self.oc
        )

    def __repr__(self) -> str:
        return (
            f"MatrixProductDensityOperator(n_sites={self.n_sites}, "
            f"bond_dims={self.bond_dims}, kappa_dims={self.kappa_dims}, oc={self.oc})"
        )


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def from_mps(psi: MatrixProductState) -> MatrixProductDensityOperator:
    """Pure-state density operator |psi><psi| (every kappa dim is 1)."""
    if psi.oc is None:
        raise CanonicalFormError("orthogonalize the state before purifying it")
    arrays = [a.reshape(a.shape[0], 2, 1, a.shape[2]) for a in psi.arrays()]
    return MatrixProductDensityOperator.from_arrays(arrays, psi.oc)


def ghz(n_sites: int) -> MatrixProductDensityOperator:
    """GHZ state ``(|0...0> + |1...1>)/sqrt(2)`` with interior bonds of 2.

    Built right-canonical with ``oc = 1``; every kappa dimension is 1.
    """
    if n_sites < 2:
        raise SizeError(f"need at least 2 sites, got {n_sites}")
    first = np.zeros((1, 2, 1, 2), dtype=np.complex128)
    first[0, 0, 0, 0] = first[0, 1, 0, 1] = 1 / np.sqrt(2)
    bulk = np.zeros((2, 2, 1, 2), dtype=np.complex128)
    bulk[0, 0, 0, 0] = bulk[1, 1, 0, 1] = 1.0
    last = np.zeros((2, 2, 1, 1), dtype=np.complex128)
    last[0, 0, 0, 0] = last[1, 1, 0, 0] = 1.0
    arrays = [first] + [bulk.copy() for _ in range(n_sites - 2)] + [last]
    return MatrixProductDensityOperator.from_arrays(arrays, 1)


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


def _push_right(arrays: list[np.ndarray], i: int, cutoff: float, chi_max: int | None) -> None:
    dl, _, k, dr = arrays[i].shape
    u, s, vt, _ = truncated_matrix_svd(
        arrays[i].reshape(dl * 2 * k, dr), cutoff=cutoff, max_rank=chi_max
    )
    arrays[i] = u.reshape(dl, 2, k, s.size)
    arrays[i + 1] = np.tensordot(s[:, None] * vt, arrays[i + 1], axes=([1], [0]))


def _push_left(arrays: list[np.ndarray], i: int, cutoff: float, chi_max: int | None) -> None:
    dl, _, k, dr = arrays[i].shape
    u, s, vt, _ = truncated_matrix_svd(
        arrays[i].reshape(dl, 2 * k * dr), cutoff=cutoff, max_rank=chi_max
    )
    arrays[i] = vt.reshape(s.size, 2, k, dr)
    arrays[i - 1] = np.tensordot(arrays[i - 1], u * s, axes=([3], [0]))


def orthogonalize(
    rho: MatrixProductDensityOperator,
    target: int,
    cutoff: float = DEFAULT_CUTOFF,
    chi_max: int | None = None,
) -> MatrixProductDensityOperator:
    """Move the orthogonality center to ``target`` by SVD sweeps.

    Bonds crossed on the way are re-factorized, so singular values below
    ``cutoff`` (relative) are shed and ``chi_max``, when given, caps the
    bond dimension.
    """
    n = rho.n_sites
    if not 1 <= target <= n:
        raise SizeError(f"target {target} out of range 1..{n}")
    arrays = list(rho.arrays())
    if rho.oc <= target:
        for i in range(rho.oc - 1, target - 1):
            _push_right(arrays, i, cutoff, chi_max)
    else:
        for i in range(rho.oc - 1, target - 1, -1):
            _push_left(arrays, i, cutoff, chi_max)
    return MatrixProductDensityOperator.from_arrays(arrays, target)


def check_isometry(rho: MatrixProductDensityOperator) -> float:
    """Largest deviation of any off-center site from its isometry.

    Sites left of the center contract ``(chi, s, kappa)`` ket-against-bra
    to an identity on the right bond; sites right of it do the mirror
    image.  Returns the max-abs residual over the chain (0 for a single
    site).
    """
    worst = 0.0
    for i, a in enumerate(rho.arrays(), start=1):
        if i < rho.oc:
            g = np.tensordot(a.conj(), a, axes=([0, 1, 2], [0, 1, 2]))
            worst = max(worst, float(np.max(np.abs(g - np.eye(a.shape[3])))))
        elif i > rho.oc:
            g = np.tensordot(a, a.conj(), axes=([1, 2, 3], [1, 2, 3]))
            worst = max(worst, float(np.max(np.abs(g - np.eye(a.shape[0])))))
    return worst


# ---------------------------------------------------------------------------
# scalar metrics
# ---------------------------------------------------------------------------


def trace(rho: MatrixProductDensityOperator) -> float:
    """Trace of the represented operator (real part; the contraction is
    real to rounding by construction)."""
    e = np.ones((1, 1), dtype=np.complex128)
    for a in rho.arrays():
        t = np.tensordot(e, a, axes=([0], [0]))  # [g, s, m, e]
        e = np.tensordot(t, a.conj(), axes=([0, 1, 2], [0, 1, 2]))  # [e, h]
    return float(e.reshape(()).real)


def _hsip_transfer(a_arrays: list[np.ndarray], b_arrays: list[np.ndarray]) -> complex:
    """Four-layer transfer contraction of Tr[rho sigma]."""
    e = np.ones((1, 1, 1, 1), dtype=np.complex128)
    for a, b in zip(a_arrays, b_arrays):
        e = np.tensordot(e, a, axes=([0], [0]))  # [g,b,c, s,m,x]
        e = np.tensordot(e, a.conj(), axes=([0, 4], [0, 2]))  # [b,c,s,x, t,y]
        e = np.tensordot(e, b, axes=([0, 4], [0, 1]))  # [c,s,x,y, n,z]
        e = np.tensordot(e, b.conj(), axes=([0, 1, 4], [0, 1, 2]))  # [x,y,z,w]
    return complex(e.reshape(()))


def hsip(rho: MatrixProductDensityOperator, sigma: MatrixProductDensityOperator) -> float:
    """Hilbert-Schmidt inner product Tr[rho sigma].

    Real for the positive operators this package produces; a residual
    imaginary part at rounding level is discarded.
    """
    if rho.n_sites != sigma.n_sites:
        raise SizeError(f"length mismatch: {rho.n_sites} vs {sigma.n_sites}")
    return float(_hsip_transfer(rho.arrays(), sigma.arrays()).real)


def purity(rho: MatrixProductDensityOperator) -> float:
    """Tr[rho^2]."""
    return float(_hsip_transfer(rho.arrays(), rho.arrays()).real)


def fidelity_p(rho: MatrixProductDensityOperator, sigma: MatrixProductDensityOperator) -> float:
    """Purity-normalized overlap Tr[rho sigma] / max(Tr[rho^2], Tr[sigma^2]).

    Equals 1 iff the two operators coincide; tiny negative overlaps from
    rounding are clamped to 0.
    """
    val = hsip(rho, sigma) / max(purity(rho), purity(sigma))
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def expectation(rho: MatrixProductDensityOperator, pauli_string: str) -> float:
    """Tr[P rho] for a Pauli string such as ``"IXZY"`` (site 1 first)."""
    if len(pauli_string) != rho.n_sites:
        raise SizeError(
            f"string length {len(pauli_string)} != {rho.n_sites} sites"
        )
    e = np.ones((1, 1), dtype=np.complex128)
    for a, ch in zip(rho.arrays(), pauli_string):
        try:
            p = PAULI[ch]
        except KeyError:
            raise ValidityError(f"unknown Pauli letter {ch!r}") from None
        t = np.tensordot(e, a, axes=([0], [0]))  # [g, s, m, x]
        t = np.tensordot(t, p, axes=([1], [1]))  # [g, m, x, t]
        e = np.tensordot(t, a.conj(), axes=([0, 1, 3], [0, 2, 1]))  # [x, y]
    return float(e.reshape(()).real)


def bitstring_probability(rho: MatrixProductDensityOperator, bits: str | Sequence[int]) -> float:
    """Diagonal matrix element <s|rho|s> of a computational basis state."""
    values = [int(b) for b in bits]
    if len(values) != rho.n_sites:
        raise SizeError(f"bitstring length {len(values)} != {rho.n_sites} sites")
    if any(b not in (0, 1) for b in values):
        raise ValidityError(f"bits must be 0/1, got {bits!r}")
    e = np.ones((1, 1), dtype=np.complex128)
    for a, b in zip(rho.arrays(), values):
        sl = a[:, b, :, :]
        t = np.tensordot(e, sl, axes=([0], [0]))  # [g, m, x]
        e = np.tensordot(t, sl.conj(), axes=([0, 1], [0, 1]))  # [x, y]
    val = float(e.reshape(()).real)
    return 0.0 if -1e-10 < val < 0.0 else val


def all_pauli_expectations(
    rho: MatrixProductDensityOperator, max_sites: int = 6
) -> tuple[list[str], np.ndarray]:
    """Expectations of every Pauli string, lexicographic over ``IXYZ``.

    The 4^N strings are evaluated in one vectorized sweep; refuses chains
    longer than ``max_sites``.
    """
    n = rho.n_sites
    if n > max_sites:
        raise SizeError(f"4**{n} strings is past the cap (max_sites={max_sites})")
    ops = np.stack([PAULI[c] for c in "IXYZ"])  # [p, t, s]
    v = np.ones((1, 1), dtype=np.complex128)
    for a in rho.arrays():
        k = np.tensordot(a, a.conj(), axes=([2], [2]))  # [a,s,x, g,t,y]
        m = np.einsum("pts,asxgty->agpxy", ops, k, optimize=True)
        dl, dr = a.shape[0], a.shape[3]
        m = m.reshape(dl * dl, 4 * dr * dr)
        v = (v @ m).reshape(-1, dr * dr)
    strings = ["".join(t) for t in itertools.product("IXYZ", repeat=n)]
    return strings, v[:, 0].real.copy()


def all_bitstring_probabilities(
    rho: MatrixProductDensityOperator, max_sites: int = 12
) -> np.ndarray:
    """All 2^N diagonal elements, basis index with site 1 most significant."""
    n = rho.n_sites
    if n > max_sites:
        raise SizeError(f"2**{n} bitstrings is past the cap (max_sites={max_sites})")
    v = np.ones((1, 1), dtype=np.complex128)
    for a in rho.arrays():
        dl, dr = a.shape[0], a.shape[3]
        m = np.empty((dl * dl, 2 * dr * dr), dtype=np.complex128)
        for b in (0, 1):
            sl = a[:, b, :, :]
            k = np.tensordot(sl, sl.conj(), axes=([1], [1]))  # [a,x, g,y]
            m[:, b * dr * dr : (b + 1) * dr * dr] = k.transpose(0, 2, 1, 3).reshape(
                dl * dl, dr * dr
            )
        v = (v @ m).reshape(-1, dr * dr)
    probs = v[:, 0].real.copy()
    np.clip(probs, 0.0, None, out=probs)
    return probs


def pauli_tomography(
    rho: MatrixProductDensityOperator, strings: Sequence[str] | None = None
) -> dict[str, float]:
    """Expectation table for the given strings (all 4^N when omitted)."""
    if strings is None:
        names, values = all_pauli_expectations(rho)
        return dict(zip(names, values))
    return {s: expectation(rho, s) for s in strings}


# ---------------------------------------------------------------------------
# mixture structure
# ---------------------------------------------------------------------------


@dataclass
class MixtureSpectrum:
    """Weight distribution carried by one site's mixture index."""

    site: int
    probabilities: np.ndarray
    method: str = "diagonal"


def mixture_spectrum(
    rho: MatrixProductDensityOperator, site: int, method: str = "diagonal"
) -> MixtureSpectrum:
    """Probabilities carried by ``kappa`` at ``site``.

    The center is moved to ``site`` first.  ``method="diagonal"`` reads
    the diagonal of the kappa Gram form in the current gauge (kappa
    storage order); ``method="eigenvalues"`` returns its spectrum in
    descending order, which is gauge independent.  Both are clamped at 0
    and normalized.
    """
    if method not in ("diagonal", "eigenvalues"):
        raise ValidityError(f"unknown method {method!r}")
    state = orthogonalize(rho, site)
    a = state.sites[site - 1].data
    g = np.tensordot(a, a.conj(), axes=([0, 1, 3], [0, 1, 3]))  # [m, m']
    if method == "diagonal":
        p = np.real(np.diag(g)).copy()
    else:
        p = np.linalg.eigvalsh(g)[::-1].copy()
    np.clip(p, 0.0, None, out=p)
    total = p.sum()
    if total == 0:
        raise ValidityError("zero state has no mixture spectrum")
    return MixtureSpectrum(site=site, probabilities=p / total, method=method)


def _compress_site_kappa(
    a: np.ndarray, weight_cutoff: float, kappa_max: int | None
) -> np.ndarray:
    """Drop kappa directions whose Gram weight is below ``weight_cutoff``
    relative to the largest one.  Call only on the center site."""
    dl, _, k, dr = a.shape
    m = a.transpose(0, 1, 3, 2).reshape(dl * 2 * dr, k)
    # weights are squared singular values, so take the square root of the
    # relative weight cutoff
    u, s, _, _ = truncated_matrix_svd(
        m, cutoff=float(np.sqrt(weight_cutoff)), max_rank=kappa_max
    )
    return (u * s).reshape(dl, 2, dr, s.size).transpose(0, 1, 3, 2)


def compress_kappa(
    rho: MatrixProductDensityOperator,
    site: int | None = None,
    weight_cutoff: float = DEFAULT_CUTOFF,
    kappa_max: int | None = None,
) -> MatrixProductDensityOperator:
    """Trim negligible mixture directions at one site (or, with
    ``site=None``, at every site in a single left-to-right sweep).

    The represented operator changes by at most the discarded Gram
    weight; with the default cutoff that is a 1e-12-relative
    perturbation.
    """
    if site is not None:
        state = orthogonalize(rho, site)
        arrays = list(state.arrays())
        arrays[site - 1] = _compress_site_kappa(arrays[site - 1], weight_cutoff, kappa_max)
        return MatrixProductDensityOperator.from_arrays(arrays, site)
    state = orthogonalize(rho, 1)
    arrays = list(state.arrays())
    for i in range(len(arrays)):
        arrays[i] = _compress_site_kappa(arrays[i], weight_cutoff, kappa_max)
        if i + 1 < len(arrays):
            _push_right(arrays, i, DEFAULT_CUTOFF, None)
    return MatrixProductDensityOperator.from_arrays(arrays, len(arrays))


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------


def partial_trace_site(
    rho: MatrixProductDensityOperator, site: int
) -> MatrixProductDensityOperator:
    """Trace out one qubit, merging its physical and mixture indices into
    the neighbour's mixture index.

    The neighbour is ``site - 1`` when it exists, otherwise ``site + 1``;
    its kappa dimension grows to ``kappa_nb * 2 * kappa_site``.  Remaining
    sites are renumbered contiguously and the center lands on the merged
    neighbour.  The trace is unchanged.
    """
    n = rho.n_sites
    if n < 2:
        raise SizeError("cannot trace the only site of a chain")
    if not 1 <= site <= n:
        raise SizeError(f"site {site} out of range 1..{n}")
    state = orthogonalize(rho, site)
    arrays = list(state.arrays())
    idx = site - 1
    if site > 1:
        nb = idx - 1
        t = np.tensordot(arrays[nb], arrays[idx], axes=([3], [0]))
        # [dl, s_nb, k_nb, s_i, k_i, dr] -> kappa = (k_nb, s_i, k_i)
        dl, _, k_nb, _, k_i, dr = t.shape
        merged = t.reshape(dl, 2, k_nb * 2 * k_i, dr)
        new_arrays = arrays[:nb] + [merged] + arrays[idx + 1 :]
        new_oc = site - 1
    else:
        nb = idx + 1
        t = np.tensordot(arrays[idx], arrays[nb], axes=([3], [0]))
        # [1, s_1, k_1, s_2, k_2, dr] -> bring (s_2) forward, fuse (s_1, k_1, k_2)
        t = t.transpose(0, 3, 1, 2, 4, 5)
        dl, _, _, k_1, k_2, dr = t.shape
        merged = t.reshape(dl, 2, 2 * k_1 * k_2, dr)
        new_arrays = [merged] + arrays[nb + 1 :]
        new_oc = 1
    return MatrixProductDensityOperator.from_arrays(new_arrays, new_oc)


def transport_kappa(
    rho: MatrixProductDensityOperator,
    source: int,
    dest: int,
    cutoff: float = DEFAULT_CUTOFF,
    chi_max: int | None = None,
) -> MatrixProductDensityOperator:
    """Move the mixture index of ``source`` onto the adjacent ``dest``.

    The pair is contracted and re-split with the fused
    ``kappa_source * kappa_dest`` index assigned to the destination,
    which also becomes the center; the source keeps a dimension-1 kappa.
    The represented operator is unchanged up to the SVD cutoff.
    """
    n = rho.n_sites
    if not 1 <= source <= n or not 1 <= dest <= n:
        raise SizeError(f"sites {source}->{dest} out of range 1..{n}")
    if abs(source - dest) != 1:
        raise SizeError(f"kappa moves one site at a time, got {source}->{dest}")
    state = orthogonalize(rho, source)
    arrays = list(state.arrays())
    left, right = min(source, dest), max(source, dest)
    li, ri = left - 1, right - 1
    t = np.tensordot(arrays[li], arrays[ri], axes=([3], [0]))
    # [dl, s_l, k_l, s_r, k_r, dr]
    dl, _, k_l, _, k_r, dr = t.shape
    if dest == left:
        m = t.transpose(0, 1, 2, 4, 3, 5).reshape(dl * 2 * k_l * k_r, 2 * dr)
        u, s, vt, _ = truncated_matrix_svd(m, cutoff=cutoff, max_rank=chi_max)
        arrays[li] = (u * s).reshape(dl, 2, k_l * k_r, s.size)
        arrays[ri] = vt.reshape(s.size, 2, 1, dr)
    else:
        m = t.transpose(0, 1, 3, 2, 4, 5).reshape(dl * 2, 2 * k_l * k_r * dr)
        u, s, vt, _ = truncated_matrix_svd(m, cutoff=cutoff, max_rank=chi_max)
        arrays[li] = u.reshape(dl, 2, 1, s.size)
        arrays[ri] = (s[:, None] * vt).reshape(s.size, 2, k_l * k_r, dr)
    return MatrixProductDensityOperator.from_arrays(arrays, dest)


def apply_kappa_isometry(
    rho: MatrixProductDensityOperator, site: int, u: np.ndarray
) -> MatrixProductDensityOperator:
    """Rotate/extend one mixture index by an isometry ``u``.

    ``u`` must have shape ``(m, kappa_site)`` with orthonormal columns
    (``u^dag u = 1``); the represented operator is exactly invariant and
    the new kappa dimension is ``m``.
    """
    a = rho.site(site).data
    u = np.asarray(u, dtype=np.complex128)
    k = a.shape[2]
    if u.ndim != 2 or u.shape[1] != k:
        raise GaugeError(f"need shape (m, {k}), got {u.shape}")
    if u.shape[0] < k:
        raise GaugeError(f"isometry cannot shrink kappa: {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(k))) > 1e-10:
        raise GaugeError("matrix columns are not orthonormal")
    new = np.tensordot(a, u, axes=([2], [1])).transpose(0, 1, 3, 2)
    arrays = list(rho.arrays())
    arrays[site - 1] = new
    return MatrixProductDensityOperator.from_arrays(arrays, rho.oc)
