"""Matrix-product states on qubit chains.

A chain of ``N`` qubits is stored as one rank-3 tensor per site with
labels ``(chi_i, s_i, chi_{i+1})`` in that storage order.  Sites and
bonds are numbered from 1; ``chi_1`` and ``chi_{N+1}`` are dummy
dimension-1 edges, and interior bond ``i`` connects sites ``i`` and
``i + 1``.

States carry an orthogonality-center position ``oc``: every site left of
``oc`` is a left isometry (contracting ``(chi, s)`` ket against bra gives
the identity on the right bond) and every site right of it is a right
isometry.  ``oc is None`` marks a chain in an unknown gauge, e.g. after
:func:`inject_gauge`.

All operations are pure: they return new states and never write into the
tensors of their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CanonicalFormError, GaugeError, SizeError, ValidityError
from .tensors import IndexKind, IndexLabel, LabeledTensor

__all__ = [
    "BondSpectrum",
    "CanonicalReport",
    "MatrixProductState",
    "basis_state",
    "bond_spectra",
    "check_canonical",
    "dense_amplitudes",
    "inject_gauge",
    "norm",
    "normalize",
    "orthogonalize",
    "overlap",
    "random_mps",
    "superpose",
]


def _site_labels(i: int, dl: int, dr: int) -> tuple[IndexLabel, ...]:
    return (
        IndexLabel(f"chi_{i}", dl, IndexKind.VIRTUAL),
        IndexLabel(f"s_{i}", 2, IndexKind.PHYSICAL),
        IndexLabel(f"chi_{i + 1}", dr, IndexKind.VIRTUAL),
    )


class MatrixProductState:
    """An ``N``-site chain of rank-3 labeled tensors plus a gauge marker."""

    __slots__ = ("sites", "oc")

    def __init__(self, sites: Sequence[LabeledTensor], oc: int | None):
        sites = list(sites)
        if len(sites) < 2:
            raise SizeError(f"need at least 2 sites, got {len(sites)}")
        for i, t in enumerate(sites, start=1):
            if t.ndim != 3 or t.dims[1] != 2:
                raise ValidityError(
                    f"site {i} must be rank-3 with a dim-2 physical index, got {t.dims}"
                )
        if sites[0].dims[0] != 1 or sites[-1].dims[2] != 1:
            raise ValidityError("edge bonds must have dimension 1")
        for i in range(len(sites) - 1):
            if sites[i].dims[2] != sites[i + 1].dims[0]:
                raise ValidityError(
                    f"bond mismatch between sites {i + 1} and {i + 2}: "
                    f"{sites[i].dims[2]} vs {sites[i + 1].dims[0]}"
                )
        if oc is not None and not 1 <= oc <= len(sites):
            raise SizeError(f"oc {oc} out of range 1..{len(sites)}")
        self.sites = sites
        self.oc = oc

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], oc: int | None) -> "MatrixProductState":
        sites = [
            LabeledTensor(_site_labels(i, a.shape[0], a.shape[2]), a)
            for i, a in enumerate(arrays, start=1)
        ]
        return cls(sites, oc)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        """Dimensions of bonds 1..N+1 (edges included)."""
        return tuple(t.dims[0] for t in self.sites) + (1,)

    def site(self, i: int) -> LabeledTensor:
        """Tensor at 1-based site ``i``."""
        if not 1 <= i <= self.n_sites:
            raise SizeError(f"site {i} out of range 1..{self.n_sites}")
        return self.sites[i - 1]

    def arrays(self) -> list[np.ndarray]:
        return [t.data for t in self.sites]

    def copy(self) -> "MatrixProductState":
        return MatrixProductState.from_arrays([a.copy() for a in self.arrays()], self.oc)

    def __repr__(self) -> str:
        return f"MatrixProductState(n_sites={self.n_sites}, bond_dims={self.bond_dims}, oc={self.oc})"


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def random_mps(n_sites: int, chi: int, seed: int | np.random.Generator) -> MatrixProductState:
    """Seeded random state: i.i.d. complex Gaussian tensors, then a QR
    sweep into left-canonical form and a final normalization.

    Interior bond ``i`` has dimension ``min(chi, 2**i, 2**(n_sites - i))``;
    the returned state has ``oc == n_sites``.
    """
    if n_sites < 2:
        raise SizeError(f"need at least 2 sites, got {n_sites}")
    if chi < 1:
        raise SizeError(f"chi must be >= 1, got {chi}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dims = [min(chi, 2**i, 2 ** (n_sites - i)) for i in range(n_sites + 1)]
    arrays = []
    for i in range(n_sites):
        shape = (dims[i], 2, dims[i + 1])
        arrays.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    for i in range(n_sites - 1):
        dl, _, dr = arrays[i].shape
        q, r = np.linalg.qr(arrays[i].reshape(dl * 2, dr))
        arrays[i] = q.reshape(dl, 2, q.shape[1])
        arrays[i + 1] = np.tensordot(r, arrays[i + 1], axes=([1], [0]))
    arrays[-1] = arrays[-1] / np.linalg.norm(arrays[-1])
    return MatrixProductState.from_arrays(arrays, n_sites)


def basis_state(bits: str | Sequence[int]) -> MatrixProductState:
    """Computational-basis product state, e.g. ``basis_state("0110")``."""
    values = [int(b) for b in bits]
    if any(b not in (0, 1) for b in values):
        raise ValidityError(f"bits must be 0/1, got {bits!r}")
    arrays = []
    for b in values:
        a = np.zeros((1, 2, 1), dtype=np.complex128)
        a[0, b, 0] = 1.0
        arrays.append(a)
    return MatrixProductState.from_arrays(arrays, 1)


# ---------------------------------------------------------------------------
# gauge moves
# ---------------------------------------------------------------------------


def _push_right(arrays: list[np.ndarray], i: int) -> None:
    """QR step turning site ``i`` (0-based) into a left isometry."""
    dl, _, dr = arrays[i].shape
    q, r = np.linalg.qr(arrays[i].reshape(dl * 2, dr))
    arrays[i] = q.reshape(dl, 2, q.shape[1])
    arrays[i + 1] = np.tensordot(r, arrays[i + 1], axes=([1], [0]))


def _push_left(arrays: list[np.ndarray], i: int) -> None:
    """LQ step turning site ``i`` (0-based) into a right isometry."""
    dl, _, dr = arrays[i].shape
    m = arrays[i].reshape(dl, 2 * dr)
    q, r = np.linalg.qr(m.conj().T)
    arrays[i] = q.conj().T.reshape(q.shape[1], 2, dr)
    arrays[i - 1] = np.tensordot(arrays[i - 1], r.conj().T, axes=([2], [0]))


def orthogonalize(psi: MatrixProductState, target: int) -> MatrixProductState:
    """Move the orthogonality center to ``target`` with QR/LQ sweeps.

    Works from the current center when it is known and from both edges
    when it is not.  The represented state is unchanged.
    """
    n = psi.n_sites
    if not 1 <= target <= n:
        raise SizeError(f"target {target} out of range 1..{n}")
    arrays = list(psi.arrays())
    if psi.oc is None:
        for i in range(0, target - 1):
            _push_right(arrays, i)
        for i in range(n - 1, target - 1, -1):
            _push_left(arrays, i)
    elif psi.oc <= target:
        for i in range(psi.oc - 1, target - 1):
            _push_right(arrays, i)
    else:
        for i in range(psi.oc - 1, target - 1, -1):
            _push_left(arrays, i)
    return MatrixProductState.from_arrays(arrays, target)


def norm(psi: MatrixProductState) -> float:
    """Norm ``sqrt(<psi|psi>)`` computed by a transfer contraction."""
    e = np.ones((1, 1), dtype=np.complex128)
    for a in psi.arrays():
        t = np.tensordot(e, a.conj(), axes=([0], [0]))  # [y, s, x']
        e = np.tensordot(t, a, axes=([0, 1], [0, 1]))  # [x', y']
    return float(np.sqrt(abs(e[0, 0].real)))


def normalize(psi: MatrixProductState) -> MatrixProductState:
    """Rescale to unit norm (moves the center to site 1 if unknown)."""
    state = psi if psi.oc is not None else orthogonalize(psi, 1)
    arrays = list(state.arrays())
    scale = np.linalg.norm(arrays[state.oc - 1])
    if scale == 0:
        raise ValidityError("cannot normalize the zero state")
    arrays[state.oc - 1] = arrays[state.oc - 1] / scale
    return MatrixProductState.from_arrays(arrays, state.oc)


def inject_gauge(psi: MatrixProductState, bond: int, r: np.ndarray) -> MatrixProductState:
    """Insert ``R @ R^-1`` on interior bond ``bond`` (1-based).

    Site ``bond`` absorbs ``R`` and site ``bond + 1`` absorbs ``R^-1``;
    the represented state is untouched but the canonical form is lost, so
    the result carries ``oc = None``.

    Raises:
        GaugeError: if ``r`` is not square, has the wrong dimension, or is
            numerically singular.
    """
    n = psi.n_sites
    if not 1 <= bond <= n - 1:
        raise SizeError(f"bond {bond} out of range 1..{n - 1}")
    r = np.asarray(r, dtype=np.complex128)
    d = psi.sites[bond - 1].dims[2]
    if r.shape != (d, d):
        raise GaugeError(f"gauge matrix must be {d}x{d}, got {r.shape}")
    try:
        r_inv = np.linalg.inv(r)
    except np.linalg.LinAlgError as exc:
        raise GaugeError("gauge matrix is singular") from exc
    if not np.all(np.isfinite(r_inv)) or np.max(np.abs(r @ r_inv - np.eye(d))) > 1e-6:
        raise GaugeError("gauge matrix is numerically singular")
    arrays = list(psi.arrays())
    arrays[bond - 1] = np.tensordot(arrays[bond - 1], r, axes=([2], [0]))
    arrays[bond] = np.tensordot(r_inv, arrays[bond], axes=([1], [0]))
    return MatrixProductState.from_arrays(arrays, None)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class BondSpectrum:
    """Squared Schmidt coefficients across one interior bond."""

    bond: int
    weights: np.ndarray


@dataclass
class CanonicalReport:
    """Gauge health of a chain.

    ``site_isometry_residuals[i]`` is the max-abs deviation of site
    ``i + 1`` from the isometry required by its side of the center (the
    smaller of the two deviations when the center is unknown; the center
    site itself scores 0).  ``bond_residuals[i]`` checks, at interior bond
    ``i + 1``, that transferring the bond spectrum through the next site
    reproduces the neighbouring spectrum.
    """

    oc: int | None
    norm_residual: float
    site_isometry_residuals: list[float] = field(repr=False)
    bond_residuals: list[float] = field(repr=False)

    @property
    def max_isometry_residual(self) -> float:
        return max(self.site_isometry_residuals)

    @property
    def max_bond_residual(self) -> float:
        return max(self.bond_residuals) if self.bond_residuals else 0.0


def _left_residual(a: np.ndarray) -> float:
    g = np.tensordot(a.conj(), a, axes=([0, 1], [0, 1]))
    return float(np.max(np.abs(g - np.eye(a.shape[2]))))


def _right_residual(a: np.ndarray) -> float:
    g = np.tensordot(a, a.conj(), axes=([1, 2], [1, 2]))
    return float(np.max(np.abs(g - np.eye(a.shape[0]))))


def _vidal_form(arrays: list[np.ndarray]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Left-canonical tensors in the diagonal gauge plus per-bond spectra.

    Brings a copy into right-canonical form, then sweeps left to right
    with full SVDs; the squared singular values at each interior bond are
    the Schmidt weights.
    """
    arrs = list(arrays)
    for i in range(len(arrs) - 1, 0, -1):
        _push_left(arrs, i)
    spectra: list[np.ndarray] = []
    gauge: list[np.ndarray] = []
    t = arrs[0]
    for i in range(len(arrs) - 1):
        dl, _, dr = t.shape
        u, s, vt = np.linalg.svd(t.reshape(dl * 2, dr), full_matrices=False)
        spectra.append(s**2)
        gauge.append(u.reshape(dl, 2, s.size))
        t = np.tensordot(s[:, None] * vt, arrs[i + 1], axes=([1], [0]))
    gauge.append(t)
    return gauge, spectra


def bond_spectra(psi: MatrixProductState) -> list[BondSpectrum]:
    """Schmidt weight distributions across every interior bond."""
    _, spectra = _vidal_form(psi.arrays())
    return [BondSpectrum(bond=i + 1, weights=w) for i, w in enumerate(spectra)]


def check_canonical(psi: MatrixProductState) -> CanonicalReport:
    """Report isometry, normalization, and bond-spectrum residuals."""
    arrays = psi.arrays()
    n = len(arrays)
    residuals = []
    for i, a in enumerate(arrays, start=1):
        if psi.oc is None:
            residuals.append(min(_left_residual(a), _right_residual(a)))
        elif i < psi.oc:
            residuals.append(_left_residual(a))
        elif i > psi.oc:
            residuals.append(_right_residual(a))
        else:
            residuals.append(0.0)
    gauge, spectra = _vidal_form(arrays)
    bond_res = []
    r_env = np.ones((1, 1), dtype=np.complex128)
    for i in range(n - 1, 0, -1):
        a = gauge[i]
        r_env = np.einsum("asb,bc,dsc->ad", a, r_env, a.conj(), optimize=True)
        bond_res.append(float(np.max(np.abs(r_env - np.diag(spectra[i - 1])))))
    bond_res.reverse()
    return CanonicalReport(
        oc=psi.oc,
        norm_residual=abs(norm(psi) - 1.0),
        site_isometry_residuals=residuals,
        bond_residuals=bond_res,
    )


# ---------------------------------------------------------------------------
# pairings
# ---------------------------------------------------------------------------


def overlap(psi: MatrixProductState, phi: MatrixProductState) -> complex:
    """Inner product ``<psi|phi>`` (first argument is conjugated)."""
    if psi.n_sites != phi.n_sites:
        raise SizeError(f"length mismatch: {psi.n_sites} vs {phi.n_sites}")
    e = np.ones((1, 1), dtype=np.complex128)
    for a, b in zip(psi.arrays(), phi.arrays()):
        t = np.tensordot(e, a.conj(), axes=([0], [0]))  # [y, s, x']
        e = np.tensordot(t, b, axes=([0, 1], [0, 1]))  # [x', y']
    return complex(e[0, 0])


def superpose(
    psi: MatrixProductState,
    phi: MatrixProductState,
    c_psi: complex = 1.0,
    c_phi: complex = 1.0,
) -> MatrixProductState:
    """Direct-sum representation of ``c_psi |psi> + c_phi |phi>``.

    Interior bonds add; the result is not normalized and carries
    ``oc = None``.
    """
    if psi.n_sites != phi.n_sites:
        raise SizeError(f"length mismatch: {psi.n_sites} vs {phi.n_sites}")
    a_arr, b_arr = psi.arrays(), phi.arrays()
    n = psi.n_sites
    arrays = []
    for i in range(n):
        a, b = a_arr[i], b_arr[i]
        if i == 0:
            block = np.concatenate([c_psi * a, c_phi * b], axis=2)
        elif i == n - 1:
            block = np.concatenate([a, b], axis=0)
        else:
            dl = a.shape[0] + b.shape[0]
            dr = a.shape[2] + b.shape[2]
            block = np.zeros((dl, 2, dr), dtype=np.complex128)
            block[: a.shape[0], :, : a.shape[2]] = a
            block[a.shape[0] :, :, a.shape[2] :] = b
        arrays.append(block)
    return MatrixProductState.from_arrays(arrays, None)


def dense_amplitudes(psi: MatrixProductState, max_sites: int = 20) -> np.ndarray:
    """Amplitudes as a length ``2**N`` vector; site 1 is the most
    significant bit of the basis index."""
    if psi.n_sites > max_sites:
        raise SizeError(
            f"refusing to densify {psi.n_sites} sites (cap {max_sites})"
        )
    v = np.ones((1, 1), dtype=np.complex128)
    for a in psi.arrays():
        v = np.tensordot(v, a, axes=([1], [0]))
        v = v.reshape(v.shape[0] * 2, v.shape[2])
    return v[:, 0]
