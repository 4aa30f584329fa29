"""Dense complex tensors with named, typed indices.

Every index of a :class:`LabeledTensor` carries an :class:`IndexLabel`
(name, dimension, kind).  Structural operations -- contraction, index
merging/splitting, factorizations -- are phrased in terms of index *names*
instead of axis positions, which keeps chain algorithms readable and makes
mis-wiring a hard error instead of a silent transpose bug.

Conventions
-----------
* All data is stored as ``complex128`` in C (row-major) order over the
  stored label order.
* :func:`merge_labels` linearizes the merged indices row-major in the
  order they are listed, i.e. the first listed index varies slowest.
* :func:`dagger` conjugates entries and maps every label name to its
  primed partner: a trailing ``'`` is appended, or stripped if already
  present, so the map is an involution.
* Truncated SVDs drop singular values below ``cutoff`` *relative* to the
  largest one and report the discarded weight (sum of squared dropped
  singular values).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ContractionError,
    LabelError,
    PartitionError,
    ReshapeError,
)

__all__ = [
    "DEFAULT_CUTOFF",
    "IndexKind",
    "IndexLabel",
    "LabeledTensor",
    "SvdResult",
    "contract",
    "dagger",
    "merge_labels",
    "primed",
    "relabel",
    "reorder",
    "split_label",
    "svd",
    "truncated_matrix_svd",
]

#: Relative singular-value cutoff used when no explicit value is given.
DEFAULT_CUTOFF = 1e-12


class IndexKind(enum.Enum):
    """Role of a tensor index inside a chain.

    VIRTUAL
        Bond index carrying coherence between neighbouring sites.
    PHYSICAL
        A qubit index (dimension 2 throughout this package).
    MIXTURE
        Purification index; contracted ket-against-bra, it injects
        classical mixing into the represented operator.
    KRAUS
        Enumerates operators of a channel before being absorbed into a
        mixture index.
    """

    VIRTUAL = "virtual"
    PHYSICAL = "physical"
    MIXTURE = "mixture"
    KRAUS = "kraus"


@dataclass(frozen=True)
class IndexLabel:
    """Name, dimension and kind of one tensor index."""

    name: str
    dim: int
    kind: IndexKind = IndexKind.VIRTUAL

    def __post_init__(self) -> None:
        if not self.name:
            raise LabelError("index label needs a non-empty name")
        if int(self.dim) < 1:
            raise LabelError(f"label {self.name!r} has dimension {self.dim}; must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))
        if not isinstance(self.kind, IndexKind):
            object.__setattr__(self, "kind", IndexKind(self.kind))

    def with_name(self, name: str) -> "IndexLabel":
        return IndexLabel(name, self.dim, self.kind)


def primed(name: str) -> str:
    """Primed partner of an index name (involution: ``x`` <-> ``x'``)."""
    return name[:-1] if name.endswith("'") else name + "'"


class LabeledTensor:
    """A dense complex tensor whose axes are addressed by label names.

    The wrapped array is not defensively copied; treat tensors as
    immutable values and never write into ``.data`` of a tensor you did
    not just create.
    """

    __slots__ = ("_labels", "_data")

    def __init__(self, labels: Iterable[IndexLabel], data: np.ndarray):
        labels = tuple(labels)
        names = [lab.name for lab in labels]
        if len(set(names)) != len(names):
            raise LabelError(f"duplicate index names in {names}")
        arr = np.asarray(data, dtype=np.complex128)
        dims = tuple(lab.dim for lab in labels)
        if arr.shape != dims:
            raise ReshapeError(
                f"data shape {arr.shape} does not match label dims {dims}"
            )
        self._labels = labels
        self._data = arr

    # -- inspection ----------------------------------------------------

    @property
    def labels(self) -> tuple[IndexLabel, ...]:
        return self._labels

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(lab.name for lab in self._labels)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(lab.dim for lab in self._labels)

    @property
    def ndim(self) -> int:
        return len(self._labels)

    @property
    def size(self) -> int:
        return int(self._data.size)

    def axis(self, name: str) -> int:
        for i, lab in enumerate(self._labels):
            if lab.name == name:
                return i
        raise LabelError(f"tensor has no index named {name!r}; has {self.names}")

    def label(self, name: str) -> IndexLabel:
        return self._labels[self.axis(name)]

    def has_label(self, name: str) -> bool:
        return any(lab.name == name for lab in self._labels)

    def norm(self) -> float:
        """Frobenius norm of the entries."""
        return float(np.linalg.norm(self._data))

    def item(self) -> complex:
        if self.size != 1:
            raise ReshapeError(f"item() needs a scalar tensor, got dims {self.dims}")
        return complex(self._data.reshape(()))

    def copy(self) -> "LabeledTensor":
        return LabeledTensor(self._labels, self._data.copy())

    def __repr__(self) -> str:
        parts = ", ".join(f"{lab.name}:{lab.dim}" for lab in self._labels)
        return f"LabeledTensor({parts})"


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------


def reorder(t: LabeledTensor, names: Sequence[str]) -> LabeledTensor:
    """Transpose ``t`` so its labels appear in the order ``names``.

    ``names`` must be a permutation of the tensor's label names.
    """
    if sorted(names) != sorted(t.names):
        raise LabelError(f"{list(names)} is not a permutation of {t.names}")
    if tuple(names) == t.names:
        return t
    perm = [t.axis(n) for n in names]
    return LabeledTensor([t.labels[p] for p in perm], t.data.transpose(perm))


def relabel(t: LabeledTensor, mapping: Mapping[str, str]) -> LabeledTensor:
    """Rename indices according to ``mapping`` (old name -> new name)."""
    for old in mapping:
        t.axis(old)  # raises LabelError for unknown names
    labels = [
        lab.with_name(mapping.get(lab.name, lab.name)) for lab in t.labels
    ]
    return LabeledTensor(labels, t.data)


def dagger(t: LabeledTensor) -> LabeledTensor:
    """Entrywise conjugate with every label name primed.

    Applying :func:`dagger` twice returns a tensor equal to the input.
    """
    labels = [lab.with_name(primed(lab.name)) for lab in t.labels]
    return LabeledTensor(labels, t.data.conj())


def contract(
    a: LabeledTensor,
    b: LabeledTensor,
    labels_a: Sequence[str] | None = None,
    labels_b: Sequence[str] | None = None,
) -> LabeledTensor:
    """Contract two tensors over shared (or explicitly paired) indices.

    With two arguments, every index name present in both tensors is
    contracted; the result keeps ``a``'s remaining labels followed by
    ``b``'s.  With four arguments, ``labels_a[i]`` of ``a`` is contracted
    against ``labels_b[i]`` of ``b`` regardless of names.  If no indices
    are contracted the result is the outer product.

    Raises:
        ContractionError: if paired dimensions differ, pairing lists are
            inconsistent, or the result would carry duplicate names.
    """
    if (labels_a is None) != (labels_b is None):
        raise ContractionError("labels_a and labels_b must be given together")
    if labels_a is None:
        names_b = set(b.names)
        labels_a = [n for n in a.names if n in names_b]
        labels_b = list(labels_a)
    else:
        labels_a = list(labels_a)
        labels_b = list(labels_b)
        if len(labels_a) != len(labels_b):
            raise ContractionError(
                f"pairing lists differ in length: {labels_a} vs {labels_b}"
            )
    for na, nb in zip(labels_a, labels_b):
        da, db = a.label(na).dim, b.label(nb).dim
        if da != db:
            raise ContractionError(
                f"cannot contract {na!r} (dim {da}) with {nb!r} (dim {db})"
            )
    axes_a = [a.axis(n) for n in labels_a]
    axes_b = [b.axis(n) for n in labels_b]
    out_labels = [lab for lab in a.labels if lab.name not in set(labels_a)] + [
        lab for lab in b.labels if lab.name not in set(labels_b)
    ]
    out_names = [lab.name for lab in out_labels]
    if len(set(out_names)) != len(out_names):
        raise ContractionError(
            f"contraction result would carry duplicate names {out_names}"
        )
    data = np.tensordot(a.data, b.data, axes=(axes_a, axes_b))
    return LabeledTensor(out_labels, data)


def merge_labels(
    t: LabeledTensor,
    names: Sequence[str],
    new_name: str,
    kind: IndexKind | None = None,
) -> LabeledTensor:
    """Fuse the indices ``names`` into a single index ``new_name``.

    The merged index is linearized row-major in the order the names are
    listed (first name slowest) and placed at the position the first
    listed index occupied.  ``kind`` defaults to the kind of the first
    merged index.
    """
    names = list(names)
    if not names:
        raise ReshapeError("merge_labels needs at least one index name")
    if len(set(names)) != len(names):
        raise ReshapeError(f"duplicate names in merge list {names}")
    merged = [t.label(n) for n in names]
    if t.has_label(new_name) and new_name not in names:
        raise LabelError(f"new name {new_name!r} collides with an existing index")
    keep = [lab for lab in t.labels if lab.name not in set(names)]
    # position of the merged index: where the first merged name sat,
    # counted among the surviving labels
    first = t.axis(names[0])
    pos = sum(1 for lab in t.labels[:first] if lab.name not in set(names))
    order = [lab.name for lab in keep[:pos]] + names + [lab.name for lab in keep[pos:]]
    data = reorder(t, order).data
    merged_dim = int(np.prod([lab.dim for lab in merged], dtype=np.int64))
    new_shape = (
        tuple(lab.dim for lab in keep[:pos])
        + (merged_dim,)
        + tuple(lab.dim for lab in keep[pos:])
    )
    new_label = IndexLabel(new_name, merged_dim, kind if kind is not None else merged[0].kind)
    out_labels = keep[:pos] + [new_label] + keep[pos:]
    return LabeledTensor(out_labels, data.reshape(new_shape))


def split_label(
    t: LabeledTensor,
    name: str,
    parts: Sequence[IndexLabel],
) -> LabeledTensor:
    """Inverse of :func:`merge_labels`: explode one index into ``parts``.

    The dimensions of ``parts`` must multiply to the dimension of the
    split index; the first part varies slowest, matching the merge
    convention.
    """
    parts = list(parts)
    if not parts:
        raise ReshapeError("split_label needs at least one part")
    ax = t.axis(name)
    total = int(np.prod([p.dim for p in parts], dtype=np.int64))
    if total != t.label(name).dim:
        raise ReshapeError(
            f"parts {[p.dim for p in parts]} multiply to {total}, "
            f"but {name!r} has dimension {t.label(name).dim}"
        )
    other = [lab.name for lab in t.labels if lab.name != name]
    for p in parts:
        if p.name in other or sum(q.name == p.name for q in parts) > 1:
            raise LabelError(f"split part name {p.name!r} collides with an existing index")
    new_shape = t.dims[:ax] + tuple(p.dim for p in parts) + t.dims[ax + 1 :]
    out_labels = list(t.labels[:ax]) + parts + list(t.labels[ax + 1 :])
    return LabeledTensor(out_labels, t.data.reshape(new_shape))


# ---------------------------------------------------------------------------
# factorizations
# ---------------------------------------------------------------------------


@dataclass
class SvdResult:
    """Outcome of a truncated SVD across a named index bipartition.

    Attributes:
        u: Left factor; carries the row labels plus the new bond.
        s: Kept singular values, descending, as a real array.
        vt: Right factor; carries the new bond plus the column labels.
        discarded_weight: Sum of squared dropped singular values.
    """

    u: LabeledTensor
    s: np.ndarray
    vt: LabeledTensor
    discarded_weight: float

    @property
    def rank(self) -> int:
        return int(self.s.size)


def _svd_dense(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD with a Gram-matrix fallback for the rare LAPACK non-convergence."""
    try:
        return np.linalg.svd(matrix, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    m, n = matrix.shape
    if m > n:
        u, s, vt = _svd_dense(matrix.conj().T)
        return vt.conj().T, s, u.conj().T
    w, u = np.linalg.eigh(matrix @ matrix.conj().T)
    w = np.clip(w[::-1], 0.0, None)
    u = u[:, ::-1]
    s = np.sqrt(w)
    safe = np.where(s > 0, s, 1.0)
    vt = (u.conj().T @ matrix) / safe[:, None]
    return u, s, vt


def truncated_matrix_svd(
    matrix: np.ndarray,
    cutoff: float = DEFAULT_CUTOFF,
    max_rank: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Truncated SVD of a 2-D array.

    Singular values below ``cutoff * s_max`` are dropped, then the rank is
    capped at ``max_rank`` if given; at least one singular value is always
    kept.  Returns ``(u, s, vt, discarded_weight)``.
    """
    if matrix.ndim != 2:
        raise ReshapeError(f"expected a matrix, got shape {matrix.shape}")
    u, s, vt = _svd_dense(matrix)
    keep = s.size
    if cutoff > 0 and s.size and s[0] > 0:
        keep = int(np.count_nonzero(s >= cutoff * s[0]))
    if max_rank is not None:
        keep = min(keep, int(max_rank))
    keep = max(keep, 1)
    discarded = float(np.real(np.sum(s[keep:] ** 2)))
    return u[:, :keep], s[:keep], vt[:keep], discarded


def svd(
    t: LabeledTensor,
    row_labels: Sequence[str],
    cutoff: float = DEFAULT_CUTOFF,
    max_rank: int | None = None,
    new_name: str = "sigma",
    new_kind: IndexKind = IndexKind.VIRTUAL,
) -> SvdResult:
    """Truncated SVD of ``t`` across the bipartition ``row_labels`` | rest.

    Rows are linearized in the order given by ``row_labels``; columns keep
    their stored order.  The new bond index is called ``new_name`` (kind
    ``new_kind``) and appears last on ``u`` and first on ``vt``, so that
    ``contract(u_scaled, vt)`` reassembles the tensor, where ``u_scaled``
    is ``u`` with the singular values multiplied into the bond.

    Raises:
        PartitionError: if ``row_labels`` is empty or contains every index.
        LabelError: if ``new_name`` collides with a surviving index name.
    """
    rows = list(row_labels)
    if not rows:
        raise PartitionError("row_labels must name at least one index")
    if len(set(rows)) != len(rows):
        raise PartitionError(f"duplicate names in row_labels {rows}")
    row_set = set(rows)
    for n in rows:
        t.axis(n)
    cols = [lab.name for lab in t.labels if lab.name not in row_set]
    if not cols:
        raise PartitionError("row_labels must leave at least one column index")
    if t.has_label(new_name):
        raise LabelError(f"new bond name {new_name!r} collides with an existing index")

    ordered = reorder(t, rows + cols)
    row_dim = int(np.prod([t.label(n).dim for n in rows], dtype=np.int64))
    col_dim = int(np.prod([t.label(n).dim for n in cols], dtype=np.int64))
    u, s, vt, discarded = truncated_matrix_svd(
        ordered.data.reshape(row_dim, col_dim), cutoff=cutoff, max_rank=max_rank
    )
    bond = IndexLabel(new_name, s.size, new_kind)
    row_labs = [t.label(n) for n in rows]
    col_labs = [t.label(n) for n in cols]
    u_t = LabeledTensor(row_labs + [bond], u.reshape([lab.dim for lab in row_labs] + [s.size]))
    vt_t = LabeledTensor([bond] + col_labs, vt.reshape([s.size] + [lab.dim for lab in col_labs]))
    return SvdResult(u=u_t, s=s.astype(np.float64), vt=vt_t, discarded_weight=discarded)
