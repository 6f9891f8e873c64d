"""Enumerated general linear groups over prime fields.

GL_m(F_q) is held as a lexicographically sorted stack of integer matrices, so
an element id is its index in that stack and every derived matrix is
reproducible from (m, q) alone. Subgroups are predicates plus cached id lists
on the one table.
"""

import logging
import math
from functools import cached_property, lru_cache
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

from .algebra import SUPPORTED_PRIMES, AdditiveCharacter, Matrix
from .exceptions import BudgetExceededError, NotInAmbientError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 20_000

IntArray = NDArray[np.int64]


def group_order(m: int, q: int) -> int:
    """|GL_m(F_q)| = prod_{k<m} (q^m - q^k)."""
    return math.prod(q**m - q**k for k in range(m))


def encode(mats: IntArray, q: int) -> IntArray:
    """Base-q code of each matrix; first entry most significant, so codes sort lexicographically."""
    mats = np.asarray(mats, dtype=np.int64)
    flat = mats.reshape(mats.shape[0], -1)
    powers = q ** np.arange(flat.shape[1] - 1, -1, -1, dtype=np.int64)
    return flat @ powers


def decode(codes: IntArray, m: int, q: int) -> IntArray:
    powers = q ** np.arange(m * m - 1, -1, -1, dtype=np.int64)
    digits = (np.asarray(codes, dtype=np.int64)[:, None] // powers[None, :]) % q
    return digits.reshape(-1, m, m)


def det_mod(mats: IntArray, q: int) -> IntArray:
    # Entries are < 7 and m <= 4, so the float determinant rounds exactly.
    dets = np.rint(np.linalg.det(np.asarray(mats, dtype=np.float64))).astype(np.int64)
    return dets % q


def inverse_mod(mats: IntArray, q: int) -> IntArray:
    """Inverses mod q through the integer adjugate."""
    mats = np.asarray(mats, dtype=np.int64)
    as_float = mats.astype(np.float64)
    dets = np.rint(np.linalg.det(as_float)).astype(np.int64)
    adjugate = np.rint(dets[:, None, None] * np.linalg.inv(as_float)).astype(np.int64)
    inverse_table = np.array([0] + [pow(x, -1, q) for x in range(1, q)], dtype=np.int64)
    return (adjugate * inverse_table[dets % q][:, None, None]) % q


def multiply_mod(a: IntArray, b: IntArray, q: int) -> IntArray:
    return np.einsum("...ij,...jk->...ik", a, b) % q


class GroupElement(BaseModel):
    """An invertible m x m matrix over F_q."""

    q: int = Field(..., description="The prime q")
    entries: tuple[tuple[int, ...], ...] = Field(..., description="Rows, reduced mod q")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="before")
    @classmethod
    def reduce_entries(cls, data: Any) -> Any:
        """Reduce every entry mod q."""
        if isinstance(data, dict) and "entries" in data and "q" in data:
            q = int(data["q"])
            rows = np.asarray(data["entries"], dtype=np.int64) % q
            data = {**data, "entries": tuple(tuple(int(x) for x in row) for row in rows)}
        return data

    @field_validator("q")
    @classmethod
    def validate_q(cls, v: int) -> int:
        if v not in SUPPORTED_PRIMES:
            msg = f"q must be prime ≤ 7, got {v}"
            raise ValueError(msg)
        return v

    @model_validator(mode="after")
    def validate_invertible(self) -> Self:
        """Entries form a square matrix with nonzero determinant."""
        m = len(self.entries)
        if m == 0 or any(len(row) != m for row in self.entries):
            msg = "Group element must be a nonempty square matrix"
            raise ValueError(msg)
        if self.det == 0:
            msg = f"Matrix {self.entries} is singular over F_{self.q}"
            raise ValueError(msg)
        return self

    @classmethod
    def from_matrix(cls, mat: Any, q: int) -> "GroupElement":
        return cls(q=q, entries=np.asarray(mat, dtype=np.int64).tolist())

    @classmethod
    def identity(cls, m: int, q: int) -> "GroupElement":
        return cls.from_matrix(np.eye(m, dtype=np.int64), q)

    @classmethod
    def scalar(cls, z: int, m: int, q: int) -> "GroupElement":
        return cls.from_matrix(z * np.eye(m, dtype=np.int64), q)

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def matrix(self) -> IntArray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def det(self) -> int:
        return int(det_mod(self.matrix[None], self.q)[0])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.q != self.q or other.m != self.m:
            msg = f"Cannot multiply GL_{self.m}(F_{self.q}) by GL_{other.m}(F_{other.q})"
            raise ValueError(msg)
        return GroupElement.from_matrix(multiply_mod(self.matrix, other.matrix, self.q), self.q)

    def inverse(self) -> "GroupElement":
        return GroupElement.from_matrix(inverse_mod(self.matrix[None], self.q)[0], self.q)

    def transpose(self) -> "GroupElement":
        return GroupElement.from_matrix(self.matrix.T, self.q)

    def scaled(self, z: int) -> "GroupElement":
        return GroupElement.from_matrix(z * self.matrix, self.q)

    @property
    def is_upper_unitriangular(self) -> bool:
        return bool(_upper_unitriangular_mask(self.matrix[None])[0])


def _upper_unitriangular_mask(mats: IntArray) -> NDArray[np.bool_]:
    m = mats.shape[-1]
    lower = np.tril(np.ones((m, m), dtype=bool))
    identity = np.eye(m, dtype=np.int64)
    return np.all(np.where(lower, mats == identity, True), axis=(1, 2))


def superdiagonal_sums(mats: IntArray, q: int) -> IntArray:
    """u_{1,2} + ... + u_{m-1,m} mod q for each matrix."""
    mats = np.asarray(mats, dtype=np.int64)
    if mats.shape[-1] < 2:
        return np.zeros(mats.shape[0], dtype=np.int64)
    return np.diagonal(mats, offset=1, axis1=1, axis2=2).sum(axis=1) % q


class GroupTable:
    """Fully enumerated GL_m(F_q) with lexicographic element ids."""

    def __init__(self, m: int, q: int, elements: IntArray):
        """Initialize the table from a lexicographically sorted element stack.

        Args:
            m: Matrix size
            q: The prime q
            elements: Array of shape (N, m, m) in lexicographic order
        """
        self.m = m
        self.q = q
        self.elements = np.ascontiguousarray(elements, dtype=np.int64)
        self.elements.setflags(write=False)
        self.codes = encode(self.elements, q)
        self.codes.setflags(write=False)

    def __len__(self) -> int:
        return int(self.elements.shape[0])

    def __repr__(self) -> str:
        return f"GroupTable(m={self.m}, q={self.q}, order={len(self)})"

    def ids(self, mats: IntArray) -> IntArray:
        """Element ids of a stack of matrices (reduced mod q on the way in)."""
        mats = np.asarray(mats, dtype=np.int64).reshape(-1, self.m, self.m) % self.q
        codes = encode(mats, self.q)
        found = np.searchsorted(self.codes, codes)
        found = np.minimum(found, len(self) - 1)
        if not np.array_equal(self.codes[found], codes):
            msg = f"Matrix outside GL_{self.m}(F_{self.q})"
            raise NotInAmbientError(msg)
        return found

    def id_of(self, g: GroupElement) -> int:
        if g.m != self.m or g.q != self.q:
            msg = f"GL_{g.m}(F_{g.q}) element passed to GL_{self.m}(F_{self.q}) table"
            raise NotInAmbientError(msg)
        return int(self.ids(g.matrix[None])[0])

    def element(self, idx: int) -> GroupElement:
        return GroupElement.from_matrix(self.elements[idx], self.q)

    def _matrix(self, h: GroupElement | IntArray) -> IntArray:
        return h.matrix if isinstance(h, GroupElement) else np.asarray(h, dtype=np.int64)

    def left_multiply_ids(self, h: GroupElement | IntArray) -> IntArray:
        """Ids of h*g for every g, in table order."""
        return self.ids(multiply_mod(self._matrix(h)[None], self.elements, self.q))

    def right_multiply_ids(self, h: GroupElement | IntArray) -> IntArray:
        """Ids of g*h for every g, in table order."""
        return self.ids(multiply_mod(self.elements, self._matrix(h)[None], self.q))

    def product_ids(self, a_ids: IntArray, b_ids: IntArray) -> IntArray:
        return self.ids(multiply_mod(self.elements[a_ids], self.elements[b_ids], self.q))

    @cached_property
    def inverse_ids(self) -> IntArray:
        return self.ids(inverse_mod(self.elements, self.q))

    @cached_property
    def iota_ids(self) -> IntArray:
        """Ids of the transpose inverse of every element."""
        return self.ids(np.swapaxes(inverse_mod(self.elements, self.q), 1, 2))

    @cached_property
    def unipotent_mask(self) -> NDArray[np.bool_]:
        return _upper_unitriangular_mask(self.elements)

    @cached_property
    def unipotent_ids(self) -> IntArray:
        """U: upper unitriangular matrices."""
        return np.flatnonzero(self.unipotent_mask)

    @cached_property
    def mirabolic_mask(self) -> NDArray[np.bool_]:
        last_row = np.zeros(self.m, dtype=np.int64)
        last_row[-1] = 1
        return np.all(self.elements[:, -1, :] == last_row, axis=1)

    @cached_property
    def mirabolic_ids(self) -> IntArray:
        """P: last row equal to (0, ..., 0, 1)."""
        return np.flatnonzero(self.mirabolic_mask)

    @cached_property
    def radical_ids(self) -> IntArray:
        """V: identity except the last column above the diagonal."""
        return self.parabolic_radical_ids(self.m - 1)

    @cached_property
    def levi_ids(self) -> IntArray:
        """G_{m-1} embedded as diag(g, 1)."""
        corner = self.elements[:, :, -1].copy()
        return np.flatnonzero(self.mirabolic_mask & np.all(corner[:, :-1] == 0, axis=1))

    @cached_property
    def center_ids(self) -> IntArray:
        """Scalar matrices z*I for z in F_q^x, ordered by z."""
        return np.array(
            [self.id_of(GroupElement.scalar(z, self.m, self.q)) for z in range(1, self.q)],
            dtype=np.int64,
        )

    def parabolic_radical_ids(self, k: int) -> IntArray:
        """N_k: unipotent radical of the standard parabolic with blocks (k, m - k)."""
        if not 0 < k < self.m:
            msg = f"Block size k must satisfy 0 < k < {self.m}, got {k}"
            raise ValueError(msg)
        template = np.eye(self.m, dtype=np.int64)
        free = np.zeros((self.m, self.m), dtype=bool)
        free[:k, k:] = True
        matches = np.all(np.where(free, True, self.elements == template), axis=(1, 2))
        return np.flatnonzero(matches)

    def superdiagonal_sums(self, ids: IntArray) -> IntArray:
        return superdiagonal_sums(self.elements[ids], self.q)


@lru_cache(maxsize=None)
def enumerate_group(m: int, q: int, max_order: int = DEFAULT_MAX_ORDER) -> GroupTable:
    """Enumerate GL_m(F_q) in lexicographic order.

    Args:
        m: Matrix size, at least 1
        q: Prime in the supported range
        max_order: Largest group order accepted

    Returns:
        The complete, duplicate-free GroupTable

    Raises:
        BudgetExceededError: If |GL_m(F_q)| exceeds max_order
    """
    if q not in SUPPORTED_PRIMES:
        msg = f"q must be prime ≤ 7, got {q}"
        raise ValueError(msg)
    if m < 1:
        msg = f"Rank must be at least 1, got {m}"
        raise ValueError(msg)
    order = group_order(m, q)
    if order > max_order:
        msg = f"|GL_{m}(F_{q})| = {order} exceeds the configured cap of {max_order}"
        raise BudgetExceededError(msg)

    mats = decode(np.arange(q ** (m * m), dtype=np.int64), m, q)
    table = GroupTable(m, q, mats[det_mod(mats, q) != 0])
    if len(table) != order:  # pragma: no cover
        msg = f"Enumerated {len(table)} elements of GL_{m}(F_{q}), expected {order}"
        raise AssertionError(msg)
    logger.info("Enumerated GL_%d(F_%d): %d elements", m, q, order)
    return table


def iota(g: GroupElement) -> GroupElement:
    """Transpose inverse g -> (g^T)^{-1}."""
    return g.inverse().transpose()


def embed_lower(g: GroupElement) -> GroupElement:
    """diag(g, 1)."""
    return GroupElement.from_matrix(embed_lower_matrices(g.matrix[None])[0], g.q)


def embed_lower_matrices(mats: IntArray) -> IntArray:
    mats = np.asarray(mats, dtype=np.int64)
    count, m = mats.shape[0], mats.shape[-1]
    out = np.zeros((count, m + 1, m + 1), dtype=np.int64)
    out[:, :m, :m] = mats
    out[:, m, m] = 1
    return out


class SpecialElements(BaseModel):
    """The Weyl element w_n, the sign matrix eps_n and s_n = w_n eps_n."""

    n: int = Field(..., ge=1)
    q: int
    w: GroupElement
    eps: GroupElement
    s: GroupElement

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def validate_relations(self) -> Self:
        """s_n = w_n eps_n, s_n^2 = (-1)^(n-1) I and s_n is fixed by iota."""
        if self.w @ self.eps != self.s:
            msg = "s_n must equal w_n eps_n"
            raise ValueError(msg)
        if self.s @ self.s != GroupElement.scalar((-1) ** (self.n - 1), self.n, self.q):
            msg = "s_n^2 must equal (-1)^(n-1) I"
            raise ValueError(msg)
        if iota(self.s) != self.s:
            msg = "s_n must be fixed by the transpose inverse"
            raise ValueError(msg)
        return self


@lru_cache(maxsize=None)
def special_elements(n: int, q: int) -> SpecialElements:
    """The special elements of rank n.

    w_n = (delta_{i,n+1-j}), eps_n = diag((-1)^(n-1), ..., -1, 1) and
    s_n = ((-1)^(i-1) delta_{i,n+1-j}).
    """
    if n < 1:
        msg = f"Rank must be at least 1, got {n}"
        raise ValueError(msg)
    w = np.fliplr(np.eye(n, dtype=np.int64))
    signs = np.array([(-1) ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    eps = np.diag(signs)
    s = np.array([[(-1) ** i if j == n - 1 - i else 0 for j in range(n)] for i in range(n)])
    return SpecialElements(
        n=n,
        q=q,
        w=GroupElement.from_matrix(w, q),
        eps=GroupElement.from_matrix(eps, q),
        s=GroupElement.from_matrix(s, q),
    )


def j_hat(g: GroupElement) -> GroupElement:
    """Ad(s_n) composed with iota: g -> s_n g^iota s_n^{-1}."""
    s = special_elements(g.m, g.q).s
    return s @ iota(g) @ s.inverse()


class CosetTable:
    """Canonical representatives of U\\G (tag "G") or U\\P (tag "P").

    Each coset is represented by its lexicographically least element, and every
    ambient element g is stored as g = u * r with the superdiagonal sum of u,
    which is all a (U, theta)-equivariant function needs to evaluate at g.
    """

    def __init__(self, table: GroupTable, tag: Literal["G", "P"] = "G"):
        """Build the coset data for one ambient group.

        Args:
            table: The enumerated GL_m(F_q)
            tag: "G" for U\\G, "P" for U\\P with P the mirabolic subgroup
        """
        if tag not in ("G", "P"):
            msg = f"Coset table tag must be 'G' or 'P', got {tag!r}"
            raise ValueError(msg)
        self.table = table
        self.tag = tag
        self.q = table.q
        self.m = table.m

        u_ids = table.unipotent_ids
        translates = np.stack([table.left_multiply_ids(u) for u in table.elements[u_ids]])
        which = translates.argmin(axis=0)
        canonical = translates.min(axis=0)
        # g = u^{-1} * canonical for the minimizing u
        u_part = table.inverse_ids[u_ids[which]]

        ambient = np.ones(len(table), dtype=bool) if tag == "G" else table.mirabolic_mask
        self.rep_ids = np.unique(canonical[ambient])
        self.rep_index = np.full(len(table), -1, dtype=np.int64)
        self.rep_index[ambient] = np.searchsorted(self.rep_ids, canonical[ambient])
        self.u_ids = np.where(ambient, u_part, -1)
        self.theta_arg = np.where(ambient, table.superdiagonal_sums(u_part), 0)
        for array in (self.rep_ids, self.rep_index, self.u_ids, self.theta_arg):
            array.setflags(write=False)
        logger.debug(
            "Coset table U\\%s of GL_%d(F_%d): %d representatives",
            tag,
            self.m,
            self.q,
            len(self.rep_ids),
        )

    def __len__(self) -> int:
        return int(self.rep_ids.shape[0])

    def __repr__(self) -> str:
        return f"CosetTable(tag={self.tag!r}, m={self.m}, q={self.q}, reps={len(self)})"

    @property
    def rep_matrices(self) -> IntArray:
        return self.table.elements[self.rep_ids]

    def representative(self, index: int) -> GroupElement:
        return self.table.element(int(self.rep_ids[index]))

    def locate(self, ids: IntArray) -> tuple[IntArray, IntArray]:
        """Representative indices and theta arguments for element ids.

        Raises:
            NotInAmbientError: If any id lies outside the ambient group
        """
        ids = np.asarray(ids, dtype=np.int64)
        positions = self.rep_index[ids]
        if np.any(positions < 0):
            msg = f"Element outside the ambient group {self.tag} of this coset table"
            raise NotInAmbientError(msg)
        return positions, self.theta_arg[ids]

    def decompose(self, g: GroupElement) -> tuple[GroupElement, GroupElement]:
        """Factor g = u * r with u in U and r the canonical representative of Ug."""
        idx = self.table.id_of(g)
        positions, _ = self.locate(np.array([idx]))
        return self.table.element(int(self.u_ids[idx])), self.representative(int(positions[0]))

    def evaluation_matrix(
        self, ids: IntArray, psi: AdditiveCharacter, direction: int = 1
    ) -> Matrix:
        """Matrix E with (E v)[i] = W(g_i) for the equivariant W stored as v on representatives."""
        positions, args = self.locate(ids)
        out = np.zeros((len(positions), len(self)), dtype=np.complex128)
        out[np.arange(len(positions)), positions] = psi.values(args, direction)
        return out


def coset_decompose(table: CosetTable, g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """Split g into (u, rep) with g = u * rep exactly."""
    return table.decompose(g)


@lru_cache(maxsize=None)
def coset_table(m: int, q: int, tag: Literal["G", "P"] = "G") -> CosetTable:
    return CosetTable(enumerate_group(m, q), tag)
