"""Whittaker and Kirillov model mechanics.

A Whittaker function is stored only on the canonical U\\G representatives;
every evaluation elsewhere goes through the coset table, W(ug) = theta(u) W(r).
Kirillov functions live on U_n\\P, which is identified with U_{n-1}\\G_{n-1}
through g -> diag(g, 1), and both index sets share one ordering.
"""

from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from .algebra import AdditiveCharacter, CScalar, Matrix, Vector, solve_linear
from .exceptions import DecompositionError, DirectionMismatchError, NotUnipotentError
from .group import (
    CosetTable,
    GroupElement,
    coset_table,
    embed_lower_matrices,
    inverse_mod,
    multiply_mod,
    special_elements,
)
from .spectra import IrrepComponent


def _default_psi(q: int, psi: AdditiveCharacter | None) -> AdditiveCharacter:
    return psi or AdditiveCharacter(modulus=q)


def theta_eval(
    u: GroupElement, psi: AdditiveCharacter | None = None, direction: int = 1
) -> CScalar:
    """theta(u) = psi(u_{1,2} + ... + u_{n-1,n}), or its conjugate for direction -1.

    Raises:
        NotUnipotentError: If u is not upper unitriangular
    """
    if not u.is_upper_unitriangular:
        msg = f"theta is only defined on upper unitriangular matrices, got {u.entries}"
        raise NotUnipotentError(msg)
    argument = sum(u.entries[i][i + 1] for i in range(u.m - 1))
    return _default_psi(u.q, psi)(argument, direction)


class WhittakerFunction:
    """A (U, theta)-equivariant function stored on U\\G representatives."""

    def __init__(
        self,
        cosets: CosetTable,
        values: Vector,
        direction: int = 1,
        psi: AdditiveCharacter | None = None,
        component_id: str | None = None,
    ):
        self.cosets = cosets
        self.values = np.asarray(values, dtype=np.complex128)
        if self.values.shape != (len(cosets),):
            msg = f"Expected {len(cosets)} values, got shape {self.values.shape}"
            raise ValueError(msg)
        self.direction = direction
        self.psi = _default_psi(cosets.q, psi)
        self.component_id = component_id

    @classmethod
    def from_component(cls, c: IrrepComponent, column: int) -> "WhittakerFunction":
        return cls(c.space.cosets, c.basis[:, column], c.space.direction, c.space.psi, c.label)

    @property
    def n(self) -> int:
        return self.cosets.m

    def evaluate_ids(self, ids: NDArray[np.int64]) -> Vector:
        positions, args = self.cosets.locate(ids)
        return self.psi.values(args, self.direction) * self.values[positions]

    def __call__(self, g: GroupElement) -> complex:
        return complex(self.evaluate_ids(np.array([self.cosets.table.id_of(g)]))[0])


class KirillovIndex:
    """The bijection U_n\\P <-> U_{n-1}\\G_{n-1} at rank n."""

    def __init__(self, n: int, q: int):
        if n < 2:
            msg = f"Kirillov models need rank at least 2, got {n}"
            raise ValueError(msg)
        self.n = n
        self.q = q
        self.upper = coset_table(n, q, "G")
        self.mirabolic = coset_table(n, q, "P")
        self.lower = coset_table(n - 1, q, "G")
        self.p_rep_ids = self.upper.table.ids(embed_lower_matrices(self.lower.rep_matrices))
        if not np.array_equal(self.p_rep_ids, self.mirabolic.rep_ids):
            msg = "diag(r, 1) is not the canonical U\\P representative for every r"
            raise DecompositionError(msg)
        # Where each Kirillov index sits among the rank-n U\G representatives.
        self.positions = self.upper.rep_index[self.p_rep_ids]

    def __len__(self) -> int:
        return len(self.lower)

    def __repr__(self) -> str:
        return f"KirillovIndex(n={self.n}, q={self.q}, size={len(self)})"

    def restriction_matrix(self) -> Matrix:
        """Selection matrix taking U\\G values to U\\P values."""
        out = np.zeros((len(self), len(self.upper)), dtype=np.complex128)
        out[np.arange(len(self)), self.positions] = 1.0
        return out


@lru_cache(maxsize=None)
def kirillov_index(n: int, q: int) -> KirillovIndex:
    return KirillovIndex(n, q)


class KirillovFunction:
    """A (U, theta)-equivariant function on the mirabolic subgroup P."""

    def __init__(
        self,
        index: KirillovIndex,
        values: Vector,
        direction: int = 1,
        psi: AdditiveCharacter | None = None,
    ):
        self.index = index
        self.values = np.asarray(values, dtype=np.complex128)
        if self.values.shape != (len(index),):
            msg = f"Expected {len(index)} values, got shape {self.values.shape}"
            raise ValueError(msg)
        self.direction = direction
        self.psi = _default_psi(index.q, psi)

    @property
    def n(self) -> int:
        return self.index.n

    def evaluate_ids(self, ids: NDArray[np.int64]) -> Vector:
        positions, args = self.index.mirabolic.locate(ids)
        return self.psi.values(args, self.direction) * self.values[positions]

    def __call__(self, p: GroupElement) -> complex:
        """phi(v g) = theta(v) f(g) for v in V and g in G_{n-1}."""
        table = self.index.mirabolic.table
        return complex(self.evaluate_ids(np.array([table.id_of(p)]))[0])


def restrict_to_P(W: WhittakerFunction) -> KirillovFunction:
    """W |_P on the Kirillov index set."""
    index = kirillov_index(W.n, W.cosets.q)
    return KirillovFunction(index, W.values[index.positions], W.direction, W.psi)


def kirillov_inverse(c: IrrepComponent) -> Matrix:
    """Matrix taking Kirillov values to the Whittaker function of c with those values.

    Raises:
        SingularMatrixError: If restriction to P is not a bijection on c
    """
    index = kirillov_index(c.space.n, c.space.q)
    restricted = index.restriction_matrix() @ c.basis
    coefficients = solve_linear(restricted, np.eye(len(index), dtype=np.complex128))
    return c.basis @ coefficients


def extend_from_P(c: IrrepComponent, f: KirillovFunction) -> WhittakerFunction:
    """The unique W in c with W|_P = f (c cuspidal)."""
    if f.direction != c.space.direction:
        msg = f"Kirillov function has direction {f.direction:+d}, component {c.space.direction:+d}"
        raise DirectionMismatchError(msg)
    index = kirillov_index(c.space.n, c.space.q)
    coefficients = solve_linear(index.restriction_matrix() @ c.basis, f.values)
    return WhittakerFunction(
        c.space.cosets, c.basis @ coefficients, c.space.direction, c.space.psi, c.label
    )


def _translation_matrix(
    cosets: CosetTable, target_mats: NDArray[np.int64], psi: AdditiveCharacter, direction: int
) -> Matrix:
    return cosets.evaluation_matrix(cosets.table.ids(target_mats), psi, direction)


@lru_cache(maxsize=None)
def tilde_matrix(n: int, q: int, psi: AdditiveCharacter, direction: int) -> Matrix:
    """Rows give W~(r) = W(w_n r^iota) for W of the given direction."""
    cosets = coset_table(n, q, "G")
    reps_iota = np.swapaxes(inverse_mod(cosets.rep_matrices, q), 1, 2)
    targets = multiply_mod(special_elements(n, q).w.matrix[None], reps_iota, q)
    out = _translation_matrix(cosets, targets, psi, direction)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def epsilon_matrix(n: int, q: int, psi: AdditiveCharacter, direction: int) -> Matrix:
    """Rows give W^eps(r) = W(eps_n r) for W of the given direction."""
    cosets = coset_table(n, q, "G")
    targets = multiply_mod(special_elements(n, q).eps.matrix[None], cosets.rep_matrices, q)
    out = _translation_matrix(cosets, targets, psi, direction)
    out.setflags(write=False)
    return out


def tilde_map(W: WhittakerFunction) -> WhittakerFunction:
    """W~(g) = W(w_n g^iota); the result is equivariant for the conjugate character."""
    matrix = tilde_matrix(W.n, W.cosets.q, W.psi, W.direction)
    return WhittakerFunction(W.cosets, matrix @ W.values, -W.direction, W.psi)


def epsilon_map(W: WhittakerFunction) -> WhittakerFunction:
    """W^eps(g) = W(eps_n g); a G-isomorphism onto the conjugate-character model."""
    matrix = epsilon_matrix(W.n, W.cosets.q, W.psi, W.direction)
    return WhittakerFunction(W.cosets, matrix @ W.values, -W.direction, W.psi, W.component_id)


def conjugate_model(c: IrrepComponent) -> Matrix:
    """Orthonormal basis of W(pi, conjugate theta) obtained through the eps-map."""
    return epsilon_matrix(c.space.n, c.space.q, c.space.psi, c.space.direction) @ c.basis


def match_component(
    basis: Matrix, components: list[IrrepComponent]
) -> tuple[IrrepComponent, float]:
    """Best-matching component and the cosine of the largest principal angle to it."""
    best: tuple[IrrepComponent, float] | None = None
    for c in components:
        if c.dim != basis.shape[1]:
            continue
        overlap = float(np.linalg.svd(c.basis.conj().T @ basis, compute_uv=False).min())
        if best is None or overlap > best[1]:
            best = (c, overlap)
    if best is None:
        msg = f"No component of dimension {basis.shape[1]} to match against"
        raise DecompositionError(msg)
    return best


def pairing(f: KirillovFunction, phi: KirillovFunction, measure: float = 1.0) -> CScalar:
    """<f, phi> = sum over U\\P representatives of f(r) phi(r), bilinear, counting measure.

    Raises:
        DirectionMismatchError: Unless f and phi have opposite directions
    """
    if f.index.n != phi.index.n or f.index.q != phi.index.q:
        msg = f"Cannot pair rank {f.n} with rank {phi.n} Kirillov functions"
        raise ValueError(msg)
    if f.direction != -phi.direction:
        msg = "Pairing needs one theta and one conjugate-theta function"
        raise DirectionMismatchError(msg)
    return complex(measure * np.sum(f.values * phi.values))


def embed_tau(W_tau: WhittakerFunction) -> KirillovFunction:
    """phi(v g) = theta(v) W_tau(g): the rank-(n-1) model placed inside the Kirillov space."""
    index = kirillov_index(W_tau.n + 1, W_tau.cosets.q)
    return KirillovFunction(index, W_tau.values.copy(), W_tau.direction, W_tau.psi)


def restrict_to_lower(f: KirillovFunction) -> WhittakerFunction:
    """Inverse of embed_tau: f(diag(g, 1)) as a function on G_{n-1}."""
    return WhittakerFunction(f.index.lower, f.values.copy(), f.direction, f.psi)
