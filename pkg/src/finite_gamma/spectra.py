"""Gelfand-Graev spaces and their irreducible generic constituents.

The space ind_U^G(theta) is stored on U\\G representatives. Right translation by
any h is a monomial matrix, so the action is kept as a permutation plus a phase
per (h, representative) and never materialized densely unless asked for.
"""

import logging
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import NDArray

from .algebra import (
    ASSERT_TOL,
    AdditiveCharacter,
    Matrix,
    eigenspaces_normal,
    random_hermitian,
    scalar_deviation,
)
from .exceptions import ClusterAmbiguityError, DecompositionError, NotScalarError
from .group import DEFAULT_MAX_ORDER, CosetTable, GroupTable, coset_table, enumerate_group

logger = logging.getLogger(__name__)

MAX_CLUSTER_RETRIES = 8
IRREDUCIBLE_TOL = 1e-6
FINGERPRINT_LENGTH = 16


class GGSpace:
    """The Gelfand-Graev space of GL_n(F_q) for theta (direction +1) or its conjugate (-1)."""

    def __init__(
        self,
        n: int,
        q: int,
        direction: int = 1,
        psi: AdditiveCharacter | None = None,
        max_order: int = DEFAULT_MAX_ORDER,
    ):
        """Initialize the space.

        Args:
            n: Rank
            q: The prime q
            direction: +1 for theta, -1 for the conjugate character
            psi: Additive character theta is built from; standard one by default
            max_order: Enumeration cap passed to the group table
        """
        if direction not in (1, -1):
            msg = f"Direction must be +1 or -1, got {direction}"
            raise ValueError(msg)
        self.n = n
        self.q = q
        self.direction = direction
        self.psi = psi or AdditiveCharacter(modulus=q)
        if self.psi.modulus != q:
            msg = f"Character of F_{self.psi.modulus} cannot define theta on GL_{n}(F_{q})"
            raise ValueError(msg)
        self.table: GroupTable = enumerate_group(n, q, max_order)
        self.cosets: CosetTable = coset_table(n, q, "G")

    def __repr__(self) -> str:
        return f"GGSpace(n={self.n}, q={self.q}, direction={self.direction:+d}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return len(self.cosets)

    @property
    def order(self) -> int:
        return len(self.table)

    @cached_property
    def _monomial(self) -> tuple[NDArray[np.int64], Matrix]:
        # (rho(h) W)(r_i) = W(r_i h) = phases[h, i] * W(r_{perms[h, i]})
        products = np.stack([self.table.left_multiply_ids(r) for r in self.cosets.rep_matrices])
        positions, args = self.cosets.locate(products.ravel())
        perms = positions.reshape(self.dim, self.order).T.copy()
        phases = self.psi.values(args, self.direction).reshape(self.dim, self.order).T.copy()
        return perms, phases

    def evaluation_matrix(self, ids: NDArray[np.int64]) -> Matrix:
        """Rows evaluate a stored function at the given group elements."""
        return self.cosets.evaluation_matrix(ids, self.psi, self.direction)

    def rho(self, h_id: int) -> Matrix:
        """Dense matrix of right translation by element h_id."""
        perms, phases = self._monomial
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        out[np.arange(self.dim), perms[h_id]] = phases[h_id]
        return out

    def act(self, h_id: int, vectors: Matrix) -> Matrix:
        """rho(h) applied to a vector or to the columns of a matrix."""
        perms, phases = self._monomial
        vectors = np.asarray(vectors)
        scale = phases[h_id] if vectors.ndim == 1 else phases[h_id][:, None]
        return scale * vectors[perms[h_id]]

    def average_action(self, ids: NDArray[np.int64], vectors: Matrix) -> Matrix:
        """(1/|S|) sum_{x in S} rho(x) applied to vectors."""
        total = np.zeros(np.shape(vectors), dtype=np.complex128)
        for h_id in ids:
            total += self.act(int(h_id), vectors)
        return total / max(len(ids), 1)

    def commutant_average(self, x: Matrix) -> Matrix:
        """Project x onto the commutant: (1/|G|) sum_g rho(g) x rho(g)^{-1}."""
        perms, phases = self._monomial
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for p, c in zip(perms, phases):
            total += c[:, None] * x[np.ix_(p, p)] * c.conj()[None, :]
        return total / self.order

    def character(self, basis: Matrix) -> NDArray[np.complex128]:
        """Character of the representation on span(basis), basis orthonormal."""
        perms, phases = self._monomial
        projector = basis @ basis.conj().T
        return np.sum(phases * projector[perms, np.arange(self.dim)[None, :]], axis=1)


@lru_cache(maxsize=None)
def build_gg_space(
    n: int,
    q: int,
    direction: int = 1,
    psi: AdditiveCharacter | None = None,
    max_order: int = DEFAULT_MAX_ORDER,
) -> GGSpace:
    """Build ind_U^G(theta) for GL_n(F_q).

    Raises:
        BudgetExceededError: If the group is above the enumeration cap
    """
    space = GGSpace(n, q, direction, psi, max_order)
    logger.info("Built Gelfand-Graev space %s", space)
    return space


class IrrepComponent:
    """An irreducible generic constituent of a Gelfand-Graev space.

    The basis columns are orthonormal Whittaker functions stored on the U\\G
    representatives of the parent space.
    """

    def __init__(
        self,
        space: GGSpace,
        basis: Matrix,
        label: str,
        index: int,
        cuspidal: bool,
        central_character: dict[int, complex],
    ):
        self.space = space
        self.basis = np.asarray(basis, dtype=np.complex128)
        self.basis.setflags(write=False)
        self.label = label
        self.index = index
        self.cuspidal = cuspidal
        self.central_character = central_character

    def __repr__(self) -> str:
        flag = ", cuspidal" if self.cuspidal else ""
        return f"IrrepComponent({self.label!r}, n={self.space.n}, q={self.space.q}{flag})"

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @cached_property
    def character(self) -> NDArray[np.complex128]:
        return self.space.character(self.basis)

    def restricted_action(self, h_id: int) -> Matrix:
        """Matrix of rho(h) in the component basis."""
        return self.basis.conj().T @ self.space.act(h_id, self.basis)

    def omega(self, z: int) -> complex:
        return self.central_character[z % self.space.q]


def _character_norm(chi: NDArray[np.complex128]) -> float:
    return float(np.mean(np.abs(chi) ** 2))


def _split_block(space: GGSpace, block: Matrix, rng: np.random.Generator) -> list[Matrix]:
    for attempt in range(1, MAX_CLUSTER_RETRIES + 1):
        sample = random_hermitian(block.shape[1], rng)
        commuting = space.commutant_average(block @ sample @ block.conj().T)
        restricted = block.conj().T @ commuting @ block
        try:
            pieces = eigenspaces_normal((restricted + restricted.conj().T) / 2)
        except ClusterAmbiguityError:
            logger.warning("Ambiguous eigenvalue clusters (attempt %d), redrawing", attempt)
            continue
        if len(pieces) > 1:
            return [block @ piece.basis for piece in pieces]
        logger.warning("Commutant sample scalar on reducible block (attempt %d)", attempt)
    msg = f"Could not split a {block.shape[1]}-dimensional block after {MAX_CLUSTER_RETRIES} draws"
    raise ClusterAmbiguityError(msg)


def _fingerprint(chi: NDArray[np.complex128]) -> tuple[tuple[float, float], ...]:
    return tuple((round(float(z.real), 6) + 0.0, round(float(z.imag), 6) + 0.0) for z in chi)


def decompose(gg: GGSpace, seed: int = 0, tol: float = ASSERT_TOL) -> list[IrrepComponent]:
    """Split the Gelfand-Graev space into irreducible components.

    A random self-adjoint element of the commutant is eigen-split, and any block
    whose character norm exceeds one is split again with a fresh sample. The
    character norm <chi, chi> equals the commutant dimension, so a block is
    certified irreducible when it is 1.

    Args:
        gg: The space to decompose
        seed: Seed for the commutant samples
        tol: Tolerance for the scalar checks on each component

    Returns:
        Components sorted by (dimension, character fingerprint) and labelled
        "<dim>d-<k>"

    Raises:
        ClusterAmbiguityError: If a block cannot be split after the retries
        DecompositionError: If the dimension bookkeeping fails
    """
    rng = np.random.default_rng(seed)
    pending = [np.eye(gg.dim, dtype=np.complex128)]
    blocks: list[tuple[Matrix, NDArray[np.complex128]]] = []
    while pending:
        block = pending.pop()
        chi = gg.character(block)
        if abs(_character_norm(chi) - 1) < IRREDUCIBLE_TOL:
            blocks.append((block, chi))
        else:
            pending.extend(_split_block(gg, block, rng))

    if sum(block.shape[1] for block, _ in blocks) != gg.dim:
        msg = f"Component dimensions do not add up to {gg.dim}"
        raise DecompositionError(msg)

    blocks.sort(
        key=lambda item: (
            item[0].shape[1],
            _fingerprint(item[1][:FINGERPRINT_LENGTH]),
            _fingerprint(item[1]),
        )
    )
    components = []
    per_dim: dict[int, int] = {}
    for index, (block, chi) in enumerate(blocks):
        dim = block.shape[1]
        label = f"{dim}d-{per_dim.get(dim, 0)}"
        per_dim[dim] = per_dim.get(dim, 0) + 1
        component = IrrepComponent(gg, block, label, index, False, {})
        component.__dict__["character"] = chi
        component.cuspidal = is_cuspidal(component, tol)
        component.central_character = central_character(component, tol)
        components.append(component)

    logger.info(
        "Decomposed %s into %d components (%d cuspidal)",
        gg,
        len(components),
        sum(c.cuspidal for c in components),
    )
    return components


def is_cuspidal(c: IrrepComponent, tol: float = ASSERT_TOL) -> bool:
    """Jacquet criterion: averaging over every maximal parabolic radical N_k kills c.

    Rank one has no proper parabolic subgroup, so every character is cuspidal.
    """
    table = c.space.table
    for k in range(1, c.space.n):
        averaged = c.space.average_action(table.parabolic_radical_ids(k), c.basis)
        if np.linalg.norm(averaged) > tol:
            return False
    return True


def central_character(c: IrrepComponent, tol: float = ASSERT_TOL) -> dict[int, complex]:
    """omega(z) for z in F_q^x from the action of z*I on the component.

    Raises:
        NotScalarError: If some z*I does not act by a scalar
    """
    values = {}
    for z, z_id in zip(range(1, c.space.q), c.space.table.center_ids):
        value, deviation = scalar_deviation(c.restricted_action(int(z_id)))
        if deviation > tol * max(1.0, np.sqrt(c.dim)):
            msg = f"Center element {z}*I deviates {deviation:.3e} from a scalar on {c.label}"
            raise NotScalarError(msg)
        values[z] = value
    return values


def invariance_deviation(c: IrrepComponent) -> float:
    """Largest leakage of rho(g) span(basis) outside span(basis) over the whole group."""
    worst = 0.0
    for h_id in range(c.space.order):
        moved = c.space.act(h_id, c.basis)
        leak = moved - c.basis @ (c.basis.conj().T @ moved)
        worst = max(worst, float(np.linalg.norm(leak)))
    return worst


def contragredient_partner(
    c: IrrepComponent, components: list[IrrepComponent], tol: float = IRREDUCIBLE_TOL
) -> IrrepComponent:
    """The component realizing pi^iota, matched by chi(g^iota)."""
    target = c.character[c.space.table.iota_ids]
    for other in components:
        if other.dim == c.dim and np.max(np.abs(other.character - target)) < tol:
            return other
    msg = f"No component realizes the contragredient of {c.label}"
    raise DecompositionError(msg)
