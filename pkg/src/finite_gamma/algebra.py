"""Prime-field scalars, the standard additive character, and dense linear algebra.

Every other module goes through the helpers here for solving linear systems
and splitting normal operators into eigenspaces, so the numerical tolerances
live in one place.
"""

import logging
from typing import Any, Literal, NamedTuple, TypeAlias

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from .exceptions import ClusterAmbiguityError, SingularMatrixError

logger = logging.getLogger(__name__)

SUPPORTED_PRIMES = (2, 3, 5, 7)

# Tolerances
ASSERT_TOL = 1e-8
LINALG_TOL = 1e-10
CLUSTER_TOL = 1e-6
CLUSTER_SEPARATION = 10.0
CONDITION_BOUND = 1e10

CScalar: TypeAlias = complex
Matrix: TypeAlias = NDArray[np.complex128]
Vector: TypeAlias = NDArray[np.complex128]


class FieldScalar(BaseModel):
    """Element of the prime field F_q, always stored fully reduced."""

    value: int = Field(..., ge=0, description="Residue in [0, q)")
    modulus: int = Field(..., description="The prime q")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="before")
    @classmethod
    def reduce_value(cls, data: Any) -> Any:
        """Reduce the residue mod q before field validation."""
        if isinstance(data, dict) and "value" in data and "modulus" in data:
            modulus = int(data["modulus"])
            if modulus > 0:
                data = {**data, "value": int(data["value"]) % modulus}
        return data

    @field_validator("modulus")
    @classmethod
    def validate_modulus(cls, v: int) -> int:
        """Only the small primes are supported."""
        if v not in SUPPORTED_PRIMES:
            msg = f"q must be prime ≤ 7, got {v}"
            raise ValueError(msg)
        return v

    def _coerce(self, other: "FieldScalar | int") -> int:
        if isinstance(other, FieldScalar):
            if other.modulus != self.modulus:
                msg = f"Cannot combine F_{self.modulus} with F_{other.modulus}"
                raise ValueError(msg)
            return other.value
        return int(other)

    def __add__(self, other: "FieldScalar | int") -> "FieldScalar":
        return FieldScalar(value=self.value + self._coerce(other), modulus=self.modulus)

    def __sub__(self, other: "FieldScalar | int") -> "FieldScalar":
        return FieldScalar(value=self.value - self._coerce(other), modulus=self.modulus)

    def __mul__(self, other: "FieldScalar | int") -> "FieldScalar":
        return FieldScalar(value=self.value * self._coerce(other), modulus=self.modulus)

    def __neg__(self) -> "FieldScalar":
        return FieldScalar(value=-self.value, modulus=self.modulus)

    def inverse(self) -> "FieldScalar":
        """Multiplicative inverse; zero has none."""
        if self.value == 0:
            msg = "0 has no multiplicative inverse"
            raise ZeroDivisionError(msg)
        return FieldScalar(value=pow(self.value, -1, self.modulus), modulus=self.modulus)


class AdditiveCharacter(BaseModel):
    """The standard character x -> exp(2*pi*i*sign*x/q) of F_q or its conjugate."""

    modulus: int = Field(..., description="The prime q")
    sign: Literal[1, -1] = Field(1, description="+1 for psi, -1 for its conjugate")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("modulus")
    @classmethod
    def validate_modulus(cls, v: int) -> int:
        """Only the small primes are supported."""
        if v not in SUPPORTED_PRIMES:
            msg = f"q must be prime ≤ 7, got {v}"
            raise ValueError(msg)
        return v

    @property
    def descriptor(self) -> str:
        """Human readable formula recorded in every report."""
        return "exp(2*pi*i*x/q)" if self.sign == 1 else "exp(-2*pi*i*x/q)"

    def conjugate(self) -> "AdditiveCharacter":
        return AdditiveCharacter(modulus=self.modulus, sign=-self.sign)  # type: ignore[arg-type]

    def table(self, direction: int = 1) -> Vector:
        """Values psi(d*x) for x = 0..q-1, where d = direction is +1 or -1."""
        x = np.arange(self.modulus)
        return np.exp(2j * np.pi * self.sign * direction * x / self.modulus)

    def __call__(self, x: int, direction: int = 1) -> complex:
        return complex(self.table(direction)[int(x) % self.modulus])

    def values(self, args: NDArray[np.int64], direction: int = 1) -> Vector:
        """Vectorized evaluation on an integer array of residues."""
        return self.table(direction)[np.asarray(args) % self.modulus]


def psi_eval(chi: AdditiveCharacter, x: FieldScalar) -> CScalar:
    """Evaluate the additive character at a field element."""
    if x.modulus != chi.modulus:
        msg = f"Field element of F_{x.modulus} passed to a character of F_{chi.modulus}"
        raise ValueError(msg)
    return chi(x.value)


def matrix_rank(m: Matrix, tol: float = LINALG_TOL) -> int:
    """Numerical rank: singular values above tol relative to the largest one."""
    if m.size == 0:
        return 0
    s = scipy.linalg.svdvals(m)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def solve_linear(
    a: Matrix,
    b: Matrix | Vector,
    tol: float = LINALG_TOL,
    cond_bound: float = CONDITION_BOUND,
) -> Matrix | Vector:
    """Solve a x = b for square, well conditioned a.

    Args:
        a: Square coefficient matrix
        b: Right-hand side vector or matrix of column right-hand sides
        tol: Allowed relative residual
        cond_bound: Largest accepted condition number

    Returns:
        Solution with the shape of b

    Raises:
        SingularMatrixError: If a is not square, is numerically singular, or
            the residual check fails
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        msg = f"Coefficient matrix must be square, got shape {a.shape}"
        raise SingularMatrixError(msg)
    if a.shape[0] != b.shape[0]:
        msg = f"Right-hand side has {b.shape[0]} rows, expected {a.shape[0]}"
        raise ValueError(msg)
    if a.shape[0] == 0:
        return np.zeros_like(b)

    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_bound:
        msg = f"Matrix is numerically singular (condition number {cond:.3e})"
        raise SingularMatrixError(msg)

    x = scipy.linalg.solve(a, b)
    norm_b = np.linalg.norm(b)
    residual = np.linalg.norm(a @ x - b)
    if residual > tol * max(norm_b, np.linalg.norm(a) * np.linalg.norm(x)):
        msg = f"Residual {residual:.3e} exceeds tolerance for |b| = {norm_b:.3e}"
        raise SingularMatrixError(msg)
    return x


class Eigenspace(NamedTuple):
    """One eigenvalue cluster of a normal operator with an orthonormal basis (columns)."""

    eigenvalue: complex
    basis: Matrix

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def projector(self) -> Matrix:
        return self.basis @ self.basis.conj().T


def _cluster_labels(values: NDArray[np.complex128], tol: float) -> NDArray[np.int64]:
    if len(values) == 1:
        return np.zeros(1, dtype=np.int64)
    points = np.column_stack([values.real, values.imag])
    tree = linkage(points, method="single")
    return np.asarray(fcluster(tree, t=tol, criterion="distance"), dtype=np.int64) - 1


def eigenspaces_normal(m: Matrix, tol: float = CLUSTER_TOL) -> list[Eigenspace]:
    """Split a normal matrix into eigenspaces with clustered eigenvalues.

    Eigenvalues closer than tol share a cluster (single linkage). Clusters are
    returned sorted by (real, imag) part of their mean eigenvalue.

    Raises:
        ValueError: If m is not normal
        ClusterAmbiguityError: If two distinct clusters are closer than 10 * tol
    """
    m = np.asarray(m, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m @ m.conj().T - m.conj().T @ m) > CLUSTER_TOL * scale**2:
        msg = "Matrix is not normal; eigenspace splitting requires M M^H = M^H M"
        raise ValueError(msg)

    if np.linalg.norm(m - m.conj().T) <= LINALG_TOL * scale:
        real_values, vectors = scipy.linalg.eigh((m + m.conj().T) / 2)
        values = real_values.astype(np.complex128)
    else:
        schur_form, vectors = scipy.linalg.schur(m, output="complex")
        values = np.diag(schur_form)

    labels = _cluster_labels(values, tol)
    n_clusters = int(labels.max()) + 1
    if n_clusters > 1:
        distances = pdist(np.column_stack([values.real, values.imag]))
        same = pdist(labels[:, None].astype(float)) == 0
        closest = float(distances[~same].min())
        if closest < CLUSTER_SEPARATION * tol:
            msg = f"Eigenvalue clusters only {closest:.3e} apart (tolerance {tol:.1e})"
            raise ClusterAmbiguityError(msg)

    spaces = []
    for label in range(n_clusters):
        members = np.flatnonzero(labels == label)
        spaces.append(Eigenspace(complex(values[members].mean()), vectors[:, members]))
    spaces.sort(key=lambda s: (round(s.eigenvalue.real, 9), round(s.eigenvalue.imag, 9)))
    logger.debug("Split %dx%d operator into %d eigenspaces", *m.shape, len(spaces))
    return spaces


def scalar_deviation(m: Matrix) -> tuple[complex, float]:
    """Best scalar approximation of a square matrix and the residual norm."""
    if m.shape[0] == 0:
        return 0j, 0.0
    scalar = complex(np.trace(m) / m.shape[0])
    return scalar, float(np.linalg.norm(m - scalar * np.eye(m.shape[0])))


def random_hermitian(dim: int, rng: np.random.Generator) -> Matrix:
    """Random Hermitian matrix with standard complex Gaussian entries."""
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (x + x.conj().T) / 2
