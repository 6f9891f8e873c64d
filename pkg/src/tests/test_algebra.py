"""Unit tests for prime-field scalars, the additive character and the linear algebra helpers."""

import cmath

import numpy as np
import pytest
from pydantic import ValidationError

from finite_gamma.algebra import (
    SUPPORTED_PRIMES,
    AdditiveCharacter,
    FieldScalar,
    eigenspaces_normal,
    matrix_rank,
    psi_eval,
    random_hermitian,
    scalar_deviation,
    solve_linear,
)
from finite_gamma.exceptions import ClusterAmbiguityError, SingularMatrixError


@pytest.mark.unit
class TestFieldScalar:
    """Test F_q arithmetic."""

    def test_value_is_reduced(self):
        """Residues are reduced mod q on construction."""
        assert FieldScalar(value=7, modulus=5).value == 2
        assert FieldScalar(value=-1, modulus=3).value == 2

    def test_arithmetic(self):
        """Sum, difference, product and negation stay in F_q."""
        a = FieldScalar(value=3, modulus=5)
        b = FieldScalar(value=4, modulus=5)

        assert (a + b).value == 2
        assert (a - b).value == 4
        assert (a * b).value == 2
        assert (-a).value == 2

    def test_inverse(self):
        """Every nonzero element has an inverse."""
        for q in SUPPORTED_PRIMES:
            for x in range(1, q):
                element = FieldScalar(value=x, modulus=q)
                assert (element * element.inverse()).value == 1

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroDivisionError):
            FieldScalar(value=0, modulus=7).inverse()

    def test_unsupported_modulus(self):
        """Only primes up to 7 are accepted."""
        with pytest.raises(ValidationError, match="q must be prime ≤ 7"):
            FieldScalar(value=1, modulus=9)

    def test_mixed_moduli_rejected(self):
        with pytest.raises(ValueError, match="Cannot combine"):
            FieldScalar(value=1, modulus=3) + FieldScalar(value=1, modulus=5)


@pytest.mark.unit
class TestAdditiveCharacter:
    """Test psi(x) = exp(2 pi i x / q)."""

    def test_value_at_zero(self):
        psi = AdditiveCharacter(modulus=3)
        assert psi_eval(psi, FieldScalar(value=0, modulus=3)) == pytest.approx(1)

    def test_value_at_one(self):
        """The standard character sends 1 to exp(2 pi i / q)."""
        psi = AdditiveCharacter(modulus=3)
        value = psi_eval(psi, FieldScalar(value=1, modulus=3))
        assert value == pytest.approx(cmath.exp(2j * cmath.pi / 3))

    def test_conjugate_character(self):
        """The conjugate character gives complex conjugate values."""
        psi = AdditiveCharacter(modulus=5)
        x = FieldScalar(value=2, modulus=5)
        assert psi_eval(psi.conjugate(), x) == pytest.approx(psi_eval(psi, x).conjugate())
        assert psi(2, direction=-1) == pytest.approx(psi(2).conjugate())

    @pytest.mark.parametrize("q", SUPPORTED_PRIMES)
    def test_multiplicative(self, q):
        """psi(x + y) = psi(x) psi(y) for every pair of residues."""
        psi = AdditiveCharacter(modulus=q)
        for x in range(q):
            for y in range(q):
                assert abs(psi(x + y) - psi(x) * psi(y)) < 1e-12

    @pytest.mark.parametrize("q", SUPPORTED_PRIMES)
    def test_nontrivial(self, q):
        """The values sum to zero and psi(1) is not 1."""
        psi = AdditiveCharacter(modulus=q)
        assert abs(psi.table().sum()) < 1e-12
        assert abs(psi(1) - 1) > 0.5

    def test_descriptor(self):
        assert AdditiveCharacter(modulus=3).descriptor == "exp(2*pi*i*x/q)"
        assert AdditiveCharacter(modulus=3, sign=-1).descriptor == "exp(-2*pi*i*x/q)"

    def test_vectorized_values(self):
        psi = AdditiveCharacter(modulus=5)
        args = np.array([0, 1, 7, -1])
        expected = [psi(0), psi(1), psi(2), psi(4)]
        np.testing.assert_allclose(psi.values(args), expected)


@pytest.mark.unit
class TestSolveLinear:
    """Test the checked linear solver."""

    def test_identity(self):
        b = np.array([1.0 + 2j, -3.0])
        np.testing.assert_allclose(solve_linear(np.eye(2), b), b)

    def test_diagonal(self):
        x = solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
        np.testing.assert_allclose(x, [1.0, 1.0])

    def test_random_systems_reproduce_rhs(self):
        """Multiplying back reproduces b on well conditioned systems."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = np.eye(6) * 4 + random_hermitian(6, rng) * 0.5
            b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            x = solve_linear(a, b)
            assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_matrix_right_hand_side(self):
        a = np.array([[2.0, 1.0], [1.0, 3.0]])
        x = solve_linear(a, np.eye(2))
        np.testing.assert_allclose(a @ x, np.eye(2), atol=1e-12)

    def test_singular_matrix(self):
        """Rank-deficient systems raise instead of returning garbage."""
        with pytest.raises(SingularMatrixError):
            solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 0.0]))

    def test_non_square_matrix(self):
        with pytest.raises(SingularMatrixError, match="square"):
            solve_linear(np.ones((3, 2)), np.ones(3))


@pytest.mark.unit
class TestEigenspacesNormal:
    """Test eigenspace splitting with clustered eigenvalues."""

    def test_repeated_eigenvalue(self):
        """diag(1, 1, 2) has a two-dimensional and a one-dimensional eigenspace."""
        spaces = eigenspaces_normal(np.diag([1.0, 1.0, 2.0]).astype(complex))

        assert [space.dim for space in spaces] == [2, 1]
        assert spaces[0].eigenvalue == pytest.approx(1)
        assert spaces[1].eigenvalue == pytest.approx(2)

    def test_zero_matrix(self):
        spaces = eigenspaces_normal(np.zeros((4, 4), dtype=complex))
        assert len(spaces) == 1
        assert spaces[0].dim == 4

    def test_projectors_resolve_identity(self):
        """Projectors sum to the identity and are mutually orthogonal."""
        rng = np.random.default_rng(3)
        m = random_hermitian(8, rng)

        spaces = eigenspaces_normal(m)

        projectors = [space.projector() for space in spaces]
        np.testing.assert_allclose(sum(projectors), np.eye(8), atol=1e-10)
        for i, p in enumerate(projectors):
            for j, r in enumerate(projectors):
                if i != j:
                    assert np.linalg.norm(p @ r) < 1e-10

    def test_normal_non_hermitian(self):
        """Normal matrices with complex spectrum go through the Schur form."""
        spaces = eigenspaces_normal(np.diag([1j, 1j, 2.0]))
        assert sorted(space.dim for space in spaces) == [1, 2]

    def test_ambiguous_clusters(self):
        """Clusters closer than ten times the tolerance are rejected."""
        with pytest.raises(ClusterAmbiguityError):
            eigenspaces_normal(np.diag([0.0, 5e-6]).astype(complex))

    def test_not_normal(self):
        with pytest.raises(ValueError, match="not normal"):
            eigenspaces_normal(np.array([[1.0, 1.0], [0.0, 2.0]], dtype=complex))


@pytest.mark.unit
class TestHelpers:
    def test_matrix_rank(self):
        assert matrix_rank(np.eye(3)) == 3
        assert matrix_rank(np.ones((3, 3))) == 1
        assert matrix_rank(np.zeros((2, 2))) == 0

    def test_scalar_deviation(self):
        value, deviation = scalar_deviation(2j * np.eye(3))
        assert value == pytest.approx(2j)
        assert deviation < 1e-14
        _, deviation = scalar_deviation(np.diag([1.0, 2.0]))
        assert deviation > 0.5
