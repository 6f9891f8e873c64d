"""Tests for Whittaker functions, Kirillov restriction and the tilde and eps maps."""

import cmath

import numpy as np
import pytest

from finite_gamma.algebra import AdditiveCharacter
from finite_gamma.exceptions import DirectionMismatchError, NotUnipotentError, SingularMatrixError
from finite_gamma.group import GroupElement, embed_lower
from finite_gamma.spectra import build_gg_space, contragredient_partner, decompose
from finite_gamma.whittaker import (
    KirillovFunction,
    WhittakerFunction,
    conjugate_model,
    embed_tau,
    epsilon_map,
    extend_from_P,
    kirillov_index,
    kirillov_inverse,
    match_component,
    pairing,
    restrict_to_lower,
    restrict_to_P,
    theta_eval,
    tilde_map,
)


def combination(c, seed=0):
    """A random element of the component."""
    rng = np.random.default_rng(seed)
    coefficients = rng.standard_normal(c.dim) + 1j * rng.standard_normal(c.dim)
    return WhittakerFunction(
        c.space.cosets, c.basis @ coefficients, c.space.direction, c.space.psi, c.label
    )


def delta(index, position, direction):
    values = np.zeros(len(index), dtype=complex)
    values[position] = 1.0
    return KirillovFunction(index, values, direction)


@pytest.mark.unit
class TestThetaEval:
    def test_values(self):
        """theta sums the superdiagonal before applying psi."""
        u = GroupElement.from_matrix([[1, 2], [0, 1]], 5)
        assert theta_eval(u) == pytest.approx(cmath.exp(4j * cmath.pi / 5))
        assert theta_eval(u, direction=-1) == pytest.approx(cmath.exp(-4j * cmath.pi / 5))

    def test_superdiagonal_sum(self):
        """u_12 + u_23 = 3 = 0 in F_3, and the corner entry is ignored."""
        u = GroupElement.from_matrix([[1, 1, 2], [0, 1, 2], [0, 0, 1]], 3)
        assert theta_eval(u) == pytest.approx(1)

    def test_conjugate_character(self):
        u = GroupElement.from_matrix([[1, 1], [0, 1]], 3)
        psi_bar = AdditiveCharacter(modulus=3, sign=-1)
        assert theta_eval(u, psi_bar) == pytest.approx(theta_eval(u).conjugate())

    def test_not_unipotent(self):
        with pytest.raises(NotUnipotentError):
            theta_eval(GroupElement.from_matrix([[2, 0], [0, 1]], 3))


@pytest.mark.unit
class TestWhittakerFunction:
    """Test evaluation through the coset table."""

    def test_left_equivariance(self, cuspidal_2_3):
        """W(ug) = theta(u) W(g) for every u in U and g in G."""
        # Arrange
        W = combination(cuspidal_2_3[0])
        table = W.cosets.table
        everything = np.arange(len(table))

        for u_id in table.unipotent_ids:
            u = table.element(int(u_id))

            # Act
            translated = W.evaluate_ids(table.left_multiply_ids(u))

            # Assert
            np.testing.assert_allclose(
                translated, theta_eval(u) * W.evaluate_ids(everything), atol=1e-12
            )

    def test_right_translation_matches_space_action(self, cuspidal_3_2):
        """(rho(h) W)(g) = W(gh)."""
        c = cuspidal_3_2[0]
        W = combination(c, seed=2)
        table = W.cosets.table
        for h_id in (5, 77, 160):
            moved = WhittakerFunction(W.cosets, c.space.act(h_id, W.values), 1, W.psi)
            expected = W.evaluate_ids(table.right_multiply_ids(table.elements[h_id]))
            actual = moved.evaluate_ids(np.arange(len(table)))
            np.testing.assert_allclose(actual, expected, atol=1e-12)

    def test_wrong_length(self, gg_2_3):
        with pytest.raises(ValueError, match="Expected 16 values"):
            WhittakerFunction(gg_2_3.cosets, np.zeros(3))


@pytest.mark.unit
class TestKirillovRestriction:
    """Test W -> W|_P and its inverse on cuspidal components."""

    def test_index_sizes(self):
        assert len(kirillov_index(2, 3)) == 2
        assert len(kirillov_index(3, 2)) == 3

    def test_index_rank_one_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            kirillov_index(1, 3)

    def test_restriction_values(self, cuspidal_3_2):
        """f(r) = W(diag(r, 1)) on the lower representatives."""
        W = combination(cuspidal_3_2[1])
        f = restrict_to_P(W)
        for i in range(len(f.index)):
            r = f.index.lower.representative(i)
            assert f.values[i] == pytest.approx(W(embed_lower(r)))

    @pytest.mark.parametrize("fixture", ["cuspidal_2_3", "cuspidal_3_2"])
    def test_restriction_is_bijective(self, fixture, request):
        for c in request.getfixturevalue(fixture):
            index = kirillov_index(c.space.n, c.space.q)
            restricted = index.restriction_matrix() @ c.basis
            assert np.linalg.matrix_rank(restricted) == c.dim == len(index)

    @pytest.mark.parametrize("fixture", ["cuspidal_2_3", "cuspidal_3_2"])
    def test_round_trip(self, fixture, request):
        """extend_from_P(restrict_to_P(W)) = W."""
        for c in request.getfixturevalue(fixture):
            # Arrange
            W = combination(c, seed=c.index)

            # Act
            rebuilt = extend_from_P(c, restrict_to_P(W))

            # Assert
            np.testing.assert_allclose(rebuilt.values, W.values, atol=1e-10)

    def test_zero_extends_to_zero(self, cuspidal_2_3):
        c = cuspidal_2_3[0]
        zero = KirillovFunction(kirillov_index(2, 3), np.zeros(2))
        assert np.allclose(extend_from_P(c, zero).values, 0)

    def test_kirillov_inverse(self, cuspidal_2_3):
        c = cuspidal_2_3[1]
        inverse = kirillov_inverse(c)
        restriction = kirillov_index(2, 3).restriction_matrix()
        np.testing.assert_allclose(restriction @ inverse, np.eye(2), atol=1e-10)

    def test_non_cuspidal_not_bijective(self, components_2_3):
        """A 3-dimensional component restricts to the 2-dimensional Kirillov space."""
        steinberg = next(c for c in components_2_3 if c.dim == 3)
        restriction = kirillov_index(2, 3).restriction_matrix() @ steinberg.basis
        assert np.linalg.matrix_rank(restriction) <= 2
        with pytest.raises(SingularMatrixError):
            kirillov_inverse(steinberg)

    def test_direction_mismatch(self, cuspidal_2_3):
        f = KirillovFunction(kirillov_index(2, 3), np.ones(2), direction=-1)
        with pytest.raises(DirectionMismatchError):
            extend_from_P(cuspidal_2_3[0], f)


@pytest.mark.unit
class TestTildeAndEps:
    """Test W~ and W^eps."""

    def test_tilde_is_involutive(self, cuspidal_3_2):
        W = combination(cuspidal_3_2[0])

        twice = tilde_map(tilde_map(W))

        assert twice.direction == W.direction
        np.testing.assert_allclose(twice.values, W.values, atol=1e-12)

    def test_eps_is_involutive(self, cuspidal_2_3):
        W = combination(cuspidal_2_3[2])
        np.testing.assert_allclose(epsilon_map(epsilon_map(W)).values, W.values, atol=1e-12)

    def test_tilde_definition(self, cuspidal_2_3):
        """W~(g) = W(w g^iota) at every group element."""
        W = combination(cuspidal_2_3[0])
        W_tilde = tilde_map(W)
        table = W.cosets.table
        w = np.fliplr(np.eye(2, dtype=np.int64))
        targets = table.ids(np.einsum("ij,njk->nik", w, table.elements[table.iota_ids]) % 3)
        np.testing.assert_allclose(
            W_tilde.evaluate_ids(np.arange(len(table))), W.evaluate_ids(targets), atol=1e-12
        )

    @pytest.mark.parametrize("fixture", ["components_2_3", "components_3_2"])
    def test_tilde_lands_in_contragredient(self, fixture, request):
        """(W~)^eps lies in the theta-model of the contragredient."""
        components = request.getfixturevalue(fixture)
        for c in components:
            W = combination(c)
            partner = contragredient_partner(c, components)

            image = epsilon_map(tilde_map(W)).values

            leak = image - partner.basis @ (partner.basis.conj().T @ image)
            assert np.linalg.norm(leak) < 1e-8 * np.linalg.norm(image)

    def test_conjugate_model_matches_direct_decomposition(self, components_2_3):
        """The eps-image of each component is a component of the conjugate space."""
        conjugate_components = decompose(build_gg_space(2, 3, -1), seed=0)
        for c in components_2_3:
            basis = conjugate_model(c)

            match, overlap = match_component(basis, conjugate_components)

            assert overlap > 1 - 1e-8
            np.testing.assert_allclose(match.character, c.character, atol=1e-8)


@pytest.mark.unit
class TestPairing:
    """Test the bilinear pairing on Kirillov spaces."""

    def test_deltas(self):
        """Delta functions at the representatives pair to the identity matrix."""
        index = kirillov_index(3, 2)
        gram = np.array(
            [
                [pairing(delta(index, i, 1), delta(index, j, -1)) for j in range(len(index))]
                for i in range(len(index))
            ]
        )
        np.testing.assert_allclose(gram, np.eye(len(index)))

    def test_zero(self):
        index = kirillov_index(2, 3)
        zero = KirillovFunction(index, np.zeros(2))
        assert pairing(zero, delta(index, 1, -1)) == 0

    def test_measure_scales(self):
        index = kirillov_index(2, 3)
        f = KirillovFunction(index, np.array([1.0, 2.0]))
        phi = KirillovFunction(index, np.array([3.0, 1j]), direction=-1)
        assert pairing(f, phi, measure=0.5) == pytest.approx(0.5 * (3 + 2j))

    def test_same_direction_rejected(self):
        index = kirillov_index(2, 3)
        with pytest.raises(DirectionMismatchError):
            pairing(delta(index, 0, 1), delta(index, 0, 1))

    def test_rank_mismatch(self):
        with pytest.raises(ValueError, match="Cannot pair"):
            pairing(delta(kirillov_index(2, 3), 0, 1), delta(kirillov_index(3, 2), 0, -1))


@pytest.mark.unit
class TestEmbedTau:
    """Test phi(v g) = theta(v) W_tau(g)."""

    def test_round_trip(self, components_2_2):
        tau = components_2_2[1]
        W_tau = combination(tau)

        back = restrict_to_lower(embed_tau(W_tau))

        np.testing.assert_allclose(back.values, W_tau.values)
        assert back.direction == W_tau.direction

    def test_values_on_mirabolic(self, components_2_2):
        """phi(p) = theta(v) W_tau(g) for every p = v diag(g, 1) in P."""
        W_tau = combination(components_2_2[1], seed=4)
        phi = embed_tau(W_tau)
        table = phi.index.mirabolic.table
        for p_id in table.mirabolic_ids:
            p = table.element(int(p_id))
            g = GroupElement.from_matrix(p.matrix[:2, :2], 2)
            v = p @ embed_lower(g).inverse()
            assert phi(p) == pytest.approx(theta_eval(v) * W_tau(g))

    def test_rank_one_tau(self, trivial_tau_1_3):
        """For n = 2 the Kirillov function of a character is the character itself."""
        W_tau = WhittakerFunction.from_component(trivial_tau_1_3, 0)
        phi = embed_tau(W_tau)
        assert phi.n == 2
        np.testing.assert_allclose(phi.values, W_tau.values)
