"""The two gamma-factor constructions and the check that they agree.

Every operator acts on value vectors over the Kirillov index set U_{n-1}\\G_{n-1}.
The pairing of a theta function with a conjugate-theta function is the plain
bilinear sum over that set, so adjoints are matrix transposes. Gamma factors are
ratios of pairings, so the counting-measure normalization cancels throughout.
"""

import logging
import time
from collections.abc import Callable
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .algebra import ASSERT_TOL, AdditiveCharacter, Matrix, matrix_rank, solve_linear
from .exceptions import (
    DirectionMismatchError,
    GammaError,
    InconsistentRatioError,
    NoNonvanishingPairError,
    NotScalarError,
)
from .group import inverse_mod, multiply_mod, special_elements
from .models import GammaReport, GammaValue
from .spectra import GGSpace, IrrepComponent, build_gg_space, decompose
from .whittaker import (
    KirillovFunction,
    KirillovIndex,
    WhittakerFunction,
    conjugate_model,
    epsilon_matrix,
    kirillov_index,
    restrict_to_P,
    tilde_matrix,
)

logger = logging.getLogger(__name__)

# A pairing counts as nonvanishing above this fraction of the largest one
NONVANISHING_TOL = 1e-6
VANISHING_FLOOR = 1e-12

OperatorLabel = Literal["K", "A", "Astar", "C", "Cstar"]
Decomposer = Callable[[GGSpace, int], list[IrrepComponent]]


class OperatorOnKirillov:
    """A linear operator on Kirillov value vectors of one direction."""

    def __init__(
        self,
        index: KirillovIndex,
        matrix: Matrix,
        label: OperatorLabel,
        direction: int,
        psi: AdditiveCharacter,
    ):
        self.index = index
        self.matrix = np.asarray(matrix, dtype=np.complex128)
        size = len(index)
        if self.matrix.shape != (size, size):
            msg = f"{label} must be {size}x{size}, got {self.matrix.shape}"
            raise ValueError(msg)
        self.label = label
        self.direction = direction
        self.psi = psi

    def __repr__(self) -> str:
        return f"OperatorOnKirillov({self.label!r}, n={self.n}, q={self.q}, size={len(self.index)})"

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def q(self) -> int:
        return self.index.q

    def __call__(self, f: KirillovFunction) -> KirillovFunction:
        if f.direction != self.direction:
            msg = f"{self.label} acts on direction {self.direction:+d}, got {f.direction:+d}"
            raise DirectionMismatchError(msg)
        return KirillovFunction(self.index, self.matrix @ f.values, f.direction, self.psi)


def _lower_iota_targets(index: KirillovIndex, left: NDArray[np.int64]) -> NDArray[np.int64]:
    reps = index.lower.rep_matrices
    reps_iota = np.swapaxes(inverse_mod(reps, index.q), 1, 2)
    return multiply_mod(left[None], reps_iota, index.q)


def op_K(c: IrrepComponent, functional_scale: complex = 1.0) -> OperatorOnKirillov:
    """K(pi) f = (g -> W(s_n g^iota))|_P with W the extension of f to c.

    Args:
        c: A cuspidal component
        functional_scale: Multiplier on the Whittaker functional; K does not depend on it

    Raises:
        SingularMatrixError: If restriction to P is not a bijection on c
    """
    space = c.space
    index = kirillov_index(space.n, space.q)
    s = special_elements(space.n, space.q).s
    p_mats = index.upper.table.elements[index.p_rep_ids]
    targets = multiply_mod(s.matrix[None], np.swapaxes(inverse_mod(p_mats, space.q), 1, 2), space.q)
    evaluate = space.evaluation_matrix(index.upper.table.ids(targets))

    basis = functional_scale * c.basis
    restricted = index.restriction_matrix() @ basis
    extension = basis @ solve_linear(restricted, np.eye(len(index), dtype=np.complex128))
    return OperatorOnKirillov(index, evaluate @ extension, "K", space.direction, space.psi)


@lru_cache(maxsize=None)
def _a_matrix(n: int, q: int, psi: AdditiveCharacter, direction: int) -> Matrix:
    index = kirillov_index(n, q)
    s = special_elements(n - 1, q).s
    targets = _lower_iota_targets(index, s.matrix)
    out = index.lower.evaluation_matrix(index.lower.table.ids(targets), psi, direction)
    out.setflags(write=False)
    return out


def op_A(
    n: int, q: int, psi: AdditiveCharacter | None = None, direction: int = 1
) -> OperatorOnKirillov:
    """(A f)(v g) = f(v s_{n-1} g^iota); a phased permutation of the Kirillov index."""
    if n < 2:
        msg = f"A needs n ≥ 2, got {n}"
        raise ValueError(msg)
    psi = psi or AdditiveCharacter(modulus=q)
    return OperatorOnKirillov(
        kirillov_index(n, q), _a_matrix(n, q, psi, direction), "A", direction, psi
    )


def op_Astar(
    n: int, q: int, psi: AdditiveCharacter | None = None, direction: int = 1
) -> OperatorOnKirillov:
    """(A* W')(g) = W'(s_{n-1}^{-1} g^iota) on conjugate-direction functions.

    Built from the closed formula rather than by transposing A.
    """
    if n < 2:
        msg = f"A* needs n ≥ 2, got {n}"
        raise ValueError(msg)
    psi = psi or AdditiveCharacter(modulus=q)
    index = kirillov_index(n, q)
    s_inv = special_elements(n - 1, q).s.inverse()
    targets = _lower_iota_targets(index, s_inv.matrix)
    matrix = index.lower.evaluation_matrix(index.lower.table.ids(targets), psi, -direction)
    return OperatorOnKirillov(index, matrix, "Astar", -direction, psi)


def op_C(c: IrrepComponent) -> OperatorOnKirillov:
    """C(pi) = A K(pi), a G_{n-1}-endomorphism of the Kirillov space."""
    space = c.space
    a = op_A(space.n, space.q, space.psi, space.direction)
    k = op_K(c)
    return OperatorOnKirillov(k.index, a.matrix @ k.matrix, "C", space.direction, space.psi)


def op_Cstar(c: IrrepComponent) -> OperatorOnKirillov:
    """Transpose of C(pi) for the bilinear pairing, acting on conjugate-direction functions."""
    op = op_C(c)
    return OperatorOnKirillov(op.index, op.matrix.T, "Cstar", -op.direction, op.psi)


def twisted_equivariance_deviation(op: OperatorOnKirillov, twist: bool = True) -> float:
    """Largest ||X rho(h) - rho(h') X|| over h in G_{n-1}.

    With twist, h' = h^iota (the law K(pi) and A obey); without, h' = h (C(pi)).
    """
    lower = build_gg_space(op.n - 1, op.q, op.direction, op.psi)
    partner = lower.table.iota_ids if twist else np.arange(lower.order)
    worst = 0.0
    for h_id in range(lower.order):
        left = op.matrix @ lower.rho(h_id)
        right = lower.rho(int(partner[h_id])) @ op.matrix
        worst = max(worst, float(np.linalg.norm(left - right, ord=2)))
    return worst


def _check_pair(c_pi: IrrepComponent, c_tau: IrrepComponent) -> None:
    pi_space, tau_space = c_pi.space, c_tau.space
    if pi_space.q != tau_space.q or tau_space.n != pi_space.n - 1:
        msg = (
            f"tau must live on GL_{pi_space.n - 1}(F_{pi_space.q}), "
            f"got GL_{tau_space.n}(F_{tau_space.q})"
        )
        raise ValueError(msg)
    if pi_space.direction != tau_space.direction or pi_space.psi != tau_space.psi:
        msg = "pi and tau must be decomposed with the same character and direction"
        raise DirectionMismatchError(msg)


def _nonvanishing(values: Matrix) -> NDArray[np.bool_]:
    largest = float(np.max(np.abs(values), initial=0.0))
    if largest < VANISHING_FLOOR:
        return np.zeros(values.shape, dtype=bool)
    return np.abs(values) > NONVANISHING_TOL * largest


def _ratio_extraction(
    numerators: Matrix, denominators: Matrix, method: str, label: str
) -> tuple[complex, float, int]:
    mask = _nonvanishing(denominators)
    if not mask.any():
        msg = f"Every {method} pairing vanished for {label}"
        raise NoNonvanishingPairError(msg)
    # Deterministic sweep order: largest denominator, first in (row, column) order on ties.
    pick = np.unravel_index(int(np.argmax(np.abs(denominators))), denominators.shape)
    value = complex(numerators[pick] / denominators[pick])
    ratios = numerators[mask] / denominators[mask]
    spread = float(np.max(np.abs(ratios - value)) / max(abs(value), VANISHING_FLOOR))
    return value, spread, int(mask.sum())


def gamma_gk(c_pi: IrrepComponent, c_tau: IrrepComponent, tol: float = ASSERT_TOL) -> GammaValue:
    """The scalar by which C*(pi) acts on the embedded conjugate-theta model of tau.

    Raises:
        NotScalarError: If C*(pi) is not scalar on that model within tol
    """
    _check_pair(c_pi, c_tau)
    model = conjugate_model(c_tau)
    moved = op_Cstar(c_pi).matrix @ model
    value = complex(np.trace(model.conj().T @ moved) / c_tau.dim)
    residual = np.linalg.norm(moved - value * model, axis=0)
    deviation = float(residual.max() / max(abs(value), VANISHING_FLOOR))
    if deviation > tol:
        msg = f"C*({c_pi.label}) deviates {deviation:.3e} from a scalar on tau = {c_tau.label}"
        raise NotScalarError(msg)
    return GammaValue(value=value, method="GK", deviation=deviation, pairs_used=c_tau.dim)


def gamma_gk_probe(
    c_pi: IrrepComponent,
    c_tau: IrrepComponent,
    tol: float = ASSERT_TOL,
    measure: float = 1.0,
) -> GammaValue:
    """gamma from <K(pi) f, A* W'> = gamma <f, W'> over delta f and basis W'.

    Raises:
        NoNonvanishingPairError: If <f, W'> vanishes for every probe
        InconsistentRatioError: If two probes disagree beyond tol
    """
    _check_pair(c_pi, c_tau)
    space = c_pi.space
    model = conjugate_model(c_tau)
    k = op_K(c_pi).matrix
    a_star = op_Astar(space.n, space.q, space.psi, space.direction).matrix
    # Row i, column j: probe f = delta_i against the j-th basis function of tau
    lhs = measure * (k.T @ (a_star @ model))
    rhs = measure * model
    value, spread, used = _ratio_extraction(lhs, rhs, "probe", f"({c_pi.label}, {c_tau.label})")
    if spread > tol:
        msg = f"Probe ratios for ({c_pi.label}, {c_tau.label}) spread {spread:.3e}"
        raise InconsistentRatioError(msg)
    return GammaValue(value=value, method="GK-probe", deviation=spread, pairs_used=used)


def zeta(W: WhittakerFunction, Wp: WhittakerFunction, measure: float = 1.0) -> complex:
    """Z(W, W') = sum over U_{n-1}\\G_{n-1} of W(diag(g, 1)) W'(g)."""
    if Wp.n != W.n - 1 or Wp.cosets.q != W.cosets.q:
        msg = f"Cannot pair a rank {W.n} function with a rank {Wp.n} function"
        raise ValueError(msg)
    if W.direction != -Wp.direction:
        msg = "Zeta integrand needs one theta and one conjugate-theta function"
        raise DirectionMismatchError(msg)
    return complex(measure * np.sum(restrict_to_P(W).values * Wp.values))


def omega_sign(c_tau: IrrepComponent, n: int) -> complex:
    """omega_tau(-1)^(n-1)."""
    return complex(c_tau.omega(-1) ** (n - 1))


def zeta_matrices(c_pi: IrrepComponent, c_tau: IrrepComponent) -> tuple[Matrix, Matrix]:
    """Z(W_a, W'_b) and Z(W~_a, W'~_b) over the basis of pi and the conjugate model of tau."""
    _check_pair(c_pi, c_tau)
    space = c_pi.space
    index = kirillov_index(space.n, space.q)
    restriction = index.restriction_matrix()
    model = conjugate_model(c_tau)
    upper_tilde = tilde_matrix(space.n, space.q, space.psi, space.direction)
    lower_tilde = tilde_matrix(space.n - 1, space.q, space.psi, -space.direction)
    z = (restriction @ c_pi.basis).T @ model
    z_tilde = (restriction @ upper_tilde @ c_pi.basis).T @ (lower_tilde @ model)
    return z, z_tilde


def gamma_jpss(
    c_pi: IrrepComponent,
    c_tau: IrrepComponent,
    tol: float = ASSERT_TOL,
    measure: float = 1.0,
) -> GammaValue:
    """gamma = Z(W~, W'~) / (omega_tau(-1)^(n-1) Z(W, W')) over every nonvanishing basis pair.

    Raises:
        NoNonvanishingPairError: If Z(W, W') vanishes on every basis pair
        InconsistentRatioError: If two pairs give ratios further apart than tol
    """
    z, z_tilde = zeta_matrices(c_pi, c_tau)
    sign = omega_sign(c_tau, c_pi.space.n)
    value, spread, used = _ratio_extraction(
        measure * z_tilde, sign * measure * z, "zeta", f"({c_pi.label}, {c_tau.label})"
    )
    if spread > tol:
        msg = f"Functional-equation ratios for ({c_pi.label}, {c_tau.label}) spread {spread:.3e}"
        raise InconsistentRatioError(msg)
    return GammaValue(value=value, method="JPSS", deviation=spread, pairs_used=used)


def consistency_checks(c_pi: IrrepComponent, c_tau: IrrepComponent) -> dict[str, float]:
    """Deviations of the identities linking the two constructions.

    Returns:
        kirillov_identity: max |K(pi)(W|_P) - ((W~)^eps)|_P| over the basis of pi
        adjoint_formula: max |A^T - A*| with A* from its closed formula
        intermediate_display: max |<K(pi) W|_P, A* W'> - omega_tau(-1)^(n-1) Z(W~, W'~)|
        c_equivariance: max ||C rho(h) - rho(h) C|| over h in G_{n-1}
        k_twisted_equivariance: max ||K rho(h) - rho(h^iota) K|| over h in G_{n-1}
        zero_consistency: max |Z(W~, W'~)| over pairs with Z(W, W') = 0
        kirillov_rank_deficit: |P|/|U| minus the rank of restriction to P on pi
    """
    _check_pair(c_pi, c_tau)
    space = c_pi.space
    index = kirillov_index(space.n, space.q)
    restriction = index.restriction_matrix()
    k = op_K(c_pi)
    a = op_A(space.n, space.q, space.psi, space.direction)
    a_star = op_Astar(space.n, space.q, space.psi, space.direction)
    c = OperatorOnKirillov(index, a.matrix @ k.matrix, "C", space.direction, space.psi)
    model = conjugate_model(c_tau)

    upper_tilde = tilde_matrix(space.n, space.q, space.psi, space.direction)
    upper_eps = epsilon_matrix(space.n, space.q, space.psi, -space.direction)
    kirillov_lhs = k.matrix @ restriction @ c_pi.basis
    kirillov_rhs = restriction @ upper_eps @ upper_tilde @ c_pi.basis

    z, z_tilde = zeta_matrices(c_pi, c_tau)
    display = (k.matrix @ restriction @ c_pi.basis).T @ (a_star.matrix @ model)
    vanishing = ~_nonvanishing(z)

    return {
        "kirillov_identity": float(np.max(np.abs(kirillov_lhs - kirillov_rhs))),
        "adjoint_formula": float(np.max(np.abs(a.matrix.T - a_star.matrix))),
        "intermediate_display": float(
            np.max(np.abs(display - omega_sign(c_tau, space.n) * z_tilde))
        ),
        "c_equivariance": twisted_equivariance_deviation(c, twist=False),
        "k_twisted_equivariance": twisted_equivariance_deviation(k, twist=True),
        "zero_consistency": float(np.max(np.abs(z_tilde[vanishing]), initial=0.0)),
        "kirillov_rank_deficit": float(len(index) - matrix_rank(restriction @ c_pi.basis)),
    }


def _verify_pair(
    c_pi: IrrepComponent, c_tau: IrrepComponent, tol: float, with_timings: bool
) -> GammaReport:
    space = c_pi.space
    report = GammaReport(
        q=space.q,
        n=space.n,
        psi=space.psi.descriptor,
        pi_id=c_pi.label,
        tau_id=c_tau.label,
        omega_tau_minus_one=c_tau.omega(-1),
    )
    timings: dict[str, float] = {}
    try:
        start = time.perf_counter()
        gk = gamma_gk(c_pi, c_tau, tol)
        probe = gamma_gk_probe(c_pi, c_tau, tol)
        timings["gk"] = time.perf_counter() - start

        start = time.perf_counter()
        jpss = gamma_jpss(c_pi, c_tau, tol)
        timings["jpss"] = time.perf_counter() - start

        start = time.perf_counter()
        diagnostics = consistency_checks(c_pi, c_tau)
        timings["checks"] = time.perf_counter() - start
    except GammaError as e:
        logger.error("Pair (%s, %s) failed: %s", c_pi.label, c_tau.label, e)
        report.error = f"{type(e).__name__}: {e}"
        return report

    diagnostics["gk_scalar_deviation"] = gk.deviation
    diagnostics["probe_agreement"] = abs(gk.value - probe.value)
    diagnostics["jpss_spread"] = jpss.deviation
    report.gamma_gk = gk
    report.gamma_jpss = jpss
    report.difference = abs(gk.value - jpss.value)
    report.abs_gamma = abs(gk.value)
    report.diagnostics = diagnostics
    if with_timings:
        report.timings = timings
    rank_ok = diagnostics["kirillov_rank_deficit"] == 0
    within = all(v <= tol for key, v in diagnostics.items() if key != "kirillov_rank_deficit")
    report.passed = report.difference < tol and within and rank_ok
    if report.passed:
        logger.info(
            "Pair (%s, %s): gamma = %.12g%+.12gi",
            c_pi.label,
            c_tau.label,
            gk.value.real,
            gk.value.imag,
        )
    else:
        logger.error(
            "Pair (%s, %s) failed: |gamma_GK - gamma_JPSS| = %.3e",
            c_pi.label,
            c_tau.label,
            report.difference,
        )
    return report


def verify_theorem(
    q: int,
    n: int,
    seed: int = 0,
    tol: float = ASSERT_TOL,
    psi: AdditiveCharacter | None = None,
    decomposer: Decomposer = decompose,
    with_timings: bool = False,
) -> list[GammaReport]:
    """Compare gamma_GK with gamma_JPSS for every cuspidal pi on GL_n and generic tau on GL_{n-1}.

    A failing pair never aborts the run: its report carries passed=False and the error.

    Args:
        q: The prime q
        n: Rank of the pi side, at least 2
        seed: Seed for both decompositions
        tol: Tolerance for the comparison and every consistency diagnostic
        psi: Additive character; the standard one by default
        decomposer: Called as decomposer(space, seed), e.g. a cache-backed decompose
        with_timings: Record per-pair timings on the reports

    Returns:
        Reports ordered by (pi id, tau id)
    """
    if n < 2:
        msg = f"Gamma factors need n ≥ 2, got {n}"
        raise ValueError(msg)
    psi = psi or AdditiveCharacter(modulus=q)
    pis = [c for c in decomposer(build_gg_space(n, q, 1, psi), seed) if c.cuspidal]
    taus = decomposer(build_gg_space(n - 1, q, 1, psi), seed)
    logger.info(
        "Verifying GL_%d x GL_%d over F_%d: %d cuspidal pi, %d generic tau",
        n,
        n - 1,
        q,
        len(pis),
        len(taus),
    )
    reports = [
        _verify_pair(c_pi, c_tau, tol, with_timings)
        for c_pi in sorted(pis, key=lambda c: c.index)
        for c_tau in sorted(taus, key=lambda c: c.index)
    ]
    logger.info("%d of %d pairs passed", sum(r.passed for r in reports), len(reports))
    return reports


def measure_invariance(
    c_pi: IrrepComponent, c_tau: IrrepComponent, measure: float, tol: float = ASSERT_TOL
) -> float:
    """Largest change in either gamma when every pairing is scaled by measure."""
    base_probe = gamma_gk_probe(c_pi, c_tau, tol)
    base_jpss = gamma_jpss(c_pi, c_tau, tol)
    scaled_probe = gamma_gk_probe(c_pi, c_tau, tol, measure)
    scaled_jpss = gamma_jpss(c_pi, c_tau, tol, measure)
    return max(
        abs(base_probe.value - scaled_probe.value), abs(base_jpss.value - scaled_jpss.value)
    )
