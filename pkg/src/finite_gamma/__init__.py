"""Finite Gamma Package.

Gelfand-Kazhdan and Jacquet-Piatetskii-Shapiro-Shalika gamma factors for
cuspidal representations of GL_n over small prime fields, and the check that
the two constructions agree.
"""

from .algebra import AdditiveCharacter, FieldScalar, eigenspaces_normal, psi_eval, solve_linear
from .cache import ComponentCache, cache_roundtrip
from .exceptions import GammaError
from .gamma import (
    OperatorOnKirillov,
    gamma_gk,
    gamma_jpss,
    op_A,
    op_C,
    op_Cstar,
    op_K,
    verify_theorem,
    zeta,
)
from .group import (
    CosetTable,
    GroupElement,
    GroupTable,
    SpecialElements,
    coset_decompose,
    embed_lower,
    enumerate_group,
    iota,
    special_elements,
)
from .models import GammaReport, GammaValue, RunConfig, VerificationReport
from .service import GammaService, package_version
from .spectra import (
    GGSpace,
    IrrepComponent,
    build_gg_space,
    central_character,
    decompose,
    is_cuspidal,
)
from .whittaker import (
    KirillovFunction,
    WhittakerFunction,
    embed_tau,
    epsilon_map,
    extend_from_P,
    pairing,
    restrict_to_P,
    theta_eval,
    tilde_map,
)

__version__ = package_version()
__all__ = [
    "AdditiveCharacter",
    "ComponentCache",
    "CosetTable",
    "FieldScalar",
    "GGSpace",
    "GammaError",
    "GammaReport",
    "GammaService",
    "GammaValue",
    "GroupElement",
    "GroupTable",
    "IrrepComponent",
    "KirillovFunction",
    "OperatorOnKirillov",
    "RunConfig",
    "SpecialElements",
    "VerificationReport",
    "WhittakerFunction",
    "build_gg_space",
    "cache_roundtrip",
    "central_character",
    "coset_decompose",
    "decompose",
    "eigenspaces_normal",
    "embed_lower",
    "embed_tau",
    "enumerate_group",
    "epsilon_map",
    "extend_from_P",
    "gamma_gk",
    "gamma_jpss",
    "iota",
    "is_cuspidal",
    "op_A",
    "op_C",
    "op_Cstar",
    "op_K",
    "pairing",
    "psi_eval",
    "restrict_to_P",
    "solve_linear",
    "special_elements",
    "theta_eval",
    "tilde_map",
    "verify_theorem",
    "zeta",
]
