"""Gamma-factor service.

This module wraps the numerical core behind a high-level service that takes a
validated RunConfig and returns report models ready to be written to disk.
"""

import logging

from .algebra import AdditiveCharacter
from .cache import ComponentCache
from .gamma import verify_theorem
from .models import (
    ComponentRecord,
    DecompositionReport,
    ReportHeader,
    RunConfig,
    TableReport,
    VerificationReport,
)
from .spectra import GGSpace, IrrepComponent, build_gg_space, contragredient_partner, decompose

logger = logging.getLogger(__name__)


def package_version() -> str:
    """Installed version, or a placeholder for development checkouts without git tags."""
    try:
        from ._version import version  # type: ignore[import-not-found,unused-ignore]
    except ImportError:
        return "0.0.0+unknown"
    return str(version)


def component_record(c: IrrepComponent, components: list[IrrepComponent]) -> ComponentRecord:
    """Inventory entry for c, with its contragredient looked up among components."""
    try:
        partner: str | None = contragredient_partner(c, components).label
    except ArithmeticError:
        logger.warning("No contragredient partner found for %s", c.label)
        partner = None
    return ComponentRecord(
        label=c.label,
        index=c.index,
        dim=c.dim,
        cuspidal=c.cuspidal,
        central_character=[c.central_character[z] for z in range(1, c.space.q)],
        contragredient=partner,
    )


class GammaService:
    """High-level service returning validated report models.

    Decompositions go through the disk cache when one is configured, so a
    table run after a verify run reuses the same components.
    """

    def __init__(self, config: RunConfig, cache: ComponentCache | None = None):
        """Initialize the service.

        Args:
            config: Validated run settings
            cache: Optional cache; built from config.cache_dir when that is set
        """
        self.config = config
        if cache is None and config.cache_dir is not None:
            cache = ComponentCache(config.cache_dir)
        self.cache = cache
        self.psi = AdditiveCharacter(modulus=config.q, sign=config.psi_sign)

    def header(self) -> ReportHeader:
        return ReportHeader(
            command=self.config.command,
            q=self.config.q,
            n=self.config.n,
            psi=self.psi.descriptor,
            seed=self.config.seed,
            tolerance=self.config.tolerance,
            version=package_version(),
        )

    def decomposer(self, space: GGSpace, seed: int) -> list[IrrepComponent]:
        """decompose(space, seed), served from the cache when available."""
        if self.cache is None:
            return decompose(space, seed)
        return self.cache.get_or_build(space, seed)

    def components(self, n: int, direction: int = 1) -> list[IrrepComponent]:
        space = build_gg_space(n, self.config.q, direction, self.psi)
        return self.decomposer(space, self.config.seed)

    def verify(self) -> VerificationReport:
        """Run the theorem check for every (pi, tau) pair.

        Returns:
            VerificationReport with one record per pair
        """
        records = verify_theorem(
            self.config.q,
            self.config.n,
            seed=self.config.seed,
            tol=self.config.tolerance,
            psi=self.psi,
            decomposer=self.decomposer,
            with_timings=self.config.with_timings,
        )
        return VerificationReport(header=self.header(), records=records)

    def table(self) -> TableReport:
        """Component inventory at rank n, at rank n-1 and the gamma table.

        Returns:
            TableReport; rank one has no lower inventory and no gamma table
        """
        upper = self.components(self.config.n)
        report = TableReport(
            header=self.header(),
            components=[component_record(c, upper) for c in upper],
        )
        if self.config.n >= 2:
            lower = self.components(self.config.n - 1)
            report.lower_components = [component_record(c, lower) for c in lower]
            report.gamma_table = verify_theorem(
                self.config.q,
                self.config.n,
                seed=self.config.seed,
                tol=self.config.tolerance,
                psi=self.psi,
                decomposer=self.decomposer,
            )
        return report

    def decompose(self) -> DecompositionReport:
        """Inventory of the Gelfand-Graev space in the configured direction."""
        space = build_gg_space(self.config.n, self.config.q, self.config.direction, self.psi)
        components = self.decomposer(space, self.config.seed)
        return DecompositionReport(
            header=self.header(),
            direction=self.config.direction,
            group_order=space.order,
            space_dim=space.dim,
            components=[component_record(c, components) for c in components],
        )
