"""Tests for the high-level gamma-factor service."""

from unittest.mock import patch

import pytest

from finite_gamma.cache import ComponentCache
from finite_gamma.models import RunConfig
from finite_gamma.service import GammaService, component_record, package_version


@pytest.fixture
def cache(tmp_path):
    return ComponentCache(tmp_path / "components")


@pytest.mark.integration
class TestGammaService:
    """Test report assembly on the fast instances."""

    def test_verify(self, cache):
        """verify returns one passing record per pair with a full header."""
        # Arrange
        service = GammaService(RunConfig(q=3, n=2), cache)

        # Act
        report = service.verify()

        # Assert
        assert report.passed
        assert len(report.records) == 6
        assert report.header.command == "verify"
        assert report.header.psi == "exp(2*pi*i*x/q)"
        assert report.header.version == package_version()

    def test_verify_reuses_cache(self, cache):
        """A second run reads every decomposition from disk."""
        GammaService(RunConfig(q=2, n=3), cache).verify()

        with patch("finite_gamma.cache.decompose") as mock_decompose:
            report = GammaService(RunConfig(q=2, n=3), cache).verify()

        mock_decompose.assert_not_called()
        assert report.passed
        assert len(report.records) == 4

    def test_without_cache(self):
        service = GammaService(RunConfig(q=3, n=2))
        assert service.cache is None
        assert service.verify().passed

    def test_cache_from_config(self, tmp_path):
        service = GammaService(RunConfig(q=3, n=2, cache_dir=tmp_path / "c"))
        assert service.cache.root == tmp_path / "c"

    def test_conjugate_character(self, cache):
        report = GammaService(RunConfig(q=3, n=2, psi_conjugate=True), cache).verify()
        assert report.header.psi == "exp(-2*pi*i*x/q)"
        assert report.passed

    def test_table(self, cache):
        report = GammaService(RunConfig(q=3, n=2, command="table"), cache).table()

        assert [c.dim for c in report.components] == [2, 2, 2, 3, 3, 4]
        assert [c.cuspidal for c in report.components].count(True) == 3
        assert len(report.lower_components) == 2
        assert len(report.gamma_table) == 6
        assert all(record.passed for record in report.gamma_table)
        assert all(c.contragredient is not None for c in report.components)

    def test_table_rank_one(self, cache):
        """Rank one has an inventory but no gamma table."""
        report = GammaService(RunConfig(q=5, n=1, command="table"), cache).table()

        assert len(report.components) == 4
        assert report.lower_components == []
        assert report.gamma_table == []

    def test_decompose_conjugate_direction(self, cache):
        config = RunConfig(q=3, n=2, command="decompose", direction=-1)

        report = GammaService(config, cache).decompose()

        assert report.direction == -1
        assert report.group_order == 48
        assert report.space_dim == 16
        assert sum(c.dim for c in report.components) == 16
        assert cache.path_for(2, 3, -1, 0, 1).exists()


@pytest.mark.unit
class TestComponentRecord:
    def test_fields(self, components_2_3):
        c = components_2_3[0]
        record = component_record(c, components_2_3)
        assert record.label == c.label
        assert record.dim == c.dim
        assert record.central_character == [c.omega(1), c.omega(2)]

    def test_missing_partner(self, components_2_3, caplog):
        """A partner outside the list is recorded as None with a warning."""
        record = component_record(components_2_3[0], components_2_3[3:])
        assert record.contragredient is None
        assert "No contragredient partner" in caplog.text
