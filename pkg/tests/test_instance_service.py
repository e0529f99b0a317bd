"""Tests for InstanceService and the instance documents."""

import pytest

from app.exceptions import DomainException, InfeasibleException
from app.models.rng_state import RngState
from app.schemas.instance_schema import ClassSystemDocument, HamiltonHostDocument, TargetDocument
from app.services.graph_service import GraphService
from app.services.instance_service import InstanceService
from app.services.regularity_service import RegularityService


class TestInstanceService:
    """Test cases for InstanceService class."""

    @pytest.fixture
    def service(self) -> InstanceService:
        return InstanceService(GraphService())

    def test_bipartite_shape(self, service) -> None:
        pair = service.bipartite(50, 0.5, RngState(7))
        assert (pair.mx, pair.my) == (50, 50)
        assert 0 < pair.edge_count < 2500

    def test_bipartite_is_deterministic(self, service) -> None:
        first = service.bipartite(20, 0.3, RngState(7))
        second = service.bipartite(20, 0.3, RngState(7))
        assert first.edges() == second.edges()

    def test_class_system_pairs_are_super_regular(self, service) -> None:
        system = service.class_system(3, 60, 0.5, RngState(1))
        regularity = RegularityService(GraphService(), witness_budget=500)
        assert system.r == 3
        assert system.N == 60
        for i, j in system.reduced_edges:
            assert regularity.check_super_regular(system.pair(i, j), 0.2, 0.3)

    def test_class_system_respects_reduced_graph(self, service) -> None:
        system = service.class_system(3, 10, 1.0, RngState(1), reduced_edges=[(0, 1)])
        assert system.host.edge_count == 100
        assert system.reduced_edges == [(0, 1)]

    def test_class_system_rejects_empty(self, service) -> None:
        with pytest.raises(DomainException):
            service.class_system(0, 10, 0.5, RngState(0))

    def test_triangle_factor(self, service) -> None:
        target = service.target_factor(3, 20, 2, RngState(0))
        assert target.n == 60
        assert target.graph.edge_count == 60
        assert int(target.graph.degrees().max()) == 2
        assert target.class_sizes(3).tolist() == [20, 20, 20]

    def test_factor_with_path_power_fragment(self, service) -> None:
        target = service.target_factor(3, 60, 4, RngState(3), fragment=10, restricted=2)
        assert int(target.graph.degrees().max()) == 4
        assert len(target.restricted) == 2
        system = service.class_system(3, 60, 0.5, RngState(1))
        target.validate_against(system, beta=0.05, alpha=0.5, max_degree=4)
        for x, allowed in target.w_sets.items():
            assert len(allowed) == 30
            assert set(allowed) <= set(system.classes[int(target.h[x])])

    def test_factor_degree_above_bound(self, service) -> None:
        with pytest.raises(DomainException):
            service.target_factor(3, 10, 1, RngState(0))

    def test_hamilton_host_minimum_degree(self, service) -> None:
        host = service.hamilton_host(120, 3, 0.1, RngState(0))
        assert int(host.graph.degrees().min()) >= 42
        assert [len(part) for part in host.classes] == [30, 30, 30, 30]
        assert (2, 3) not in host.template_edges
        assert len(host.template_edges) == 5
        assert host.exceptional == []

    def test_hamilton_host_exceptional_vertices(self, service) -> None:
        host = service.hamilton_host(200, 3, 0.1, RngState(0), exceptional=4)
        assert host.class_size == 49
        assert host.exceptional == [196, 197, 198, 199]
        assert int(host.graph.degrees().min()) >= 70

    def test_hamilton_host_remainder_joins_exceptional(self, service) -> None:
        host = service.hamilton_host(122, 3, 0.1, RngState(0))
        assert host.class_size == 30
        assert host.exceptional == [120, 121]

    def test_hamilton_host_small_k_keeps_full_template(self, service) -> None:
        host = service.hamilton_host(60, 2, 0.1, RngState(0))
        assert host.template_edges == [(0, 1), (0, 2), (1, 2)]

    def test_hamilton_host_is_deterministic(self, service) -> None:
        first = service.hamilton_host(80, 3, 0.1, RngState(4))
        second = service.hamilton_host(80, 3, 0.1, RngState(4))
        assert first.graph == second.graph

    def test_hamilton_host_infeasible_degree(self, service) -> None:
        with pytest.raises(InfeasibleException):
            service.hamilton_host(10, 1, 0.6, RngState(0))

    def test_hamilton_host_too_few_vertices(self, service) -> None:
        with pytest.raises(DomainException):
            service.hamilton_host(5, 3, 0.1, RngState(0), exceptional=3)


class TestInstanceDocuments:
    """Test cases for the instance document schemas."""

    @pytest.fixture
    def service(self) -> InstanceService:
        return InstanceService(GraphService())

    def test_class_system_document_parses_back(self, service) -> None:
        system = service.class_system(2, 8, 0.5, RngState(2))
        text = ClassSystemDocument.from_system(system, d=0.5).model_dump_json()
        restored = ClassSystemDocument.model_validate_json(text).to_system()
        assert restored.classes == system.classes
        assert restored.host == system.host

    def test_target_document_parses_back(self, service) -> None:
        target = service.target_factor(3, 6, 4, RngState(2), fragment=2, restricted=1)
        document = TargetDocument.from_target(target)
        assert document.max_degree == 4
        restored = TargetDocument.model_validate_json(document.model_dump_json()).to_target()
        assert restored.graph == target.graph
        assert restored.w_sets == target.w_sets
        assert restored.h.tolist() == target.h.tolist()

    def test_hamilton_host_document_parses_back(self, service) -> None:
        host = service.hamilton_host(40, 3, 0.1, RngState(2), exceptional=2)
        restored = HamiltonHostDocument.model_validate_json(HamiltonHostDocument.from_host(host).model_dump_json())
        rebuilt = restored.to_host()
        assert rebuilt.graph == host.graph
        assert rebuilt.exceptional == host.exceptional
        assert rebuilt.template_edges == host.template_edges
