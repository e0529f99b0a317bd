"""Dependency injection container for services."""

from dependency_injector import containers, providers

from app.app_config import AppSettings
from app.config import Settings
from app.services.blowup_service import BlowupService
from app.services.graph_service import GraphService
from app.services.hamilton_service import HamiltonService
from app.services.instance_service import InstanceService
from app.services.matching_service import MatchingService
from app.services.reduced_graph_service import ReducedGraphService
from app.services.regularity_service import RegularityService
from app.services.spread_service import SpreadService
from app.services.trial_runner import TrialRunner


class ServiceContainer(containers.DeclarativeContainer):
    """Container for service dependency injection."""

    # Configuration providers
    config = providers.Dependency(instance_of=Settings)
    app_config = providers.Dependency(instance_of=AppSettings)

    # Trial runner - thread pool for independent seeded jobs
    trial_runner = providers.Singleton(
        TrialRunner,
        max_workers=config.provided.task_max_workers,
    )

    graph_service = providers.Singleton(GraphService)

    regularity_service = providers.Singleton(
        RegularityService,
        graph_service=graph_service,
        witness_budget=app_config.provided.witness_budget,
        slack_constant=app_config.provided.extraction_slack_c,
    )

    matching_service = providers.Singleton(
        MatchingService,
        regularity_service=regularity_service,
        exact_limit=app_config.provided.exact_matching_limit,
        mcmc_step_factor=app_config.provided.mcmc_step_factor,
    )

    # Factory so that commands can switch relaxed (P2) per call
    blowup_service = providers.Factory(
        BlowupService,
        regularity_service=regularity_service,
        matching_service=matching_service,
        hypothesis_eps=app_config.provided.hypothesis_eps,
        phase_two_eps=app_config.provided.phase_two_eps,
        relaxed_p2=app_config.provided.relaxed_p2,
        relaxed_p2_pairs=app_config.provided.relaxed_p2_pairs,
        check_invariants=app_config.provided.check_invariants,
        p1_sample_fraction=app_config.provided.p1_sample_fraction,
    )

    reduced_graph_service = providers.Singleton(
        ReducedGraphService,
        star_restarts=app_config.provided.star_restarts,
        exhaustive_limit=app_config.provided.star_exhaustive_limit,
    )

    hamilton_service = providers.Singleton(
        HamiltonService,
        blowup_service=blowup_service,
        reduced_graph_service=reduced_graph_service,
        graph_service=graph_service,
        trial_runner=trial_runner,
        rejection_budget=app_config.provided.rejection_budget,
        check_invariants=app_config.provided.check_invariants,
    )

    spread_service = providers.Singleton(
        SpreadService,
        matching_service=matching_service,
        trial_runner=trial_runner,
    )

    instance_service = providers.Singleton(InstanceService, graph_service=graph_service)
