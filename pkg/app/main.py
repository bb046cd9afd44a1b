"""Application bootstrap: logging and shared services"""
import copy
import logging
import logging.config
from pathlib import Path
from typing import Any, Dict, Optional

from app.config import get_app_config
from pipeline.orchestrator import Orchestrator
from services.conjugateGradient import ConjugateGradientSolver
from services.meshGenerator import get_mesh_generator

logger = logging.getLogger(__name__)

_logging_configured = False


def _prune_handlers(settings: Dict[str, Any]) -> Dict[str, Any]:
    """Drop handlers disabled with ``null`` in an overlay and every reference to them"""
    settings = copy.deepcopy(settings)
    handlers = settings.get('handlers', {}) or {}
    disabled = {name for name, spec in handlers.items() if spec is None}
    settings['handlers'] = {name: spec for name, spec in handlers.items() if spec is not None}

    targets = list((settings.get('loggers') or {}).values())
    if settings.get('root'):
        targets.append(settings['root'])
    for target in targets:
        if target and 'handlers' in target:
            target['handlers'] = [h for h in target['handlers'] if h not in disabled]
    return settings


def configure_logging(settings: Optional[Dict[str, Any]] = None, force: bool = False):
    """
    Apply the logging dictConfig once per process

    Args:
        settings: dictConfig mapping (the ``logging`` section of the configuration if omitted)
        force: Reconfigure even if logging was already set up
    """
    global _logging_configured
    if _logging_configured and not force:
        return

    config = get_app_config()
    settings = _prune_handlers(settings if settings is not None else config.LOGGING)
    if not settings:
        logging.basicConfig(
            level=getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        )
        _logging_configured = True
        return

    # Create log directories for file handlers
    for handler in settings.get('handlers', {}).values():
        filename = handler.get('filename')
        if filename:
            Path(filename).parent.mkdir(parents=True, exist_ok=True)

    logging.config.dictConfig(settings)
    _logging_configured = True
    logger.debug(f"Logging configured for {config.__name__}")


def quiet_logging(level: int = logging.WARNING):
    """Raise the root logger and every existing logger to at least ``level``"""
    loggers = [logging.getLogger()] + [
        item for item in logging.root.manager.loggerDict.values() if isinstance(item, logging.Logger)
    ]
    for item in loggers:
        if item.level < level:
            item.setLevel(level)


def create_orchestrator(tol: Optional[float] = None, record: Optional[bool] = None,
                        database_url: Optional[str] = None) -> Orchestrator:
    """
    Build an orchestrator from the active configuration

    Args:
        tol: CG tolerance (configured value if omitted)
        record: Persist studies (configured value if omitted)
        database_url: Database URL (configured value if omitted)

    Returns:
        Orchestrator
    """
    config = get_app_config()
    solver_settings = config.SOLVER
    tol = solver_settings.cg_tol if tol is None else tol
    solver = ConjugateGradientSolver(
        tol=tol,
        min_iterations=solver_settings.min_iterations,
        iteration_factor=solver_settings.iteration_factor,
    )
    return Orchestrator(
        generator=get_mesh_generator(),
        solver=solver,
        tol=tol,
        rhs_degree=config.QUADRATURE.rhs_degree,
        error_degree=config.QUADRATURE.error_degree,
        post_degree=config.STUDY.postprocess_degree,
        exact_mass_degree=config.QUADRATURE.exact_mass_degree,
        post_quad_degree=config.QUADRATURE.postprocess_degree,
        dense_limit=solver_settings.dense_limit,
        pivot_ratio=solver_settings.pivot_ratio,
        record=config.DATABASE.enabled if record is None else record,
        database_url=database_url or config.DATABASE.url,
    )
