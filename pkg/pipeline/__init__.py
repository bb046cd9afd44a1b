"""
mfem-lumped Pipeline Package
Manufactured cases, solve stages and convergence studies
"""

from .baseStage import BaseStage
from .cases import ManufacturedCase, get_case
from .orchestrator import Orchestrator, StudyResult

__all__ = ['BaseStage', 'ManufacturedCase', 'Orchestrator', 'StudyResult', 'get_case']
