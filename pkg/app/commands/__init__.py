"""
Command handlers for the mfem command line
"""

from .element import dump_element_command
from .mesh import mesh_check_command, mesh_gen_command
from .study import history_command, parse_levels, run_command, study_command

__all__ = [
    'dump_element_command', 'mesh_check_command', 'mesh_gen_command',
    'history_command', 'parse_levels', 'run_command', 'study_command',
]
