"""Matrix Market export of assembled operators for debugging"""
import logging
from pathlib import Path
from typing import Dict, Union

import scipy.io
import scipy.sparse as sp

from core.assembly import LumpedMassMatrix
from core.reduction import SchurSystem


class MatrixExporter:
    """Writes S, M_h and B of a level as ``<prefix>_{S,M,B}.mtx``"""

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self.logger = logging.getLogger("services.matrix_export")
        self.total_exported = 0

    def export(self, name: str, matrix: sp.spmatrix, comment: str = "") -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{name}.mtx"
        scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), comment=comment, symmetry="general")
        self.total_exported += 1
        self.logger.info(f"Exported {name} ({matrix.shape[0]}x{matrix.shape[1]}, nnz={matrix.nnz}) to {path}")
        return path

    def export_system(self, prefix: str, system: SchurSystem, mass: LumpedMassMatrix) -> Dict[str, Path]:
        return {
            "S": self.export(f"{prefix}_S", system.matrix, "Schur complement B M_h^-1 B^T"),
            "M": self.export(f"{prefix}_M", mass.to_sparse(), "lumped velocity mass matrix"),
            "B": self.export(f"{prefix}_B", system.div, "divergence matrix"),
        }
