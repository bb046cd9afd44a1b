"""Orchestrator for single-level runs and convergence studies"""
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.assembly import assemble_exact_mass
from core.database import LevelResult, StudyRun, get_db_manager
from core.exceptions import CaseMismatch, InputError
from core.fields import centroid_fields
from core.postprocess import ErrorReport
from core.reduction import DiscreteSolution, solve_saddle_dense
from core.refelem import SchemeOrder
from pipeline.baseStage import BaseStage
from pipeline.cases import ManufacturedCase, check_consistency, get_case
from pipeline.report import ConvergenceRecord, build_records, emit_csv
from pipeline.stages import AssemblyStage, ErrorStage, MeshStage, PostprocessStage, SolveStage
from services.conjugateGradient import ConjugateGradientSolver
from services.matrixExport import MatrixExporter
from services.meshGenerator import MeshGenerator, get_mesh_generator


@dataclass
class StudyResult:
    case: str
    family: str
    order: int
    records: List[ConvergenceRecord]
    csv: str
    study_id: Optional[str] = None
    stats: Dict[str, Any] = field(default_factory=dict)


class Orchestrator:
    """Runs the solve pipeline (mesh, assembly, solve, post-processing, errors) per level"""

    def __init__(self,
                 generator: Optional[MeshGenerator] = None,
                 solver: Optional[ConjugateGradientSolver] = None,
                 tol: float = 1e-12,
                 rhs_degree: int = 6,
                 error_degree: int = 6,
                 post_degree: int = 2,
                 exact_mass_degree: int = 8,
                 post_quad_degree: int = 6,
                 dense_limit: int = 5000,
                 pivot_ratio: float = 1e-14,
                 record: bool = False,
                 database_url: Optional[str] = None,
                 logger: Optional[logging.Logger] = None):
        """
        Initialize Orchestrator

        Args:
            generator: Mesh generator (shared instance if omitted)
            solver: CG solver shared by all levels
            tol: Relative CG tolerance
            rhs_degree: Gauss degree for source and boundary terms
            error_degree: Gauss degree for error norms and post-processing
            post_degree: Degree of the post-processed pressure (1 or 2)
            exact_mass_degree: Gauss degree of the unlumped mass matrix
            post_quad_degree: Gauss degree of the local post-processing systems
            dense_limit: Size guard of the dense saddle-point oracle
            pivot_ratio: Singularity threshold of the dense oracle
            record: Persist studies to the database
            database_url: Database URL when recording
            logger: Logger instance
        """
        self.generator = generator or get_mesh_generator()
        self.solver = solver or ConjugateGradientSolver(tol=tol)
        self.tol = tol
        self.exact_mass_degree = exact_mass_degree
        self.dense_limit = dense_limit
        self.pivot_ratio = pivot_ratio
        self.record = record
        self.database_url = database_url
        self.logger = logger or logging.getLogger(__name__)

        self.stages: List[BaseStage] = [
            MeshStage(self.generator),
            AssemblyStage(rhs_degree=rhs_degree),
            SolveStage(self.solver, tol=tol),
            PostprocessStage(degree=post_degree, quad_degree=post_quad_degree),
            ErrorStage(quad_degree=error_degree),
        ]

        # Statistics
        self.total_jobs = 0
        self.successful_jobs = 0
        self.failed_jobs = 0

    def resolve_case(self, case: Union[str, ManufacturedCase], family: str) -> ManufacturedCase:
        dim = self.generator.dimension(family)
        if isinstance(case, ManufacturedCase):
            if case.dim != dim:
                raise CaseMismatch(f"Case '{case.name}' is {case.dim}D, family '{family}' is {dim}D")
            return case
        return get_case(case, dim)

    def run_level(self, case: Union[str, ManufacturedCase], family: str, level: int,
                  order: Union[int, SchemeOrder] = SchemeOrder.SECOND,
                  tol: Optional[float] = None, mesh=None) -> Dict[str, Any]:
        """
        Run all stages for one level

        Returns:
            Pipeline state with mesh, dofmap, matrices, solution, post and report
        """
        case = self.resolve_case(case, family)
        data: Dict[str, Any] = {
            "case": case,
            "problem": case.problem(),
            "family": family,
            "level": level,
            "order": SchemeOrder(order),
            "tol": self.tol if tol is None else tol,
            "mesh": mesh,
        }
        self.total_jobs += 1
        start_time = time.time()
        try:
            for stage in self.stages:
                data.update(stage(data))
        except Exception:
            self.failed_jobs += 1
            raise
        self.successful_jobs += 1
        data["processing_time"] = time.time() - start_time
        report = data["report"]
        self.logger.info(
            f"{case.name} on {family} level {level} (order {int(data['order'])}): "
            f"h={report.h:.4g}, err_u={report.err_u:.4e}, err_p={report.err_p:.4e}, "
            f"{data['processing_time']:.2f}s"
        )
        return data

    def run_case(self, case: Union[str, ManufacturedCase], family: str, level: int,
                 order: Union[int, SchemeOrder] = SchemeOrder.SECOND,
                 tol: Optional[float] = None) -> Tuple[DiscreteSolution, ErrorReport]:
        data = self.run_level(case, family, level, order, tol)
        return data["solution"], data["report"]

    def convergence_study(self, case: Union[str, ManufacturedCase], family: str,
                          levels: Sequence[int], order: Union[int, SchemeOrder] = SchemeOrder.SECOND,
                          tol: Optional[float] = None,
                          export_dir: Optional[Union[str, Path]] = None) -> StudyResult:
        """
        Run a sequence of levels and compute observed orders

        Args:
            case: Case name or object
            family: Mesh family
            levels: Increasing refinement levels (at least two)
            order: Scheme order
            tol: CG tolerance (orchestrator default if omitted)
            export_dir: Write S, M_h and B of every level here

        Returns:
            StudyResult with records and CSV text
        """
        levels = list(levels)
        if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise InputError(f"A study needs at least two increasing levels, got {levels}")
        case = self.resolve_case(case, family)
        check_consistency(case)
        order = SchemeOrder(order)
        tol = self.tol if tol is None else tol

        study_id = self._create_study_run(case.name, family, order, levels, tol) if self.record else None
        exporter = MatrixExporter(export_dir) if export_dir else None

        reports, iterations, residuals, conservation, times = [], [], [], [], []
        try:
            for level in levels:
                data = self.run_level(case, family, level, order, tol)
                solution = data["solution"]
                reports.append(data["report"])
                iterations.append(solution.iterations)
                residuals.append(solution.residual)
                conservation.append(solution.conservation)
                times.append(data["processing_time"])
                if exporter:
                    exporter.export_system(
                        f"{case.name}_{family}_o{int(order)}_l{level}", data["system"], data["mass"]
                    )
        except Exception as e:
            if study_id:
                self._fail_study_run(study_id, str(e))
            raise

        records = build_records(levels, reports, iterations, residuals, conservation, times)
        if study_id:
            for record in records:
                self._record_level(study_id, record)
            self._complete_study_run(study_id)

        for stage in self.stages:
            self.logger.info(f"Stage stats: {stage.get_stats()}")
        return StudyResult(case.name, family, int(order), records, emit_csv(records),
                           study_id=study_id, stats=self.get_stats())

    def lumping_perturbation(self, data: Dict[str, Any]) -> float:
        """Relative difference between the lumped velocity and the classical mixed velocity.

        Both are measured in the norm of the exactly integrated mass matrix.
        """
        exact_mass = assemble_exact_mass(
            data["mesh"], data["dofmap"], data["problem"].conductivity, self.exact_mass_degree
        )
        classical = solve_saddle_dense(
            exact_mass, data["div"], data["g_vec"], data["f_vec"],
            limit=self.dense_limit, pivot_ratio=self.pivot_ratio
        )
        diff = data["solution"].u - classical.u
        reference = float(np.sqrt(classical.u @ (exact_mass @ classical.u)))
        distance = float(np.sqrt(max(diff @ (exact_mass @ diff), 0.0)))
        return distance / reference if reference > 0.0 else distance

    def dump_fields(self, data: Dict[str, Any], path: Union[str, Path]) -> Path:
        """Write cell-centroid pressure and velocity to CSV"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = centroid_fields(data["mesh"], data["dofmap"], data["solution"].u, data["solution"].p)
        frame.to_csv(path, index=False, float_format="%.10e", lineterminator="\n")
        self.logger.info(f"Wrote {len(frame)} cell values to {path}")
        return path

    def _create_study_run(self, case: str, family: str, order: SchemeOrder,
                          levels: Sequence[int], tol: float) -> str:
        """Create study run record"""
        db = get_db_manager(self.database_url).get_session()

        try:
            run = StudyRun(
                case=case,
                family=family,
                scheme_order=int(order),
                level_min=min(levels),
                level_max=max(levels),
                tolerance=tol,
                status="running",
                started_date=datetime.utcnow(),
                additional_metadata={"levels": list(levels)},
            )

            db.add(run)
            db.commit()

            return run.id

        except Exception as e:
            db.rollback()
            self.logger.error(f"Error creating study run: {str(e)}")
            raise
        finally:
            db.close()

    def _record_level(self, study_id: str, record: ConvergenceRecord):
        """Store the results of one level"""
        db = get_db_manager(self.database_url).get_session()

        try:
            report = record.report
            db.add(LevelResult(
                study_id=study_id,
                level=record.level,
                h=report.h,
                dof_u=report.dof_u,
                dof_p=report.dof_p,
                err_u=report.err_u,
                err_div=report.err_div,
                err_p=report.err_p,
                err_proj0=report.err_proj0,
                err_post=report.err_post,
                eoc=record.eoc,
                iterations=record.iterations,
                residual=record.residual,
                conservation=record.conservation,
                processing_time=record.processing_time,
            ))
            db.commit()

        except Exception as e:
            db.rollback()
            self.logger.error(f"Error recording level {record.level}: {str(e)}")
        finally:
            db.close()

    def _complete_study_run(self, study_id: str):
        """Mark study run as completed"""
        db = get_db_manager(self.database_url).get_session()

        try:
            run = db.query(StudyRun).filter_by(id=study_id).first()
            if run:
                run.status = "completed"
                run.completed_date = datetime.utcnow()
                db.commit()

        except Exception as e:
            db.rollback()
            self.logger.error(f"Error completing study run: {str(e)}")
        finally:
            db.close()

    def _fail_study_run(self, study_id: str, error_message: str):
        """Mark study run as failed"""
        db = get_db_manager(self.database_url).get_session()

        try:
            run = db.query(StudyRun).filter_by(id=study_id).first()
            if run:
                run.status = "failed"
                run.completed_date = datetime.utcnow()
                run.error_message = error_message
                db.commit()

        except Exception as e:
            db.rollback()
            self.logger.error(f"Error failing study run: {str(e)}")
        finally:
            db.close()

    def get_stats(self) -> Dict[str, Any]:
        """Get orchestrator statistics"""
        return {
            "total_jobs": self.total_jobs,
            "successful_jobs": self.successful_jobs,
            "failed_jobs": self.failed_jobs,
            "success_rate": round(self.successful_jobs / self.total_jobs * 100, 2) if self.total_jobs > 0 else 0,
            "solver": self.solver.get_stats(),
            "stages": {stage.name: stage.get_stats() for stage in self.stages},
        }
