"""Convergence study and single-level run commands"""
import logging
import re
from pathlib import Path
from typing import List, Optional

from app.config import get_app_config
from app.main import create_orchestrator
from core.database import LevelResult, StudyRun, get_db_manager
from core.exceptions import InputError
from services.matrixExport import MatrixExporter

logger = logging.getLogger(__name__)

_LEVELS = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*$")


def parse_levels(text: Optional[str], dim: int) -> List[int]:
    """
    Parse an inclusive level range ``A..B``

    Args:
        text: Range text, or None for the configured default of the dimension
        dim: Spatial dimension of the mesh family

    Returns:
        Increasing list of levels
    """
    if text is None:
        return get_app_config().STUDY.levels(dim)
    match = _LEVELS.match(text)
    if not match:
        raise InputError(f"Levels must look like A..B, got '{text}'")
    low, high = int(match.group(1)), int(match.group(2))
    if high <= low:
        raise InputError(f"Level range {text} needs at least two levels")
    return list(range(low, high + 1))


def study_command(args) -> int:
    """Run a convergence study and write the CSV table"""
    orchestrator = create_orchestrator(tol=args.tol, record=args.record or None)
    levels = parse_levels(args.levels, orchestrator.generator.dimension(args.family))

    print(f"[INFO] Study {args.case} on {args.family}, order {args.order}, levels {levels}")
    result = orchestrator.convergence_study(
        args.case, args.family, levels, order=args.order, tol=args.tol,
        export_dir=args.export_matrices,
    )

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(result.csv, encoding="utf-8")
        print(f"[OK] Wrote {len(result.records)} rows to {out}")
    else:
        print(result.csv, end="")

    if result.study_id:
        print(f"[OK] Recorded study {result.study_id}")
    if args.export_matrices:
        print(f"[OK] Exported matrices to {args.export_matrices}")
    return 0


def run_command(args) -> int:
    """Solve a single level and print its error report"""
    orchestrator = create_orchestrator(tol=args.tol, record=False)
    data = orchestrator.run_level(args.case, args.family, args.level, order=args.order, tol=args.tol)
    report = data["report"]
    solution = data["solution"]

    print(f"[OK] {data['case'].name} on {args.family} level {args.level}, order {args.order}")
    for key, value in report.to_dict().items():
        if isinstance(value, float):
            print(f"  {key:<12} {value:.6e}")
        elif value is not None:
            print(f"  {key:<12} {value}")
    print(f"  {'iterations':<12} {solution.iterations}")
    print(f"  {'residual':<12} {solution.residual:.3e}")
    print(f"  {'conservation':<12} {solution.conservation:.3e}")

    if args.compare_exact:
        perturbation = orchestrator.lumping_perturbation(data)
        print(f"  {'lumping':<12} {perturbation:.6e}")

    if args.dump_fields:
        path = orchestrator.dump_fields(data, args.dump_fields)
        print(f"[OK] Wrote cell fields to {path}")

    if args.export_matrices:
        exporter = MatrixExporter(args.export_matrices)
        exporter.export_system(
            f"{data['case'].name}_{args.family}_o{args.order}_l{args.level}", data["system"], data["mass"]
        )
        print(f"[OK] Exported {exporter.total_exported} matrices to {args.export_matrices}")

    print("[INFO] Stage statistics:")
    for name, stats in orchestrator.get_stats()["stages"].items():
        print(f"  {name:<12} calls={stats['total_requests']} errors={stats['total_errors']} "
              f"time={stats['total_processing_time']:.3f}s")
    return 0


def history_command(args) -> int:
    """List recorded studies, or the levels of one study"""
    database_url = args.database_url or get_app_config().DATABASE.url
    db = get_db_manager(database_url).get_session()

    try:
        if args.study_id:
            run = db.query(StudyRun).filter_by(id=args.study_id).first()
            if not run:
                raise InputError(f"Study {args.study_id} not found")
            print(f"[INFO] {run.case} on {run.family}, order {run.scheme_order}: {run.status}")
            levels = (
                db.query(LevelResult).filter_by(study_id=run.id).order_by(LevelResult.level).all()
            )
            for level in levels:
                row = level.to_dict()
                print(f"  level {row['level']}: h={row['h']:.4g} err_u={row['err_u']:.4e} "
                      f"err_p={row['err_p']:.4e} eoc={row['eoc']}")
            return 0

        query = db.query(StudyRun)
        if args.status:
            query = query.filter_by(status=args.status)
        runs = query.order_by(StudyRun.created_date.desc()).limit(args.limit).all()
        for run in runs:
            print(f"  {run.id}  {run.status:<9} {run.case} {run.family} "
                  f"order {run.scheme_order} levels {run.level_min}..{run.level_max}")
        print(f"[INFO] {len(runs)} studies")
        return 0

    finally:
        db.close()
