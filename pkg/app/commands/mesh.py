"""Mesh generation and validation commands"""
import logging
from pathlib import Path

from app.config import get_app_config
from core.exceptions import InputError
from services.meshGenerator import get_mesh_generator
from services.meshIO import load_mesh, save_mesh

logger = logging.getLogger(__name__)


def mesh_gen_command(args) -> int:
    """Generate a structured mesh and write it in the text format"""
    mesh = get_mesh_generator().generate(args.family, args.level)
    path = save_mesh(mesh, args.out)
    print(f"[OK] Wrote {args.family} level {args.level} ({mesh.n_cells} cells) to {path}")
    return 0


def mesh_check_command(args) -> int:
    """Parse and validate a mesh file, then print its summary"""
    if not Path(args.file).is_file():
        raise InputError(f"Mesh file not found: {args.file}")
    config = get_app_config()
    mesh = load_mesh(args.file, affine_tol=config.AFFINE_TOL, conformity_tol=config.CONFORMITY_TOL)
    summary = mesh.summary()
    print(f"[OK] {args.file} is a valid {summary['dim']}D mesh")
    cells = ", ".join(f"{count} {tag}" for tag, count in summary["cells"].items())
    print(f"  vertices          {summary['vertices']}")
    print(f"  cells             {cells}")
    print(f"  facets            {summary['facets']} ({summary['boundary_facets']} on the boundary)")
    print(f"  h                 {summary['h']:.6g}")
    print(f"  shape regularity  {summary['shape_regularity']:.4g}")
    return 0
