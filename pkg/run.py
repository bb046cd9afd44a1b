#!/usr/bin/env python3
"""
mfem - lumped mixed finite elements for Darcy flow
Main entry point for studies, single runs, mesh tools and the element catalog
"""

import os
import sys
import argparse
import logging
from pathlib import Path

# Add project root to Python path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_INPUT = 3


def setup_environment(quiet: bool = False):
    """Setup environment variables and configurations"""
    # Load .env file if exists
    env_file = PROJECT_ROOT / '.env'
    if env_file.exists():
        from dotenv import load_dotenv
        load_dotenv(env_file)
        if not quiet:
            print(f"[OK] Loaded environment from {env_file}")

    # Set default environment if not set
    if not os.getenv('MFEM_ENV'):
        os.environ['MFEM_ENV'] = 'development'


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with all subcommands"""
    parser = argparse.ArgumentParser(
        prog='mfem',
        description='Lumped second order mixed finite elements for Darcy flow on hybrid meshes',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run.py study --case paper2d --family tri-square --levels 1..4 --out tri.csv
  python run.py study --case smooth3d --family hex-cube --levels 0..2 --record
  python run.py run --case paper2d --family hybrid-square --level 2 --compare-exact
  python run.py run --case linear --family prism-cube --level 1 --dump-fields fields.csv
  python run.py mesh gen --family hybrid-cube --level 1 --out cube.mesh
  python run.py mesh check cube.mesh
  python run.py dump-element --shape prism --order 2
  python run.py history --limit 10

Exit codes: 0 success, 2 solver failure, 3 invalid input
        """
    )

    parser.add_argument(
        '--quiet',
        action='store_true',
        help='Only print results, warnings and errors'
    )

    subparsers = parser.add_subparsers(dest='command', required=True)

    # study
    study = subparsers.add_parser('study', help='Run a convergence study')
    study.add_argument('--case', required=True, help='Manufactured case name')
    study.add_argument('--family', required=True, help='Mesh family')
    study.add_argument('--order', type=int, choices=[1, 2], default=2, help='Scheme order (default: 2)')
    study.add_argument('--levels', help='Inclusive level range A..B (default: from configuration)')
    study.add_argument('--tol', type=float, help='Relative CG tolerance (default: from configuration)')
    study.add_argument('--out', help='CSV output file (default: print to stdout)')
    study.add_argument('--export-matrices', metavar='DIR', help='Write S, M and B per level as Matrix Market')
    study.add_argument('--record', action='store_true', help='Persist the study to the database')

    # run
    run = subparsers.add_parser('run', help='Solve a single level')
    run.add_argument('--case', required=True, help='Manufactured case name')
    run.add_argument('--family', required=True, help='Mesh family')
    run.add_argument('--level', type=int, default=1, help='Refinement level (default: 1)')
    run.add_argument('--order', type=int, choices=[1, 2], default=2, help='Scheme order (default: 2)')
    run.add_argument('--tol', type=float, help='Relative CG tolerance (default: from configuration)')
    run.add_argument('--export-matrices', metavar='DIR', help='Write S, M and B as Matrix Market')
    run.add_argument('--dump-fields', metavar='FILE', help='Write cell-centroid pressure and velocity to CSV')
    run.add_argument('--compare-exact', action='store_true',
                     help='Report the distance to the solution with the exact mass matrix')

    # mesh
    mesh = subparsers.add_parser('mesh', help='Generate or check mesh files')
    mesh_commands = mesh.add_subparsers(dest='mesh_command', required=True)
    gen = mesh_commands.add_parser('gen', help='Generate a structured mesh')
    gen.add_argument('--family', required=True, help='Mesh family')
    gen.add_argument('--level', type=int, required=True, help='Refinement level')
    gen.add_argument('--out', required=True, help='Output mesh file')
    check = mesh_commands.add_parser('check', help='Validate a mesh file')
    check.add_argument('file', help='Mesh file')

    # dump-element
    element = subparsers.add_parser('dump-element', help='Print a reference element definition')
    element.add_argument('--shape', required=True, choices=['tri', 'quad', 'tet', 'hex', 'prism'])
    element.add_argument('--order', type=int, choices=[1, 2], default=2)

    # history
    history = subparsers.add_parser('history', help='List recorded studies')
    history.add_argument('study_id', nargs='?', help='Show the levels of one study')
    history.add_argument('--status', choices=['pending', 'running', 'completed', 'failed'])
    history.add_argument('--limit', type=int, default=20)
    history.add_argument('--database-url', help='Database URL (default: from configuration)')

    return parser


def dispatch(args) -> int:
    """Run the handler of the selected subcommand"""
    from app.commands import (
        dump_element_command, history_command, mesh_check_command, mesh_gen_command,
        run_command, study_command,
    )

    if args.command == 'study':
        return study_command(args)
    if args.command == 'run':
        return run_command(args)
    if args.command == 'mesh':
        return mesh_gen_command(args) if args.mesh_command == 'gen' else mesh_check_command(args)
    if args.command == 'dump-element':
        return dump_element_command(args)
    return history_command(args)


def main(argv=None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_environment(quiet=args.quiet)

    from app.main import configure_logging, quiet_logging
    from core.exceptions import InputError, SolverError

    configure_logging()
    if args.quiet:
        quiet_logging()
    logger = logging.getLogger('app.cli')

    try:
        return dispatch(args)
    except InputError as e:
        print(f"[ERROR] Invalid input: {e}", file=sys.stderr)
        logger.error(f"Invalid input in '{args.command}': {e}")
        return EXIT_INPUT
    except SolverError as e:
        print(f"[ERROR] Solver failure: {e}", file=sys.stderr)
        logger.error(f"Solver failure in '{args.command}': {e}")
        return EXIT_SOLVER
    except KeyboardInterrupt:
        print("\n[INFO] Stopped by user")
        return 130


if __name__ == '__main__':
    sys.exit(main())
