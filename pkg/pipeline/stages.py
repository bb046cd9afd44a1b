"""Concrete stages of a single-level solve"""
from typing import Any, Dict, Optional

from core.assembly import assemble_div, assemble_lumped_mass, assemble_rhs, build_dofmap
from core.postprocess import error_norms, stenberg_postprocess
from core.reduction import solve_reduced
from pipeline.baseStage import BaseStage
from services.conjugateGradient import ConjugateGradientSolver
from services.meshGenerator import MeshGenerator, get_mesh_generator


class MeshStage(BaseStage):
    """Generates the mesh of a family and level unless one is supplied"""

    def __init__(self, generator: Optional[MeshGenerator] = None, **kwargs):
        super().__init__("mesh", description="structured mesh generation", **kwargs)
        self.generator = generator or get_mesh_generator()

    def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        if data.get("mesh") is not None:
            return {"mesh": data["mesh"]}
        return {"mesh": self.generator.generate(data["family"], data["level"])}


class AssemblyStage(BaseStage):
    """DOF numbering, lumped mass, divergence matrix and right-hand sides"""

    def __init__(self, rhs_degree: int = 6, **kwargs):
        super().__init__("assembly", description="global assembly", **kwargs)
        self.rhs_degree = rhs_degree

    def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        mesh = data["mesh"]
        problem = data["problem"]
        dofmap = build_dofmap(mesh, data["order"])
        mass = assemble_lumped_mass(mesh, dofmap, problem.conductivity, problem.bounds)
        div = assemble_div(mesh, dofmap)
        g_vec, f_vec = assemble_rhs(mesh, dofmap, problem, self.rhs_degree)
        self.logger.info(
            f"Assembled {dofmap.n_velocity} velocity / {dofmap.n_pressure} pressure DOFs, "
            f"{len(mass.blocks)} mass blocks"
        )
        return {"dofmap": dofmap, "mass": mass, "div": div, "g_vec": g_vec, "f_vec": f_vec}


class SolveStage(BaseStage):
    """Schur reduction, CG solve and velocity recovery"""

    def __init__(self, solver: Optional[ConjugateGradientSolver] = None, tol: float = 1e-12, **kwargs):
        super().__init__("solve", description="reduced pressure solve", **kwargs)
        self.tol = tol
        self.solver = solver or ConjugateGradientSolver(tol=tol)

    def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        tol = data.get("tol", self.tol)
        system, solution = solve_reduced(
            data["mass"], data["div"], data["g_vec"], data["f_vec"], tol=tol, solver=self.solver
        )
        self.logger.info(
            f"Solved in {solution.iterations} CG iterations, conservation {solution.conservation:.2e}"
        )
        return {"system": system, "solution": solution}


class PostprocessStage(BaseStage):
    """Local pressure post-processing"""

    def __init__(self, degree: int = 2, quad_degree: int = 6, **kwargs):
        super().__init__("postprocess", description="local pressure reconstruction", **kwargs)
        self.degree = degree
        self.quad_degree = quad_degree

    def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        solution = data["solution"]
        post = stenberg_postprocess(
            data["mesh"], data["dofmap"], data["problem"].conductivity,
            solution.u, solution.p, degree=self.degree, quad_degree=self.quad_degree,
        )
        return {"post": post}


class ErrorStage(BaseStage):
    """Relative L2 errors against the manufactured solution"""

    def __init__(self, quad_degree: int = 6, **kwargs):
        super().__init__("errors", description="error norms", **kwargs)
        self.quad_degree = quad_degree

    def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        solution = data["solution"]
        report = error_norms(
            data["mesh"], data["dofmap"], data["case"], solution.u, solution.p,
            post=data.get("post"), quad_degree=self.quad_degree,
        )
        return {"report": report}
