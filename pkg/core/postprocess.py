"""Pressure projections, local post-processing and error norms.

Per-cell polynomials use scaled monomials ``((x - x_T) / h_T)^alpha``
centred at the cell centroid, which keeps local systems well conditioned
independent of the cell size.
"""
import logging
from dataclasses import asdict, dataclass
from itertools import product
from math import log
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from core.assembly import DofMap, PointFunction, inverse_conductivity
from core.exceptions import DegenerateSequence, SingularLocalSystem
from core.fields import divergence_values, pressure_values, velocity_values
from core.mesh import Mesh
from core.quadrature import gauss_rule

logger = logging.getLogger(__name__)

ERROR_DEGREE = 6


def local_exponents(dim: int, degree: int) -> List[tuple]:
    """Monomial exponents of total degree <= degree, ordered by degree"""
    exps = [e for e in product(range(degree + 1), repeat=dim) if sum(e) <= degree]
    return sorted(exps, key=lambda e: (sum(e), tuple(-k for k in e)))


def _monomials(y: np.ndarray, exponents: Sequence[tuple]) -> np.ndarray:
    """Values (..., n_monomials) at scaled points y (..., d)"""
    return np.stack([np.prod(y ** np.array(e), axis=-1) for e in exponents], axis=-1)


def _monomial_gradients(y: np.ndarray, exponents: Sequence[tuple], scale: np.ndarray) -> np.ndarray:
    """Physical gradients (..., n_monomials, d); ``scale`` broadcasts against y[..., 0]"""
    d = y.shape[-1]
    grads = []
    for e in exponents:
        comps = []
        for k in range(d):
            if e[k] == 0:
                comps.append(np.zeros(y.shape[:-1]))
                continue
            lowered = list(e)
            lowered[k] -= 1
            comps.append(e[k] * np.prod(y ** np.array(lowered), axis=-1) / scale)
        grads.append(np.stack(comps, axis=-1))
    return np.stack(grads, axis=-2)


@dataclass
class PiecewisePolynomial:
    """Discontinuous piecewise polynomial over scaled local monomials"""
    degree: int
    dim: int
    coeffs: np.ndarray
    centers: np.ndarray
    scales: np.ndarray

    @property
    def exponents(self) -> List[tuple]:
        return local_exponents(self.dim, self.degree)

    def scaled(self, cells: np.ndarray, points: np.ndarray) -> np.ndarray:
        return (points - self.centers[cells][:, None, :]) / self.scales[cells][:, None, None]

    def values(self, cells: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Values at physical points (n_cells, n_points, d) of the listed cells"""
        basis = _monomials(self.scaled(cells, points), self.exponents)
        return np.einsum("cpi,ci->cp", basis, self.coeffs[cells])

    def __call__(self, cell: int, points: np.ndarray) -> np.ndarray:
        return self.values(np.array([cell]), np.atleast_2d(points)[None])[0]


# PostPressure is the post-processed pressure of degree 1 or 2
PostPressure = PiecewisePolynomial


def _cell_frames(mesh: Mesh):
    centers = np.array([mesh.centroid(t) for t in range(mesh.n_cells)])
    return centers, mesh.diameters.copy()


def _batched_solve(matrices: np.ndarray, rhs: np.ndarray, what: str, cells: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(matrices, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        for k in range(len(matrices)):
            if np.linalg.matrix_rank(matrices[k]) < matrices.shape[-1]:
                raise SingularLocalSystem(f"{what} system of cell {int(cells[k])} is singular")
        raise SingularLocalSystem(f"{what} system is singular")


def project_pressure(mesh: Mesh, degree: int, field: PointFunction,
                     quad_degree: int = ERROR_DEGREE) -> PiecewisePolynomial:
    """Cellwise L2 projection onto polynomials of degree 0 or 1.

    Args:
        mesh: Mesh
        degree: Target degree k
        field: Vectorized function of points (n, d)
        quad_degree: Gauss rule degree

    Returns:
        PiecewisePolynomial of degree k
    """
    centers, scales = _cell_frames(mesh)
    exponents = local_exponents(mesh.dim, degree)
    coeffs = np.zeros((mesh.n_cells, len(exponents)))
    for shape in mesh.shapes:
        cells = np.array([t for t, c in enumerate(mesh.cells) if c.shape is shape])
        rule = gauss_rule(shape, quad_degree)
        points = np.array([mesh.maps[t](rule.points) for t in cells])
        weights = rule.weights[None, :] * np.array([mesh.volume(t) for t in cells])[:, None]
        y = (points - centers[cells][:, None, :]) / scales[cells][:, None, None]
        V = _monomials(y, exponents)
        values = np.asarray(field(points.reshape(-1, mesh.dim))).reshape(points.shape[:2])
        gram = np.einsum("cp,cpi,cpj->cij", weights, V, V)
        rhs = np.einsum("cp,cp,cpi->ci", weights, values, V)
        coeffs[cells] = _batched_solve(gram, rhs, "Projection", cells)
    return PiecewisePolynomial(degree, mesh.dim, coeffs, centers, scales)


def stenberg_postprocess(mesh: Mesh, dofmap: DofMap, conductivity: PointFunction,
                         u: np.ndarray, p: np.ndarray, degree: int = 2,
                         quad_degree: int = ERROR_DEGREE) -> PostPressure:
    """Local higher-order pressure from the discrete flux.

    On every cell find p~ of the given degree with

        (grad p~, grad q)_T = -(K^-1 u_h, grad q)_T   for all q,
        (p~, 1)_T = (p_h, 1)_T,

    solved as a saddle system with one Lagrange multiplier for the mean.

    Raises:
        SingularLocalSystem: degenerate cell geometry
    """
    centers, scales = _cell_frames(mesh)
    exponents = local_exponents(mesh.dim, degree)
    n = len(exponents)
    coeffs = np.zeros((mesh.n_cells, n))
    for group in dofmap.groups.values():
        rule = gauss_rule(group.shape, quad_degree)
        points = group.physical_points(rule.points)
        weights = rule.weights[None, :] * group.volumes[:, None]
        h = scales[group.cells]
        y = (points - centers[group.cells][:, None, :]) / h[:, None, None]
        V = _monomials(y, exponents)
        G = _monomial_gradients(y, exponents, h[:, None])
        flux = velocity_values(group, u, rule.points)
        K_inv = inverse_conductivity(conductivity, points)
        p_h = pressure_values(group, p, rule.points)

        nc = len(group.cells)
        system = np.zeros((nc, n + 1, n + 1))
        system[:, :n, :n] = np.einsum("cp,cpia,cpja->cij", weights, G, G)
        means = np.einsum("cp,cpi->ci", weights, V)
        system[:, :n, n] = means
        system[:, n, :n] = means
        rhs = np.zeros((nc, n + 1))
        rhs[:, :n] = -np.einsum("cp,cpa,cpab,cpib->ci", weights, flux, K_inv, G)
        rhs[:, n] = np.einsum("cp,cp->c", weights, p_h)
        coeffs[group.cells] = _batched_solve(system, rhs, "Post-processing", group.cells)[:, :n]
    logger.debug(f"Post-processed pressure of degree {degree} on {mesh.n_cells} cells")
    return PiecewisePolynomial(degree, mesh.dim, coeffs, centers, scales)


# Errors

@dataclass
class ErrorReport:
    """Relative L2 errors of one discrete solution"""
    h: float
    dof_u: int
    dof_p: int
    err_u: float
    err_div: float
    err_p: float
    err_proj0: float
    err_post: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def _relative(error_sq: float, norm_sq: float) -> float:
    error = float(np.sqrt(max(error_sq, 0.0)))
    norm = float(np.sqrt(max(norm_sq, 0.0)))
    return error / norm if norm > 0.0 else error


def error_norms(mesh: Mesh, dofmap: DofMap, exact, u: np.ndarray, p: np.ndarray,
                post: Optional[PiecewisePolynomial] = None,
                quad_degree: int = ERROR_DEGREE) -> ErrorReport:
    """
    Relative L2 errors against an exact solution

    Args:
        mesh: Mesh
        dofmap: DOF map the solution lives on
        exact: Object with vectorized ``pressure``, ``velocity`` and ``source``
            (= div u) callables
        u: Velocity coefficients
        p: Pressure coefficients
        post: Optional post-processed pressure
        quad_degree: Gauss rule degree for all norms

    Returns:
        ErrorReport; errors are divided by the exact norms (absolute when
        the exact norm vanishes)
    """
    sums = dict.fromkeys(
        ["u", "u_norm", "div", "div_norm", "p", "p_norm", "proj0", "post"], 0.0
    )
    d = mesh.dim
    for group in dofmap.groups.values():
        rule = gauss_rule(group.shape, quad_degree)
        points = group.physical_points(rule.points)
        flat = points.reshape(-1, d)
        weights = rule.weights[None, :] * group.volumes[:, None]

        u_exact = np.asarray(exact.velocity(flat)).reshape(points.shape)
        p_exact = np.asarray(exact.pressure(flat)).reshape(points.shape[:2])
        div_exact = np.asarray(exact.source(flat)).reshape(points.shape[:2])

        u_err = u_exact - velocity_values(group, u, rule.points)
        p_err = p_exact - pressure_values(group, p, rule.points)
        div_err = div_exact - divergence_values(group, u, rule.points)

        sums["u"] += float(np.sum(weights * np.sum(u_err**2, axis=-1)))
        sums["u_norm"] += float(np.sum(weights * np.sum(u_exact**2, axis=-1)))
        sums["p"] += float(np.sum(weights * p_err**2))
        sums["p_norm"] += float(np.sum(weights * p_exact**2))
        sums["div"] += float(np.sum(weights * div_err**2))
        sums["div_norm"] += float(np.sum(weights * div_exact**2))
        # ||pi0 e||^2 = sum_T (int_T e)^2 / |T|
        sums["proj0"] += float(np.sum(np.sum(weights * p_err, axis=1) ** 2 / group.volumes))
        if post is not None:
            post_err = p_exact - post.values(group.cells, points)
            sums["post"] += float(np.sum(weights * post_err**2))

    return ErrorReport(
        h=mesh.h,
        dof_u=dofmap.n_velocity,
        dof_p=dofmap.n_pressure,
        err_u=_relative(sums["u"], sums["u_norm"]),
        err_div=_relative(sums["div"], sums["div_norm"]),
        err_p=_relative(sums["p"], sums["p_norm"]),
        err_proj0=_relative(sums["proj0"], sums["p_norm"]),
        err_post=_relative(sums["post"], sums["p_norm"]) if post is not None else None,
    )


def convergence_rates(h: Sequence[float], errors: Sequence[float]) -> List[float]:
    """rate_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k) between consecutive entries.

    Raises:
        DegenerateSequence: fewer than two entries, non-decreasing h or
            non-positive errors
    """
    if len(h) != len(errors):
        raise DegenerateSequence("Mesh sizes and errors differ in length")
    if len(h) < 2:
        raise DegenerateSequence(f"Need at least 2 refinements, got {len(h)}")
    rates = []
    for k in range(1, len(h)):
        if not h[k] < h[k - 1]:
            raise DegenerateSequence(f"Mesh size does not decrease: {h[k - 1]} -> {h[k]}")
        if errors[k] is None or errors[k - 1] is None or errors[k] <= 0 or errors[k - 1] <= 0:
            raise DegenerateSequence(f"Errors must be positive: {errors[k - 1]}, {errors[k]}")
        rates.append(log(errors[k - 1] / errors[k]) / log(h[k - 1] / h[k]))
    return rates


def eoc(records: Sequence, field: str = "err_u") -> List[float]:
    """Observed orders of one error field over a refinement sequence of reports"""
    return convergence_rates([r.h for r in records], [getattr(r, field) for r in records])


def observed_orders(records: Sequence, fields: Sequence[str]) -> Dict[str, List[Optional[float]]]:
    """Per-field orders, None where an order cannot be formed"""
    out: Dict[str, List[Optional[float]]] = {}
    for name in fields:
        rates: List[Optional[float]] = [None]
        for k in range(1, len(records)):
            try:
                rates.append(eoc(records[k - 1:k + 1], name)[0])
            except DegenerateSequence:
                rates.append(None)
        out[name] = rates
    return out


def l2_norm(mesh: Mesh, field: Callable[[np.ndarray], np.ndarray],
            quad_degree: int = ERROR_DEGREE) -> float:
    """||field||_L2 over the mesh"""
    total = 0.0
    for shape in mesh.shapes:
        rule = gauss_rule(shape, quad_degree)
        for t, cell in enumerate(mesh.cells):
            if cell.shape is not shape:
                continue
            values = np.asarray(field(mesh.maps[t](rule.points)))
            if values.ndim > 1:
                values = np.linalg.norm(values, axis=-1)
            total += mesh.volume(t) * float(np.dot(rule.weights, values**2))
    return float(np.sqrt(total))
