"""Global numbering and assembly of the lumped mixed system.

Velocity degrees of freedom are either facet-vertex fluxes, keyed by
(global facet, global vertex) and shared by the cells adjacent to the
facet, or interior degrees of freedom keyed by (cell, local basis index).
Each local basis function enters a cell with a coefficient
``c = sign / s`` where ``s`` is the reference value of its flux
functional and ``sign`` orients the facet globally; the physical basis
function is the Piola image ``(c / det B) B phi_hat``.

The algebraic system reads

    M u - B^T p = g_vec
    B u         = f_vec

with ``g_vec[j] = -<g, n . phi_j>`` on the boundary and
``f_vec[i] = (f, q_i)``.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from core.cells import CellShape
from core.exceptions import NonSPDBlock, SingularConductivity
from core.mesh import Mesh
from core.quadrature import cell_facet_rule, gauss_rule
from core.refelem import (
    FacetNode,
    ReferenceElementDef,
    SchemeOrder,
    node_blocks,
    reference_element,
)

logger = logging.getLogger(__name__)

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProblemData:
    """Coefficients of -div(K grad p) = f, p = g on the boundary.

    All callables are vectorized: they take points of shape (n, d) and
    return (n, d, d) for ``conductivity`` and (n,) for ``source`` and
    ``boundary``.
    """
    conductivity: PointFunction
    source: PointFunction
    boundary: PointFunction
    bounds: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class Cluster:
    """Velocity DOFs sharing one global quadrature node"""
    key: Tuple
    members: np.ndarray


@dataclass
class ShapeGroup:
    """Cells of one shape with stacked geometry and local-to-global maps"""
    shape: CellShape
    element: ReferenceElementDef
    cells: np.ndarray
    a: np.ndarray
    B: np.ndarray
    det: np.ndarray
    velocity: np.ndarray
    coefficients: np.ndarray
    pressure: np.ndarray
    node_clusters: np.ndarray

    @property
    def volumes(self) -> np.ndarray:
        return self.det * self.element.cell.volume

    def physical_points(self, ref_points: np.ndarray) -> np.ndarray:
        """Mapped points, shape (n_cells, n_points, d)"""
        return self.a[:, None, :] + np.einsum("cij,pj->cpi", self.B, ref_points)

    def piola(self, ref_values: np.ndarray) -> np.ndarray:
        """Physical basis values from reference values (n_points, n_basis, d).

        Returns shape (n_cells, n_points, n_basis, d) including the global
        coefficients.
        """
        mapped = np.einsum("cab,pjb->cpja", self.B, ref_values)
        return mapped * (self.coefficients / self.det[:, None])[:, None, :, None]


@dataclass
class DofMap:
    order: SchemeOrder
    elements: Dict[CellShape, ReferenceElementDef]
    n_velocity: int
    n_pressure: int
    facet_dofs: Dict[Tuple[int, int], int]
    interior_dofs: Dict[Tuple[int, int], int]
    pressure_dofs: Dict[Tuple[int, int], int]
    clusters: List[Cluster]
    dof_cluster: np.ndarray
    groups: Dict[CellShape, ShapeGroup] = field(repr=False)

    @property
    def n_total(self) -> int:
        return self.n_velocity + self.n_pressure

    def cell_velocity_dofs(self, cell: int, mesh: Mesh) -> np.ndarray:
        group, row = self._locate(cell, mesh)
        return group.velocity[row]

    def cell_pressure_dofs(self, cell: int, mesh: Mesh) -> np.ndarray:
        group, row = self._locate(cell, mesh)
        return group.pressure[row]

    def cell_coefficients(self, cell: int, mesh: Mesh) -> np.ndarray:
        group, row = self._locate(cell, mesh)
        return group.coefficients[row]

    def _locate(self, cell: int, mesh: Mesh) -> Tuple[ShapeGroup, int]:
        group = self.groups[mesh.cells[cell].shape]
        return group, int(np.searchsorted(group.cells, cell))


def element_table(mesh: Mesh, order: SchemeOrder) -> Dict[CellShape, ReferenceElementDef]:
    return {shape: reference_element(shape, order) for shape in mesh.shapes}


def build_dofmap(mesh: Mesh, order: SchemeOrder) -> DofMap:
    """Number velocity and pressure DOFs and group velocity DOFs by quadrature node.

    Args:
        mesh: Validated mesh
        order: Scheme order

    Returns:
        DofMap with one cluster per mesh vertex followed by one cluster per
        interior quadrature node of every cell
    """
    order = SchemeOrder(order)
    elements = element_table(mesh, order)

    facet_dofs: Dict[Tuple[int, int], int] = {}
    interior_dofs: Dict[Tuple[int, int], int] = {}
    pressure_dofs: Dict[Tuple[int, int], int] = {}
    cluster_of_dof: Dict[int, Tuple] = {}
    n_velocity = 0

    per_cell = []
    for t, cell in enumerate(mesh.cells):
        element = elements[cell.shape]
        gids = np.empty(element.velocity.count, dtype=np.int64)
        coeffs = np.empty(element.velocity.count)
        for i, kind in enumerate(element.velocity.dof_kind):
            if isinstance(kind, FacetNode):
                key = (mesh.cell_facets[t][kind.facet], cell.vertices[kind.vertex])
                table = facet_dofs
                cluster = ("vertex", key[1])
                coeffs[i] = mesh.facet_sign(t, kind.facet) / element.velocity.trace_scale[i]
            else:
                key = (t, i)
                table = interior_dofs
                cluster = ("interior", t, kind.node)
                coeffs[i] = 1.0
            if key not in table:
                table[key] = n_velocity
                cluster_of_dof[n_velocity] = cluster
                n_velocity += 1
            gids[i] = table[key]
        prs = np.empty(element.pressure.count, dtype=np.int64)
        for k in range(element.pressure.count):
            pressure_dofs[(t, k)] = len(pressure_dofs)
            prs[k] = pressure_dofs[(t, k)]
        node_keys = [
            ("vertex", cell.vertices[v]) if v >= 0 else ("interior", t, n)
            for n, v in enumerate(element.node_vertex)
        ]
        per_cell.append((gids, coeffs, prs, node_keys))

    members: Dict[Tuple, List[int]] = {}
    for dof in range(n_velocity):
        members.setdefault(cluster_of_dof[dof], []).append(dof)
    keys = sorted(members, key=lambda k: (0 if k[0] == "vertex" else 1,) + tuple(k[1:]))
    clusters = [Cluster(key, np.array(sorted(members[key]), dtype=np.int64)) for key in keys]
    cluster_index = {c.key: n for n, c in enumerate(clusters)}
    dof_cluster = np.empty(n_velocity, dtype=np.int64)
    for n, c in enumerate(clusters):
        dof_cluster[c.members] = n

    groups = {}
    for shape, element in elements.items():
        cells = np.array([t for t, c in enumerate(mesh.cells) if c.shape is shape], dtype=np.int64)
        groups[shape] = ShapeGroup(
            shape=shape,
            element=element,
            cells=cells,
            a=np.array([mesh.maps[t].a for t in cells]),
            B=np.array([mesh.maps[t].B for t in cells]),
            det=np.array([mesh.maps[t].det for t in cells]),
            velocity=np.array([per_cell[t][0] for t in cells]),
            coefficients=np.array([per_cell[t][1] for t in cells]),
            pressure=np.array([per_cell[t][2] for t in cells]),
            node_clusters=np.array([[cluster_index[k] for k in per_cell[t][3]] for t in cells]),
        )

    dofmap = DofMap(
        order=order,
        elements=elements,
        n_velocity=n_velocity,
        n_pressure=len(pressure_dofs),
        facet_dofs=facet_dofs,
        interior_dofs=interior_dofs,
        pressure_dofs=pressure_dofs,
        clusters=clusters,
        dof_cluster=dof_cluster,
        groups=groups,
    )
    logger.debug(
        f"DOF map: {n_velocity} velocity, {dofmap.n_pressure} pressure, {len(clusters)} clusters"
    )
    return dofmap


# Conductivity

def inverse_conductivity(conductivity: PointFunction, points: np.ndarray,
                         bounds: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """K^-1 at points (..., d), returned with shape (..., d, d)"""
    shape = points.shape[:-1]
    d = points.shape[-1]
    K = np.asarray(conductivity(points.reshape(-1, d)), dtype=float).reshape(-1, d, d)
    K = 0.5 * (K + np.swapaxes(K, 1, 2))
    scale = np.abs(K).max(axis=(1, 2))
    det = np.linalg.det(K)
    singular = ~(np.abs(det) > 1e-14 * scale**d)
    if np.any(singular):
        where = points.reshape(-1, d)[np.flatnonzero(singular)[0]]
        raise SingularConductivity(f"Conductivity is singular at {where.tolist()}")
    if bounds is not None:
        eigenvalues = np.linalg.eigvalsh(K)
        low, high = float(eigenvalues.min()), float(eigenvalues.max())
        if low < bounds[0] or high > bounds[1]:
            logger.warning(
                f"Conductivity eigenvalues [{low:.4g}, {high:.4g}] leave declared bounds {bounds}"
            )
    K_inv = np.linalg.inv(K)
    K_inv = 0.5 * (K_inv + np.swapaxes(K_inv, 1, 2))
    return K_inv.reshape(shape + (d, d))


# Lumped mass matrix

@dataclass(frozen=True)
class MassBlock:
    cluster: int
    matrix: np.ndarray
    members: np.ndarray


@dataclass
class LumpedMassMatrix:
    """Block-diagonal (up to permutation) velocity mass matrix"""
    blocks: List[MassBlock]
    size: int

    def to_sparse(self) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for block in self.blocks:
            r, c = np.meshgrid(block.members, block.members, indexing="ij")
            rows.append(r.ravel())
            cols.append(c.ravel())
            vals.append(block.matrix.ravel())
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.size, self.size),
        )
        return matrix.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size)
        for block in self.blocks:
            out[block.members] += block.matrix @ v[block.members]
        return out


def assemble_lumped_mass(mesh: Mesh, dofmap: DofMap, conductivity: PointFunction,
                         bounds: Optional[Tuple[float, float]] = None) -> LumpedMassMatrix:
    """Assemble (K^-1 u, v)_h with the elements' lumping rules.

    Only the basis functions associated with a quadrature node are
    evaluated there, so all entries outside node clusters are structurally
    zero.

    Raises:
        SingularConductivity: K not invertible at a quadrature point
        NonSPDBlock: a cluster block fails Cholesky factorization
    """
    rows, cols, vals = [], [], []
    for group in dofmap.groups.values():
        element = group.element
        points = group.physical_points(element.rule.points)
        K_inv = inverse_conductivity(conductivity, points, bounds)
        blocks = node_blocks(element)
        for node, weight in enumerate(element.rule.weights):
            idx = np.array(blocks[node])
            ref = element.node_values[node][idx]
            phi = np.einsum("cab,ib->cia", group.B, ref)
            phi *= (group.coefficients[:, idx] / group.det[:, None])[:, :, None]
            local = np.einsum("cia,cab,cjb->cij", phi, K_inv[:, node], phi)
            local *= (weight * group.volumes)[:, None, None]
            gids = group.velocity[:, idx]
            rows.append(np.repeat(gids, len(idx), axis=1).ravel())
            cols.append(np.tile(gids, (1, len(idx))).ravel())
            vals.append(local.ravel())
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_velocity, dofmap.n_velocity),
    ).tocsr()

    blocks_out = []
    for index, cluster in enumerate(dofmap.clusters):
        block = matrix[cluster.members][:, cluster.members].toarray()
        block = 0.5 * (block + block.T)
        try:
            scipy.linalg.cholesky(block, lower=True)
        except np.linalg.LinAlgError as e:
            raise NonSPDBlock(index, str(e))
        blocks_out.append(MassBlock(index, block, cluster.members))
    logger.debug(f"Assembled lumped mass: {len(blocks_out)} blocks, size {dofmap.n_velocity}")
    return LumpedMassMatrix(blocks_out, dofmap.n_velocity)


def assemble_exact_mass(mesh: Mesh, dofmap: DofMap, conductivity: PointFunction,
                        degree: int = 8) -> sp.csr_matrix:
    """Unlumped (K^-1 u, v) with a Gauss rule of the given degree"""
    rows, cols, vals = [], [], []
    for group in dofmap.groups.values():
        rule = gauss_rule(group.shape, degree)
        phi = group.piola(group.element.velocity.tabulate(rule.points))
        K_inv = inverse_conductivity(conductivity, group.physical_points(rule.points))
        local = np.einsum("p,cpia,cpab,cpjb->cij", rule.weights, phi, K_inv, phi, optimize=True)
        local *= group.volumes[:, None, None]
        n = group.velocity.shape[1]
        rows.append(np.repeat(group.velocity, n, axis=1).ravel())
        cols.append(np.tile(group.velocity, (1, n)).ravel())
        vals.append(local.ravel())
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_velocity, dofmap.n_velocity),
    ).tocsr()
    return 0.5 * (matrix + matrix.T)


# Divergence matrix and right-hand sides

def assemble_div(mesh: Mesh, dofmap: DofMap) -> sp.csr_matrix:
    """B[i, j] = (div phi_j, q_i), exact; rows are pressure DOFs"""
    rows, cols, vals = [], [], []
    for group in dofmap.groups.values():
        local = group.element.div_matrix[None, :, :] * group.coefficients[:, None, :]
        n_p, n_u = group.element.div_matrix.shape
        rows.append(np.repeat(group.pressure, n_u, axis=1).ravel())
        cols.append(np.tile(group.velocity, (1, n_p)).ravel())
        vals.append(local.ravel())
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_pressure, dofmap.n_velocity),
    ).tocsr()
    matrix.eliminate_zeros()
    return matrix


def assemble_source(mesh: Mesh, dofmap: DofMap, source: PointFunction,
                    degree: int = 6) -> np.ndarray:
    """f_vec[i] = (f, q_i) by cellwise Gauss quadrature"""
    f_vec = np.zeros(dofmap.n_pressure)
    for group in dofmap.groups.values():
        rule = gauss_rule(group.shape, degree)
        points = group.physical_points(rule.points)
        values = np.asarray(source(points.reshape(-1, mesh.dim))).reshape(points.shape[:2])
        q = group.element.pressure.tabulate(rule.points)
        local = ((values * rule.weights) @ q) * group.volumes[:, None]
        np.add.at(f_vec, group.pressure, local)
    return f_vec


def assemble_boundary(mesh: Mesh, dofmap: DofMap, boundary: PointFunction,
                      degree: int = 6) -> np.ndarray:
    """g_vec[j] = -<g, n . phi_j> over the boundary facets"""
    g_vec = np.zeros(dofmap.n_velocity)
    traces: Dict[Tuple[CellShape, int], Tuple] = {}
    for facet in mesh.boundary_facets():
        side = mesh.facets[facet].sides[0]
        cell = mesh.cells[side.cell]
        element = dofmap.elements[cell.shape]
        key = (cell.shape, side.local_facet)
        if key not in traces:
            ref_facet = element.cell.facets[side.local_facet]
            rule = cell_facet_rule(cell.shape, side.local_facet, degree)
            normal_traces = element.velocity.tabulate(rule.points) @ ref_facet.normal
            traces[key] = (rule, normal_traces * ref_facet.measure)
        rule, normal_traces = traces[key]
        points = mesh.maps[side.cell](rule.points)
        g = np.asarray(boundary(points))
        gids = dofmap.cell_velocity_dofs(side.cell, mesh)
        coeffs = dofmap.cell_coefficients(side.cell, mesh)
        g_vec[gids] -= coeffs * ((g * rule.weights) @ normal_traces)
    return g_vec


def assemble_rhs(mesh: Mesh, dofmap: DofMap, problem: ProblemData,
                 degree: int = 6) -> Tuple[np.ndarray, np.ndarray]:
    """Return (g_vec, f_vec)"""
    return (
        assemble_boundary(mesh, dofmap, problem.boundary, degree),
        assemble_source(mesh, dofmap, problem.source, degree),
    )
