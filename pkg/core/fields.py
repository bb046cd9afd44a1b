"""Evaluation of discrete velocity and pressure fields on mesh cells"""
from typing import Iterator, Tuple

import numpy as np
import pandas as pd

from core.assembly import DofMap, ShapeGroup
from core.mesh import Mesh


def velocity_values(group: ShapeGroup, u: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    """u_h at mapped reference points of every cell in the group, (n_cells, n_points, d)"""
    phi = group.piola(group.element.velocity.tabulate(ref_points))
    return np.einsum("cpja,cj->cpa", phi, u[group.velocity])


def divergence_values(group: ShapeGroup, u: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    """div u_h = (1/det) div_hat(u_hat), (n_cells, n_points)"""
    div_hat = group.element.velocity.tabulate_divergence(ref_points)
    weighted = u[group.velocity] * group.coefficients / group.det[:, None]
    return weighted @ div_hat.T


def pressure_values(group: ShapeGroup, p: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    """p_h at mapped reference points, (n_cells, n_points)"""
    q = group.element.pressure.tabulate(ref_points)
    return p[group.pressure] @ q.T


def iter_groups(dofmap: DofMap) -> Iterator[Tuple[ShapeGroup, np.ndarray]]:
    """Shape groups with the reference centroid of their cells"""
    for group in dofmap.groups.values():
        yield group, group.element.cell.centroid[None, :]


def centroid_fields(mesh: Mesh, dofmap: DofMap, u: np.ndarray, p: np.ndarray) -> pd.DataFrame:
    """Pressure and velocity at every cell centroid, one row per cell in cell order"""
    axes = "xyz"[: mesh.dim]
    frames = []
    for group, centroid in iter_groups(dofmap):
        points = group.physical_points(centroid)[:, 0, :]
        velocity = velocity_values(group, u, centroid)[:, 0, :]
        frame = pd.DataFrame({"cell": group.cells, "shape": group.shape.tag})
        for k, axis in enumerate(axes):
            frame[axis] = points[:, k]
        frame["p"] = pressure_values(group, p, centroid)[:, 0]
        for k, axis in enumerate(axes):
            frame[f"u_{axis}"] = velocity[:, k]
        frames.append(frame)
    return pd.concat(frames).sort_values("cell").reset_index(drop=True)
