"""Result serialization: legacy ASCII VTK snapshots and CSV traces.

All floating-point values are printed with 17 significant digits so files
round-trip losslessly and identical inputs produce byte-identical output.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError
from .mesh import Field, Mesh

_CELL_TYPE = {1: 3, 2: 5}  # VTK_LINE, VTK_TRIANGLE


def _f(x: float) -> str:
    return f"{x:.17g}"


def write_vtk(mesh: Mesh, fields: dict[str, Field], path) -> None:
    """Write a legacy ASCII VTK unstructured grid with nodal data.

    Scalar fields become SCALARS sections, vector fields VECTORS sections,
    in the order the dict provides them.
    """
    for name, fld in fields.items():
        if fld.mesh is not mesh:
            raise ParameterError(f"field {name!r} lives on a different mesh")
    lines = [
        "# vtk DataFile Version 3.0",
        "craquelure snapshot",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_nodes} double",
    ]
    coords = mesh.nodes
    for i in range(mesh.n_nodes):
        x = coords[i, 0]
        y = coords[i, 1] if mesh.dim == 2 else 0.0
        lines.append(f"{_f(x)} {_f(y)} 0")
    k = mesh.elements.shape[1]
    lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * (k + 1)}")
    for elem in mesh.elements:
        lines.append(str(k) + " " + " ".join(str(i) for i in elem))
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    ct = str(_CELL_TYPE[mesh.dim])
    lines.extend([ct] * mesh.n_elements)
    lines.append(f"POINT_DATA {mesh.n_nodes}")
    for name, fld in fields.items():
        if fld.components == 1:
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_f(val) for val in fld.values)
        else:
            lines.append(f"VECTORS {name} double")
            mat = fld.as_matrix()
            for row in mat:
                vy = row[1] if fld.components == 2 else 0.0
                lines.append(f"{_f(row[0])} {_f(vy)} 0")
    Path(path).write_text("\n".join(lines) + "\n")


def write_snapshot(path, mesh: Mesh, u: Field, v: Field, params) -> None:
    from .evolution import snapshot_fields

    write_vtk(mesh, snapshot_fields(mesh, u, v, params), path)


TRACE_HEADER = "t,elastic,fracture,adhesion,total,iters,slope_u,slope_v,balance_residual,crack_count"


def write_trace_csv(trace, path) -> None:
    """One row per step: energies, iteration count, diagnostics, crack count."""
    lines = [TRACE_HEADER]
    for s in trace.steps:
        e = s.energy
        lines.append(
            ",".join(
                [
                    _f(s.t),
                    _f(e.elastic),
                    _f(e.fracture),
                    _f(e.adhesion),
                    _f(e.total),
                    str(s.iterations),
                    _f(s.slope_u),
                    _f(s.slope_v),
                    _f(s.balance_residual),
                    str(s.crack_count),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_events_csv(trace, path) -> None:
    """One row per crack event: time, new count, centers joined by ';'."""
    lines = ["t,crack_count,centers"]
    for ev in trace.events:
        centers = ";".join(_f(c) for c in ev.centers)
        lines.append(f"{_f(ev.t)},{ev.count},{centers}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk_points(path) -> np.ndarray:
    """Minimal legacy-VTK point reader (used for round-trip checks)."""
    tokens = Path(path).read_text().split()
    i = tokens.index("POINTS")
    n = int(tokens[i + 1])
    vals = [float(t) for t in tokens[i + 3 : i + 3 + 3 * n]]
    return np.array(vals).reshape(n, 3)
