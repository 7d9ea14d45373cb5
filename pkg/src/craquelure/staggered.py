"""Alternate minimization of the separately quadratic energy at a fixed time.

Starting from the previous step's state, each iteration solves the
displacement system exactly at frozen damage, then the box-constrained
phase-field QP at frozen displacement. The loop stops when the sup-norm
of the phase-field increment drops below ``stag_tol``. Irreversibility
enters only through the upper bound of the box:

* none:          v in [0, 1]
* per_step:      v <= previous step's phase field (frozen for all m)
* per_iteration: v <= previous iterate's phase field (tightens as it runs)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import EnergyBreakdown, LoadProgram, MaterialParams
from .errors import ParameterError
from .fem import BoundaryCondition, assemble_u_system, assemble_v_system, quadrature_energy
from .mesh import Field, require_phase_field
from .solvers import solve_box_qp, solve_spd


class IrreversibilityMode(str, Enum):
    NONE = "none"
    PER_STEP = "per_step"
    PER_ITERATION = "per_iteration"


@dataclass
class StaggeredReport:
    """Iteration trace of one alternate-minimization solve."""

    iterations: int
    converged: bool
    last_increment: float
    energies_after_u: list[float] = field(default_factory=list)
    energies_after_v: list[float] = field(default_factory=list)
    final_energy: EnergyBreakdown | None = None
    u_solve_iterations: int = 0
    qp_active_set_size: int = 0


def staggered_step(
    t_k: float,
    u_prev: Field,
    v_prev: Field,
    mode: IrreversibilityMode,
    stag_tol: float,
    max_m: int,
    params: MaterialParams,
    load: LoadProgram,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
    lin_tol: float = 1e-10,
    qp_tol: float = 1e-8,
    on_iteration=None,
) -> tuple[Field, Field, StaggeredReport]:
    """Advance the state to time t_k by alternate minimization.

    Returns the new (u, v) pair and a report; if ``max_m`` is reached the
    report carries ``converged=False`` and the last iterate is returned.
    ``on_iteration(m, u_values, v_values)``, when given, is called after
    every full iteration so callers can trace intermediate states.
    """
    mode = IrreversibilityMode(mode)
    mesh = v_prev.mesh
    require_phase_field(v_prev, "v_prev")
    if u_prev.mesh is not mesh:
        raise ParameterError("u_prev and v_prev live on different meshes")
    if stag_tol <= 0 or max_m < 1:
        raise ParameterError("stag_tol must be > 0 and max_m >= 1")

    n = mesh.n_nodes
    lower = np.zeros(n)
    frozen_upper = np.minimum(v_prev.values, 1.0) if mode is IrreversibilityMode.PER_STEP else None

    u = u_prev.values.copy()
    v = v_prev.values.copy()
    report = StaggeredReport(iterations=0, converged=False, last_increment=np.inf)

    for m in range(1, max_m + 1):
        v_field = Field.scalar(mesh, v)
        usys = assemble_u_system(mesh, v_field, t_k, params, load, bc)
        u, urep = solve_spd(usys, tol=lin_tol, x0=u)
        report.u_solve_iterations += urep.iterations
        u_field = Field(mesh, mesh.dim, u)
        report.energies_after_u.append(
            quadrature_energy(mesh, t_k, u_field, v_field, params, load).total
        )

        if mode is IrreversibilityMode.PER_STEP:
            upper = frozen_upper
        elif mode is IrreversibilityMode.PER_ITERATION:
            upper = np.minimum(v, 1.0)
        else:
            upper = np.ones(n)
        vsys = assemble_v_system(mesh, u_field, params)
        v_new, vrep = solve_box_qp(vsys, lower, upper, tol=qp_tol, x0=np.clip(v, lower, upper))
        report.qp_active_set_size = vrep.active_set_size

        inc = float(np.max(np.abs(v_new - v))) if n else 0.0
        v = v_new
        report.iterations = m
        report.last_increment = inc
        report.energies_after_v.append(
            quadrature_energy(mesh, t_k, u_field, Field.scalar(mesh, v), params, load).total
        )
        if on_iteration is not None:
            on_iteration(m, u, v)
        if inc < stag_tol:
            report.converged = True
            break

    # re-solve u against the final phase field so the returned pair is an
    # equilibrium in both variables (the loop above leaves u one v behind)
    v_field = Field.scalar(mesh, v)
    usys = assemble_u_system(mesh, v_field, t_k, params, load, bc)
    u, urep = solve_spd(usys, tol=lin_tol, x0=u)
    report.u_solve_iterations += urep.iterations
    u_field = Field(mesh, mesh.dim, u)
    report.final_energy = quadrature_energy(mesh, t_k, u_field, v_field, params, load)
    return u_field, v_field, report
