"""Quasi-static time stepping, evolution diagnostics, and crack extraction.

The evolution iterates the staggered solve over t_k = k dt from the sound
state (u = 0, v = 1). Each step records the energy split, two smallness
measures of the equilibrium conditions (dual-norm gradient in u, positive
part of the gradient in v where the phase field can still decrease), a
discrete energy-balance residual, and the crack pattern read off the
horizontal midline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import EnergyBreakdown
from .errors import ParameterError
from .fem import (
    BoundaryCondition,
    SparseSPD,
    assemble_u_system,
    assemble_v_system,
    h1_vector_matrix,
    mesh_ops,
    quadrature_energy,
    strain_energy_nodal,
    time_derivative_energy,
)
from .mesh import Field, Mesh, require_phase_field
from .solvers import solve_spd
from .staggered import IrreversibilityMode, staggered_step


@dataclass(frozen=True)
class CrackPattern:
    """Cracks detected along the midline as runs of low phase-field values."""

    threshold: float
    centers: tuple[float, ...]
    gaps: tuple[float, ...]
    spacing_mean: float
    spacing_std: float

    @property
    def count(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class CrackEvent:
    """A step at which the midline crack count increased."""

    t: float
    count: int
    centers: tuple[float, ...]
    intra_step_counts: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class StepRecord:
    k: int
    t: float
    energy: EnergyBreakdown
    iterations: int
    converged: bool
    slope_u: float
    slope_v: float
    scale_u: float
    scale_v: float
    time_power: float
    balance_residual: float
    crack_count: int
    crack_centers: tuple[float, ...]


@dataclass
class EvolutionTrace:
    steps: list[StepRecord] = field(default_factory=list)
    events: list[CrackEvent] = field(default_factory=list)
    final_u: Field | None = None
    final_v: Field | None = None
    all_converged: bool = True


def midline_nodes(mesh: Mesh) -> np.ndarray:
    """Node indices along y = 0 (nearest node row), sorted by x."""
    if mesh.dim == 1:
        idx = np.arange(mesh.n_nodes)
        return idx[np.argsort(mesh.nodes[idx, 0], kind="stable")]
    ys = mesh.nodes[:, 1]
    y0 = ys[np.argmin(np.abs(ys))]
    idx = np.flatnonzero(np.abs(ys - y0) < 1e-12)
    return idx[np.argsort(mesh.nodes[idx, 0], kind="stable")]


def crack_pattern(v: Field, threshold: float) -> CrackPattern:
    """Group consecutive below-threshold midline nodes into cracks."""
    require_phase_field(v)
    idx = midline_nodes(v.mesh)
    xs = v.mesh.nodes[idx, 0]
    below = v.values[idx] < threshold
    centers = []
    start = None
    for i, flag in enumerate(below):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            centers.append(float(np.mean(xs[start:i])))
            start = None
    if start is not None:
        centers.append(float(np.mean(xs[start:])))
    gaps = tuple(float(g) for g in np.diff(centers)) if len(centers) > 1 else ()
    mean = float(np.mean(gaps)) if gaps else float("nan")
    std = float(np.std(gaps)) if gaps else float("nan")
    return CrackPattern(threshold, tuple(centers), gaps, mean, std)


def slope_u(
    t: float,
    u: Field,
    v: Field,
    params,
    load,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
    lin_tol: float = 1e-12,
) -> float:
    """Dual norm of the displacement gradient of the energy.

    Solves R r = gamma with R the discrete H1 inner product and gamma the
    nodal gradient, and returns sqrt(gamma . r). For Dirichlet data the
    constrained dofs are removed from both (variations vanish there).
    """
    val, _, _, _ = equilibrium_diagnostics(t, u, v, params, load, bc, lin_tol)
    return val


def equilibrium_diagnostics(
    t: float,
    u: Field,
    v: Field,
    params,
    load,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
    lin_tol: float = 1e-12,
) -> tuple[float, float, float, float]:
    """(slope_u, scale_u, slope_v, scale_v) with one assembly per system.

    The scales are the Euclidean norms of the two right-hand sides, the
    natural size against which the slopes are judged.
    """
    mesh = u.mesh
    usys = assemble_u_system(mesh, v, t, params, load, BoundaryCondition.NEUMANN)
    grad_u = usys.matrix @ u.values - usys.rhs
    R = h1_vector_matrix(mesh)
    if BoundaryCondition(bc) is BoundaryCondition.DIRICHLET_G:
        bnodes = mesh.boundary_nodes()
        dofs = np.concatenate([2 * bnodes, 2 * bnodes + 1]) if mesh.dim == 2 else bnodes
        grad_u = grad_u.copy()
        grad_u[dofs] = 0.0
        from .fem import _eliminate

        R, _ = _eliminate(R.copy(), np.zeros(R.shape[0]), np.sort(dofs), np.zeros(dofs.size))
    r, _ = solve_spd(SparseSPD(R, grad_u), tol=lin_tol)
    s_u = float(np.sqrt(max(grad_u @ r, 0.0)))
    scale_u = float(np.linalg.norm(usys.rhs))

    vsys = assemble_v_system(mesh, u, params)
    grad_v = vsys.matrix @ v.values - vsys.rhs
    mask = v.values > 1e-12
    s_v = float(np.linalg.norm(np.maximum(grad_v[mask], 0.0)))
    scale_v = float(np.linalg.norm(vsys.rhs))
    return s_u, scale_u, s_v, scale_v


def slope_v_unilateral(t: float, u: Field, v: Field, params) -> float:
    """Euclidean norm of the positive part of the phase-field gradient.

    Restricted to nodes with v > 0, where a decrease is still admissible;
    a proxy for the unilateral descent slope, not a claim of equivalence
    with the continuum quantity.
    """
    mesh = u.mesh
    vsys = assemble_v_system(mesh, u, params)
    grad_v = vsys.matrix @ v.values - vsys.rhs
    mask = v.values > 1e-12
    return float(np.linalg.norm(np.maximum(grad_v[mask], 0.0)))


def energy_balance_residual(records: list[StepRecord]) -> np.ndarray:
    """Per-step residual E_k - E_{k-1} - dt * d/dt F(t_k, u_k, v_k).

    Small at steps where the state evolves smoothly; spikes mark the
    energy drop of a crack event. Needs at least two consecutive records.
    """
    if len(records) < 2:
        raise ParameterError("need at least two consecutive step records")
    out = np.empty(len(records) - 1)
    for i in range(1, len(records)):
        dt = records[i].t - records[i - 1].t
        out[i - 1] = (
            records[i].energy.total
            - records[i - 1].energy.total
            - records[i].time_power * dt
        )
    return out


def run_evolution(cfg, log=None) -> EvolutionTrace:
    """Run the quasi-static evolution described by an EvolutionConfig.

    Writes trace.csv, events.csv, and VTK snapshots (at configured times
    and at every crack event) when the config names an output directory.
    Staggered non-convergence at a step is recorded and the run continues.
    """
    from . import output

    mesh = cfg.build_mesh()
    params = cfg.material_params()
    load = cfg.load_program()
    mesh_ops(mesh)  # build the assembly cache up front

    u = Field.constant(mesh, mesh.dim, 0.0)
    v = Field.constant(mesh, 1, 1.0)
    outdir = None
    if cfg.out_dir is not None:
        outdir = Path(cfg.out_dir)
        outdir.mkdir(parents=True, exist_ok=True)

    trace = EvolutionTrace()
    e0 = quadrature_energy(mesh, 0.0, u, v, params, load)
    s_u, sc_u, s_v, sc_v = equilibrium_diagnostics(0.0, u, v, params, load, cfg.bc, cfg.lin_tol)
    pat = crack_pattern(v, cfg.threshold)
    trace.steps.append(
        StepRecord(0, 0.0, e0, 0, True, s_u, sc_u, s_v, sc_v, 0.0, 0.0, pat.count, pat.centers)
    )
    prev_energy = e0
    prev_count = pat.count

    n_steps = int(np.floor(cfg.t_end / cfg.dt + 1e-9))
    snapshots = sorted(cfg.snapshots)
    for k in range(1, n_steps + 1):
        t = k * cfg.dt
        intra: list[tuple[int, int]] = []

        def watch(m, _uv, vv, _mesh=mesh, _intra=intra):
            c = crack_pattern(Field.scalar(_mesh, np.clip(vv, 0.0, 1.0)), cfg.threshold)
            _intra.append((m, c.count))

        u, v, rep = staggered_step(
            t,
            u,
            v,
            cfg.mode,
            cfg.stag_tol,
            cfg.max_m,
            params,
            load,
            cfg.bc,
            lin_tol=cfg.lin_tol,
            qp_tol=cfg.qp_tol,
            on_iteration=watch,
        )
        if not rep.converged:
            trace.all_converged = False
        energy = rep.final_energy
        s_u, sc_u, s_v, sc_v = equilibrium_diagnostics(t, u, v, params, load, cfg.bc, cfg.lin_tol)
        power = time_derivative_energy(mesh, t, u, params, load)
        resid = energy.total - prev_energy.total - power * cfg.dt
        pat = crack_pattern(v, cfg.threshold)

        trace.steps.append(
            StepRecord(
                k,
                t,
                energy,
                rep.iterations,
                rep.converged,
                s_u,
                sc_u,
                s_v,
                sc_v,
                power,
                resid,
                pat.count,
                pat.centers,
            )
        )
        is_event = pat.count > prev_count
        if is_event:
            trace.events.append(CrackEvent(t, pat.count, pat.centers, tuple(intra)))
        if log is not None:
            log(
                f"t={t:.3f} iters={rep.iterations:4d} E={energy.total:.6f} "
                f"cracks={pat.count}"
                + ("" if rep.converged else " [not converged]")
            )

        if outdir is not None:
            want = any(abs(t - s) <= 1e-9 * max(1.0, abs(s)) for s in snapshots)
            if want or is_event:
                output.write_snapshot(outdir / f"snap_t{t:g}.vtk", mesh, u, v, params)
        prev_energy = energy
        prev_count = pat.count

    trace.final_u, trace.final_v = u, v
    if outdir is not None:
        output.write_trace_csv(trace, outdir / "trace.csv")
        output.write_events_csv(trace, outdir / "events.csv")
    return trace


def snapshot_fields(mesh: Mesh, u: Field, v: Field, params) -> dict[str, Field]:
    """The field set written to every snapshot file."""
    w = strain_energy_nodal(mesh, u, params)
    return {"v": v, "u": u, "W_density": Field.scalar(mesh, w)}
