"""Built-in invariant battery backing the ``check`` CLI subcommand."""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np

from . import analytic1d, config, output
from .core import LoadProgram, MaterialParams, lame_from_young_poisson
from .fem import BoundaryCondition, assemble_u_system, assemble_v_system, quadrature_energy
from .mesh import Field, build_interval, build_rectangle
from .solvers import brute_force_box_qp, solve_box_qp, solve_spd
from .staggered import IrreversibilityMode, staggered_step
from .fem import SparseSPD
import scipy.sparse as sp


def _check_lame() -> str:
    lam, mu = lame_from_young_poisson(1.0, 0.15, "plane_stress")
    E = 2 * mu * (1 + lam / (lam + 2 * mu))
    assert abs(E - 1.0) < 1e-12, f"plane-stress round trip E={E}"
    lam2, mu2 = lame_from_young_poisson(1.0, 0.15, "plane_strain")
    nu2 = lam2 / (2 * (lam2 + mu2))
    assert abs(nu2 - 0.15) < 1e-12, f"plane-strain round trip nu={nu2}"
    return f"lambda={lam:.6f} mu={mu:.6f}"


def _check_mesh() -> str:
    m = build_rectangle(1.5, 1.0, 6, 4)
    coords = m.nodes[m.elements]
    v1 = coords[:, 1] - coords[:, 0]
    v2 = coords[:, 2] - coords[:, 0]
    area = float(np.sum(0.5 * (v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])))
    assert abs(area - 6.0) < 1e-12 * 6.0, f"area {area}"
    b = build_interval(2.0, 5)
    assert b.boundary_tags["left"].tolist() == [0]
    assert b.boundary_tags["right"].tolist() == [5]
    return f"rect area={area:.12f}, interval tags ok"


def _check_analytic() -> str:
    p = analytic1d.Bar1DParams(half_length_L=6.5)
    t1 = analytic1d.critical_time(6.5, 1, p)
    alt = math.sqrt(p.Gc / analytic1d.delta2(6.5, p))
    assert abs(t1 - alt) < 1e-12
    hs = analytic1d.halving_times(6.5, 4, p)
    assert all(a < b for a, b in zip(hs, hs[1:])), hs
    return f"t_1={t1:.6f}, halving increasing"


def _small_state():
    mesh = build_rectangle(1.0, 1.0, 4, 4)
    params = MaterialParams.from_young_poisson(1.0, 0.15, 1.0, 0.15, 0.5)
    load = LoadProgram.uniaxial(t_end=1.0, dt=0.5)
    return mesh, params, load


def _check_spd() -> str:
    mesh, params, load = _small_state()
    v = Field.constant(mesh, 1, 1.0)
    sys = assemble_u_system(mesh, v, 1.0, params, load)
    assert sys.symmetry_error() < 1e-14, "u-system not symmetric"
    rng = np.random.default_rng(0)
    b = rng.standard_normal(sys.dimension)
    x, rep = solve_spd(SparseSPD(sys.matrix, b), tol=1e-10)
    assert rep.final_residual <= 1e-10
    assert float(x @ b) > 0, "matrix not positive definite on random rhs"
    return f"CG iters={rep.iterations}"


def _check_qp() -> str:
    rng = np.random.default_rng(1)
    for _ in range(5):
        n = 6
        R = rng.standard_normal((n, n))
        A = R @ R.T + n * np.eye(n)
        b = rng.standard_normal(n)
        lo = -rng.random(n)
        hi = rng.random(n)
        sys = SparseSPD(sp.csr_matrix(A), b)
        x, _ = solve_box_qp(sys, lo, hi, tol=1e-10)
        ref = brute_force_box_qp(A, b, lo, hi)
        assert np.max(np.abs(x - ref)) < 1e-8, (x, ref)
    return "matches brute-force enumeration (5 seeds)"


def _check_staggered() -> str:
    mesh, params, load = _small_state()
    u = Field.constant(mesh, 2, 0.0)
    v = Field.constant(mesh, 1, 1.0)
    u2, v2, rep = staggered_step(
        1.0, u, v, IrreversibilityMode.PER_STEP, 1e-6, 200, params, load
    )
    assert rep.converged
    es = rep.energies_after_v
    assert all(es[i + 1] <= es[i] + 1e-9 for i in range(len(es) - 1)), "energy rose"
    assert np.all(v2.values <= v.values + 1e-15), "irreversibility violated"
    return f"converged in {rep.iterations} iterations"


def _check_dirichlet_1d() -> str:
    mesh = build_interval(2.0, 40)
    params = MaterialParams.from_young_poisson(2.0, 0.0, 1.0, 0.15, 0.25)
    load = LoadProgram.uniaxial(t_end=1.0, dt=1.0)
    u = Field.constant(mesh, 1, 0.0)
    v = Field.constant(mesh, 1, 0.55)
    u2, v2, rep = staggered_step(
        1.0, u, v, IrreversibilityMode.NONE, 1e-8, 50, params, load,
        bc=BoundaryCondition.DIRICHLET_G,
    )
    assert rep.converged and rep.iterations <= 2, rep.iterations
    spread = float(v2.values.max() - v2.values.min())
    assert spread < 1e-8, f"v not constant, spread {spread}"
    g = load.displacement(1.0, mesh.nodes).ravel()
    assert np.max(np.abs(u2.values - g)) < 1e-9, "u != g for affine Dirichlet datum"
    return f"homogeneous in {rep.iterations} iterations, v spread {spread:.1e}"


def _check_config_io() -> str:
    cfg = config.EvolutionConfig(L=3.0, t_end=1.0, snapshots=(0.5, 1.0), out_dir="out")
    back = config.parse_config(config.serialize_config(cfg))
    assert back == cfg, "config round trip failed"
    with tempfile.TemporaryDirectory() as d:
        mesh = build_rectangle(1.0, 1.0, 2, 2)
        f = Field.constant(mesh, 1, 1.0)
        p1, p2 = Path(d, "a.vtk"), Path(d, "b.vtk")
        output.write_vtk(mesh, {"v": f}, p1)
        output.write_vtk(mesh, {"v": f}, p2)
        assert p1.read_bytes() == p2.read_bytes(), "VTK output not deterministic"
    return "config round trip + deterministic VTK"


def _check_energy_identity() -> str:
    mesh, params, load = _small_state()
    rng = np.random.default_rng(2)
    u = Field.vector(mesh, 0.1 * rng.standard_normal(2 * mesh.n_nodes))
    v = Field.scalar(mesh, rng.random(mesh.n_nodes))
    e = quadrature_energy(mesh, 0.7, u, v, params, load)
    assert e.total == e.elastic + e.fracture + e.adhesion
    sysv = assemble_v_system(mesh, u, params)
    assert sysv.symmetry_error() < 1e-14
    return f"total={e.total:.6f}"


CHECKS = [
    ("lame-conversion", _check_lame),
    ("mesh-partition", _check_mesh),
    ("analytic-identities", _check_analytic),
    ("spd-solve", _check_spd),
    ("box-qp-bruteforce", _check_qp),
    ("staggered-descent", _check_staggered),
    ("dirichlet-1d-homogeneous", _check_dirichlet_1d),
    ("config-vtk-io", _check_config_io),
    ("energy-identity", _check_energy_identity),
]


def run_self_checks(echo=print) -> bool:
    """Run every check, print one line each, return overall success."""
    ok = True
    for name, fn in CHECKS:
        try:
            detail = fn()
            echo(f"PASS {name}: {detail}")
        except AssertionError as exc:
            ok = False
            echo(f"FAIL {name}: {exc}")
    return ok
