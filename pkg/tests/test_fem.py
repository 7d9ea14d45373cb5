import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from craquelure import analytic1d
from craquelure.core import LoadProgram, MaterialParams
from craquelure.errors import ParameterError
from craquelure.fem import (
    BoundaryCondition,
    assemble_u_system,
    assemble_v_system,
    mesh_ops,
    quadrature_energy,
    strain_energy_nodal,
    time_derivative_energy,
)
from craquelure.mesh import Field, build_interval, build_rectangle
from craquelure.solvers import solve_spd

BAR = analytic1d.Bar1DParams(half_length_L=6.5, mu=1.0, beta=0.15, Gc=1.0)
LOAD = LoadProgram.uniaxial(t_end=1.0, dt=0.1)


def params_1d(eps=0.25, eta=0.0):
    # E = 2, nu = 0 gives the bar modulus mu = 1
    return MaterialParams.from_young_poisson(2.0, 0.0, Gc=1.0, beta=0.15, eps=eps, eta=eta)


def params_2d(**kw):
    base = dict(E=1.0, nu=0.15, Gc=1.0, beta=0.15, eps=0.25, eta=1e-5)
    base.update(kw)
    return MaterialParams.from_young_poisson(**base)


def solve_u(mesh, v, t, params, load, bc=BoundaryCondition.NEUMANN, tol=1e-12):
    sys = assemble_u_system(mesh, v, t, params, load, bc)
    x, _ = solve_spd(sys, tol=tol)
    return Field(mesh, mesh.dim, x)


def l2_error_1d(mesh, u_h, exact):
    """Quadrature L2 distance between a nodal field and a callable."""
    ops = mesh_ops(mesh)
    xq = ops.at_quadrature(mesh.nodes[:, 0])
    uq = ops.at_quadrature(u_h.values)
    diff = uq - np.vectorize(exact)(xq)
    return math.sqrt(float(np.sum((diff * diff @ ops.qw) * ops.measure)))


class TestDisplacementSystem:
    def test_zero_load_gives_zero_solution(self):
        mesh = build_rectangle(1.0, 1.0, 4, 4)
        v = Field.constant(mesh, 1, 1.0)
        u = solve_u(mesh, v, 0.0, params_2d(), LOAD)
        assert np.all(u.values == 0.0)

    def test_symmetry_and_positive_definiteness(self):
        mesh = build_rectangle(1.0, 1.0, 5, 3)
        rng = np.random.default_rng(0)
        v = Field.scalar(mesh, rng.random(mesh.n_nodes))
        sys = assemble_u_system(mesh, v, 1.0, params_2d(), LOAD)
        assert sys.symmetry_error() < 1e-14
        for _ in range(5):
            x = rng.standard_normal(sys.dimension)
            assert x @ (sys.matrix @ x) > 0

    def test_1d_neumann_matches_continuous_solution(self):
        mesh = build_interval(6.5, 650)
        v = Field.constant(mesh, 1, 1.0)
        u = solve_u(mesh, v, 1.0, params_1d(), LOAD)
        err = l2_error_1d(mesh, u, lambda x: analytic1d.u_continuous(1.0, x, BAR))
        assert err <= 1e-3

    def test_1d_convergence_order(self):
        errs = []
        for n in (100, 200, 400):
            mesh = build_interval(6.5, n)
            v = Field.constant(mesh, 1, 1.0)
            u = solve_u(mesh, v, 1.0, params_1d(), LOAD)
            errs.append(l2_error_1d(mesh, u, lambda x: analytic1d.u_continuous(1.0, x, BAR)))
        rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(rates) >= 1.8

    def test_dirichlet_affine_datum_is_exact(self):
        mesh = build_interval(2.0, 37)
        for c in (1.0, 0.35):
            v = Field.constant(mesh, 1, c)
            u = solve_u(mesh, v, 0.8, params_1d(eta=1e-5), LOAD, BoundaryCondition.DIRICHLET_G)
            g = LOAD.displacement(0.8, mesh.nodes).ravel()
            assert np.max(np.abs(u.values - g)) < 1e-10

    def test_dirichlet_2d_boundary_values_imposed(self):
        mesh = build_rectangle(1.0, 1.0, 6, 4)
        v = Field.constant(mesh, 1, 0.7)
        sys = assemble_u_system(mesh, v, 0.5, params_2d(), LOAD, BoundaryCondition.DIRICHLET_G)
        assert sys.symmetry_error() < 1e-14
        x, _ = solve_spd(sys, tol=1e-12)
        g = LOAD.displacement(0.5, mesh.nodes).ravel()
        bnodes = mesh.boundary_nodes()
        dofs = np.concatenate([2 * bnodes, 2 * bnodes + 1])
        assert np.max(np.abs(x[dofs] - g[dofs])) < 1e-12

    def test_galerkin_residual_at_minimizer(self):
        mesh = build_rectangle(1.0, 0.5, 8, 4)
        rng = np.random.default_rng(1)
        v = Field.scalar(mesh, np.clip(rng.random(mesh.n_nodes), 0.1, 1.0))
        sys = assemble_u_system(mesh, v, 1.0, params_2d(), LOAD)
        x, rep = solve_spd(sys, tol=1e-12)
        resid = np.linalg.norm(sys.matrix @ x - sys.rhs) / np.linalg.norm(sys.rhs)
        assert resid <= 1e-12

    def test_mismatched_mesh_rejected(self):
        mesh = build_rectangle(1.0, 1.0, 2, 2)
        other = build_rectangle(1.0, 1.0, 3, 3)
        with pytest.raises(ParameterError):
            assemble_u_system(mesh, Field.constant(other, 1, 1.0), 1.0, params_2d(), LOAD)


class TestPhaseFieldSystem:
    def test_zero_strain_relaxes_to_one(self):
        mesh = build_rectangle(1.0, 1.0, 5, 5)
        u = Field.constant(mesh, 2, 0.0)
        sys = assemble_v_system(mesh, u, params_2d())
        assert sys.symmetry_error() < 1e-14
        x, _ = solve_spd(sys, tol=1e-12)
        assert np.max(np.abs(x - 1.0)) < 1e-10

    def test_uniform_strain_pointwise_stationarity(self):
        # 1D uniform mesh, u = s*x: interior solution v = 1/(1 + eps*w/Gc)
        mesh = build_interval(1.0, 50)
        params = params_1d(eps=0.2)
        s = 0.8
        u = Field.scalar(mesh, s * mesh.nodes[:, 0])
        sys = assemble_v_system(mesh, u, params)
        x, _ = solve_spd(sys, tol=1e-12)
        w = params.lame_mu * s * s
        expected = 1.0 / (1.0 + params.eps * w / params.toughness_Gc)
        assert np.max(np.abs(x - expected)) < 1e-10

    def test_crack_profile_energy_approaches_toughness(self):
        # v = 1 - exp(-|x|/eps) carries exactly Gc on the infinite line
        eps, h, L = 0.05, 0.01, 6.5
        mesh = build_interval(L, int(2 * L / h))
        params = params_1d(eps=eps)
        v = Field.scalar(mesh, 1.0 - np.exp(-np.abs(mesh.nodes[:, 0]) / eps))
        u = Field.constant(mesh, 1, 0.0)
        e = quadrature_energy(mesh, 0.0, u, v, params, LOAD)
        assert abs(e.fracture - params.toughness_Gc) < 0.1 * params.toughness_Gc


class TestQuadratureEnergy:
    def test_energy_drops_after_exact_displacement_solve(self):
        mesh = build_rectangle(1.0, 1.0, 6, 6)
        params = params_2d()
        rng = np.random.default_rng(2)
        v = Field.scalar(mesh, np.clip(rng.random(mesh.n_nodes), 0.05, 1.0))
        u0 = Field.vector(mesh, rng.standard_normal(2 * mesh.n_nodes))
        t = 0.9
        before = quadrature_energy(mesh, t, u0, v, params, LOAD).total
        u1 = solve_u(mesh, v, t, params, LOAD)
        after = quadrature_energy(mesh, t, u1, v, params, LOAD).total
        assert after <= before

    def test_quadratic_scaling_without_load(self):
        mesh = build_rectangle(1.0, 1.0, 5, 5)
        params = params_2d()
        rng = np.random.default_rng(4)
        u = Field.vector(mesh, rng.standard_normal(2 * mesh.n_nodes))
        v = Field.scalar(mesh, rng.random(mesh.n_nodes))
        e1 = quadrature_energy(mesh, 0.0, u, v, params, LOAD)
        u2 = Field.vector(mesh, 2.0 * u.values)
        e2 = quadrature_energy(mesh, 0.0, u2, v, params, LOAD)
        assert_allclose(e2.elastic, 4.0 * e1.elastic, rtol=1e-12)
        assert_allclose(e2.adhesion, 4.0 * e1.adhesion, rtol=1e-12)
        assert_allclose(e2.fracture, e1.fracture, rtol=1e-12)

    def test_discrete_energy_equals_quadratic_form(self):
        # the assembled system must represent the same discrete energy
        mesh = build_rectangle(1.0, 0.5, 6, 3)
        params = params_2d()
        rng = np.random.default_rng(5)
        v = Field.scalar(mesh, np.clip(rng.random(mesh.n_nodes), 0.0, 1.0))
        u = Field.vector(mesh, rng.standard_normal(2 * mesh.n_nodes))
        t = 0.7
        sys = assemble_u_system(mesh, v, t, params, LOAD)
        g = LOAD.displacement(t, mesh.nodes).ravel()
        quad = quadrature_energy(mesh, t, u, v, params, LOAD)
        lhs = 0.5 * u.values @ (sys.matrix @ u.values) - sys.rhs @ u.values
        ops = mesh_ops(mesh)
        const = params.adhesion_beta * g @ (ops.mass_vector @ g)
        assert_allclose(lhs + const, quad.elastic + quad.adhesion, rtol=1e-10, atol=1e-12)

        vsys = assemble_v_system(mesh, u, params)
        lhs_v = 0.5 * v.values @ (vsys.matrix @ v.values) - vsys.rhs @ v.values
        ones = np.ones(mesh.n_nodes)
        const_v = (
            0.5 * params.toughness_Gc / params.eps * ones @ (ops.mass_scalar @ ones)
        )
        w_elastic_at_eta0 = quad.elastic - 0.5 * params.eta_eps * float(
            np.sum(ops.measure * ops.elastic_densities(u.values, params.lame_lambda, params.lame_mu))
        )
        assert_allclose(lhs_v + const_v, w_elastic_at_eta0 + quad.fracture, rtol=1e-10, atol=1e-12)

    def test_time_derivative_matches_finite_difference(self):
        mesh = build_rectangle(1.0, 1.0, 5, 5)
        params = params_2d()
        rng = np.random.default_rng(6)
        u = Field.vector(mesh, rng.standard_normal(2 * mesh.n_nodes))
        v = Field.scalar(mesh, rng.random(mesh.n_nodes))
        t, h = 0.8, 1e-6
        e_plus = quadrature_energy(mesh, t + h, u, v, params, LOAD).total
        e_minus = quadrature_energy(mesh, t - h, u, v, params, LOAD).total
        fd = (e_plus - e_minus) / (2 * h)
        assert_allclose(time_derivative_energy(mesh, t, u, params, LOAD), fd, rtol=1e-7)


class TestNodalDensity:
    def test_uniform_strain_projection(self):
        mesh = build_rectangle(1.0, 1.0, 4, 4)
        params = params_2d()
        u = Field.vector(mesh, LOAD.displacement(0.5, mesh.nodes).ravel())
        w = strain_energy_nodal(mesh, u, params)
        expected = (params.lame_lambda + 2 * params.lame_mu) * 0.25
        assert_allclose(w, expected, rtol=1e-10)
