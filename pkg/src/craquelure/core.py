"""Material parameters, load programs, and pointwise energy densities.

The model couples three energy contributions on a 2D film domain:

* elastic:   (1/2) integral (v^2 + eta) * W(strain(u))
* fracture:  (Gc/2) integral eps^-1 (v - 1)^2 + eps |grad v|^2
* adhesion:  beta  integral |u - g(t)|^2

where ``v`` is the damage/phase field (1 = sound, 0 = cracked), ``u`` the
film displacement and ``g(t, x) = t * A x`` the substrate displacement.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError


class PlaneRegime(str, Enum):
    PLANE_STRESS = "plane_stress"
    PLANE_STRAIN = "plane_strain"


def lame_from_young_poisson(E: float, nu: float, regime: PlaneRegime) -> tuple[float, float]:
    """Convert a Young modulus / Poisson ratio pair to 2D Lame coefficients.

    Parameters
    ----------
    E : float
        Young modulus, > 0.
    nu : float
        Poisson ratio in [0, 0.5).
    regime : PlaneRegime
        Plane stress uses the reduced lambda = E nu / (1 - nu^2); plane
        strain uses the 3D lambda = E nu / ((1 + nu)(1 - 2 nu)).

    Returns
    -------
    (lam, mu) : tuple of float
    """
    if E <= 0:
        raise ParameterError(f"young_E must be > 0, got {E}")
    if not 0.0 <= nu < 0.5:
        raise ParameterError(f"poisson_nu must lie in [0, 0.5), got {nu}")
    regime = PlaneRegime(regime)
    mu = E / (2.0 * (1.0 + nu))
    if regime is PlaneRegime.PLANE_STRESS:
        lam = E * nu / (1.0 - nu * nu)
    else:
        lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return lam, mu


@dataclass(frozen=True)
class MaterialParams:
    """Elastic moduli, toughness, adhesion and regularization parameters.

    The Lame pair is stored alongside (E, nu) and must be consistent with
    them for the chosen plane regime; use :meth:`from_young_poisson` or
    :meth:`from_lame` rather than filling fields by hand.
    """

    young_E: float
    poisson_nu: float
    lame_lambda: float
    lame_mu: float
    toughness_Gc: float
    adhesion_beta: float
    eps: float
    eta_eps: float = 1e-5
    plane_regime: PlaneRegime = PlaneRegime.PLANE_STRESS

    def __post_init__(self):
        object.__setattr__(self, "plane_regime", PlaneRegime(self.plane_regime))
        if self.lame_mu <= 0:
            raise ParameterError(f"lame_mu must be > 0, got {self.lame_mu}")
        if self.toughness_Gc <= 0:
            raise ParameterError(f"toughness_Gc must be > 0, got {self.toughness_Gc}")
        if self.adhesion_beta <= 0:
            raise ParameterError(f"adhesion_beta must be > 0, got {self.adhesion_beta}")
        if self.eps <= 0:
            raise ParameterError(f"eps must be > 0, got {self.eps}")
        if self.eta_eps < 0:
            raise ParameterError(f"eta_eps must be >= 0, got {self.eta_eps}")
        lam, mu = lame_from_young_poisson(self.young_E, self.poisson_nu, self.plane_regime)
        scale = max(abs(lam), abs(mu))
        if abs(lam - self.lame_lambda) > 1e-12 * scale or abs(mu - self.lame_mu) > 1e-12 * scale:
            raise ParameterError(
                "lame_lambda/lame_mu inconsistent with young_E/poisson_nu "
                f"({self.plane_regime.value}): expected ({lam!r}, {mu!r}), "
                f"got ({self.lame_lambda!r}, {self.lame_mu!r})"
            )

    @classmethod
    def from_young_poisson(
        cls,
        E: float,
        nu: float,
        Gc: float,
        beta: float,
        eps: float,
        eta: float = 1e-5,
        regime: PlaneRegime = PlaneRegime.PLANE_STRESS,
    ) -> "MaterialParams":
        lam, mu = lame_from_young_poisson(E, nu, regime)
        return cls(E, nu, lam, mu, Gc, beta, eps, eta, PlaneRegime(regime))

    @classmethod
    def from_lame(
        cls,
        lam: float,
        mu: float,
        Gc: float,
        beta: float,
        eps: float,
        eta: float = 1e-5,
        regime: PlaneRegime = PlaneRegime.PLANE_STRESS,
    ) -> "MaterialParams":
        """Build params from a Lame pair, back-computing (E, nu)."""
        if mu <= 0:
            raise ParameterError(f"lame_mu must be > 0, got {mu}")
        if lam < 0:
            raise ParameterError(f"lame_lambda must be >= 0, got {lam}")
        regime = PlaneRegime(regime)
        if regime is PlaneRegime.PLANE_STRESS:
            nu = lam / (lam + 2.0 * mu)
        else:
            nu = lam / (2.0 * (lam + mu))
        E = 2.0 * mu * (1.0 + nu)
        lam_chk, mu_chk = lame_from_young_poisson(E, nu, regime)
        # round-trip through (E, nu) so the stored pair satisfies the invariant
        return cls(E, nu, lam_chk, mu_chk, Gc, beta, eps, eta, regime)


class LoadKind(str, Enum):
    UNIAXIAL = "uniaxial"
    AFFINE = "affine"


UNIAXIAL_MATRIX = ((1.0, 0.0), (0.0, 0.0))


@dataclass(frozen=True)
class LoadProgram:
    """Time-parametrized substrate displacement g(t, x) = t * A x.

    The uniaxial program is the affine one with A = [[1, 0], [0, 0]],
    i.e. g(t, x) = (t x_1, 0). On 1D meshes only A[0][0] acts.
    """

    kind: LoadKind
    matrix_A: tuple[tuple[float, float], tuple[float, float]]
    t_end: float
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "kind", LoadKind(self.kind))
        A = tuple(tuple(float(a) for a in row) for row in self.matrix_A)
        if len(A) != 2 or any(len(row) != 2 for row in A):
            raise ParameterError("matrix_A must be 2x2")
        if self.kind is LoadKind.UNIAXIAL and A != UNIAXIAL_MATRIX:
            raise ParameterError("uniaxial load requires A = [[1, 0], [0, 0]]")
        object.__setattr__(self, "matrix_A", A)
        if self.dt <= 0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if self.t_end <= 0:
            raise ParameterError(f"t_end must be > 0, got {self.t_end}")

    @classmethod
    def uniaxial(cls, t_end: float, dt: float) -> "LoadProgram":
        return cls(LoadKind.UNIAXIAL, UNIAXIAL_MATRIX, t_end, dt)

    @classmethod
    def affine(cls, matrix_A, t_end: float, dt: float) -> "LoadProgram":
        return cls(LoadKind.AFFINE, tuple(tuple(row) for row in matrix_A), t_end, dt)

    @property
    def A(self) -> np.ndarray:
        return np.asarray(self.matrix_A, dtype=float)

    def displacement(self, t: float, points: np.ndarray) -> np.ndarray:
        """Evaluate g(t, x) at an (n, dim) array of points."""
        return t * self.rate(points)

    def rate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the time derivative d/dt g = A x at points."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise ParameterError("points must be an (n, dim) array")
        if points.shape[1] == 2:
            return points @ self.A.T
        if points.shape[1] == 1:
            return self.A[0, 0] * points
        raise ParameterError(f"unsupported point dimension {points.shape[1]}")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Elastic, fracture and adhesion contributions plus their sum."""

    elastic: float
    fracture: float
    adhesion: float
    total: float

    def __post_init__(self):
        if self.elastic < 0 or self.fracture < 0 or self.adhesion < 0:
            raise ParameterError("energy components must be non-negative")

    @classmethod
    def of(cls, elastic: float, fracture: float, adhesion: float) -> "EnergyBreakdown":
        return cls(elastic, fracture, adhesion, elastic + fracture + adhesion)


def elastic_density(strain: np.ndarray, params: MaterialParams) -> float:
    """Pointwise elastic density W(e) = lambda (tr e)^2 + 2 mu (e : e).

    The elastic energy term is (1/2) * integral of (v^2 + eta) * W, so W
    carries twice the usual strain energy of the undamaged material.
    """
    e = np.asarray(strain, dtype=float)
    if e.shape != (2, 2):
        raise ParameterError(f"strain must be a 2x2 tensor, got shape {e.shape}")
    if not np.allclose(e, e.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(e).max())):
        raise ParameterError("strain tensor must be symmetric")
    tr = e[0, 0] + e[1, 1]
    return params.lame_lambda * tr * tr + 2.0 * params.lame_mu * float(np.sum(e * e))


def total_energy(t, u, v, params, load, mesh=None) -> EnergyBreakdown:
    """Evaluate the full energy at a state; see ``fem.quadrature_energy``.

    ``mesh`` defaults to the mesh the fields live on.
    """
    from . import fem

    if mesh is None:
        mesh = u.mesh
    return fem.quadrature_energy(mesh, t, u, v, params, load)
