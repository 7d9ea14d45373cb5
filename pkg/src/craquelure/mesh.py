"""Structured triangulations of rectangles and intervals with P1 nodal fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(eq=False)
class Mesh:
    """Conforming simplicial mesh with tagged boundary nodes.

    ``nodes`` is (n_nodes, dim); ``elements`` is (n_elements, dim + 1) with
    counterclockwise orientation in 2D. ``boundary_tags`` maps each side
    name to the sorted node indices lying on it. Instances are immutable
    after construction (arrays are write-protected).
    """

    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_tags: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.nodes.setflags(write=False)
        self.elements.setflags(write=False)
        for v in self.boundary_tags.values():
            v.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def boundary_nodes(self) -> np.ndarray:
        """Sorted union of all tagged nodes."""
        if not self.boundary_tags:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(list(self.boundary_tags.values())))


def build_rectangle(L: float, H: float, nx: int, ny: int) -> Mesh:
    """Triangulate [-L, L] x [-H, H] into 2 nx ny triangles.

    The cell diagonal alternates with the parity of (i + j) to avoid a
    preferred direction in the triangulation. Node ordering is row-major
    in x (index i) then y (index j); all triangles are counterclockwise.
    """
    if L <= 0 or H <= 0:
        raise ParameterError("rectangle half-lengths must be positive")
    if nx < 1 or ny < 1:
        raise ParameterError("nx and ny must be >= 1")
    xs = np.linspace(-L, L, nx + 1)
    ys = np.linspace(-H, H, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * (ny + 1) + j

    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    k = 0
    for i in range(nx):
        for j in range(ny):
            n00 = nid(i, j)
            n10 = nid(i + 1, j)
            n01 = nid(i, j + 1)
            n11 = nid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                # diagonal n00 -- n11
                tris[k] = (n00, n10, n11)
                tris[k + 1] = (n00, n11, n01)
            else:
                # diagonal n10 -- n01
                tris[k] = (n00, n10, n01)
                tris[k + 1] = (n10, n11, n01)
            k += 2

    all_i = np.arange((nx + 1) * (ny + 1), dtype=np.int64)
    ii, jj = np.divmod(all_i, ny + 1)
    tags = {
        "left": all_i[ii == 0],
        "right": all_i[ii == nx],
        "bottom": all_i[jj == 0],
        "top": all_i[jj == ny],
    }
    return Mesh(2, nodes, tris, tags)


def build_interval(L: float, n: int) -> Mesh:
    """Subdivide [-L, L] into n segments."""
    if L <= 0:
        raise ParameterError("interval half-length must be positive")
    if n < 1:
        raise ParameterError("n must be >= 1")
    nodes = np.linspace(-L, L, n + 1).reshape(-1, 1)
    segs = np.column_stack([np.arange(n), np.arange(1, n + 1)]).astype(np.int64)
    tags = {
        "left": np.array([0], dtype=np.int64),
        "right": np.array([n], dtype=np.int64),
    }
    return Mesh(1, nodes, segs, tags)


@dataclass(eq=False)
class Field:
    """Nodal P1 field on a mesh: scalar (components=1) or vector (=dim).

    Vector values are stored node-major: value of component c at node i
    sits at index ``components * i + c``.
    """

    mesh: Mesh
    components: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        expect = self.components * self.mesh.n_nodes
        if self.values.size != expect:
            raise ParameterError(
                f"field has {self.values.size} values, mesh needs {expect}"
            )

    @classmethod
    def scalar(cls, mesh: Mesh, values) -> "Field":
        return cls(mesh, 1, np.asarray(values, dtype=float))

    @classmethod
    def vector(cls, mesh: Mesh, values) -> "Field":
        return cls(mesh, mesh.dim, np.asarray(values, dtype=float))

    @classmethod
    def constant(cls, mesh: Mesh, components: int, value: float) -> "Field":
        return cls(mesh, components, np.full(components * mesh.n_nodes, float(value)))

    def as_matrix(self) -> np.ndarray:
        """(n_nodes, components) view of the values."""
        return self.values.reshape(self.mesh.n_nodes, self.components)

    def copy(self) -> "Field":
        return Field(self.mesh, self.components, self.values.copy())


def require_phase_field(v: Field, where: str = "v") -> None:
    """Check 0 <= v <= 1 nodally, with a small roundoff allowance."""
    if v.components != 1:
        raise ParameterError(f"{where} must be a scalar field")
    lo, hi = v.values.min(initial=0.0), v.values.max(initial=0.0)
    if lo < -1e-12 or hi > 1.0 + 1e-12:
        raise ParameterError(f"{where} must take values in [0, 1], range [{lo}, {hi}]")
