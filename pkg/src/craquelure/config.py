"""Evolution configuration: parsing, validation, serialization.

The format is line oriented: ``[section]`` headers followed by
``key = value`` pairs, where pairs may share a line with the header or
with each other, separated by whitespace. ``#`` starts a comment. Lists
(snapshot times, the load matrix) are comma separated without spaces.

    [geometry] L=6.5  H=2.5  nx=130 ny=50
    [material] E=1.0 nu=0.15 regime=plane_stress Gc=1.0 beta=0.15 eps=0.25 eta=1e-5
    [load] kind=uniaxial t_end=4.5 dt=0.1
    [scheme] mode=none bc=neumann stag_tol=1e-4 max_m=500
    [output] dir=out snapshots=3.0,3.1,3.7,3.8 threshold=0.2
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import LoadKind, LoadProgram, MaterialParams, PlaneRegime, UNIAXIAL_MATRIX
from .errors import ConfigError
from .fem import BoundaryCondition
from .mesh import Mesh, build_interval, build_rectangle
from .staggered import IrreversibilityMode


@dataclass(frozen=True)
class EvolutionConfig:
    # geometry
    L: float = 6.5
    H: float = 2.5
    nx: int | None = None
    ny: int | None = None
    h: float | None = None
    interval: bool = False
    n: int | None = None
    # material
    E: float = 1.0
    nu: float = 0.15
    regime: PlaneRegime = PlaneRegime.PLANE_STRESS
    Gc: float = 1.0
    beta: float = 0.15
    eps: float = 0.25
    eta: float = 1e-5
    # load
    kind: LoadKind = LoadKind.UNIAXIAL
    A: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    t_end: float = 4.5
    dt: float = 0.1
    # scheme
    mode: IrreversibilityMode = IrreversibilityMode.NONE
    bc: BoundaryCondition = BoundaryCondition.NEUMANN
    stag_tol: float = 1e-4
    lin_tol: float = 1e-10
    qp_tol: float = 1e-8
    max_m: int = 500
    # output
    out_dir: str | None = None
    snapshots: tuple[float, ...] = ()
    threshold: float = 0.2
    deterministic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "regime", PlaneRegime(self.regime))
        object.__setattr__(self, "kind", LoadKind(self.kind))
        object.__setattr__(self, "mode", IrreversibilityMode(self.mode))
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))
        object.__setattr__(self, "A", tuple(float(a) for a in self.A))
        object.__setattr__(self, "snapshots", tuple(float(s) for s in self.snapshots))
        self._require(self.L > 0, "L", "must be > 0")
        self._require(self.H > 0, "H", "must be > 0")
        self._require(len(self.A) == 4, "A", "must have 4 entries (row-major 2x2)")
        for name in ("E", "Gc", "beta", "eps", "dt", "t_end", "stag_tol", "lin_tol", "qp_tol"):
            self._require(getattr(self, name) > 0, name, "must be > 0")
        self._require(0 <= self.nu < 0.5, "nu", "must lie in [0, 0.5)")
        self._require(self.eta >= 0, "eta", "must be >= 0")
        self._require(self.max_m >= 1, "max_m", "must be >= 1")
        self._require(0 < self.threshold < 1, "threshold", "must lie in (0, 1)")
        for name in ("nx", "ny", "n"):
            val = getattr(self, name)
            self._require(val is None or val >= 1, name, "must be >= 1")
        self._require(self.h is None or self.h > 0, "h", "must be > 0")
        if self.kind is LoadKind.UNIAXIAL:
            self._require(
                self.A == tuple(UNIAXIAL_MATRIX[0] + UNIAXIAL_MATRIX[1]),
                "A",
                "uniaxial load fixes A = 1,0,0,0",
            )
        bad = [s for s in self.snapshots if not 0 <= s <= self.t_end]
        self._require(not bad, "snapshots", f"times {bad} outside [0, t_end]")

    @staticmethod
    def _require(cond: bool, name: str, msg: str):
        if not cond:
            raise ConfigError(f"{name}: {msg}")

    def resolved_resolution(self) -> tuple[int, int]:
        """Mesh subdivisions, derived from the h target when not given.

        The default target is h = eps / 2.
        """
        h = self.h if self.h is not None else self.eps / 2.0
        if self.interval:
            n = self.n if self.n is not None else max(1, int(round(2 * self.L / h)))
            return n, 0
        nx = self.nx if self.nx is not None else max(1, int(round(2 * self.L / h)))
        ny = self.ny if self.ny is not None else max(1, int(round(2 * self.H / h)))
        return nx, ny

    def build_mesh(self) -> Mesh:
        nx, ny = self.resolved_resolution()
        if self.interval:
            return build_interval(self.L, nx)
        return build_rectangle(self.L, self.H, nx, ny)

    def material_params(self) -> MaterialParams:
        return MaterialParams.from_young_poisson(
            self.E, self.nu, self.Gc, self.beta, self.eps, self.eta, self.regime
        )

    def load_program(self) -> LoadProgram:
        A = ((self.A[0], self.A[1]), (self.A[2], self.A[3]))
        return LoadProgram(self.kind, A, self.t_end, self.dt)


_SCHEMA = {
    "geometry": {
        "L": float, "H": float, "nx": int, "ny": int, "h": float,
        "interval": bool, "n": int,
    },
    "material": {
        "E": float, "nu": float, "regime": str, "Gc": float, "beta": float,
        "eps": float, "eta": float,
    },
    "load": {"kind": str, "A": "floats", "t_end": float, "dt": float},
    "scheme": {
        "mode": str, "bc": str, "stag_tol": float, "lin_tol": float,
        "qp_tol": float, "max_m": int,
    },
    "output": {
        "dir": str, "snapshots": "floats", "threshold": float, "deterministic": bool,
    },
}
# config key -> dataclass field, where the names differ
_RENAME = {("output", "dir"): "out_dir"}


def _convert(raw: str, typ, section: str, key: str, lineno: int):
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if typ == "floats":
            return tuple(float(p) for p in raw.split(",") if p != "")
        return typ(raw)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: cannot parse [{section}] {key} = {raw!r}"
        ) from None


def parse_config(text: str) -> EvolutionConfig:
    """Parse config text; unknown sections or keys are rejected."""
    values: dict[str, object] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close = line.find("]")
            if close < 0:
                raise ConfigError(f"line {lineno}: unterminated section header")
            section = line[1:close].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            line = line[close + 1:].strip()
            if not line:
                continue
        if section is None:
            raise ConfigError(f"line {lineno}: key=value before any [section] header")
        for tok in line.split():
            if "=" not in tok:
                raise ConfigError(f"line {lineno}: expected key=value, got {tok!r}")
            key, raw = tok.split("=", 1)
            if key not in _SCHEMA[section]:
                raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
            field_name = _RENAME.get((section, key), key)
            if field_name in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[field_name] = _convert(raw, _SCHEMA[section][key], section, key, lineno)
    return EvolutionConfig(**values)


def _fmt(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return f"{val:.17g}"
    if isinstance(val, tuple):
        return ",".join(f"{v:.17g}" for v in val)
    if isinstance(val, (PlaneRegime, LoadKind, IrreversibilityMode, BoundaryCondition)):
        return val.value
    return str(val)


def serialize_config(cfg: EvolutionConfig) -> str:
    """Emit a config that parses back to an equal EvolutionConfig."""
    lines = []
    for section, keys in _SCHEMA.items():
        parts = []
        for key in keys:
            field_name = _RENAME.get((section, key), key)
            val = getattr(cfg, field_name)
            if val is None or (field_name == "snapshots" and val == ()):
                continue
            parts.append(f"{key}={_fmt(val)}")
        if parts:
            lines.append(f"[{section}] " + " ".join(parts))
    return "\n".join(lines) + "\n"
