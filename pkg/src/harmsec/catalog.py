"""Built-in example structures and a seeded negative-control perturbation.

Every entry is gated at build time: almost contact entries must pass
:func:`validate_structure` at seeded points, submersions must pass their
Riemannian-submersion and J-compatibility checks.  Built objects are cached
per (key, parameters) so repeated lookups share the same field objects and
therefore the same derivative caches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .chart import DEFAULT_FD, Chart, TensorFieldHandle
from .contact import AlmostContactStructure, validate_structure
from .errors import EpsilonOutOfRange, ParamOutOfRange, UnknownEntry
from .submersion import (
    BASE_TIMES_LINE,
    LINE_TIMES_FIBER,
    AlmostHermitianStructure,
    SubmersionSetup,
    WarpedProductSpec,
    validate_hermitian,
)

GATE_POINTS = 20
GATE_SEED = 0

J0_2 = np.array([[0.0, -1.0], [1.0, 0.0]])  # J d_x = d_y, J d_y = -d_x


def _handle(valence, fn, name):
    return TensorFieldHandle(valence, fn, name)


# ---------------------------------------------------------------------------
# almost Hermitian building blocks

def flat_kahler_R2(scale: float = 1.0, J: Optional[np.ndarray] = None, box=((-1.0, 1.0), (-1.0, 1.0))):
    """Flat plane with metric ``scale * (dx^2 + dy^2)`` and a constant complex structure."""
    Jm = J0_2 if J is None else np.asarray(J, float)
    chart = Chart(2, lambda p: scale * np.eye(2), "flat R2", box=box, coords=("x", "y"))
    return AlmostHermitianStructure(chart, _handle((1, 1), lambda p: Jm.copy(), "J"), "flat_kahler_R2")


def _rotation_13(angle):
    c, s = math.cos(angle), math.sin(angle)
    R = np.eye(4)
    R[0, 0], R[0, 2], R[2, 0], R[2, 2] = c, -s, s, c
    return R


def perturbed_hermitian_R4(strength: float = 0.4):
    """Flat R^4 with ``J = R(x) J0 R(x)^T``, R a rotation of the (x1, x3)-plane.

    The rotation angle varies in space, so J is neither parallel nor
    co-closed: a non-Kähler, non-cosymplectic control.
    """
    J0 = np.zeros((4, 4))
    J0[:2, :2] = J0_2
    J0[2:, 2:] = J0_2

    def J(p):
        a = strength * (p[0] + p[1] * p[2] + 0.5 * math.sin(p[3]))
        R = _rotation_13(a)
        return R @ J0 @ R.T

    chart = Chart(4, lambda p: np.eye(4), "flat R4", box=((-1.0, 1.0),) * 4, coords=("x1", "x2", "x3", "x4"))
    return AlmostHermitianStructure(chart, _handle((1, 1), J, "J"), "perturbed_hermitian_R4")


# ---------------------------------------------------------------------------
# almost contact entries

def euclidean():
    """Flat R^3 with ``xi = d_z`` and J the standard rotation of the xy-plane."""
    chart = Chart(3, lambda p: np.eye(3), "euclidean", box=((-1.0, 1.0),) * 3, coords=("x", "y", "z"))
    e3 = np.array([0.0, 0.0, 1.0])
    phi = np.zeros((3, 3))
    phi[:2, :2] = J0_2
    return AlmostContactStructure(chart, _handle((1, 0), lambda p: e3.copy(), "xi"),
                                  _handle((0, 1), lambda p: e3.copy(), "eta"),
                                  _handle((1, 1), lambda p: phi.copy(), "phi"), "euclidean")


def sasakian_R2n1(n: int = 1):
    """Standard Sasakian structure on R^{2n+1}.

    Coordinates ``(x_1..x_n, y_1..y_n, z)``, ``eta = (dz - sum y_i dx_i) / 2``,
    ``xi = 2 d_z``, ``g = eta (x) eta + (sum dx_i^2 + dy_i^2) / 4``,
    ``phi d_{x_i} = -d_{y_i}`` and ``phi d_{y_i} = d_{x_i} + y_i d_z``.
    """
    dim = 2 * n + 1
    z = 2 * n
    flat = 0.25 * np.eye(dim)
    flat[z, z] = 0.0

    def eta(p):
        v = np.zeros(dim)
        v[:n] = -0.5 * p[n:2 * n]
        v[z] = 0.5
        return v

    def metric(p):
        e = eta(p)
        return np.outer(e, e) + flat

    def xi(p):
        v = np.zeros(dim)
        v[z] = 2.0
        return v

    def phi(p):
        A = np.zeros((dim, dim))
        for i in range(n):
            A[n + i, i] = -1.0
            A[i, n + i] = 1.0
            A[z, n + i] = p[n + i]
        return A

    coords = ("x", "y", "z") if n == 1 else tuple(f"x{i + 1}" for i in range(n)) + tuple(
        f"y{i + 1}" for i in range(n)) + ("z",)
    name = "sasakian_R3" if n == 1 else f"sasakian_R{dim}"
    chart = Chart(dim, metric, name, box=((-1.0, 1.0),) * dim, coords=coords)
    return AlmostContactStructure(chart, _handle((1, 0), xi, "xi"), _handle((0, 1), eta, "eta"),
                                  _handle((1, 1), phi, "phi"), name)


def unit_tangent_surface(c: float = 1.0):
    """Unit tangent bundle of the surface of constant curvature ``c``.

    The surface is the conformal disc model ``lambda^2 (dx^2 + dy^2)`` with
    ``lambda = 1 / (1 + c r^2 / 4)``; the fiber angle ``theta`` is measured
    from ``d_x``.  With the orthonormal coframe ``(alpha, beta, psi)`` of the
    Sasaki metric (``psi`` the connection form plus ``d theta``) the contact
    metric structure is ``eta = alpha / 2``, ``g = (alpha^2 + beta^2 + psi^2) / 4``.
    """
    if not -4.0 <= c <= 8.0:
        raise ParamOutOfRange(f"unit_tangent_surface: c={c} outside [-4, 8]")

    M = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])

    def coframe(p):
        x, y, th = p
        q = 1.0 + c * (x * x + y * y) / 4.0
        lam = 1.0 / q
        lx, ly = -c * x / 2.0 / q, -c * y / 2.0 / q  # gradient of log(lambda)
        ct, st = math.cos(th), math.sin(th)
        return np.array([[lam * ct, lam * st, 0.0], [-lam * st, lam * ct, 0.0], [-ly, lx, 1.0]])

    def metric(p):
        T = coframe(p)
        return 0.25 * T.T @ T

    def xi(p):
        return 2.0 * np.linalg.inv(coframe(p))[:, 0]

    def eta(p):
        return 0.5 * coframe(p)[0]

    def phi(p):
        T = coframe(p)
        return np.linalg.solve(T, M @ T)

    name = f"unit_tangent_surface(c={c:g})"
    # the bundle is homogeneous; sampling within a fraction of the curvature radius keeps FD error uniform in c
    r = 0.25 / math.sqrt(max(1.0, abs(c)))
    chart = Chart(3, metric, name, box=((-r, r), (-r, r), (0.0, 2 * math.pi)), coords=("x", "y", "theta"))
    return AlmostContactStructure(chart, _handle((1, 0), xi, "xi"), _handle((0, 1), eta, "eta"),
                                  _handle((1, 1), phi, "phi"), name)


def _warp_callable(f, variables):
    if callable(f):
        return f
    from .dsl import compile_function

    fn = compile_function(str(f), variables)
    return lambda q: fn(*np.atleast_1d(q))


def warped_base_line(f: Union[str, Callable] = "1 + x^2/4"):
    """Flat Kähler plane warped with a line: ``g = dx^2 + dy^2 + f(x, y)^2 dt^2``."""
    spec = WarpedProductSpec(BASE_TIMES_LINE, flat_kahler_R2(), _warp_callable(f, ("x", "y")),
                             name=f"warped_base_line(f={f})" if isinstance(f, str) else "warped_base_line")
    return spec


def warped_line_fiber(f: Union[str, Callable] = "1 + t^2/4", fiber: str = "flat_kahler_R2"):
    """A line warped with an almost Hermitian fiber: ``g = dt^2 + f(t)^2 g_fiber``."""
    fibers = {"flat_kahler_R2": flat_kahler_R2, "perturbed_hermitian_R4": perturbed_hermitian_R4}
    if fiber not in fibers:
        raise ParamOutOfRange(f"warped_line_fiber: unknown fiber {fiber!r} (choose from {sorted(fibers)})")
    label = f"warped_line_fiber(f={f}, fiber={fiber})" if isinstance(f, str) else f"warped_line_fiber({fiber})"
    return WarpedProductSpec(LINE_TIMES_FIBER, fibers[fiber](), _warp_callable(f, ("t",)), name=label)


def kenmotsu():
    """``R x_{e^t}`` flat Kähler plane."""
    return WarpedProductSpec(LINE_TIMES_FIBER, flat_kahler_R2(), lambda t: math.exp(float(np.ravel(t)[0])),
                             name="kenmotsu")


def heisenberg_submersion():
    """The Sasakian R^3 over the flat Kähler plane with metric ``(dx^2 + dy^2) / 4``."""
    total = get_entry("sasakian_R3")
    base = flat_kahler_R2(scale=0.25, J=np.array([[0.0, 1.0], [-1.0, 0.0]]))
    dpi = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    setup = SubmersionSetup(total, base, lambda p: np.asarray(p, float)[:2], lambda p: dpi, "heisenberg_submersion")
    return setup


def round_sphere():
    """Unit 2-sphere in polar coordinates ``(theta, phi)``: ``g = diag(1, sin^2 theta)``."""
    return Chart(2, lambda p: np.diag([1.0, math.sin(p[0]) ** 2]), "round_sphere",
                 box=((0.3, math.pi - 0.3), (0.0, 2 * math.pi)), coords=("theta", "phi"))


# ---------------------------------------------------------------------------
# perturbation

def _bump(r: float) -> float:
    if r >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - r * r))


def perturb(s: AlmostContactStructure, epsilon: float, seed: int = 42) -> AlmostContactStructure:
    """Rotate the whole structure by a compactly supported field of isometries.

    At each point the isometry ``Q`` rotates the plane spanned by ``xi`` and a
    seeded unit vector ``w`` of D through the angle ``epsilon * bump``.  The
    new structure is ``(Q xi, g Q xi, Q phi Q^-1)``; since Q is g-orthogonal
    the algebraic axioms hold exactly.
    """
    if epsilon == 0:
        return s
    if not 0 < epsilon < 0.1:
        raise EpsilonOutOfRange(f"epsilon={epsilon} outside (0, 0.1)")
    chart = s.chart
    if chart.box is None:
        raise ValueError("perturb needs a chart with a sampling box")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    center = rng.uniform(lo, hi)
    v0 = rng.normal(size=chart.dim)
    radius = 2.0 * float(np.linalg.norm(hi - lo))

    def rotation(p):
        g = np.asarray(chart.metric(p), float)
        xi, eta = s.xi(p), s.eta(p)
        w = v0 - (eta @ v0) * xi
        w = w / math.sqrt(w @ g @ w)
        A = np.outer(xi, g @ w) - np.outer(w, g @ xi)
        th = epsilon * _bump(float(np.linalg.norm(p - center)) / radius)
        return np.eye(chart.dim) + math.sin(th) * A + (1.0 - math.cos(th)) * A @ A, g

    def xi(p):
        Q, _ = rotation(p)
        return Q @ s.xi(p)

    def eta(p):
        Q, g = rotation(p)
        return g @ (Q @ s.xi(p))

    def phi(p):
        Q, g = rotation(p)
        Qinv = np.linalg.solve(g, Q.T @ g)
        return Q @ s.phi(p) @ Qinv

    out = AlmostContactStructure(chart, _handle((1, 0), xi, "xi"), _handle((0, 1), eta, "eta"),
                                 _handle((1, 1), phi, "phi"), f"{s.name}~perturbed(eps={epsilon:g}, seed={seed})")
    validate_structure(out, chart.sample_points(GATE_POINTS, GATE_SEED, DEFAULT_FD))
    return out


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class CatalogEntry:
    key: str
    kind: str  # contact | hermitian | warped | submersion | chart
    builder: Callable
    params: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    description: str = ""


def _coerce(default, value):
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


ENTRIES = {
    e.key: e
    for e in [
        CatalogEntry("euclidean", "contact", euclidean, {},
                     {"contact_metric": False, "K_contact": False, "H_contact": True, "harmonic": True},
                     "flat R^3 with constant structure tensors"),
        CatalogEntry("sasakian_R3", "contact", lambda: sasakian_R2n1(1), {},
                     {"contact_metric": True, "K_contact": True, "H_contact": True, "harmonic": True},
                     "standard Sasakian structure on R^3"),
        CatalogEntry("sasakian_R2n1", "contact", sasakian_R2n1, {"n": 2},
                     {"contact_metric": True, "K_contact": True, "H_contact": True, "harmonic": True},
                     "standard Sasakian structure on R^{2n+1}"),
        CatalogEntry("unit_tangent_surface", "contact", unit_tangent_surface, {"c": 1.0},
                     {"contact_metric": True, "H_contact": True, "harmonic": True},
                     "unit tangent bundle of a surface of constant curvature c"),
        CatalogEntry("warped_base_line", "warped", warped_base_line, {"f": "1 + x^2/4"},
                     {"contact_metric": False, "H_contact": True, "harmonic": True},
                     "flat Kähler plane x_f R, f a positive function of (x, y)"),
        CatalogEntry("kenmotsu", "warped", kenmotsu, {},
                     {"contact_metric": False, "H_contact": True, "harmonic": True},
                     "R x_{e^t} flat Kähler plane"),
        CatalogEntry("warped_line_fiber", "warped", warped_line_fiber, {"f": "1 + t^2/4", "fiber": "flat_kahler_R2"},
                     {"contact_metric": False, "H_contact": True},
                     "R x_f fiber, fiber one of flat_kahler_R2 | perturbed_hermitian_R4"),
        CatalogEntry("heisenberg_submersion", "submersion", heisenberg_submersion, {},
                     {"contact_metric": True, "K_contact": True, "harmonic": True},
                     "sasakian_R3 over the flat Kähler plane, (x, y, z) -> (x, y)"),
        CatalogEntry("flat_kahler_R2", "hermitian", flat_kahler_R2, {}, {"harmonic": True}, "flat Kähler plane"),
        CatalogEntry("perturbed_hermitian_R4", "hermitian", perturbed_hermitian_R4, {"strength": 0.4},
                     {"harmonic": False}, "flat R^4 with a spatially rotating complex structure"),
        CatalogEntry("round_sphere", "chart", round_sphere, {}, {}, "unit 2-sphere, polar coordinates"),
    ]
}

_BUILT: dict = {}


def _normalize_params(entry: CatalogEntry, params: dict) -> tuple:
    unknown = set(params) - set(entry.params)
    if unknown:
        raise ParamOutOfRange(f"{entry.key}: unknown parameter(s) {sorted(unknown)}; accepts {sorted(entry.params)}")
    merged = dict(entry.params)
    for k, v in params.items():
        try:
            merged[k] = _coerce(entry.params[k], v)
        except (TypeError, ValueError) as exc:
            raise ParamOutOfRange(f"{entry.key}: bad value {v!r} for {k}") from exc
    return tuple(sorted(merged.items()))


def get_entry(key: str, **params):
    """Build (or fetch the cached) catalog object for ``key``."""
    if key not in ENTRIES:
        raise UnknownEntry(f"unknown catalog entry {key!r}; known: {', '.join(sorted(ENTRIES))}")
    entry = ENTRIES[key]
    norm_params = _normalize_params(entry, params)
    cache_key = (key, norm_params)
    if cache_key not in _BUILT:
        obj = entry.builder(**dict(norm_params))
        _gate(entry, obj)
        _BUILT[cache_key] = obj
    return _BUILT[cache_key]


def contact_structure_of(obj) -> Optional[AlmostContactStructure]:
    """The almost contact structure carried by a catalog object, if any."""
    if isinstance(obj, AlmostContactStructure):
        return obj
    if isinstance(obj, WarpedProductSpec):
        return obj.structure
    if isinstance(obj, SubmersionSetup):
        return obj.total
    return None


def _gate(entry: CatalogEntry, obj) -> None:
    if entry.kind == "chart":
        return
    if entry.kind == "hermitian":
        validate_hermitian(obj, obj.chart.sample_points(GATE_POINTS, GATE_SEED, DEFAULT_FD))
        return
    s = contact_structure_of(obj)
    pts = s.chart.sample_points(GATE_POINTS, GATE_SEED, DEFAULT_FD)
    validate_structure(s, pts)
    if entry.kind == "submersion":
        obj.validate(pts)
