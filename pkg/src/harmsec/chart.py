"""Finite-difference tensor calculus on a single coordinate chart.

Component arrays are stored row-major with contravariant indices first,
then covariant indices, then any derivative indices in the order they were
taken.  Conventions:

* ``gamma[a, i, j]`` is the Christoffel symbol with ``nabla_{d_i} d_j = gamma[a, i, j] d_a``.
* ``riemann[a, b, c, d]`` is the ``d_a`` component of ``R(d_c, d_d) d_b`` where
  ``R(X, Y) = nabla^2_{X,Y} - nabla^2_{Y,X}``.
* for a tensor jet ``T`` the covariant derivative ``nabla T`` carries the
  direction index last, and ``nabla nabla T[..., k, l]`` is
  ``nabla^2_{d_l, d_k} T`` (outer direction last).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainViolation, SingularMetric
from .jets import Jet, fd_jet, jeinsum, jinv

_LETTERS = "abcdefgh"


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-4
    order: int = 2
    tolerance_algebraic: float = 1e-12
    tolerance_d1: float = 1e-7
    tolerance_d2: float = 1e-5

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if not 0 < self.tolerance_algebraic <= self.tolerance_d1 <= self.tolerance_d2:
            raise ValueError("tolerances must be positive and ordered algebraic <= d1 <= d2")

    def tolerance(self, cls: str) -> float:
        return {"algebraic": self.tolerance_algebraic, "d1": self.tolerance_d1, "d2": self.tolerance_d2}[cls]

    def scaled(self, k: float) -> "FDConfig":
        """Same scheme with every tolerance class multiplied by ``k``."""
        return replace(
            self,
            tolerance_algebraic=self.tolerance_algebraic * k,
            tolerance_d1=self.tolerance_d1 * k,
            tolerance_d2=self.tolerance_d2 * k,
        )

    @property
    def margin(self) -> float:
        return 4 * self.step


@dataclass(eq=False)
class Chart:
    """A coordinate domain carrying metric components ``g_ij``.

    ``box`` is the sampling sub-box, one ``(lo, hi)`` pair per coordinate;
    ``domain`` defaults to membership in that box.
    """

    dim: int
    metric: Callable[[np.ndarray], np.ndarray]
    name: str = "chart"
    box: Optional[Sequence[tuple]] = None
    domain: Optional[Callable[[np.ndarray], bool]] = None
    coords: Optional[Sequence[str]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.box is not None:
            self.box = tuple((float(lo), float(hi)) for lo, hi in self.box)
            if len(self.box) != self.dim:
                raise ValueError("box must give one interval per coordinate")
        if self.coords is None:
            self.coords = tuple(f"x{i + 1}" for i in range(self.dim))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if self.domain is not None:
            return bool(self.domain(p))
        if self.box is None:
            return True
        return all(lo <= c <= hi for c, (lo, hi) in zip(p, self.box))

    def check_stencil(self, p, fd: FDConfig) -> None:
        """Raise unless ``p`` sits at least ``4 * step`` inside the domain."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DomainViolation(f"point {p} does not have {self.dim} coordinates")
        probes = [p]
        for k in range(self.dim):
            for s in (-1.0, 1.0):
                q = p.copy()
                q[k] += s * fd.margin
                probes.append(q)
        for q in probes:
            if not self.contains(q):
                raise DomainViolation(f"{self.name}: stencil around {tuple(p)} leaves the domain")

    def sample_points(self, count: int, seed: int, fd: FDConfig) -> np.ndarray:
        """Seeded uniform points in the sampling box, kept off its boundary."""
        if self.box is None:
            raise ValueError(f"{self.name} has no sampling box")
        rng = np.random.default_rng(seed)
        lo = np.array([b[0] for b in self.box]) + fd.margin
        hi = np.array([b[1] for b in self.box]) - fd.margin
        out = []
        while len(out) < count:
            q = rng.uniform(lo, hi)
            try:
                self.check_stencil(q, fd)
            except DomainViolation:
                continue
            out.append(q)
        return np.array(out).reshape(count, self.dim)


@dataclass(eq=False)
class TensorFieldHandle:
    valence: tuple
    eval: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @property
    def kinds(self) -> str:
        r, s = self.valence
        return "u" * r + "l" * s

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(p, dtype=float)), dtype=float)


def field_jet(T: Callable, p, fd: FDConfig, order: int = 2) -> Jet:
    return fd_jet(T, p, fd.step, fd.order, jet_order=order)


def covd(T: Jet, kinds: str, gamma: Jet) -> Jet:
    """Levi-Civita covariant derivative of a component jet.

    ``kinds`` gives one character per index of ``T``: ``u`` (contravariant),
    ``l`` (covariant) or ``x`` (a label that is not transformed, e.g. the
    column index of a stack of vector fields).
    """
    if len(kinds) != T.val.ndim:
        raise ValueError(f"kinds {kinds!r} do not match tensor rank {T.val.ndim}")
    idx = _LETTERS[: len(kinds)]
    out = T.D()
    for m, kind in enumerate(kinds):
        if kind == "x":
            continue
        src = idx[:m] + "m" + idx[m + 1:]
        if kind == "u":
            term = jeinsum(f"{idx[m]}km,{src}->{idx}k", gamma, T)
            out = out + term
        else:
            term = jeinsum(f"mk{idx[m]},{src}->{idx}k", gamma, T)
            out = out - term
    return out


class LocalGeometry:
    """Metric jets and Levi-Civita data of a chart at one point."""

    def __init__(self, chart: Chart, p, fd: FDConfig):
        self.chart = chart
        self.p = np.asarray(p, dtype=float)
        self.fd = fd
        self.n = chart.dim
        chart.check_stencil(self.p, fd)
        self.G = field_jet(chart.metric, self.p, fd)
        try:
            np.linalg.cholesky(self.G.val)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric(f"{chart.name}: metric not positive-definite at {tuple(self.p)}") from exc

    def jet(self, fn: Callable, order: int = 2) -> Jet:
        return field_jet(fn, self.p, self.fd, order)

    @functools.cached_property
    def g(self) -> np.ndarray:
        return self.G.val

    @functools.cached_property
    def Ginv(self) -> Jet:
        return jinv(self.G)

    @property
    def ginv(self) -> np.ndarray:
        return self.Ginv.val

    @functools.cached_property
    def gamma(self) -> Jet:
        dG = self.G.D()  # dG[a, b, c] = d_c g_ab
        s = jeinsum("jli->lij", dG) + jeinsum("ilj->lij", dG) - jeinsum("ijl->lij", dG)
        return 0.5 * jeinsum("kl,lij->kij", self.Ginv, s)

    def covd(self, T: Jet, kinds: str) -> Jet:
        return covd(T, kinds, self.gamma)

    @functools.cached_property
    def riemann(self) -> np.ndarray:
        dgam = self.gamma.D().val  # dgam[a, i, j, k] = d_k gamma[a, i, j]
        gam = self.gamma.val
        return (
            np.einsum("adbc->abcd", dgam)
            - np.einsum("acbd->abcd", dgam)
            + np.einsum("ace,edb->abcd", gam, gam)
            - np.einsum("ade,ecb->abcd", gam, gam)
        )

    @functools.cached_property
    def ricci(self) -> np.ndarray:
        """Ricci form ``Ric(X, Y) = tr(Z -> R(Z, X) Y)``."""
        return np.einsum("ayax->xy", self.riemann)

    def inner(self, u, v) -> float:
        return float(u @ self.g @ v)

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))


@functools.lru_cache(maxsize=512)
def _local(chart: Chart, p: tuple, fd: FDConfig) -> LocalGeometry:
    return LocalGeometry(chart, p, fd)


def local_geometry(chart: Chart, p, fd: FDConfig) -> LocalGeometry:
    return _local(chart, tuple(float(c) for c in np.asarray(p, dtype=float)), fd)


# ---------------------------------------------------------------------------
# public operations

DEFAULT_FD = FDConfig()


def metric_inverse(chart: Chart, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    g = np.asarray(chart.metric(np.asarray(p, dtype=float)), dtype=float)
    if not np.allclose(g, g.T, rtol=0, atol=1e-14 * max(1.0, np.abs(g).max())):
        raise SingularMetric(f"{chart.name}: metric not symmetric at {tuple(p)}")
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(f"{chart.name}: metric not positive-definite at {tuple(p)}") from exc
    Linv = np.linalg.inv(L)
    return Linv.T @ Linv


def christoffel(chart: Chart, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    return local_geometry(chart, p, fd).gamma.val


def covariant_derivative(chart: Chart, T: TensorFieldHandle, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    geo = local_geometry(chart, p, fd)
    return geo.covd(geo.jet(T, 1), T.kinds).val


def _second_covd(geo: LocalGeometry, T: TensorFieldHandle) -> np.ndarray:
    kinds = T.kinds
    first = geo.covd(geo.jet(T, 2), kinds)
    return geo.covd(first, kinds + "l").val


def second_covariant_derivative(chart: Chart, T: TensorFieldHandle, X, Y, p,
                                fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``nabla^2_{X,Y} T = nabla_X nabla_Y T - nabla_{nabla_X Y} T`` with X, Y
    taken as constant-coefficient coordinate fields."""
    geo = local_geometry(chart, p, fd)
    return np.einsum("...kl,k,l->...", _second_covd(geo, T), np.asarray(Y, float), np.asarray(X, float))


def riemann(chart: Chart, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    return local_geometry(chart, p, fd).riemann


def curvature_apply(chart: Chart, X, Y, Z, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Components of ``R(X, Y) Z``."""
    return np.einsum("abcd,b,c,d->a", riemann(chart, p, fd), Z, X, Y)


def sectional_curvature(chart: Chart, X, Y, p, fd: FDConfig = DEFAULT_FD) -> float:
    geo = local_geometry(chart, p, fd)
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    num = geo.inner(curvature_apply(chart, X, Y, Y, p, fd), X)
    den = geo.inner(X, X) * geo.inner(Y, Y) - geo.inner(X, Y) ** 2
    return num / den


def ricci_operator(chart: Chart, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    geo = local_geometry(chart, p, fd)
    return geo.ginv @ geo.ricci


def rough_laplacian(chart: Chart, T: TensorFieldHandle, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    geo = local_geometry(chart, p, fd)
    return -np.einsum("...kl,kl->...", _second_covd(geo, T), geo.ginv)


def gradient(chart: Chart, f: Callable, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    geo = local_geometry(chart, p, fd)
    df = geo.jet(lambda q: np.asarray(f(q), dtype=float), 1).d1
    return geo.ginv @ df


def lie_derivative_11(chart: Chart, X: TensorFieldHandle, T: TensorFieldHandle, p,
                      fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``(L_X T)(Y) = [X, T Y] - T [X, Y]`` in coordinate components."""
    geo = local_geometry(chart, p, fd)
    return lie_11(geo.jet(X, 1), geo.jet(T, 1)).val


def lie_11(X: Jet, T: Jet) -> Jet:
    dX, dT = X.D(), T.D()
    return (
        jeinsum("c,abc->ab", X, dT)
        - jeinsum("cb,ac->ab", T, dX)
        + jeinsum("ac,cb->ab", T, dX)
    )


def exterior_derivative(chart: Chart, omega: TensorFieldHandle, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Unnormalized exterior derivative of a 1- or 2-form.

    ``d omega(X, Y) = nabla_X omega(Y) - nabla_Y omega(X)`` and
    ``d Phi(X, Y, Z) = nabla_X Phi(Y, Z) + nabla_Y Phi(Z, X) + nabla_Z Phi(X, Y)``.
    """
    geo = local_geometry(chart, p, fd)
    if omega.valence == (0, 1):
        return d_one_form(geo, geo.jet(omega, 1))
    if omega.valence == (0, 2):
        return d_two_form(geo, geo.jet(omega, 1))
    raise ValueError("exterior_derivative supports 1- and 2-forms only")


def d_one_form(geo: LocalGeometry, w: Jet) -> np.ndarray:
    nw = geo.covd(w, "l").val  # nw[j, i] = (nabla_i w)_j
    return nw.T - nw


def d_two_form(geo: LocalGeometry, w: Jet) -> np.ndarray:
    nw = geo.covd(w, "ll").val  # nw[b, c, a] = (nabla_a w)_bc
    return (
        np.einsum("bca->abc", nw)
        + np.einsum("cab->abc", nw)
        + np.einsum("abc->abc", nw)
    )
