"""Almost contact metric structures (phi, xi, eta, g) and the hyperplane bundle D.

Operators on D are stored as ambient (1,1) arrays extended by zero along xi,
so ``J`` is simply ``phi`` and sections of ``End(D)`` satisfy ``A = P A P``
with ``P = I - xi (x) eta`` the orthogonal projector onto D.

Normalization: a structure is *contact metric* when
``Phi(X, Y) = g(X, phi Y)`` equals ``1/2 (X eta(Y) - Y eta(X) - eta([X, Y]))``.
The exterior derivative itself (:func:`harmsec.chart.exterior_derivative`)
is unnormalized, hence the factor 1/2 in :func:`contact_defect`.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chart import DEFAULT_FD, Chart, FDConfig, LocalGeometry, TensorFieldHandle, d_one_form, d_two_form, lie_11, local_geometry
from .errors import AxiomViolation, NotInD
from .jets import Jet, jeinsum


@dataclass(eq=False)
class AlmostContactStructure:
    chart: Chart
    xi: TensorFieldHandle
    eta: TensorFieldHandle
    phi: TensorFieldHandle
    name: str = "structure"

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def n(self) -> int:
        """Half the rank of D (the ``n`` in ``dim = 2n + 1``)."""
        return (self.chart.dim - 1) // 2


@dataclass
class StructureClassification:
    is_contact_metric: Optional[bool] = None
    is_K_contact: Optional[bool] = None
    is_H_contact: Optional[bool] = None
    residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "is_contact_metric": self.is_contact_metric,
            "is_K_contact": self.is_K_contact,
            "is_H_contact": self.is_H_contact,
            "residuals": dict(self.residuals),
        }


def norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


class ContactLocal:
    """Jets of (xi, eta, phi) at a point and every derived tensor, lazily."""

    def __init__(self, s: AlmostContactStructure, p, fd: FDConfig):
        self.s = s
        self.geo: LocalGeometry = local_geometry(s.chart, p, fd)
        self.fd = fd
        self.p = self.geo.p
        self.dim = s.chart.dim
        self.n = s.n

    # -- base jets -----------------------------------------------------------
    @functools.cached_property
    def XI(self) -> Jet:
        return self.geo.jet(self.s.xi)

    @functools.cached_property
    def ETA(self) -> Jet:
        return self.geo.jet(self.s.eta)

    @functools.cached_property
    def PHI(self) -> Jet:
        return self.geo.jet(self.s.phi)

    @property
    def xi(self) -> np.ndarray:
        return self.XI.val

    @property
    def eta(self) -> np.ndarray:
        return self.ETA.val

    @property
    def phi(self) -> np.ndarray:
        return self.PHI.val

    @property
    def g(self) -> np.ndarray:
        return self.geo.g

    @property
    def ginv(self) -> np.ndarray:
        return self.geo.ginv

    @functools.cached_property
    def P(self) -> Jet:
        return -jeinsum("a,b->ab", self.XI, self.ETA) + np.eye(self.dim)

    @property
    def proj(self) -> np.ndarray:
        return self.P.val

    @functools.cached_property
    def dtrace(self) -> np.ndarray:
        """``sum_i F_i (x) F_i`` over an orthonormal frame of D."""
        return self.ginv - np.outer(self.xi, self.xi)

    # -- Levi-Civita data ----------------------------------------------------
    @functools.cached_property
    def nabla_xi(self) -> Jet:
        return self.geo.covd(self.XI, "u")  # [a, k]

    @functools.cached_property
    def nabla2_xi(self) -> np.ndarray:
        return self.geo.covd(self.nabla_xi, "ul").val  # [a, k, l]

    @functools.cached_property
    def nabla_phi(self) -> Jet:
        return self.geo.covd(self.PHI, "ul")  # [a, b, k]

    @functools.cached_property
    def rough_laplacian_xi(self) -> np.ndarray:
        return -np.einsum("akl,kl->a", self.nabla2_xi, self.ginv)

    @functools.cached_property
    def energy_density_xi(self) -> float:
        nx = self.nabla_xi.val
        return float(np.einsum("ak,bl,ab,kl->", nx, nx, self.g, self.ginv))

    # -- the hyperplane bundle -----------------------------------------------
    @functools.cached_property
    def B(self) -> Jet:
        """``bar nabla J`` via ``P (nabla phi) P``; ``B[a, b, k] = (bar nabla_k J)^a_b``."""
        return jeinsum("ac,cdk,db->abk", self.P, self.nabla_phi, self.P)

    @functools.cached_property
    def B_direct(self) -> np.ndarray:
        """``bar nabla J`` from the projected connection acting on D-sections.

        The D-sections are the columns of P; ``bar nabla_X (J Y) - J bar nabla_X Y``.
        """
        PJ = jeinsum("ac,cb->ab", self.PHI, self.P)
        dJY = self.geo.covd(PJ, "ux").val
        dY = self.geo.covd(self.P, "ux").val
        P, phi = self.proj, self.phi
        return np.einsum("ac,cbk->abk", P, dJY) - np.einsum("ac,cd,dbk->abk", phi, P, dY)

    @functools.cached_property
    def bar2_J(self) -> np.ndarray:
        """``bar nabla^2 J[a, b, k, l] = (bar nabla^2_{d_l, d_k} J)^a_b``."""
        nB = self.geo.covd(self.B, "ull").val
        P = self.proj
        return np.einsum("ac,cdkl,db->abkl", P, nB, P)

    @functools.cached_property
    def bar_laplacian_J(self) -> np.ndarray:
        return -np.einsum("abkl,kl->ab", self.bar2_J, self.ginv)

    @functools.cached_property
    def tau_J(self) -> np.ndarray:
        L = self.bar_laplacian_J
        return L @ self.phi - self.phi @ L

    @functools.cached_property
    def bar_R(self) -> np.ndarray:
        """Curvature of (D, bar nabla): ``bar_R[a, b, c, d]`` is ``R(d_c, d_d)(P d_b)``."""
        C = jeinsum("ac,cbk->abk", self.P, self.geo.covd(self.P, "ux"))
        nC = self.geo.covd(C, "uxl").val
        second = np.einsum("ac,cbkl->abkl", self.proj, nC)
        return np.einsum("abdc->abcd", second) - second

    @functools.cached_property
    def delta_bar_J(self) -> np.ndarray:
        return -np.einsum("abk,bk->a", self.B.val, self.dtrace)

    @functools.cached_property
    def T_phi(self) -> np.ndarray:
        Pnx = self.proj @ self.nabla_xi.val
        return np.einsum("abi,bj,ij->a", self.B.val, Pnx, self.ginv)

    @functools.cached_property
    def tau_xi(self) -> np.ndarray:
        return self.rough_laplacian_xi - self.energy_density_xi * self.xi

    @functools.cached_property
    def first_equation(self) -> np.ndarray:
        return self.tau_xi + 0.5 * self.phi @ self.T_phi

    # -- h and friends -------------------------------------------------------
    @functools.cached_property
    def H(self) -> Jet:
        return 0.5 * lie_11(self.XI, self.PHI)

    @property
    def h(self) -> np.ndarray:
        return self.H.val

    @functools.cached_property
    def nabla_h(self) -> np.ndarray:
        return self.geo.covd(self.H, "ul").val  # [a, b, k]

    @functools.cached_property
    def delta_h(self) -> np.ndarray:
        return -np.einsum("abk,bk->a", self.nabla_h, self.ginv)

    @functools.cached_property
    def PHI_FORM(self) -> Jet:
        return jeinsum("ac,cb->ab", self.geo.G, self.PHI)

    @functools.cached_property
    def Phi(self) -> np.ndarray:
        return self.PHI_FORM.val

    @functools.cached_property
    def d_eta(self) -> np.ndarray:
        return d_one_form(self.geo, self.ETA)

    @functools.cached_property
    def d_Phi(self) -> np.ndarray:
        return d_two_form(self.geo, self.PHI_FORM)

    # -- curvature -----------------------------------------------------------
    @property
    def R(self) -> np.ndarray:
        return self.geo.riemann

    @functools.cached_property
    def rho_star(self) -> np.ndarray:
        """``rho*(X, Y) = g(R(X, E_i) phi E_i, phi Y)``."""
        return np.einsum("abxi,bj,ij,ae,ey->xy", self.R, self.phi, self.ginv, self.g, self.phi)

    @functools.cached_property
    def rho_star_bar(self) -> np.ndarray:
        """``bar rho*(X, Y) = g(bar R(X, F_i) J F_i, J Y)`` (use with X, Y in D)."""
        return np.einsum("abxi,bj,ij,ae,ey->xy", self.bar_R, self.phi, self.dtrace, self.g, self.phi)

    @functools.cached_property
    def ricci_operator(self) -> np.ndarray:
        return self.ginv @ self.geo.ricci

    def restrict(self, form: np.ndarray) -> np.ndarray:
        """Restrict a covariant 2-tensor to D x D."""
        P = self.proj
        return P.T @ form @ P

    def d_frame(self) -> np.ndarray:
        """Deterministic g-orthonormal frame of D, as columns.

        Gram-Schmidt on projected coordinate vectors, largest norm first,
        ties broken by index.
        """
        P, g = self.proj, self.g
        cand = [P[:, i] for i in range(self.dim)]
        norms = [np.sqrt(c @ g @ c) for c in cand]
        order = sorted(range(self.dim), key=lambda i: (-round(norms[i], 12), i))
        frame = []
        for i in order:
            v = cand[i].copy()
            for f in frame:
                v = v - (f @ g @ v) * f
            nv = np.sqrt(max(v @ g @ v, 0.0))
            if nv > 1e-8:
                frame.append(v / nv)
            if len(frame) == 2 * self.n:
                break
        return np.array(frame).T


def contact_local(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> ContactLocal:
    return _contact_local(s, tuple(float(c) for c in np.asarray(p, dtype=float)), fd)


@functools.lru_cache(maxsize=1024)
def _contact_local(s, p, fd):
    return ContactLocal(s, p, fd)


# ---------------------------------------------------------------------------
# operations

AXIOMS = ("phi_squared", "eta_xi", "eta_dual", "compatible_metric")


def axiom_residuals(s: AlmostContactStructure, p) -> dict:
    p = np.asarray(p, dtype=float)
    g = np.asarray(s.chart.metric(p), dtype=float)
    xi, eta, phi = s.xi(p), s.eta(p), s.phi(p)
    I = np.eye(s.dim)
    return {
        "phi_squared": norm(phi @ phi + I - np.outer(xi, eta)),
        "eta_xi": abs(float(eta @ xi) - 1.0),
        "eta_dual": norm(eta - g @ xi),
        "compatible_metric": norm(phi.T @ g @ phi - g + np.outer(eta, eta)),
    }


def validate_structure(s: AlmostContactStructure, points, fd: FDConfig = DEFAULT_FD) -> StructureClassification:
    """Check the algebraic axioms at every point; raise on the first failure."""
    if s.dim % 2 != 1:
        raise AxiomViolation("odd_dimension", np.zeros(s.dim), float(s.dim))
    worst = dict.fromkeys(AXIOMS, 0.0)
    tol = fd.tolerance_algebraic
    for p in points:
        res = axiom_residuals(s, p)
        for ax in AXIOMS:
            if not res[ax] < tol:
                raise AxiomViolation(ax, p, res[ax])
            worst[ax] = max(worst[ax], res[ax])
    return StructureClassification(residuals=worst)


def fundamental_two_form(s: AlmostContactStructure, p) -> np.ndarray:
    """``Phi(X, Y) = g(X, phi Y)``."""
    p = np.asarray(p, dtype=float)
    return np.asarray(s.chart.metric(p), dtype=float) @ s.phi(p)


def contact_defect(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    c = contact_local(s, p, fd)
    return c.Phi - 0.5 * c.d_eta


def h_tensor(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    return contact_local(s, p, fd).h


def d_project(s: AlmostContactStructure, X, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    return X - float(s.eta(p) @ X) * s.xi(p)


def _require_D(s, Y, p, fd, what="vector"):
    Y = np.asarray(Y, dtype=float)
    e = abs(float(s.eta(np.asarray(p, float)) @ Y))
    if e > fd.tolerance_algebraic * max(1.0, norm(Y)) * 100:
        raise NotInD(f"{what} has eta-component {e:.3e}")
    return Y


def bar_derivative_of_J(s: AlmostContactStructure, X, Y, p, fd: FDConfig = DEFAULT_FD,
                        route: str = "formula") -> np.ndarray:
    """``(bar nabla_X J)(Y)`` for Y in D.

    ``route="formula"`` uses ``bar nabla J = nabla phi - <nabla phi, xi> xi``;
    ``route="direct"`` differentiates ``J Y`` and ``Y`` with the projected
    connection.
    """
    Y = _require_D(s, Y, p, fd)
    c = contact_local(s, p, fd)
    B = c.B.val if route == "formula" else c.B_direct
    return np.einsum("abk,b,k->a", B, Y, np.asarray(X, float))


def bar_curvature(s: AlmostContactStructure, X, Y, Z, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    for v, nm in ((X, "X"), (Y, "Y"), (Z, "Z")):
        _require_D(s, v, p, fd, nm)
    c = contact_local(s, p, fd)
    return np.einsum("abcd,b,c,d->a", c.bar_R, Z, X, Y)


def r_tensor(u, v, w, g) -> np.ndarray:
    """``r(u, v) w = <v, w> u - <u, w> v``."""
    u, v, w, g = (np.asarray(a, dtype=float) for a in (u, v, w, g))
    return (v @ g @ w) * u - (u @ g @ w) * v


def r_operator(u, v, g) -> np.ndarray:
    """Matrix of ``w -> r(u, v) w``."""
    u, v, g = (np.asarray(a, dtype=float) for a in (u, v, g))
    return np.outer(u, g @ v) - np.outer(v, g @ u)


def bar_delta_J(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    return contact_local(s, p, fd).delta_bar_J


def classify(s: AlmostContactStructure, points, fd: FDConfig = DEFAULT_FD) -> StructureClassification:
    cm = kc = hc = ric = 0.0
    for p in points:
        c = contact_local(s, p, fd)
        cm = max(cm, norm(c.Phi - 0.5 * c.d_eta))
        kc = max(kc, norm(c.h))
        hc = max(hc, norm(c.tau_xi))
        Qxi = c.ricci_operator @ c.xi
        ric = max(ric, norm(Qxi - (c.xi @ c.g @ Qxi) * c.xi))
    is_cm = cm < fd.tolerance_d1
    return StructureClassification(
        is_contact_metric=is_cm,
        is_K_contact=is_cm and kc < fd.tolerance_d1,
        is_H_contact=hc < fd.tolerance_d2,
        residuals={
            "contact_metric": cm,
            "h_norm": kc,
            "tau_xi": hc,
            "ricci_eigenvector": ric,
        },
    )
