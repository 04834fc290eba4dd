"""Tension fields, star-Ricci curvatures and the harmonic section equations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chart import DEFAULT_FD, FDConfig
from .contact import AlmostContactStructure, _require_D, classify, contact_local, norm, r_operator
from .errors import NotContactMetric


def tau_xi(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``nabla* nabla xi - |nabla xi|^2 xi``."""
    return contact_local(s, p, fd).tau_xi


def T_phi(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Trace of ``bar nabla J`` against the D-part of ``nabla xi``."""
    return contact_local(s, p, fd).T_phi


def _require_cm(s, p, fd, what):
    c = contact_local(s, p, fd)
    if not norm(c.Phi - 0.5 * c.d_eta) < fd.tolerance_d1:
        raise NotContactMetric(f"{what} needs a contact metric structure ({s.name} is not)")
    return c


def delta_h(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Codifferential of h viewed as a TM-valued 1-form."""
    return _require_cm(s, p, fd, "delta_h").delta_h


def tau_J(s: AlmostContactStructure, p, fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``[bar nabla* bar nabla J, J]`` as an endomorphism of D (zero on xi)."""
    return contact_local(s, p, fd).tau_J


def star_ricci(s: AlmostContactStructure, X, Y, p, fd: FDConfig = DEFAULT_FD) -> float:
    return float(np.asarray(X, float) @ contact_local(s, p, fd).rho_star @ np.asarray(Y, float))


def star_ricci_bar(s: AlmostContactStructure, X, Y, p, fd: FDConfig = DEFAULT_FD) -> float:
    X = _require_D(s, X, p, fd, "X")
    Y = _require_D(s, Y, p, fd, "Y")
    return float(X @ contact_local(s, p, fd).rho_star_bar @ Y)


def symmetry_defect(form: np.ndarray, P: np.ndarray) -> float:
    """``|form - form^T|`` restricted to D."""
    F = P.T @ form @ P
    return norm(F - F.T)


@dataclass
class HarmonicityReport:
    first_eq_residual: float
    second_eq_residual: float
    alt_first_eq_residual: float = math.nan
    rho_star_symmetry_defect: float = math.nan
    rho_star_bar_symmetry_defect: float = math.nan
    tolerance: float = 1e-5
    routes_agree: bool = True
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> tuple:
        return (self.first_eq_residual < self.tolerance, self.second_eq_residual < self.tolerance)

    @property
    def harmonic(self) -> bool:
        return all(self.verdict)

    def as_dict(self) -> dict:
        eq1, eq2 = self.verdict
        return {
            "first_eq_residual": self.first_eq_residual,
            "second_eq_residual": self.second_eq_residual,
            "alt_first_eq_residual": self.alt_first_eq_residual,
            "rho_star_symmetry_defect": self.rho_star_symmetry_defect,
            "rho_star_bar_symmetry_defect": self.rho_star_bar_symmetry_defect,
            "eq1": eq1,
            "eq2": eq2,
            "harmonic": eq1 and eq2,
            "routes_agree": self.routes_agree,
        }


def harmonic_report(s: AlmostContactStructure, points, fd: FDConfig = DEFAULT_FD,
                    contact_metric: bool = None) -> HarmonicityReport:
    """Residuals of both harmonic section equations.

    On contact metric structures the alternative first-equation route
    ``(tau(xi) - phi delta h) / 2`` and the symmetry of ``bar rho*`` are also
    evaluated; ``routes_agree`` records whether they reach the same verdict.
    """
    if contact_metric is None:
        contact_metric = classify(s, points, fd).is_contact_metric
    tol = fd.tolerance_d2
    eq1 = eq2 = 0.0
    alt = rho_sym = rho_bar_sym = 0.0
    for p in points:
        c = contact_local(s, p, fd)
        eq1 = max(eq1, norm(c.first_equation))
        eq2 = max(eq2, norm(c.tau_J))
        rho_sym = max(rho_sym, symmetry_defect(c.rho_star, c.proj))
        if contact_metric:
            alt = max(alt, 0.5 * norm(c.tau_xi - c.phi @ c.delta_h))
            rho_bar_sym = max(rho_bar_sym, symmetry_defect(c.rho_star_bar, c.proj))
    rep = HarmonicityReport(eq1, eq2, tolerance=tol, rho_star_symmetry_defect=rho_sym)
    if contact_metric:
        rep.alt_first_eq_residual = alt
        rep.rho_star_bar_symmetry_defect = rho_bar_sym
        rep.routes_agree = (alt < tol) == (eq1 < tol) and (rho_bar_sym < tol) == (eq2 < tol)
        if not rep.routes_agree:
            rep.notes.append("equation residuals and the characterization route disagree")
    return rep


@dataclass(frozen=True)
class KappaMuFit:
    kappa: float
    mu: float
    residual: float
    mu_identifiable: bool

    def __iter__(self):
        return iter((self.kappa, self.mu, self.residual))


def kappa_mu_fit(s: AlmostContactStructure, points, fd: FDConfig = DEFAULT_FD) -> KappaMuFit:
    """Least-squares constants in ``R(X, Y) xi = (kappa + mu h) r(X, Y) xi``.

    Fitted over all coordinate pairs ``(X, Y)`` at every point.  When h is
    numerically zero the mu column vanishes and mu is reported as NaN.
    """
    rows_k, rows_m, rhs = [], [], []
    hmax = 0.0
    for p in points:
        c = contact_local(s, p, fd)
        Rxi = np.einsum("abcd,b->acd", c.R, c.xi)  # R(d_c, d_d) xi
        d = c.dim
        rxi = np.einsum("ac,d->acd", np.eye(d), c.eta) - np.einsum("ad,c->acd", np.eye(d), c.eta)
        rows_k.append(rxi.ravel())
        rows_m.append(np.einsum("ab,bcd->acd", c.h, rxi).ravel())
        rhs.append(Rxi.ravel())
        hmax = max(hmax, norm(c.h))
    K, M, y = np.concatenate(rows_k), np.concatenate(rows_m), np.concatenate(rhs)
    identifiable = hmax >= fd.tolerance_d1
    if identifiable:
        coef, *_ = np.linalg.lstsq(np.stack([K, M], axis=1), y, rcond=None)
        kappa, mu = float(coef[0]), float(coef[1])
        fit = kappa * K + mu * M
    else:
        kappa = float(K @ y / (K @ K))
        mu = math.nan
        fit = kappa * K
    size = len(K) // len(points)
    dev = (y - fit).reshape(len(points), size)
    residual = float(np.max(np.linalg.norm(dev, axis=1)))
    return KappaMuFit(kappa, mu, residual, identifiable)


def kappa_mu_recast_residual(s: AlmostContactStructure, p, kappa: float, mu: float,
                             fd: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Residual of the commutator form of the (kappa, mu) curvature identity.

    ``<[R(X,Y), phi] Z, W> = <[(1+h) r(X,Y) (1+h), phi] Z, W>
    + (1-kappa) <r(X,Y) xi, phi r(Z,W) xi> + (1-mu) <h r(X,Y) xi, phi r(Z,W) xi>``
    over coordinate vectors; ``mu`` may be NaN when h vanishes.
    """
    c = contact_local(s, p, fd)
    d, g, phi, h = c.dim, c.g, c.phi, c.h
    E = np.eye(d)
    R = c.R
    lhs = np.einsum("wa,abxy,bz->xyzw", g, R, phi) - np.einsum("wa,ab,bzxy->xyzw", g, phi, R)
    one_h = E + h
    rxi = np.einsum("ac,d->acd", E, c.eta) - np.einsum("ad,c->acd", E, c.eta)  # r(d_c, d_d) xi
    out = np.zeros((d, d, d, d))
    mu_term = 0.0 if math.isnan(mu) else (1.0 - mu)
    for x in range(d):
        for y in range(d):
            A = one_h @ r_operator(E[x], E[y], g) @ one_h
            comm = A @ phi - phi @ A
            out[x, y] = (g @ comm).T  # [z, w] = <comm d_z, d_w>
    extra = (1.0 - kappa) * np.einsum("axy,ab,bc,czw->xyzw", rxi, g, phi, rxi)
    if mu_term:
        extra = extra + mu_term * np.einsum("ae,exy,ab,bc,czw->xyzw", h, rxi, g, phi, rxi)
    return lhs - out - extra
