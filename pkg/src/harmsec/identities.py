"""Registry of residual checks and the runner that evaluates them.

Each :class:`IdentityCheck` turns a :class:`Subject` and a list of points
into one residual per sample.  Pointwise checks compare two tensors
(``lhs - rhs``, Frobenius norm of the coordinate components); verdict checks
compare two independently computed yes/no answers and yield a single
sample that is 0 when they agree and 1 when they do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .chart import DEFAULT_FD, FDConfig
from .contact import AlmostContactStructure, StructureClassification, classify, contact_local, norm
from .errors import NotApplicable, UnknownEntry
from .harmonicity import harmonic_report, kappa_mu_fit, kappa_mu_recast_residual
from .submersion import (
    BASE_TIMES_LINE,
    LINE_TIMES_FIBER,
    WARP_CHECKS,
    SUBMERSION_CHECKS,
    AlmostHermitianStructure,
    SubmersionSetup,
    WarpedProductSpec,
    btl_base_condition,
    btl_kahler_null,
    hermitian_local,
    ltf_fiber_delta,
    ltf_fiber_tau,
)

VERDICT_TOLERANCE = 0.5


# ---------------------------------------------------------------------------
# subjects

@dataclass(eq=False)
class Subject:
    """Whatever a check runs against: a structure plus the context it came from."""

    name: str
    structure: Optional[AlmostContactStructure] = None
    warped: Optional[WarpedProductSpec] = None
    submersion: Optional[SubmersionSetup] = None
    hermitian: Optional[AlmostHermitianStructure] = None
    _flags: Dict = field(default_factory=dict, repr=False)
    _cache: Dict = field(default_factory=dict, repr=False)

    @classmethod
    def wrap(cls, obj, name: str = None) -> "Subject":
        if isinstance(obj, Subject):
            return obj
        if isinstance(obj, AlmostContactStructure):
            return cls(name or obj.name, structure=obj)
        if isinstance(obj, WarpedProductSpec):
            return cls(name or obj.structure.name, structure=obj.structure, warped=obj)
        if isinstance(obj, SubmersionSetup):
            return cls(name or obj.name, structure=obj.total, submersion=obj)
        if isinstance(obj, AlmostHermitianStructure):
            return cls(name or obj.name, hermitian=obj)
        raise TypeError(f"cannot build a check subject from {type(obj).__name__}")

    @property
    def chart(self):
        return self.structure.chart if self.structure is not None else self.hermitian.chart

    def classification(self, points, fd) -> StructureClassification:
        key = (_points_key(points), fd)
        if key not in self._flags:
            if self.structure is None:
                self._flags[key] = StructureClassification()
            else:
                self._flags[key] = classify(self.structure, points, fd)
        return self._flags[key]

    def memo(self, tag, points, fd, fn):
        key = (tag, _points_key(points), fd)
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def orientation(self) -> Optional[str]:
        return None if self.warped is None else self.warped.orientation


def _points_key(points) -> tuple:
    return tuple(tuple(float(c) for c in p) for p in np.asarray(points, float))


# ---------------------------------------------------------------------------
# checks

@dataclass(frozen=True)
class IdentityCheck:
    id: str
    description: str
    statement: str
    tolerance_class: str  # algebraic | d1 | d2 | verdict
    applies: Callable  # (subject, flags) -> bool
    evaluate: Callable  # (subject, points, fd) -> list of residuals
    kind: str = "pointwise"

    def tolerance(self, fd: FDConfig) -> float:
        return VERDICT_TOLERANCE if self.tolerance_class == "verdict" else fd.tolerance(self.tolerance_class)


def _pointwise(fn):
    """Lift ``fn(subject, c, p, fd) -> (lhs, rhs)`` to a per-point residual list."""

    def evaluate(subj, points, fd):
        out = []
        for p in points:
            c = contact_local(subj.structure, p, fd) if subj.structure is not None else None
            lhs, rhs = fn(subj, c, p, fd)
            out.append(norm(np.asarray(lhs, float) - np.asarray(rhs, float)))
        return out

    return evaluate


def _zero(fn):
    return _pointwise(lambda subj, c, p, fd: (fn(subj, c, p, fd), 0.0))


def _verdict(fn):
    """``fn`` returns two booleans that must agree."""

    def evaluate(subj, points, fd):
        a, b = fn(subj, points, fd)
        return [0.0 if bool(a) == bool(b) else 1.0]

    return evaluate


# applicability predicates
def ACM(subj, flags):
    return subj.structure is not None


def CM(subj, flags):
    return subj.structure is not None and flags.is_contact_metric


def CM_H(subj, flags):
    return CM(subj, flags) and flags.is_H_contact


def SUBMERSIVE(subj, flags):
    return subj.submersion is not None


def SUBMERSIVE_CM(subj, flags):
    return subj.submersion is not None and flags.is_contact_metric


def BTL(subj, flags):
    return subj.orientation == BASE_TIMES_LINE


def LTF(subj, flags):
    return subj.orientation == LINE_TIMES_FIBER


def HERMITIAN(subj, flags):
    return subj.hermitian is not None


def _either(*preds):
    return lambda subj, flags: any(p(subj, flags) for p in preds)


# -- contact metric identities ------------------------------------------------

def _apply_PP(T, A, B):
    """``T[a, b, k]`` with ``b`` fed by columns of A and ``k`` by columns of B, as ``[a, x, y]``."""
    return np.einsum("abk,by,kx->axy", T, A, B)


def _J_anti_invariance(subj, c, p, fd):
    J = c.phi @ c.proj
    return _apply_PP(c.B.val, J, J), -_apply_PP(c.B.val, c.proj, c.proj)


def _frame_vectors(c):
    F = c.d_frame()
    vecs = [F[:, i] for i in range(F.shape[1])]
    k = len(vecs)
    for i in range(k):
        for j in range(i + 1, k):
            vecs.append((vecs[i] + vecs[j]) / math.sqrt(2.0))
    return vecs


def _bracket_identity(subj, c, p, fd):
    lhs, rhs = [], []
    phi, B, B2, Rb = c.phi, c.B.val, c.bar2_J, c.bar_R
    for F in _frame_vectors(c):
        JF = phi @ F
        M = (np.einsum("abkl,k,l->ab", B2, F, F) - 2 * np.einsum("abcd,c,d->ab", Rb, F, JF)
             + np.einsum("abkl,k,l->ab", B2, JF, JF))
        v = np.einsum("abk,b,k->a", B, F, F)
        lhs.append(M @ phi - phi @ M)
        rhs.append(4 * np.einsum("abk,k->ab", B, v))
    return np.array(lhs), np.array(rhs)


def _bar_R_vs_R(subj, c, p, fd):
    P, g, nx = c.proj, c.g, c.nabla_xi.val
    r = np.einsum("be,ed,ac->abcd", g, nx, nx) - np.einsum("be,ec,ad->abcd", g, nx, nx)
    rhs = np.einsum("ae,ebcd->abcd", P, c.R) + r
    restrict = lambda T: np.einsum("abcd,bB,cC,dD->aBCD", T, P, P, P)  # noqa: E731
    return restrict(c.bar_R), restrict(rhs)


def _bar_R_trace(c):
    F = c.d_frame()
    JF = c.phi @ F
    return np.einsum("abcd,ci,di->ab", c.bar_R, F, JF)


def _rough_laplacian_bracket(subj, c, p, fd):
    S = _bar_R_trace(c)
    return c.tau_J, -(S @ c.phi - c.phi @ S)


def _bianchi_trace(subj, c, p, fd):
    F = c.d_frame()
    JF = c.phi @ F
    P, R = c.proj, c.R
    lhs = np.einsum("abcd,bz,ci,di->az", R, P, F, JF)
    rhs = -2 * np.einsum("abcd,bi,cz,di->az", R, JF, P, F)
    return lhs, rhs


def _star_ricci_D(subj, c, p, fd):
    n, g, h = c.n, c.g, c.h
    rhs = c.rho_star + (2 * n - 1) * g + 2 * (n - 1) * (g @ h).T - h.T @ g @ h
    return c.restrict(c.rho_star_bar), c.restrict(rhs)


def _star_ricci_reeb(subj, c, p, fd):
    return c.xi @ c.rho_star @ c.proj, -(c.delta_h @ c.g @ c.phi @ c.proj)


def _remarkable(subj, c, p, fd):
    dP, P, g = c.d_Phi, c.proj, c.g
    J = c.phi @ P
    four = lambda A, Bm, C: np.einsum("abc,ax,by,cz->xyz", dP, A, Bm, C)  # noqa: E731
    lhs = four(P, P, P) - four(P, J, J) + four(J, J, P) + four(J, P, J)
    inner = _apply_PP(c.B.val, P, P) + _apply_PP(c.B.val, J, J)  # [a, x, y]
    rhs = -2 * np.einsum("za,axy,zZ->xyZ", g, inner, P)
    return lhs, rhs


def _harm(subj, points, fd):
    flags = subj.classification(points, fd)
    return subj.memo("harmonic", points, fd,
                     lambda: harmonic_report(subj.structure, points, fd, contact_metric=flags.is_contact_metric))


def _fit(subj, points, fd):
    return subj.memo("kappa_mu", points, fd, lambda: kappa_mu_fit(subj.structure, points, fd))


def _is_kappa_mu(subj, points, fd):
    return _fit(subj, points, fd).residual < fd.tolerance_d2


def _kappa_mu_recast(subj, points, fd):
    fit = _fit(subj, points, fd)
    return [norm(kappa_mu_recast_residual(subj.structure, p, fit.kappa, fit.mu, fd)) for p in points]


def _h_contact_verdict(subj, points, fd):
    rep = _harm(subj, points, fd)
    sym = max(norm(contact_local(subj.structure, p, fd).rho_star
                   - contact_local(subj.structure, p, fd).rho_star.T) for p in points)
    return rep.harmonic, sym < fd.tolerance_d2


def _harmonic_iff(subj, points, fd):
    rep = _harm(subj, points, fd)
    return rep.harmonic, rep.alt_first_eq_residual < fd.tolerance_d2 and rep.rho_star_bar_symmetry_defect < fd.tolerance_d2


def _second_eq_iff(subj, points, fd):
    rep = _harm(subj, points, fd)
    return rep.second_eq_residual < fd.tolerance_d2, rep.rho_star_bar_symmetry_defect < fd.tolerance_d2


def _kappa_mu_harmonic(subj, points, fd):
    # (kappa, mu) => harmonic, as a verdict pair
    km = _is_kappa_mu(subj, points, fd)
    return km and not _harm(subj, points, fd).harmonic, False


# -- submersions and warped products -------------------------------------------

def _sub(fn):
    return _zero(lambda subj, c, p, fd: fn(subj.submersion, p, fd))


def _warp(key):
    def fn(subj, c, p, fd):
        return WARP_CHECKS[subj.orientation][key](subj.warped, p, fd)

    return _zero(fn)


def _J_derivative_projects(subj, c, p, fd):
    if subj.submersion is not None:
        return SUBMERSION_CHECKS["L3.4"](subj.submersion, p, fd)
    return WARP_CHECKS[BASE_TIMES_LINE]["L3.4"](subj.warped, p, fd)


def _base_harmonic(setup, points, fd):
    worst = 0.0
    for p in points:
        q = setup.projection(np.asarray(p, float))
        worst = max(worst, norm(hermitian_local(setup.base, q, fd).tau_J))
    return worst < fd.tolerance_d2


def _submersion_verdict(subj, points, fd):
    return _harm(subj, points, fd).harmonic, _base_harmonic(subj.submersion, points, fd)


def _submersion_symmetry(subj, points, fd):
    setup = subj.submersion
    tot = base = 0.0
    for p in points:
        c = contact_local(setup.total, p, fd)
        R = c.restrict(c.rho_star_bar)
        tot = max(tot, norm(R - R.T))
        q = setup.projection(np.asarray(p, float))
        rb = hermitian_local(setup.base, q, fd).rho_star
        base = max(base, norm(rb - rb.T))
    return tot < fd.tolerance_d2, base < fd.tolerance_d2


def _warp_base_verdict(subj, points, fd):
    base = max(norm(btl_base_condition(subj.warped, p, fd)) for p in points)
    return _harm(subj, points, fd).harmonic, base < fd.tolerance_d2


def _kahler_null_verdict(subj, points, fd):
    W = subj.warped
    base_harm = max(norm(hermitian_local(W.base_or_fiber, np.asarray(p, float)[: W.m], fd).tau_J) for p in points)
    if not base_harm < fd.tolerance_d2:
        return True, True  # the Kähler-null criterion only speaks about harmonic bases
    null = max(norm(btl_kahler_null(W, p, fd)) for p in points)
    return _harm(subj, points, fd).harmonic, null < fd.tolerance_d1


def _fiber_verdict(subj, points, fd):
    W = subj.warped
    cosym = max(norm(ltf_fiber_delta(W, p, fd)) for p in points) < fd.tolerance_d1
    fvals = [W.warp(float(p[0])) for p in points]
    constant = max(fvals) - min(fvals) < fd.tolerance_algebraic
    if not (cosym or constant):
        return True, True
    fiber_harm = max(norm(ltf_fiber_tau(W, p, fd)) for p in points) < fd.tolerance_d2
    return _harm(subj, points, fd).harmonic, fiber_harm


def _herm(fn):
    def evaluate(subj, points, fd):
        return [norm(fn(hermitian_local(subj.hermitian, p, fd))) for p in points]

    return evaluate


def _build_registry() -> Dict[str, IdentityCheck]:
    C = IdentityCheck
    checks = [
        C("harmonic_eq1", "first harmonic section equation", "tau(xi) + J T(phi) / 2 = 0", "d2", ACM,
          _zero(lambda s, c, p, fd: c.first_equation)),
        C("harmonic_eq2", "second harmonic section equation", "[bar nabla* bar nabla J, J] = 0", "d2", ACM,
          _zero(lambda s, c, p, fd: c.tau_J)),
        C("2.1", "phi is parallel along the Reeb field", "nabla_xi phi = 0", "d1", CM,
          _zero(lambda s, c, p, fd: np.einsum("abk,k->ab", c.nabla_phi.val, c.xi))),
        C("2.2", "the Reeb field is geodesic", "nabla_xi xi = 0", "d1", CM,
          _zero(lambda s, c, p, fd: c.nabla_xi.val @ c.xi)),
        C("2.3", "covariant derivative of the Reeb field", "nabla_X xi = -phi X - phi h X", "d1", CM,
          _pointwise(lambda s, c, p, fd: (c.nabla_xi.val, -c.phi - c.phi @ c.h))),
        C("2.7", "h in terms of nabla xi on D", "h X = phi nabla_X xi - X, X in D", "d1", CM,
          _pointwise(lambda s, c, p, fd: (c.h @ c.proj, (c.phi @ c.nabla_xi.val - np.eye(c.dim)) @ c.proj))),
        C("2.4", "codifferential of h", "delta h = phi nabla* nabla xi - T(phi)", "d2", CM,
          _pointwise(lambda s, c, p, fd: (c.delta_h, c.phi @ c.rough_laplacian_xi - c.T_phi))),
        C("2.5", "first equation through delta h", "tau(xi) + J T(phi) / 2 = (tau(xi) - phi delta h) / 2", "d2", CM,
          _pointwise(lambda s, c, p, fd: (c.first_equation, 0.5 * (c.tau_xi - c.phi @ c.delta_h)))),
        C("L2.1", "bar nabla J is J-anti-invariant", "bar nabla_{JX} J (JY) = -bar nabla_X J (Y), X, Y in D", "d1", CM,
          _pointwise(_J_anti_invariance)),
        C("2.9", "J is parallel along the Reeb field", "bar nabla_xi J = 0", "d1", CM,
          _zero(lambda s, c, p, fd: np.einsum("abk,k->ab", c.B.val, c.xi))),
        C("dbarJ", "D-codifferential of J", "bar delta J = 0", "d1", CM,
          _zero(lambda s, c, p, fd: c.delta_bar_J)),
        C("L2.2", "second-derivative bracket identity on D",
          "[bar nabla^2_{F,F} J - 2 bar R(F, JF) + bar nabla^2_{JF,JF} J, J] = 4 bar nabla_{bar nabla J(F,F)} J",
          "d2", CM, _pointwise(_bracket_identity)),
        C("2.16", "curvature of D versus ambient curvature",
          "bar R(X,Y)Z = R_D(X,Y)Z + r(nabla_X xi, nabla_Y xi)Z", "d2", CM, _pointwise(_bar_R_vs_R)),
        C("2.18", "rough Laplacian bracket through bar R",
          "[bar nabla* bar nabla J, J] = -[bar R(F_i, J F_i), J]", "d2", CM, _pointwise(_rough_laplacian_bracket)),
        C("2.19", "first Bianchi trace", "R(F_i, J F_i) Z = -2 R(Z, F_i) J F_i", "d2", CM, _pointwise(_bianchi_trace)),
        C("2.20", "star-Ricci of D versus star-Ricci of M",
          "bar rho* = rho* + (2n-1)<,> + 2(n-1)<h,> - <h,h>", "d2", CM, _pointwise(_star_ricci_D)),
        C("2.21", "h has traceless derivative", "tr(nabla_X h) = 0", "d1", CM,
          _zero(lambda s, c, p, fd: np.einsum("aak->k", c.nabla_h))),
        C("L2.3", "star-Ricci against the Reeb field", "rho*(xi, Z) = -<delta h, J Z>", "d2", CM,
          _pointwise(_star_ricci_reeb)),
        C("remarkable", "four-term d Phi identity on D",
          "dPhi(X,Y,Z) - dPhi(X,JY,JZ) + dPhi(JX,JY,Z) + dPhi(JX,Y,JZ) = -2<bar nabla_X J(Y) + bar nabla_{JX} J(JY), Z>",
          "d2", CM, _pointwise(_remarkable)),
        C("kappa_mu_recast", "commutator form of the (kappa, mu) curvature identity",
          "<[R(X,Y), phi]Z, W> = <[(1+h) r(X,Y) (1+h), phi]Z, W> + (1-kappa)<r(X,Y)xi, phi r(Z,W)xi>"
          " + (1-mu)<h r(X,Y)xi, phi r(Z,W)xi>", "d2",
          lambda s, f: CM(s, f), _kappa_mu_recast),
        C("T2.1", "harmonic iff tau(xi) = phi delta h and bar rho* symmetric", "verdict agreement", "verdict", CM,
          _verdict(_harmonic_iff), "verdict"),
        C("P2.2", "second equation iff bar rho* symmetric", "verdict agreement", "verdict", CM,
          _verdict(_second_eq_iff), "verdict"),
        C("T2.2", "H-contact: harmonic iff rho* symmetric", "verdict agreement", "verdict", CM_H,
          _verdict(_h_contact_verdict), "verdict"),
        C("T2.3", "(kappa, mu) spaces are harmonic", "kappa-mu fit passes => harmonic", "verdict", CM,
          _verdict(_kappa_mu_harmonic), "verdict"),
        # submersions onto almost Hermitian bases
        C("L3.1", "O'Neill A on horizontal fields", "A_X Y = eta([X, Y]) xi / 2", "d1", SUBMERSIVE,
          _sub(SUBMERSION_CHECKS["L3.1"])),
        C("3.2", "O'Neill A through J", "A_Z W = <JZ, W> xi", "d1", SUBMERSIVE_CM, _sub(SUBMERSION_CHECKS["3.2"])),
        C("L3.2", "horizontal curvature through the base",
          "<R(X,Y)Z,H> = <R^(X,Y)Z,H> + 2<A_X Y, A_Z H> - <A_Y Z, A_X H> - <A_Z X, A_Y H>", "d2", SUBMERSIVE,
          _sub(SUBMERSION_CHECKS["L3.2"])),
        C("L3.4", "bar nabla J projects to the base", "pi_* bar nabla_X J(Y) = nabla^_X J(Y)", "d1",
          _either(SUBMERSIVE, BTL), _zero(_J_derivative_projects)),
        C("submersive_K_contact", "submersive contact metric structures are K-contact", "h = 0", "d1",
          SUBMERSIVE_CM, _sub(SUBMERSION_CHECKS["K-contact"])),
        C("T3.1", "star-Ricci of D through the base", "bar rho*(X,Y) = rho^*(X^,Y^) - 2<X,Y>", "d2",
          SUBMERSIVE_CM, _sub(SUBMERSION_CHECKS["T3.1"])),
        C("T3.1_verdict", "total harmonic iff base harmonic", "verdict agreement", "verdict", SUBMERSIVE_CM,
          _verdict(_submersion_verdict), "verdict"),
        C("T3.1_symmetry", "bar rho* symmetric iff base rho* symmetric", "verdict agreement", "verdict",
          SUBMERSIVE_CM, _verdict(_submersion_symmetry), "verdict"),
        # warped products
        C("L3.3", "warped product connection", "Levi-Civita connection of the warped metric", "d1",
          _either(BTL, LTF), _warp("L3.3")),
        C("3.3", "rough Laplacian of the Reeb field", "nabla* nabla xi = f^-2 |grad f|^2 xi", "d2", BTL, _warp("3.3")),
        C("3.4", "Reeb field along basic fields", "nabla_X xi = 0", "d1", BTL, _warp("3.4")),
        C("3.5", "Reeb field geodesic curvature", "nabla_xi xi = -f^-1 grad f", "d1", BTL, _warp("3.5")),
        C("3.7", "J parallel along the Reeb field", "bar nabla_xi J = 0", "d1", BTL, _warp("3.7")),
        C("P3.1", "harmonic Reeb field and first equation", "tau(xi) = 0 and T(phi) = 0", "d2", BTL, _warp("P3.1")),
        C("3.9", "second derivative of J projects", "pi_* bar nabla^2 J = nabla^^2 J", "d2", BTL, _warp("3.9")),
        C("P3.2", "second equation through the base",
          "pi_*[bar nabla* bar nabla J, J] = [nabla^* nabla^ J, J] + 2 f^-1 J nabla^_{grad f} J", "d2", BTL,
          _warp("P3.2")),
        C("T3.2", "harmonic iff base condition", "verdict agreement", "verdict", BTL, _verdict(_warp_base_verdict), "verdict"),
        C("T3.2_kahler_null", "harmonic base: harmonic iff grad f is Kähler null", "verdict agreement", "verdict",
          BTL, _verdict(_kahler_null_verdict), "verdict"),
        C("3.10", "Reeb field along the fiber", "nabla_X xi = f^-1 f' X, nabla_X X = check-nabla_X X - f^-1 f'|X|^2 xi",
          "d1", LTF, _warp("3.10")),
        C("3.11", "J parallel along the Reeb field", "bar nabla_xi J = 0", "d1", LTF, _warp("3.11")),
        C("L3.5", "bar nabla J equals the fiber derivative", "nabla_xi phi = 0, bar nabla_X J(Y) = check-nabla_X J(Y)",
          "d1", LTF, _warp("L3.5")),
        C("P3.3", "harmonic Reeb field; T(phi) through the fiber codifferential",
          "nabla* nabla xi = 2n f^-2 f'^2 xi, tau(xi) = 0, T(phi) = -f^-1 f' check-delta J", "d2", LTF,
          _warp("P3.3")),
        C("T3.3", "rough Laplacian of J equals the fiber one", "bar nabla* bar nabla J = check-nabla* check-nabla J",
          "d2", LTF, _warp("T3.3")),
        C("T3.3_verdict", "cosymplectic fiber: harmonic iff fiber harmonic", "verdict agreement", "verdict", LTF,
          _verdict(_fiber_verdict), "verdict"),
        # almost Hermitian charts
        C("hermitian_eq", "harmonic almost complex structure", "[nabla* nabla J, J] = 0", "d2", HERMITIAN,
          _herm(lambda hl: hl.tau_J)),
        C("cosymplectic", "co-closed Kähler form", "delta J = 0", "d1", HERMITIAN, _herm(lambda hl: hl.delta_J)),
    ]
    return {c.id: c for c in checks}


REGISTRY: Dict[str, IdentityCheck] = _build_registry()


# ---------------------------------------------------------------------------
# running

@dataclass
class CheckResult:
    id: str
    description: str
    statement: str
    applicable: bool
    samples: int
    max_residual: Optional[float]
    mean_residual: Optional[float]
    tolerance: float
    tolerance_class: str

    @property
    def passed(self) -> Optional[bool]:
        if not self.applicable:
            return None
        return self.max_residual < self.tolerance


def get_check(check_id: str) -> IdentityCheck:
    if check_id not in REGISTRY:
        raise UnknownEntry(f"unknown check id {check_id!r}")
    return REGISTRY[check_id]


def applicable_ids(subject, points, fd: FDConfig = DEFAULT_FD) -> List[str]:
    subj = Subject.wrap(subject)
    flags = subj.classification(points, fd)
    return [k for k, c in REGISTRY.items() if c.applies(subj, flags)]


def _run_one(check: IdentityCheck, subj: Subject, points, fd) -> CheckResult:
    res = check.evaluate(subj, points, fd)
    mx = max(res) if res else 0.0
    mean = math.fsum(res) / len(res) if res else 0.0
    return CheckResult(check.id, check.description, check.statement, True, len(res), float(mx), float(mean),
                       check.tolerance(fd), check.tolerance_class)


def check_identity(check_id: str, subject, points, fd: FDConfig = DEFAULT_FD) -> CheckResult:
    """Evaluate one registered check; raise NotApplicable if it does not apply."""
    check = get_check(check_id)
    subj = Subject.wrap(subject)
    if not check.applies(subj, subj.classification(points, fd)):
        raise NotApplicable(f"check {check_id!r} does not apply to {subj.name}")
    return _run_one(check, subj, points, fd)


def run_checks(subject, points, fd: FDConfig = DEFAULT_FD, ids: Sequence[str] = None) -> List[CheckResult]:
    """Run the given checks (default: every applicable one) in registry order."""
    subj = Subject.wrap(subject)
    flags = subj.classification(points, fd)
    if ids is None:
        chosen = [c for c in REGISTRY.values() if c.applies(subj, flags)]
    else:
        chosen = [get_check(i) for i in ids]
    out = []
    for check in chosen:
        if check.applies(subj, flags):
            out.append(_run_one(check, subj, points, fd))
        else:
            out.append(CheckResult(check.id, check.description, check.statement, False, 0, None, None,
                                   check.tolerance(fd), check.tolerance_class))
    return out
