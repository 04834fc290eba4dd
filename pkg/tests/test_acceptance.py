"""Acceptance criteria 1-12, one recorded PASS/FAIL line each.

The lines are printed in the pytest terminal summary.  For criteria 6 and 8
the literal constants disagree with the numerics: the literal form is
recorded as FAIL (and marked xfail here) and the corrected form is asserted
by a separate test.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from harmsec.catalog import ENTRIES, contact_structure_of, get_entry, perturb
from harmsec.chart import DEFAULT_FD, FDConfig, local_geometry, sectional_curvature
from harmsec.cli import main
from harmsec.contact import axiom_residuals, contact_local, norm, validate_structure
from harmsec.dsl import load_structure
from harmsec.harmonicity import harmonic_report, kappa_mu_fit
from harmsec.identities import check_identity, run_checks
from harmsec.submersion import hermitian_harmonic_residual, sub_star_ricci, validate_hermitian, warp_relation_suite

from conftest import record_criterion

ROOT = Path(__file__).resolve().parents[1]
FD = DEFAULT_FD
N_POINTS = 20
UT_C = (1.0, 4.0, -1.0)
CM_ENTRIES = [("sasakian_R3", {}), ("sasakian_R2n1", {}), ("heisenberg_submersion", {})] + [
    ("unit_tangent_surface", {"c": c}) for c in UT_C]


def pts_of(obj, count=N_POINTS, seed=42):
    s = contact_structure_of(obj)
    chart = s.chart if s is not None else obj.chart
    return chart.sample_points(count, seed, FD)


def label(key, kw):
    return key + ("" if not kw else "(" + ",".join(f"{k}={v:g}" for k, v in kw.items()) + ")")


def test_c01_structure_axioms():
    worst = 0.0
    for key, entry in ENTRIES.items():
        if entry.kind == "chart":
            continue
        obj = get_entry(key)
        if entry.kind == "hermitian":
            worst = max(worst, *validate_hermitian(obj, pts_of(obj)).values())
        else:
            validate_structure(contact_structure_of(obj), pts_of(obj))
            worst = max(worst, _axiom_max(obj))
    ok = worst < 1e-12
    record_criterion(1, ok, f"max axiom residual {worst:.2e} over {len(ENTRIES) - 1} entries (< 1e-12)")
    assert ok


def _axiom_max(obj):
    s = contact_structure_of(obj)
    return max(max(axiom_residuals(s, p).values()) for p in pts_of(obj))


def test_c02_flat_nullity():
    s = get_entry("euclidean")
    worst = 0.0
    for p in pts_of(s):
        geo = local_geometry(s.chart, p, FD)
        c = contact_local(s, p, FD)
        worst = max(worst, norm(geo.gamma.val), norm(geo.riemann), norm(geo.ricci),
                    norm(c.tau_xi), norm(c.T_phi), norm(c.tau_J), norm(c.first_equation))
    ok = worst < 1e-9
    record_criterion(2, ok, f"euclidean: max |Gamma|, |R|, |Ric|, tension {worst:.2e} (< 1e-9)")
    assert ok


def test_c03_sphere_oracle():
    S = get_entry("round_sphere")
    pts = S.sample_points(N_POINTS, 42, FDConfig(step=2e-3))
    K = lambda h: max(abs(sectional_curvature(S, [1, 0], [0, 1], p, FDConfig(step=h)) - 1.0) for p in pts)  # noqa
    err = K(FD.step)
    ratios = [K(2e-3) / K(1e-3), K(1e-3) / K(5e-4)]
    ok = err < 1e-6 and all(3.5 <= r <= 4.5 for r in ratios)
    record_criterion(3, ok, f"sphere |K - 1| = {err:.2e} (< 1e-6); halving ratios "
                            f"{ratios[0]:.3f}, {ratios[1]:.3f} (in [3.5, 4.5])")
    assert ok


C4_IDS = ["2.1", "2.2", "2.3", "2.7", "L2.1", "2.9", "dbarJ", "2.21", "remarkable"]


def test_c04_contact_metric_suite():
    worst = {}
    for key, kw in [("sasakian_R3", {})] + [("unit_tangent_surface", {"c": c}) for c in UT_C]:
        obj = get_entry(key, **kw)
        for r in run_checks(obj, pts_of(obj), FD, C4_IDS):
            assert r.applicable, (key, r.id)
            tol = 1e-7 if r.tolerance_class == "d1" else 1e-5
            prev = worst.get(r.id, (0.0, tol))
            worst[r.id] = (max(prev[0], r.max_residual), tol)
    bad = [i for i, (v, tol) in worst.items() if not v < tol]
    d1 = max(v for v, t in worst.values() if t == 1e-7)
    d2 = max(v for v, t in worst.values() if t == 1e-5)
    record_criterion(4, not bad, f"9 identities on sasakian_R3 + unit_tangent c in {{1,4,-1}}: "
                                 f"max first-order {d1:.2e} (< 1e-7), curvature-level {d2:.2e} (< 1e-5)"
                     + (f"; failing {bad}" if bad else ""))
    assert not bad


def test_c05_codifferential_of_h():
    worst_24, worst_gap = 0.0, 0.0
    for key, kw in CM_ENTRIES:
        obj = get_entry(key, **kw)
        pts = pts_of(obj)
        worst_24 = max(worst_24, check_identity("2.4", obj, pts, FD).max_residual)
        rep = harmonic_report(contact_structure_of(obj), pts, FD)
        worst_gap = max(worst_gap, abs(rep.first_eq_residual - rep.alt_first_eq_residual))
    ok = worst_24 < 1e-5 and worst_gap < 1e-5
    record_criterion(5, ok, f"check 2.4 residual {worst_24:.2e}; first-equation vs (tau - phi delta h)/2 gap "
                            f"{worst_gap:.2e} on {len(CM_ENTRIES)} contact metric entries (< 1e-5)")
    assert ok


C6_IDS = ["2.16", "2.18", "2.19", "2.20", "L2.2", "L2.3"]


def _c6_corrected():
    worst = 0.0
    for key, kw in CM_ENTRIES:
        obj = get_entry(key, **kw)
        for r in run_checks(obj, pts_of(obj), FD, C6_IDS):
            worst = max(worst, r.max_residual)
    return worst


def _c6_literal():
    """The star-Ricci relation with a -2 <h., h.> term, as stated."""
    worst = 0.0
    for key, kw in CM_ENTRIES:
        s = contact_structure_of(get_entry(key, **kw))
        for p in pts_of(s):
            c = contact_local(s, p, FD)
            n, g, h = c.n, c.g, c.h
            rhs = c.rho_star + (2 * n - 1) * g + 2 * (n - 1) * (g @ h).T - 2 * h.T @ g @ h
            worst = max(worst, norm(c.restrict(c.rho_star_bar) - c.restrict(rhs)))
    return worst


def test_c06_curvature_relations_corrected():
    assert _c6_corrected() < 1e-5


@pytest.mark.xfail(strict=True, reason="the -2<h.,h.> coefficient is contradicted by the numerics (it is -1)")
def test_c06_curvature_relations_literal():
    lit, cor = _c6_literal(), _c6_corrected()
    record_criterion(6, lit < 1e-5, f"literal check 2.20 residual {lit:.2e} (not < 1e-5, driven by the h^2 term on "
                                    f"unit_tangent c=4,-1); with coefficient -1 all six ids reach {cor:.2e}")
    assert lit < 1e-5


def test_c07_kappa_mu_spaces():
    worst_fit, worst_sym, all_harmonic = 0.0, 0.0, True
    for c in UT_C:
        s = get_entry("unit_tangent_surface", c=c)
        pts = pts_of(s)
        worst_fit = max(worst_fit, kappa_mu_fit(s, pts, FD).residual)
        for p in pts:
            rs = contact_local(s, p, FD).rho_star
            worst_sym = max(worst_sym, norm(rs - rs.T))
        all_harmonic &= harmonic_report(s, pts, FD).harmonic
    sas = get_entry("sasakian_R3")
    kappa = kappa_mu_fit(sas, pts_of(sas), FD).kappa
    ok = worst_fit < 1e-5 and worst_sym < 1e-5 and all_harmonic and abs(kappa - 1) < 1e-5
    record_criterion(7, ok, f"unit_tangent fit residual {worst_fit:.2e}, rho* asymmetry {worst_sym:.2e} (< 1e-5), "
                            f"harmonic {all_harmonic}; sasakian_R3 kappa = {kappa:.8f}")
    assert ok


def _c8_parts():
    S = get_entry("heisenberg_submersion")
    pts = pts_of(S)
    n = S.total.n
    lit = cor = 0.0
    for p in pts:
        c = contact_local(S.total, p, FD)
        r = sub_star_ricci(S, p, FD)  # bar rho* - rho^* + 2 <,>
        cor = max(cor, norm(r))
        lit = max(lit, norm(r - (2 + 4 * n) * c.restrict(c.g)))
    rows = {r.id: r for r in run_checks(S, pts, FD, ["L3.1", "L3.2", "L3.4", "3.2", "T3.1_verdict"])}
    relations = max(rows[i].max_residual for i in ("L3.1", "L3.2", "L3.4", "3.2"))
    total = harmonic_report(S.total, pts, FD).harmonic
    base = max(norm(hermitian_harmonic_residual(S.base, S.projection(p), FD)) for p in pts) < FD.tolerance_d2
    return lit, cor, relations, total, base


def test_c08_submersion_corrected():
    lit, cor, relations, total, base = _c8_parts()
    assert cor < 1e-5 and relations < 1e-5 and total == base


@pytest.mark.xfail(strict=True, reason="the +4n constant is contradicted by the numerics (it is -2)")
def test_c08_submersion_literal():
    lit, cor, relations, total, base = _c8_parts()
    record_criterion(8, lit < 1e-5, f"literal bar rho* - rho^* - 4n<,> residual {lit:.2e} (not < 1e-5); "
                                    f"with constant -2 residual {cor:.2e}; verdicts agree {total == base}; "
                                    f"L3.1/L3.2/L3.4/3.2 max {relations:.2e}")
    assert lit < 1e-5


def test_c09_warped_products():
    tau = tphi = rel = 0.0
    harmonic = True
    for f in ("1", "1 + x^2/4", "exp(x/3)"):
        W = get_entry("warped_base_line", f=f)
        pts = pts_of(W)
        for p in pts:
            c = contact_local(W.structure, p, FD)
            tau, tphi = max(tau, norm(c.tau_xi)), max(tphi, norm(c.T_phi))
        res = warp_relation_suite(W, pts, FD)
        rel = max(rel, res["3.3"], res["3.5"])
        harmonic &= harmonic_report(W.structure, pts, FD).harmonic
    K = get_entry("kenmotsu")
    kpts = pts_of(K)
    kres = warp_relation_suite(K, kpts, FD)
    k_rel, k_lap = max(kres["3.10"], kres["3.11"]), kres["T3.3"]
    k_harm = harmonic_report(K.structure, kpts, FD).harmonic
    ok = tau < 1e-6 and tphi < 1e-6 and rel < 1e-5 and harmonic and k_rel < 1e-6 and k_lap < 1e-5 and k_harm
    record_criterion(9, ok, f"base x_f R: tau(xi) {tau:.2e}, T(phi) {tphi:.2e} (< 1e-6), checks 3.3/3.5 {rel:.2e}, "
                            f"harmonic {harmonic}; kenmotsu: checks 3.10/3.11 {k_rel:.2e} (< 1e-6), "
                            f"rough Laplacian gap {k_lap:.2e} (< 1e-5), harmonic {k_harm}")
    assert ok


def test_c10_negative_controls():
    s = perturb(get_entry("sasakian_R3"), 1e-2, 42)
    pts = pts_of(s)
    validate_structure(s, pts)
    axioms = _axiom_max(s)
    rep = harmonic_report(s, pts, FD)
    factor = max(rep.first_eq_residual, rep.second_eq_residual) / rep.tolerance
    W = get_entry("warped_line_fiber", f="1 + t^2/4", fiber="perturbed_hermitian_R4")
    wrep = harmonic_report(W.structure, pts_of(W), FD)
    ok = axioms < 1e-12 and factor >= 10 and wrep.first_eq_residual >= wrep.tolerance
    record_criterion(10, ok, f"perturbed sasakian_R3: axioms {axioms:.2e}, worst harmonic residual "
                             f"{factor:.0f}x tolerance; perturbed-fiber first equation {wrep.first_eq_residual:.2e}")
    assert ok


def test_c11_determinism():
    cmd = [sys.executable, "-m", "harmsec", "verify", "sasakian_R3", "--format", "json"]
    runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    ok = runs[0].stdout == runs[1].stdout and runs[0].returncode == 0 and json.loads(runs[0].stdout)
    record_criterion(11, bool(ok), f"two verify runs: {len(runs[0].stdout)} bytes each, identical "
                                   f"{runs[0].stdout == runs[1].stdout}")
    assert ok


def test_c12_dsl(tmp_path, capsys):
    cfg = load_structure(ROOT / "configs" / "sasakian_R3.toml")
    ref = get_entry("sasakian_R3")
    worst = 0.0
    for p in pts_of(ref):
        for a, b in [(cfg.chart.metric(p), ref.chart.metric(p)), (cfg.xi(p), ref.xi(p)), (cfg.eta(p), ref.eta(p)),
                     (cfg.phi(p), ref.phi(p))]:
            worst = max(worst, float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)))))
    good = (ROOT / "configs" / "sasakian_R3.toml").read_text()
    broken = {
        "syntax": good.replace('"1/4"', '"1/4 +"', 1),
        "shape": good.replace('xi = ["0", "0", "2"]', 'xi = ["0", "2"]'),
        "asymmetric": good.replace('["-y / 4",', '["-y / 3",'),
        "toml": good + "\n[[[",
    }
    codes = {}
    for name, text in broken.items():
        path = tmp_path / f"{name}.toml"
        path.write_text(text, encoding="utf-8")
        assert text != good
        codes[name] = main(["verify", str(path)])
    capsys.readouterr()
    ok = worst < 1e-12 and set(codes.values()) == {2}
    record_criterion(12, ok, f"config vs built-in max component gap {worst:.1e} (< 1e-12); "
                             f"malformed config exit codes {sorted(codes.values())}")
    assert ok
