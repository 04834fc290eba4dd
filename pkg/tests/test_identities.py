import math

import pytest

from harmsec.catalog import ENTRIES, get_entry, perturb
from harmsec.chart import DEFAULT_FD
from harmsec.errors import NotApplicable, UnknownEntry
from harmsec.identities import REGISTRY, Subject, applicable_ids, check_identity, get_check, run_checks

from conftest import sample

CLEAN = [
    ("euclidean", {}), ("sasakian_R3", {}), ("sasakian_R2n1", {}),
    ("unit_tangent_surface", {"c": 1.0}), ("unit_tangent_surface", {"c": 4.0}), ("unit_tangent_surface", {"c": -1.0}),
    ("warped_base_line", {}), ("warped_base_line", {"f": "exp(x/3)"}), ("kenmotsu", {}), ("warped_line_fiber", {}),
    ("heisenberg_submersion", {}), ("flat_kahler_R2", {}),
]


def _subject(key, **kw):
    return Subject.wrap(get_entry(key, **kw), key)


def _run(key, ids=None, **kw):
    subj = _subject(key, **kw)
    pts = subj.chart.sample_points(20, 42, DEFAULT_FD)
    return run_checks(subj, pts, DEFAULT_FD, ids)


@pytest.mark.parametrize("key,kw", CLEAN, ids=[f"{k}{v}" for k, v in CLEAN])
def test_all_applicable_checks_pass(key, kw):
    rows = _run(key, **kw)
    assert rows and all(r.applicable for r in rows)
    assert [r.id for r in rows if not r.passed] == []


def test_registry_ids_unique_and_described():
    assert len(REGISTRY) == len(set(REGISTRY))
    for cid, chk in REGISTRY.items():
        assert chk.id == cid and chk.description and chk.statement
        assert chk.tolerance_class in ("algebraic", "d1", "d2", "verdict")


class TestApplicability:
    def _ids(self, key, **kw):
        subj = _subject(key, **kw)
        return set(applicable_ids(subj, subj.chart.sample_points(20, 42, DEFAULT_FD)))

    def test_contact_metric_gets_contact_suite(self):
        ids = self._ids("unit_tangent_surface", c=4.0)
        assert {"2.1", "2.16", "2.20", "remarkable", "T2.3", "kappa_mu_recast"} <= ids
        assert not ids & {"L3.1", "3.10", "hermitian_eq"}

    def test_kenmotsu_gets_fiber_suite_only(self):
        ids = self._ids("kenmotsu")
        assert {"3.10", "3.11", "L3.5", "P3.3", "T3.3", "harmonic_eq1"} <= ids
        assert not ids & {"2.1", "3.3", "L3.1"}

    def test_base_times_line(self):
        ids = self._ids("warped_base_line")
        assert {"3.3", "3.5", "P3.1", "P3.2", "T3.2", "L3.4"} <= ids
        assert "3.10" not in ids

    def test_submersion(self):
        ids = self._ids("heisenberg_submersion")
        assert {"L3.1", "3.2", "L3.2", "L3.4", "T3.1", "T3.1_verdict", "2.20"} <= ids

    def test_hermitian(self):
        assert self._ids("flat_kahler_R2") == {"hermitian_eq", "cosymplectic"}


def test_explicit_inapplicable_row():
    rows = _run("kenmotsu", ids=["2.1", "3.10"])
    assert [r.id for r in rows] == ["2.1", "3.10"]
    assert rows[0].applicable is False and rows[0].passed is None and rows[0].samples == 0
    assert rows[1].passed


def test_check_identity_not_applicable():
    subj = _subject("kenmotsu")
    with pytest.raises(NotApplicable):
        check_identity("2.1", subj, sample(subj.structure, 3))


def test_unknown_check():
    with pytest.raises(UnknownEntry):
        get_check("9.99")


def test_result_statistics():
    subj = _subject("unit_tangent_surface", c=4.0)
    r = check_identity("2.3", subj, sample(subj.structure, 10))
    assert r.samples == 10 and 0 <= r.mean_residual <= r.max_residual < r.tolerance
    assert r.tolerance == DEFAULT_FD.tolerance_d1


def test_tol_scale_changes_verdict():
    subj = Subject.wrap(perturb(get_entry("sasakian_R3"), 1e-2, 42))
    pts = sample(subj.structure)
    assert not check_identity("harmonic_eq1", subj, pts).passed
    assert check_identity("harmonic_eq1", subj, pts, DEFAULT_FD.scaled(1e4)).passed


class TestNegativeControls:
    def test_perturbed_sasakian(self):
        subj = Subject.wrap(perturb(get_entry("sasakian_R3"), 1e-2, 42))
        rows = run_checks(subj, sample(subj.structure))
        failed = {r.id for r in rows if r.applicable and not r.passed}
        assert "harmonic_eq1" in failed
        # the structure is no longer contact metric, so the contact suite drops out
        assert not any(r.id == "2.1" for r in rows)

    def test_perturbed_fiber(self):
        rows = _run("warped_line_fiber", fiber="perturbed_hermitian_R4")
        failed = {r.id for r in rows if not r.passed}
        assert failed == {"harmonic_eq1", "harmonic_eq2"}

    def test_perturbed_hermitian(self):
        rows = _run("perturbed_hermitian_R4")
        assert {r.id for r in rows if not r.passed} == {"hermitian_eq", "cosymplectic"}

    def test_mean_is_finite(self):
        rows = _run("perturbed_hermitian_R4")
        assert all(math.isfinite(r.mean_residual) for r in rows)


def test_every_structured_entry_is_covered():
    covered = {k for k, _ in CLEAN} | {"perturbed_hermitian_R4", "round_sphere"}
    assert covered == set(ENTRIES)
