import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmsec.catalog import ENTRIES, contact_structure_of, get_entry, perturb
from harmsec.chart import DEFAULT_FD, FDConfig, TensorFieldHandle
from harmsec.contact import (
    AlmostContactStructure, axiom_residuals, bar_curvature, bar_delta_J, bar_derivative_of_J, classify,
    contact_local, d_project, fundamental_two_form, h_tensor, r_tensor, validate_structure,
)
from harmsec.errors import AxiomViolation, EpsilonOutOfRange, NotInD

from conftest import fro, sample

CONTACT_METRIC = [("sasakian_R3", {}), ("sasakian_R2n1", {}), ("unit_tangent_surface", {"c": 1.0}),
                  ("unit_tangent_surface", {"c": 4.0}), ("unit_tangent_surface", {"c": -1.0})]


def structures():
    for key, e in ENTRIES.items():
        if e.kind in ("contact", "warped", "submersion"):
            yield key, contact_structure_of(get_entry(key))


@pytest.mark.parametrize("key,s", list(structures()), ids=lambda v: v if isinstance(v, str) else "")
def test_axioms_hold_on_catalog(key, s):
    cls = validate_structure(s, sample(s))
    assert max(cls.residuals.values()) < 1e-12


def test_doubled_phi_violates_phi_squared():
    s = get_entry("sasakian_R3")
    bad = AlmostContactStructure(s.chart, s.xi, s.eta, TensorFieldHandle((1, 1), lambda p: 2 * s.phi(p), "2phi"))
    with pytest.raises(AxiomViolation) as err:
        validate_structure(bad, sample(s, 3))
    assert err.value.axiom == "phi_squared"


class TestClassify:
    def test_sasakian(self):
        s = get_entry("sasakian_R3")
        c = classify(s, sample(s))
        assert (c.is_contact_metric, c.is_K_contact, c.is_H_contact) == (True, True, True)

    @pytest.mark.parametrize("c", [4.0, -1.0])
    def test_unit_tangent_not_k_contact(self, c):
        s = get_entry("unit_tangent_surface", c=c)
        cls = classify(s, sample(s))
        assert (cls.is_contact_metric, cls.is_K_contact, cls.is_H_contact) == (True, False, True)

    def test_kenmotsu_not_contact_metric(self):
        s = get_entry("kenmotsu").structure
        cls = classify(s, sample(s))
        assert cls.is_contact_metric is False
        p = sample(s, 1)[0]
        assert fro(fundamental_two_form(s, p) - 0.5 * contact_local(s, p, DEFAULT_FD).d_eta) > 1e-3

    def test_reeb_is_ricci_eigenvector_on_sasakian(self):
        s = get_entry("sasakian_R3")
        assert classify(s, sample(s)).residuals["ricci_eigenvector"] < 1e-5


class TestH:
    def test_vanishes_on_sasakian(self):
        s = get_entry("sasakian_R3")
        assert max(fro(h_tensor(s, p)) for p in sample(s, 5)) < 1e-7

    def test_symmetric_tracefree_anticommuting(self):
        s = get_entry("unit_tangent_surface", c=4.0)
        for p in sample(s, 5):
            c = contact_local(s, p, DEFAULT_FD)
            assert fro(c.h) > 1.0
            assert fro(c.g @ c.h - (c.g @ c.h).T) < 1e-6
            assert abs(np.trace(c.h)) < 1e-6
            assert fro(c.h @ c.phi + c.phi @ c.h) < 1e-6
            assert fro(c.h @ c.xi) < 1e-6
            # two step sizes agree, so the value is not discretization noise
            h2 = h_tensor(s, p, FDConfig(step=5e-5))
            assert fro(c.h - h2) < 1e-6


class TestProjection:
    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.floats(-2, 2))
    def test_d_project(self, v, a):
        s = get_entry("sasakian_R3")
        p = np.array([0.1, 0.2, 0.3])
        xi = s.xi(p)
        F = d_project(s, v, p)
        assert abs(s.eta(p) @ F) < 1e-12
        assert fro(d_project(s, a * xi + F, p) - F) < 1e-12
        assert fro(d_project(s, xi, p)) < 1e-15

    def test_not_in_d(self):
        s = get_entry("sasakian_R3")
        p = np.array([0.1, 0.2, 0.3])
        with pytest.raises(NotInD):
            bar_derivative_of_J(s, [1, 0, 0], s.xi(p), p)


class TestBarConnection:
    @pytest.mark.parametrize("key,kw", CONTACT_METRIC)
    def test_routes_agree_and_anti_invariance(self, key, kw):
        s = get_entry(key, **kw)
        for p in sample(s, 5):
            c = contact_local(s, p, DEFAULT_FD)
            assert fro(c.B.val - c.B_direct) < 1e-7
            F = c.d_frame()
            for i in range(F.shape[1]):
                for j in range(F.shape[1]):
                    X, Y = F[:, i], F[:, j]
                    lhs = bar_derivative_of_J(s, c.phi @ X, c.phi @ Y, p) + bar_derivative_of_J(s, X, Y, p)
                    assert fro(lhs) < 1e-7
            assert fro(bar_derivative_of_J(s, c.xi, F[:, 0], p)) < 1e-7
            assert fro(bar_delta_J(s, p)) < 1e-7

    def test_kenmotsu_parallel(self):
        s = get_entry("kenmotsu").structure
        for p in sample(s, 5):
            c = contact_local(s, p, DEFAULT_FD)
            assert fro(c.B.val) < 1e-7 and fro(bar_delta_J(s, p)) < 1e-7

    def test_perturbed_five_dimensional_codifferential(self):
        s = get_entry("sasakian_R2n1")
        q = perturb(s, 1e-2, 42)
        for p in sample(s, 5):
            vals = [fro(bar_delta_J(q, p, FDConfig(step=h))) for h in (1e-4, 5e-5)]
            assert min(vals) > 10 * DEFAULT_FD.tolerance_d1 and abs(vals[0] - vals[1]) < 1e-6

    @pytest.mark.parametrize("key", ["sasakian_R3", "unit_tangent_surface", "kenmotsu", "warped_base_line"])
    def test_bar_curvature_antisymmetric(self, key):
        s = contact_structure_of(get_entry(key))
        for p in sample(s, 3):
            F = contact_local(s, p, DEFAULT_FD).d_frame()
            X, Y, Z = F[:, 0], F[:, 1], F[:, 0] + F[:, 1]
            assert fro(bar_curvature(s, X, Y, Z, p) + bar_curvature(s, Y, X, Z, p)) < 1e-5

    def test_flat_product_bar_curvature(self):
        s = get_entry("euclidean")
        p = np.zeros(3)
        assert fro(bar_curvature(s, [1, 0, 0], [0, 1, 0], [1, 1, 0], p)) == 0.0


class TestRTensor:
    @given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
    def test_r_tensor(self, v):
        g = np.eye(3)
        u, w = np.array(v[:3]), np.array(v[3:])
        assert fro(r_tensor(u, u, w, g)) < 1e-12

    def test_orthonormal(self):
        u, v = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
        assert np.allclose(r_tensor(u, v, v, np.eye(3)), u)


class TestPerturb:
    def test_zero_is_identity(self):
        s = get_entry("sasakian_R3")
        assert perturb(s, 0.0) is s

    @pytest.mark.parametrize("eps", [-1e-3, 0.1, 0.5])
    def test_range(self, eps):
        with pytest.raises(EpsilonOutOfRange):
            perturb(get_entry("sasakian_R3"), eps)

    def test_deterministic(self):
        s = get_entry("sasakian_R3")
        a, b = perturb(s, 1e-2, 7), perturb(s, 1e-2, 7)
        for p in sample(s, 5):
            assert np.array_equal(a.phi(p), b.phi(p)) and np.array_equal(a.xi(p), b.xi(p))

    def test_axioms_survive(self):
        s = perturb(get_entry("sasakian_R3"), 5e-2, 3)
        for p in sample(s):
            assert max(axiom_residuals(s, p).values()) < 1e-12

    def test_residual_grows_with_epsilon(self):
        s = get_entry("sasakian_R3")
        pts = sample(s)
        from harmsec.harmonicity import harmonic_report

        r = [harmonic_report(perturb(s, e, 42), pts).first_eq_residual for e in (1e-3, 1e-2, 5e-2)]
        assert r[0] < r[1] < r[2] and math.isfinite(r[2])
