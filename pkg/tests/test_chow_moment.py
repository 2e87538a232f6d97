"""Moment matrices, Chow weights, the pairing inequality, and balancing."""

import random
from fractions import Fraction

import numpy as np
import pytest

from kstab.acceptance import CONIC_FORM, random_admissible_loop, rnc3_cycle
from kstab.chow import (
    HypersurfaceForm,
    central_fiber_cycle,
    central_fiber_form,
    check_chow_inequality,
    chow_weight,
    form_from_json,
    form_to_json,
    section_diagonal,
)
from kstab.cycles import (
    Component,
    ProjectiveCycle,
    balance_iterate,
    cycle_from_json,
    cycle_to_json,
    moment_matrix,
    pairing,
    trace_free,
    trace_norm,
    transform_cycle,
)
from kstab.laurent import LaurentMatrix
from kstab.quadrature import QuadratureError


def line_cycle():
    return ProjectiveCycle(
        2, [Component(np.array([[1, 0], [0, 0], [0, 1]], dtype=complex))]
    )


def conic_loop():
    return LaurentMatrix.exponent_diagonal([0, 0, 1])


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


class TestMomentMatrix:
    def test_coordinate_line_closed_form(self):
        res = moment_matrix(line_cycle(), order=32)
        assert np.allclose(np.diag(res.raw).real, [0.5, 0.0, 0.5], atol=1e-12)
        assert np.allclose(
            np.diag(res.matrix).real, [1 / 6, -1 / 3, 1 / 6], atol=1e-12
        )

    def test_trace_free(self, rng):
        z = rnc3_cycle(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        res = moment_matrix(z, order=48)
        assert abs(np.trace(res.matrix)) < 1e-13
        assert np.allclose(res.matrix, res.matrix.conj().T)

    def test_unitary_equivariance(self, rng):
        z = rnc3_cycle()
        u = random_unitary(rng, 4)
        m1 = moment_matrix(transform_cycle(z, u), order=40).matrix
        m0 = moment_matrix(z, order=40).matrix
        assert np.max(np.abs(m1 - u @ m0 @ u.conj().T)) < 1e-9

    def test_rnc3_balanced(self):
        res = moment_matrix(rnc3_cycle(), order=32)
        assert trace_norm(res.matrix) < 1e-12

    def test_rnc3_matches_bergman_side(self):
        # the degree-3 standard embedding is the round metric's level-3 image
        from kstab.bergman import RadialMetric, image_cycle

        std = moment_matrix(rnc3_cycle(), order=40).matrix
        img = moment_matrix(image_cycle(RadialMetric(0.0), 3), order=40).matrix
        assert np.max(np.abs(std - img)) < 1e-10

    def test_base_point_detected(self):
        # common factor s: a base point at 0
        comp = Component(np.array([[0, 1], [0, 0], [0, 1]], dtype=complex))
        with pytest.raises(QuadratureError):
            moment_matrix(ProjectiveCycle(2, [comp]), order=24)

    def test_error_estimate_reported(self):
        res = moment_matrix(line_cycle(), order=16)
        assert res.quad_error < 1e-10


class TestPairingAndTraceNorm:
    def test_zero_weight(self):
        m = moment_matrix(line_cycle(), order=16).matrix
        assert pairing(m, [0, 0, 0]) == 0.0

    def test_trace_free_vs_identity(self, rng):
        h = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        m = trace_free(0.5 * (h + h.conj().T))
        assert abs(pairing(m, [3, 3, 3, 3, 3])) < 1e-12

    def test_trace_norm_values(self):
        assert trace_norm(np.zeros((3, 3))) == 0.0
        assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            pairing(np.eye(3), [1, 2])

    def test_pairing_bound(self, rng):
        from kstab.weights import gap

        for _ in range(50):
            n = int(rng.integers(2, 7))
            a = rng.integers(-4, 5, size=n)
            h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            m = trace_free(0.5 * (h + h.conj().T))
            assert abs(pairing(m, a)) <= 2 * gap(a) * trace_norm(m) + 1e-12


class TestChowWeight:
    def test_identity_loop(self):
        assert chow_weight(CONIC_FORM, LaurentMatrix.identity(3)) == 0

    def test_conic_exact(self):
        assert chow_weight(CONIC_FORM, conic_loop()) == Fraction(1, 12)

    def test_matches_weight_module_chow1(self):
        """Cross-module: k = 1 Chow number of the dual weight system."""
        from kstab.weights import Geometry, WeightSystem, chow_k, tau_poly

        ws = WeightSystem(1, (0, 0, -1), Geometry("hypersurface", 2, -1))
        assert chow_k(tau_poly(ws), 1) == chow_weight(CONIC_FORM, conic_loop())

    def test_trivialization_invariance(self):
        scaled = HypersurfaceForm.from_dict(
            3, {(1, 0, 1): {5: 1}, (0, 2, 0): {5: -1}}
        )
        assert chow_weight(scaled, conic_loop()) == chow_weight(
            CONIC_FORM, conic_loop()
        )

    def test_normalize_invariance(self):
        from kstab.laurent import normalize

        g = conic_loop()
        assert chow_weight(CONIC_FORM, normalize(g)) == chow_weight(CONIC_FORM, g)

    def test_volume_validation(self):
        with pytest.raises(ValueError):
            chow_weight(CONIC_FORM, conic_loop(), volume=Fraction(3))

    def test_flipped_convention_differs(self):
        cal = chow_weight(CONIC_FORM, conic_loop(), convention="calibrated")
        flip = chow_weight(CONIC_FORM, conic_loop(), convention="flipped")
        assert cal != flip

    def test_double_line_case(self):
        g = LaurentMatrix.exponent_diagonal([0, 1, 0])
        assert chow_weight(CONIC_FORM, g) == Fraction(1, 3)
        fiber = central_fiber_cycle(CONIC_FORM, g)
        assert [c.multiplicity for c in fiber.components] == [2]


class TestCentralFiber:
    def test_conic_limit_is_line_pair(self):
        fiber = central_fiber_cycle(CONIC_FORM, conic_loop())
        assert len(fiber.components) == 2
        assert fiber.total_degree == 2
        mono = central_fiber_form(CONIC_FORM, conic_loop())
        assert set(mono) == {(1, 0, 1)}

    def test_identity_limit_smooth(self):
        fiber = central_fiber_cycle(CONIC_FORM, LaurentMatrix.identity(3))
        assert len(fiber.components) == 1
        assert fiber.components[0].degree == 2
        res = moment_matrix(fiber, order=48)
        assert abs(res.volume - 2.0) < 1e-9


class TestChowInequality:
    def test_equality_on_exponent_loop(self):
        g = conic_loop()
        fiber = central_fiber_cycle(CONIC_FORM, g)
        chk = check_chow_inequality(g, fiber, form=CONIC_FORM, order=48)
        assert chk.satisfied
        assert abs(chk.slack) < 1e-9
        assert chk.exponents == section_diagonal(g) == (0, 0, -1)

    def test_identity_equality(self):
        g = LaurentMatrix.identity(3)
        fiber = central_fiber_cycle(CONIC_FORM, g)
        chk = check_chow_inequality(g, fiber, form=CONIC_FORM, order=48)
        assert chk.satisfied and chk.chow == 0

    def test_perturbed_suite_never_violates(self):
        rng = random.Random(1234)
        strict = 0
        for _ in range(20):
            g, _ = random_admissible_loop(rng)
            fiber = central_fiber_cycle(CONIC_FORM, g)
            chk = check_chow_inequality(g, fiber, form=CONIC_FORM, order=40)
            assert chk.satisfied
            if chk.slack > 1e-6:
                strict += 1
        assert strict > 0, "expected some strictly unstable directions"


class TestBalance:
    def test_balanced_input_stops_immediately(self):
        res = balance_iterate(rnc3_cycle(), max_steps=10, tol=1e-8, order=24)
        assert res.converged and res.steps == 0

    def test_distorted_rnc_converges(self):
        res = balance_iterate(
            rnc3_cycle(np.diag([2.0, 1.0, 1.0, 1.0])), max_steps=500, tol=1e-8
        )
        assert res.converged
        assert res.residuals[-1] <= 1e-8
        logs = np.log(res.residuals[5:])
        assert np.all(np.diff(logs) < 0)

    def test_unstable_cycle_reports_not_raises(self):
        lines = ProjectiveCycle(
            2,
            [
                Component(np.array([[0, 0], [1, 0], [0, 1]], dtype=complex)),
                Component(np.array([[1, 0], [0, 1], [0, 0]], dtype=complex)),
            ],
        )
        distorted = transform_cycle(lines, np.diag([3.0, 1.0, 1.0]))
        res = balance_iterate(distorted, max_steps=40, tol=1e-10, order=24)
        assert not res.converged
        assert len(res.residuals) >= 1


class TestJsonInterfaces:
    def test_cycle_roundtrip(self):
        z = rnc3_cycle()
        z2 = cycle_from_json(cycle_to_json(z))
        assert z2.ambient_dim == 3
        assert np.allclose(z2.components[0].coeffs, z.components[0].coeffs)

    def test_form_roundtrip(self):
        f = form_from_json(form_to_json(CONIC_FORM))
        assert f.monomials == CONIC_FORM.monomials

    def test_form_parse(self):
        f = form_from_json({"form": {"1,0,1": [1, 0], "0,2,0": [-1, 0]}})
        assert f.degree == 2 and f.nvars == 3
