import math

import numpy as np
import pytest

from catforms.errors import DegenerateError, InputError, ProjectionError, ResampleError
from catforms.flow import IntegratorConfig, integrate
from catforms.geometry import CurveState, FamilySpec
from catforms.surfaces import (RevolutionPatch, export_mesh, graph_geodesic_curvature, grid_mean_curvature,
                               h3_mean_curvature, load_obj, mesh_arrays, minimality_report,
                               numeric_fundamental_forms, s3_mean_curvature, s3_mean_curvature_from_kappa,
                               stereographic)

TWO_PI = 2 * math.pi


def clifford(n_t=65, n_angular=64):
    return RevolutionPatch.from_function("s3", lambda t: math.pi / 4 + 0 * t, np.linspace(0, TWO_PI, n_t), n_angular)


def hemisphere(R=2.0, n_t=41, n_angular=32):
    t = np.linspace(0.2, 1.3, n_t)
    return RevolutionPatch.from_function("h3", lambda t: R * np.cos(t), t, n_angular, v_of_t=lambda t: R * np.sin(t))


class TestClosedForms:
    def test_parallel_circles(self):
        assert s3_mean_curvature(math.pi / 4, 0, 0) == pytest.approx(0, abs=1e-15)
        assert s3_mean_curvature(math.pi / 6, 0, 0) == pytest.approx(2 / math.sqrt(3), abs=1e-14)
        for u in np.linspace(0.1, 1.4, 9):
            assert s3_mean_curvature(u, 0, 0) == pytest.approx(2 / math.tan(2 * u), abs=1e-13)

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            s3_mean_curvature(0.0, 0.1, 0.0)
        with pytest.raises(DegenerateError):
            h3_mean_curvature(0.0, 1.0, 0.0, 1.0, 0.0)

    def test_dual_identity(self, rng):
        u = rng.uniform(0.05, 1.5, 10_000)
        du = rng.uniform(-3, 3, 10_000)
        ddu = rng.uniform(-10, 10, 10_000)
        worst = 0.0
        for a, b, c in zip(u, du, ddu):
            k = graph_geodesic_curvature(a, b, c)
            speed = math.sqrt(b * b + math.cos(a) ** 2)
            lhs, rhs = s3_mean_curvature(a, b, c), s3_mean_curvature_from_kappa(a, speed, k)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        assert worst < 1e-11

    def test_h3_examples(self):
        for t in np.linspace(0.1, 1.4, 7):
            R = 1.7
            assert h3_mean_curvature(R * math.cos(t), R * math.sin(t), -math.sin(t), math.cos(t), 1 / R) == \
                pytest.approx(0, abs=1e-15)
        assert h3_mean_curvature(1.0, 2.0, 0.0, 1.0, 0.0) == pytest.approx(1.0, abs=1e-15)


class TestNumericForms:
    def test_clifford(self):
        f = numeric_fundamental_forms(clifford(), 1.0, 0.7)
        assert abs(f.H) < 1e-6

    def test_parallel_pi_6(self):
        p = RevolutionPatch.from_function("s3", lambda t: math.pi / 6 + 0 * t, np.linspace(0, 1, 5))
        assert numeric_fundamental_forms(p, 0.5, 0.3).H == pytest.approx(2 / math.sqrt(3), abs=1e-4)

    def test_hemisphere(self):
        assert abs(numeric_fundamental_forms(hemisphere(), 0.7, 1.1).H) < 1e-4

    def test_normal_is_unit_and_orthogonal(self):
        p = RevolutionPatch.from_function("s3", lambda t: 0.6 + 0.2 * np.sin(t), np.linspace(0, 3, 5))
        f = numeric_fundamental_forms(p, 1.2, 0.4)
        x = p.embed(1.2, 0.4)
        assert np.linalg.norm(f.normal) == pytest.approx(1, abs=1e-14)
        assert abs(f.normal @ x) < 1e-12

    @pytest.mark.parametrize("space", ["s3", "h3"])
    def test_matches_closed_form(self, space, rng):
        for _ in range(100):
            a, b, w, ph = rng.uniform(0.1, 0.3), rng.uniform(-0.4, 0.4), rng.uniform(0.5, 2), rng.uniform(0, 6)
            t = rng.uniform(0.2, 1.0)
            if space == "s3":
                u = lambda t: 0.7 + a * np.sin(w * t + ph) + b * t * t / 4  # noqa: E731
                p = RevolutionPatch.from_function("s3", u, np.linspace(0, 1.2, 3))
                du = a * w * math.cos(w * t + ph) + b * t / 2
                ddu = -a * w * w * math.sin(w * t + ph) + b / 2
                ref = s3_mean_curvature(float(u(t)), du, ddu)
            else:
                p = RevolutionPatch.from_function("h3", lambda t: 1 + a * np.sin(w * t + ph) + t, np.linspace(0, 1.2, 3),
                                                  v_of_t=lambda t: 1 + b * t * t + t)
                du, dv = a * w * math.cos(w * t + ph) + 1, 2 * b * t + 1
                ddu, ddv = -a * w * w * math.sin(w * t + ph), 2 * b
                ke = (du * ddv - dv * ddu) / math.hypot(du, dv) ** 3
                ref = h3_mean_curvature(1 + a * math.sin(w * t + ph) + t, 1 + b * t * t + t, du, dv, ke)
            num = numeric_fundamental_forms(p, t, rng.uniform(0, TWO_PI)).H
            assert abs(num - ref) < 1e-4

    @pytest.mark.parametrize("space", ["s3", "h3"])
    def test_rotation_invariance(self, space):
        if space == "s3":
            p = RevolutionPatch.from_function("s3", lambda t: 0.6 + 0.2 * np.sin(t), np.linspace(0, 3, 5))
        else:
            p = RevolutionPatch.from_function("h3", lambda t: 1 + 0.3 * np.sin(t), np.linspace(0, 3, 5),
                                              v_of_t=lambda t: 1 + t)
        hs = [numeric_fundamental_forms(p, 1.1, s).H for s in np.linspace(0, TWO_PI, 16, endpoint=False)]
        assert np.ptp(hs) < 1e-8


class TestPatch:
    def test_single_sample(self):
        with pytest.raises(InputError):
            RevolutionPatch.from_function("s3", lambda t: 0.5 + 0 * t, [0.0])

    def test_inadmissible(self):
        with pytest.raises(InputError):
            RevolutionPatch.from_function("s3", lambda t: 2.0 + 0 * t, [0.0, 1.0])
        with pytest.raises(InputError):
            RevolutionPatch.from_function("h3", lambda t: 1 + 0 * t, [0.0, 1.0], v_of_t=lambda t: t - 0.5)
        with pytest.raises(InputError):
            RevolutionPatch.from_function("r4", lambda t: 1 + 0 * t, [0.0, 1.0])

    def test_embedding_on_sphere(self):
        g = clifford(9, 8).grid()
        np.testing.assert_allclose(np.linalg.norm(g, axis=-1), 1, atol=1e-15)

    def test_from_curve_not_monotone(self):
        c = integrate(FamilySpec("sphere-extrinsic"), CurveState(0.5, 0, 0.0), IntegratorConfig(max_length=1))
        with pytest.raises(ResampleError):
            RevolutionPatch.from_curve(c, "s3")


class TestMesh:
    def test_clifford_counts(self, tmp_path):
        nv, nt = export_mesh(clifford(), tmp_path / "c.obj")
        assert (nv, nt) == (65 * 65, 8192)
        verts, faces = load_obj(tmp_path / "c.obj")
        assert verts.shape == (nv, 3) and faces.shape == (nt, 3)
        assert faces.min() == 0 and faces.max() == nv - 1

    def test_seam_duplicated(self):
        verts, _ = mesh_arrays(clifford(5, 8))
        g = verts.reshape(5, 9, 3)
        np.testing.assert_array_equal(g[:, 0], g[:, -1])

    def test_projection(self):
        x = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
        np.testing.assert_allclose(stereographic(x), [[0, 0, 0], [0, 0, 1]], atol=1e-15)
        with pytest.raises(ProjectionError):
            stereographic(np.array([[-1.0, 0, 0, 1e-12]]))

    def test_pole_on_patch(self, tmp_path):
        with pytest.raises(ProjectionError):
            export_mesh(clifford(5, 8), tmp_path / "x.obj", pole=clifford(5, 8).embed(0.0, 0.0))

    def test_hemisphere_round_trip(self, tmp_path):
        p = hemisphere(n_t=41, n_angular=32)
        export_mesh(p, tmp_path / "h.obj")
        verts, _ = load_obj(tmp_path / "h.obj")
        H = grid_mean_curvature(verts, 41, 32)
        assert np.max(np.abs(H)) < 1e-2


class TestMinimality:
    def test_extrinsic_sphere_minimal(self):
        c = integrate(FamilySpec("sphere-extrinsic"), CurveState(0.7, 0, 1.2), IntegratorConfig(max_length=1.5))
        assert minimality_report(c, "s3").max_abs < 1e-6

    def test_intrinsic_sphere_not_minimal(self):
        c = integrate(FamilySpec("sphere"), CurveState(0.7, 0, 1.2), IntegratorConfig(max_length=1.5))
        assert minimality_report(c, "s3").max_abs > 1e-2

    def test_clifford_curve(self):
        c = integrate(FamilySpec("sphere-extrinsic"), CurveState(math.pi / 4, 0, math.pi / 2),
                      IntegratorConfig(max_length=TWO_PI))
        assert np.max(np.abs(c.u - math.pi / 4)) < 1e-12
        assert minimality_report(c, "s3").max_abs < 1e-12

    def test_horodist_minimal(self):
        c = integrate(FamilySpec("hyp-horodist"), CurveState(1, 2, 0.8), IntegratorConfig(max_length=2))
        r = minimality_report(c, "h3")
        assert r.is_minimal() and r.max_abs < 1e-6

    def test_geodesic_family_not_minimal(self):
        c = integrate(FamilySpec("hyp-geodesic"), CurveState(1, 2, 0.8), IntegratorConfig(max_length=2))
        assert minimality_report(c, "h3").max_abs > 1e-2

    def test_numeric_agrees_on_ode_surface(self):
        c = integrate(FamilySpec("hyp-horodist"), CurveState(1, 2, 0.8), IntegratorConfig(max_length=2))
        p = RevolutionPatch.from_curve(c, "h3")
        for t in (0.3, 1.0, 1.7):
            assert abs(numeric_fundamental_forms(p, t, 0.5).H) < 1e-5

    def test_wrong_space(self):
        c = integrate(FamilySpec("hyp-horodist"), CurveState(1, 2, 0.8), IntegratorConfig(max_length=0.1))
        with pytest.raises(InputError):
            minimality_report(c, "s3")

    def test_not_a_graph(self):
        c = integrate(FamilySpec("sphere-extrinsic"), CurveState(0.5, 0, 0.0), IntegratorConfig(max_length=0.5))
        with pytest.raises(ResampleError):
            minimality_report(c, "s3")
