import json
import math
import re

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from catforms import geometry as geo
from catforms import io
from catforms.cli import main, parse_grid
from catforms.errors import InputError
from catforms.flow import IntegratorConfig, integrate
from catforms.geometry import CurveState, FamilySpec


def solve(tmp_path, name, *extra, fmt="csv"):
    out = tmp_path / name
    code = main(["solve", *extra, "--out", str(out), "--format", fmt])
    return code, out


class TestFiles:
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip_exact(self, tmp_path, fmt):
        fam = FamilySpec("sphere")
        state = CurveState(0.8, 0.0, math.pi / 2)
        cfg = IntegratorConfig(max_length=1)
        c = integrate(fam, state, cfg)
        path = tmp_path / f"c.{fmt}"
        io.write_curve(c, path, io.build_manifest(fam, state, cfg, c, fmt), fmt)
        back = io.read_curve(path, fam)
        for name in ("t", "u", "v", "theta", "first_integral", "kappa_target", "kappa_actual"):
            assert np.array_equal(getattr(back, name), getattr(c, name))
        m = io.read_manifest(path)
        assert m["schema"] == 1 and m["family"] == "sphere" and m["samples"] == len(c)
        if fmt == "json":
            assert json.loads(path.read_text())["manifest"]["family"] == "sphere"

    def test_header_verbatim(self, tmp_path):
        code, out = solve(tmp_path, "e.csv", "--family", "euclidean", "--u0", "0", "--v0", "1",
                          "--theta0", "0.3", "--length", "0.1")
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,u,v,theta,kappa_target,kappa_actual,residual,first_integral"
        assert lines[1].endswith(",")  # no first integral for this family

    def test_bad_files(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(InputError):
            io.read_columns(p)
        p.write_text("{not json")
        with pytest.raises(InputError):
            io.read_columns(p)
        with pytest.raises(InputError):
            io.read_columns(tmp_path / "missing.csv")
        with pytest.raises(InputError):
            io.manifest_inputs({"schema": 99})

    def test_rerun_from_manifest_is_bit_identical(self, tmp_path):
        code, out = solve(tmp_path, "a.csv", "--family", "horocycle", "--alpha", "2", "--u0", "0",
                          "--v0", "3", "--theta0", "0.2", "--length", "2")
        assert code == 0
        again = tmp_path / "b.csv"
        assert main(["solve", "--from-manifest", str(io.manifest_path(out)), "--out", str(again)]) == 0
        assert out.read_bytes() == again.read_bytes()


class TestSolve:
    def test_fixed_c_run_warns(self, tmp_path, capsys):
        code, out = solve(tmp_path, "f1.csv", "--family", "sphere", "--alpha", "1", "--u0", "0.8", "--v0", "0",
                          "--theta0", "1.5707963", "--c", "0.4")
        assert code == 0
        assert "differs" in capsys.readouterr().err
        assert io.read_manifest(out)["warnings"]

    def test_geodesic_family_vertical_start(self, tmp_path):
        code, out = solve(tmp_path, "f2.csv", "--family", "hyp-geodesic", "--alpha", "1", "--u0", "1",
                          "--v0", "3", "--theta0", "1.5707963")
        assert code == 0
        assert io.read_manifest(out)["stop_reason"] in ("domain-guard", "length-exhausted")

    def test_straight_line(self, tmp_path):
        code, out = solve(tmp_path, "l.csv", "--family", "euclidean", "--alpha", "0", "--u0", "0", "--v0", "1",
                          "--theta0", "0.4", "--length", "3")
        assert code == 0
        cols = io.read_columns(out)
        assert np.max(np.abs(cols["residual"])) < 1e-12

    def test_exit_codes(self, tmp_path):
        assert solve(tmp_path, "x.csv", "--family", "hyp-geodesic", "--u0", "1", "--v0", "-1", "--theta0", "0")[0] == 1
        assert solve(tmp_path, "x.csv", "--family", "nope", "--u0", "1", "--v0", "1", "--theta0", "0")[0] == 3
        assert solve(tmp_path, "x.csv", "--family", "sphere", "--u0", "1")[0] == 3
        assert solve(tmp_path, "x.csv", "--family", "sphere", "--u0", "0.5", "--v0", "0", "--theta0", "0",
                     "--step", "-1")[0] == 3

    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(kind=st.sampled_from(geo.KINDS), u=st.floats(-5, 5), v=st.floats(-5, 5), th=st.floats(-4, 4))
    def test_exit_code_contract(self, tmp_path, kind, u, v, th):
        code, out = solve(tmp_path, "p.csv", "--family", kind, f"--u0={u!r}", f"--v0={v!r}",
                          f"--theta0={th!r}", "--length", "0.05")
        state = CurveState(u, v, th)
        cfg = IntegratorConfig()
        admissible = geo.guard(kind, 1.0, u, v, 2 * cfg.eps_d, 2 * cfg.eps_pole) is None
        assert code in (0, 1)
        if code == 0:
            assert io.read_manifest(out)["initial"] == {"u": state.u, "v": state.v, "theta": state.theta}
        if admissible:
            assert code == 0


class TestVerify:
    def _fresh(self, tmp_path):
        return solve(tmp_path, "s.csv", "--family", "sphere", "--u0", "0.8", "--v0", "0",
                     "--theta0", "1.5707963267948966", "--length", "1")[1]

    def test_clean(self, tmp_path):
        out = self._fresh(tmp_path)
        assert main(["verify", "--in", str(out), "--family", "sphere", "--alpha", "1"]) == 0

    def test_corrupted_row(self, tmp_path, capsys):
        out = self._fresh(tmp_path)
        lines = out.read_text().splitlines()
        fields = lines[501].split(",")
        fields[2] = repr(float(fields[2]) + 1e-3)
        lines[501] = ",".join(fields)
        out.write_text("\n".join(lines) + "\n")
        capsys.readouterr()
        assert main(["verify", "--in", str(out), "--family", "sphere", "--alpha", "1"]) == 1
        row = int(re.search(r"row=(\d+)", capsys.readouterr().out).group(1))
        assert abs(row - 500) <= 2

    def test_alpha_mismatch(self, tmp_path, capsys):
        out = self._fresh(tmp_path)
        capsys.readouterr()
        assert main(["verify", "--in", str(out), "--family", "sphere", "--alpha", "1.1"]) == 1
        res = float(re.search(r"max_residual=(\S+)", capsys.readouterr().out).group(1))
        assert res > 1e-3

    def test_malformed(self, tmp_path):
        p = tmp_path / "junk.csv"
        p.write_text("hello\n")
        assert main(["verify", "--in", str(p), "--family", "sphere"]) == 3


class TestOracleCommand:
    def test_cosh(self, capsys):
        c = repr(math.cosh(1))
        assert main(["oracle", "--family", "euclidean", f"--a=-1,{c}", f"--b=1,{c}", "--nodes", "101"]) == 0
        dist = float(re.search(r"distance=(\S+)", capsys.readouterr().out).group(1))
        assert dist < 5e-3

    def test_halving(self, capsys):
        dists = []
        for n in (25, 50):
            capsys.readouterr()
            code = main(["oracle", "--family", "sphere", "--a=0.7,0", "--b=0.9,0.4", "--nodes", str(n),
                         "--tol", "1e-10", "--step", "1e-4"])
            assert code == 0
            dists.append(float(re.search(r"distance=(\S+)", capsys.readouterr().out).group(1)))
        assert 3.0 < dists[0] / dists[1] < 5.5

    def test_identical_endpoints(self):
        assert main(["oracle", "--family", "euclidean", "--a=0,1", "--b=0,1"]) == 3

    def test_nonconverged(self):
        c = repr(math.cosh(1))
        assert main(["oracle", "--family", "euclidean", f"--a=-1,{c}", f"--b=1,{c}", "--nodes", "51",
                     "--iters", "1", "--tol", "1e-12"]) == 2


class TestSurfaceCommand:
    def test_extrinsic_minimal(self, tmp_path, capsys):
        code, out = solve(tmp_path, "x.csv", "--family", "sphere-extrinsic", "--u0", "0.7", "--v0", "0",
                          "--theta0", "1.2", "--length", "1.5")
        obj = tmp_path / "x.obj"
        assert main(["surface", "--space", "s3", "--in", str(out), "--expect-minimal", "--export", str(obj),
                     "--t-samples", "33", "--angular", "16"]) == 0
        assert "vertices=561 triangles=1024" in capsys.readouterr().out
        assert obj.exists()

    def test_intrinsic_not_minimal(self, tmp_path):
        code, out = solve(tmp_path, "i.csv", "--family", "sphere", "--u0", "0.7", "--v0", "0",
                          "--theta0", "1.2", "--length", "1.5")
        assert main(["surface", "--space", "s3", "--in", str(out), "--expect-minimal"]) == 1

    def test_clifford(self, tmp_path, capsys):
        code, out = solve(tmp_path, "c.csv", "--family", "sphere-extrinsic", "--u0", repr(math.pi / 4),
                          "--v0", "0", "--theta0", repr(math.pi / 2), "--length", repr(2 * math.pi))
        capsys.readouterr()
        assert main(["surface", "--space", "s3", "--in", str(out), "--expect-minimal"]) == 0
        assert float(re.search(r"max_abs_H=(\S+)", capsys.readouterr().out).group(1)) <= 1e-12

    def test_not_a_graph(self, tmp_path):
        code, out = solve(tmp_path, "g.csv", "--family", "sphere-extrinsic", "--u0", "0.5", "--v0", "0",
                          "--theta0", "0", "--length", "0.5")
        assert main(["surface", "--space", "s3", "--in", str(out)]) == 3

    def test_horodist_h3(self, tmp_path):
        code, out = solve(tmp_path, "h.csv", "--family", "hyp-horodist", "--u0", "1", "--v0", "2",
                          "--theta0", "0.8", "--length", "2")
        assert main(["surface", "--space", "h3", "--in", str(out), "--expect-minimal"]) == 0
        code, out = solve(tmp_path, "g.csv", "--family", "hyp-geodesic", "--u0", "1", "--v0", "2",
                          "--theta0", "0.8", "--length", "2")
        assert main(["surface", "--space", "h3", "--in", str(out), "--expect-minimal"]) == 1


class TestSweep:
    def test_grid_parsing(self):
        assert parse_grid(["c=0.2,0.4"]) == [{"c": 0.2}, {"c": 0.4}]
        assert len(parse_grid(["theta0=0:1:5", "alpha=1,2"])) == 10
        for bad in ([], ["c="], ["zz=1"], ["c=a,b"], ["c=1", "c=2"]):
            with pytest.raises(InputError):
                parse_grid(bad)

    def test_fixed_c_grid(self, tmp_path):
        out = tmp_path / "fig1"
        code = main(["sweep", "--family", "sphere", "--u0", "0.8", "--v0", "0", "--theta0", "1.5707963",
                     "--grid", "c=0.2,0.4,0.5", "--jobs", "2", "--length", "2", "--out", str(out)])
        assert code == 0
        runs = json.loads((out / "sweep.json").read_text())["runs"]
        assert [r["params"]["c"] for r in runs] == [0.2, 0.4, 0.5]
        for r in runs:
            m = io.read_manifest(out / r["file"])
            assert m["c"] == r["params"]["c"] and m["warnings"]

    def test_hundred_headings(self, tmp_path):
        out = tmp_path / "th"
        code = main(["sweep", "--family", "horocycle", "--u0", "0", "--v0", "2", "--theta0", "0",
                     "--grid", "theta0=-3:3:100", "--length", "0.2", "--step", "0.01", "--out", str(out)])
        assert code == 0
        names = sorted(p.name for p in out.glob("run_*.csv"))
        assert names == [f"run_{i:04d}.csv" for i in range(100)]
        assert all(io.manifest_path(out / n).exists() for n in names)

    def test_partial_failure(self, tmp_path):
        out = tmp_path / "pf"
        code = main(["sweep", "--family", "hyp-geodesic", "--u0", "1", "--theta0", "0", "--v0", "1",
                     "--grid", "v0=-1,2", "--length", "0.1", "--out", str(out)])
        assert code == 0
        runs = json.loads((out / "sweep.json").read_text())["runs"]
        assert [r["status"] for r in runs] == ["failed", "ok"]
        code = main(["sweep", "--family", "hyp-geodesic", "--u0", "1", "--theta0", "0",
                     "--grid", "v0=-1,-2", "--length", "0.1", "--out", str(out)])
        assert code == 1

    def test_empty_grid(self, tmp_path):
        assert main(["sweep", "--family", "sphere", "--u0", "0.8", "--v0", "0", "--theta0", "1",
                     "--grid", "c=", "--out", str(tmp_path / "e")]) == 3

    def test_jobs_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CATFORMS_JOBS", "2")
        out = tmp_path / "env"
        assert main(["sweep", "--family", "euclidean", "--u0", "0", "--v0", "1", "--theta0", "0",
                     "--grid", "alpha=0,1,2", "--length", "0.1", "--out", str(out)]) == 0
        assert len(list(out.glob("run_*.csv"))) == 3
