"""End-to-end command-line tests, run in-process through main()."""

import numpy as np
import pytest

from isothermic import fileio
from isothermic.cli import main


def _curve_file(tmp_path, name="c.json", grid="0:1:1001"):
    path = tmp_path / name
    rc = main(
        ["curve", "--family", "circle", "--radius", "1", "--grid", grid, "--out", str(path)]
    )
    assert rc == 0
    return path


def test_curve_command_writes_loadable_json(tmp_path):
    path = _curve_file(tmp_path)
    c = fileio.load_curve(path)
    assert c.grid.num == 1001
    assert np.max(np.abs(np.sum(c.x * c.x, axis=1) - 1.0)) < 1e-12


def test_darboux_routes_agree(tmp_path, capsys):
    src = _curve_file(tmp_path)
    outs = []
    for route in ("parallel", "riccati"):
        out = tmp_path / f"{route}.json"
        rc = main(
            [
                "darboux",
                "--in",
                str(src),
                "--mu",
                "-2",
                "--init",
                "2,0",
                "--route",
                route,
                "--out",
                str(out),
                "--report",
            ]
        )
        assert rc == 0
        outs.append(fileio.load_curve(out))
    report = capsys.readouterr().out
    assert "mu" in report
    assert np.max(np.abs(outs[0].x - outs[1].x)) < 1e-9


def test_darboux_rejects_start_point_on_curve(tmp_path, capsys):
    src = _curve_file(tmp_path)
    rc = main(["darboux", "--in", str(src), "--mu", "-2", "--init", "1,0"])
    assert rc == 2
    assert "coincides" in capsys.readouterr().err


def test_bianchi_quad_reports_cross_ratio(tmp_path, capsys):
    src = _curve_file(tmp_path)
    rc = main(["bianchi", "--in", str(src), "--mu", "-2,1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "-0.5" in out


def test_bianchi_cube_routes(tmp_path, capsys):
    src = _curve_file(tmp_path)
    rc = main(["bianchi", "--in", str(src), "--mu", "-2,1,3"])
    assert rc == 0
    assert "route" in capsys.readouterr().out


def test_surface_build_check_moutard(tmp_path, capsys):
    src = _curve_file(tmp_path)
    surf = tmp_path / "s.json"
    rc = main(
        [
            "surface",
            "build",
            "--in",
            str(src),
            "--layers",
            "-2:2,0;1:0.3,-0.4",
            "--out",
            str(surf),
        ]
    )
    assert rc == 0
    rc = main(["surface", "check", "--in", str(surf)])
    assert rc == 0
    rc = main(["surface", "moutard", "--in", str(surf)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "signs" in out


def test_surface_build_requires_layers_and_out(tmp_path):
    src = _curve_file(tmp_path)
    assert main(["surface", "build", "--in", str(src)]) == 2


def test_dual_command_on_curve_and_surface(tmp_path):
    src = _curve_file(tmp_path)
    dual = tmp_path / "dual.json"
    assert main(["dual", "--in", str(src), "--out", str(dual)]) == 0
    c = fileio.load_curve(dual)
    assert c.grid.num == 1001

    surf = tmp_path / "s.json"
    main(
        ["surface", "build", "--in", str(src), "--layers", "-2:2,0", "--out", str(surf)]
    )
    sdual = tmp_path / "sdual.json"
    assert main(["dual", "--in", str(surf), "--out", str(sdual)]) == 0
    assert len(fileio.load_surface(sdual).curves) == 2


def test_calapso_command_shifts_surface_parameters(tmp_path, capsys):
    src = _curve_file(tmp_path)
    surf = tmp_path / "s.json"
    main(
        ["surface", "build", "--in", str(src), "--layers", "-2:2,0", "--out", str(surf)]
    )
    moved = tmp_path / "moved.json"
    rc = main(["calapso", "--in", str(surf), "--t", "0.4", "--out", str(moved)])
    assert rc == 0
    assert fileio.load_surface(moved).mu == [-2.4]
    assert "-2.4" in capsys.readouterr().out


def test_cmc_command_cylinder(capsys):
    rc = main(["cmc", "--fixture", "cylinder", "--radius", "1", "--layers", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "0.5" in out


def test_cmc_command_strip(capsys):
    rc = main(["cmc", "--fixture", "strip"])
    assert rc == 0


def test_verify_all_passes(capsys):
    rc = main(["verify", "--suite", "all"])
    assert rc == 0
    assert "all" in capsys.readouterr().out


def test_verify_single_suite(capsys):
    rc = main(["verify", "--suite", "minkowski"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "minkowski-lift-isotropy" in out


def test_verify_corrupt_names_offending_check(capsys):
    rc = main(["verify", "--suite", "darboux", "--corrupt", "concentric"])
    assert rc == 1
    out = capsys.readouterr().out
    assert "failed checks" in out
    assert "concentric-cross-ratio" in out


def test_verify_corrupt_surface_fixture(capsys):
    rc = main(["verify", "--suite", "surface", "--corrupt", "cylinder-patch"])
    assert rc == 1
    assert "surface-isothermic" in capsys.readouterr().out


def test_verify_writes_csv(tmp_path):
    csv_path = tmp_path / "report.csv"
    rc = main(["verify", "--suite", "clifford", "--csv", str(csv_path)])
    assert rc == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("check,")
    assert len(lines) > 2
    assert all(line.endswith(",true") for line in lines[1:])


def test_tol_override_forces_failure():
    rc = main(
        [
            "verify",
            "--suite",
            "minkowski",
            "--tol-override",
            "minkowski-lift-isotropy=1e-30",
        ]
    )
    assert rc == 1


def test_verify_user_surface_file(tmp_path, capsys):
    src = _curve_file(tmp_path)
    surf = tmp_path / "s.json"
    main(
        ["surface", "build", "--in", str(src), "--layers", "-2:2,0", "--out", str(surf)]
    )
    rc = main(["verify", "--surface", str(surf)])
    assert rc == 0
    assert "surface-isothermic" in capsys.readouterr().out


def test_export_obj_and_csv(tmp_path):
    src = _curve_file(tmp_path)
    surf = tmp_path / "s.json"
    main(
        ["surface", "build", "--in", str(src), "--layers", "-2:2,0", "--out", str(surf)]
    )
    obj = tmp_path / "mesh.obj"
    csv_path = tmp_path / "report.csv"
    rc = main(
        ["export", "--in", str(surf), "--obj", str(obj), "--csv", str(csv_path)]
    )
    assert rc == 0
    assert obj.read_text().startswith("o surface")
    assert csv_path.read_text().splitlines()[0].startswith("check,")


def test_export_needs_a_target(tmp_path, capsys):
    src = _curve_file(tmp_path)
    surf = tmp_path / "s.json"
    main(
        ["surface", "build", "--in", str(src), "--layers", "-2:2,0", "--out", str(surf)]
    )
    assert main(["export", "--in", str(surf)]) == 2


def test_missing_input_file_exits_2(tmp_path, capsys):
    rc = main(["darboux", "--in", str(tmp_path / "nope.json"), "--mu", "-2", "--init", "2,0"])
    assert rc == 2


def test_unknown_command_exits_2():
    assert main(["frobnicate"]) == 2


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_negative_values_parse_everywhere(tmp_path):
    src = _curve_file(tmp_path)
    out = tmp_path / "h.json"
    rc = main(
        ["darboux", "--in", str(src), "--mu", "-0.5", "--init", "-2,0", "--out", str(out)]
    )
    assert rc == 0
    rc = main(["bianchi", "--in", str(src), "--mu", "-2,-1"])
    assert rc == 0


def test_bad_grid_spec_exits_2(tmp_path):
    rc = main(
        ["curve", "--family", "circle", "--grid", "oops", "--out", str(tmp_path / "x.json")]
    )
    assert rc == 2
