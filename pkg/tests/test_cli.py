import json
import warnings

import numpy as np
import pytest

from yamabepy import cli
from yamabepy.errors import StiffnessError
from yamabepy.tables.columns import CURVATURE_HEADER

FLAT_EXPANDER = ["--n", "3", "--rho", "-1", "--Rbar", "2"]


def solve_flat_expander(path, *extra):
    argv = ["solve", *FLAT_EXPANDER, "--origin", "--rmax", "3", "-o", str(path), *extra]
    return cli.main(argv)


def test_solve_is_byte_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert solve_flat_expander(first) == cli.EXIT_OK
    assert solve_flat_expander(second) == cli.EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().split("\n")
    assert lines[0] == "r,phi,dphi,ddphi,f,R,H"
    assert lines[-1] == ""
    assert lines[-2].startswith("3.0,")


def test_solve_json(tmp_path):
    out = tmp_path / "a.json"
    assert solve_flat_expander(out, "--format", "json") == cli.EXIT_OK
    document = json.loads(out.read_text())
    assert document["classification"] == "RotationallySymmetric"
    assert list(document["columns"]) == ["r", "phi", "dphi", "ddphi", "f", "R", "H"]


def test_classify(tmp_path):
    profile, out = tmp_path / "a.csv", tmp_path / "class.json"
    solve_flat_expander(profile)
    assert cli.main(["classify", str(profile), "-o", str(out)]) == cli.EXIT_OK
    report = json.loads(out.read_text())
    assert report["classification"] == "RotationallySymmetric"
    assert report["critical_points"] == [0.0]


def test_curvature(tmp_path):
    profile, out = tmp_path / "a.csv", tmp_path / "curv.csv"
    solve_flat_expander(profile)
    argv = ["curvature", str(profile), *FLAT_EXPANDER, "-o", str(out)]
    assert cli.main(argv) == cli.EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CURVATURE_HEADER)
    # the r = 0 sample sits on the critical point and is skipped
    assert not lines[1].startswith("0.0,")
    for line in lines[1:]:
        fields = [float(value) for value in line.split(",")]
        assert abs(fields[1]) < 1e-8
        assert fields[5] == 0.0


def test_plot_data(tmp_path):
    profile, out = tmp_path / "a.csv", tmp_path / "plot.csv"
    solve_flat_expander(profile)
    argv = ["plot-data", str(profile), "--quantities", "phi,R", "-o", str(out)]
    assert cli.main(argv) == cli.EXIT_OK
    lines = out.read_text().splitlines()
    samples = len(profile.read_text().splitlines()) - 1
    assert lines[0] == "r,quantity,value"
    assert len(lines) == 2 * samples + 1
    assert lines[1] == "0.0,phi,0.0"


def test_verify_suite(tmp_path):
    out = tmp_path / "report.json"
    argv = ["verify", "--checks", "sign_identity,exact_solutions", "-o", str(out)]
    assert cli.main(argv) == cli.EXIT_OK
    report = json.loads(out.read_text())
    assert report["overall_pass"] is True
    for check in report["checks"]:
        assert set(check) == {"name", "residual", "tolerance", "pass"}


def test_verify_unknown_check(tmp_path):
    out = tmp_path / "report.json"
    assert cli.main(["verify", "--checks", "bogus", "-o", str(out)]) == cli.EXIT_CONFIG


def _scale_phi(source, target, factor):
    lines = source.read_text().split("\n")
    header = lines[0].split(",")
    column = header.index("phi")
    scaled = [lines[0]]
    for line in lines[1:]:
        if not line:
            continue
        fields = line.split(",")
        fields[column] = repr(float(fields[column]) * factor)
        scaled.append(",".join(fields))
    target.write_text("\n".join(scaled) + "\n")


def test_verify_profile_detects_corruption(tmp_path):
    profile, corrupted = tmp_path / "a.csv", tmp_path / "bad.csv"
    solve_flat_expander(profile)
    _scale_phi(profile, corrupted, 1.1)
    common = [*FLAT_EXPANDER, "--checks", "soliton_residual", "--fiber-points", "4"]
    good = ["verify", "--profile", str(profile), *common, "-o", str(tmp_path / "good.json")]
    assert cli.main(good) == cli.EXIT_OK
    bad = ["verify", "--profile", str(corrupted), *common, "-o", str(tmp_path / "bad.json")]
    assert cli.main(bad) == cli.EXIT_VERIFICATION_FAILED
    report = json.loads((tmp_path / "bad.json").read_text())
    assert report["overall_pass"] is False


def test_config_file(tmp_path):
    config, out = tmp_path / "run.yaml", tmp_path / "a.csv"
    config.write_text("n: 3\nrho: -1\nRbar: 2\norigin: true\nrmax: 2\n")
    assert cli.main(["solve", "--config", str(config), "-o", str(out)]) == cli.EXIT_OK
    assert out.read_text().splitlines()[-1].startswith("2.0,")
    # flags override the file
    assert cli.main(["solve", "--config", str(config), "--rmax", "1", "-o", str(out)]) == 0
    assert out.read_text().splitlines()[-1].startswith("1.0,")


def test_config_errors(tmp_path):
    assert cli.main(["solve", *FLAT_EXPANDER]) == cli.EXIT_CONFIG
    assert cli.main(["solve", "--n", "3", "--rho", "0", "--origin"]) == cli.EXIT_CONFIG
    # Rbar does not match a round fiber with kappa = 2
    argv = ["solve", *FLAT_EXPANDER, "--origin", "--kappa", "2"]
    assert cli.main(argv) == cli.EXIT_CONFIG
    config = tmp_path / "run.yaml"
    config.write_text("bogus: 1\n")
    assert cli.main(["solve", "--config", str(config)]) == cli.EXIT_CONFIG
    assert cli.main(["classify", str(tmp_path / "missing.csv")]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["solve", "--direction", "sideways"])
    assert excinfo.value.code == 2


def test_numerical_failure(tmp_path, monkeypatch):
    def stalled(*args, **kwargs):
        raise StiffnessError("step size underflow")

    monkeypatch.setattr(cli, "integrate", stalled)
    assert solve_flat_expander(tmp_path / "a.csv") == cli.EXIT_NUMERICAL


def test_run_config_precedence():
    config = cli.RunConfig.from_sources(
        "solve", {"n": 4, "rho": 1, "Rbar": 6, "checks": ["a", "b"]}, {"rho": -1.0, "n": None}
    )
    assert config.n == 4
    assert config.rho == -1.0
    assert config.rbar == 6.0
    assert config.checks == ("a", "b")
    assert config.params().n == 4


def _write_profile_csv(fname, rows):
    lines = ["r,phi,dphi,ddphi,f,R,H"]
    lines.extend(",".join(repr(float(value)) for value in row) for row in rows)
    fname.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_curvature(fname):
    lines = fname.read_text().splitlines()
    assert lines[0] == ",".join(CURVATURE_HEADER)
    return [[float(value) for value in line.split(",")] for line in lines[1:]]


def test_curvature_hyperbolic_space(tmp_path):
    # phi = cosh r over a hyperbolic fiber is hyperbolic 4-space, Ric = -3 g
    profile, out = tmp_path / "h4.csv", tmp_path / "curv.csv"
    radii = np.linspace(0.2, 2.0, 10)
    _write_profile_csv(
        profile,
        [(r, np.cosh(r), np.sinh(r), np.cosh(r), np.sinh(r), -12.0, 3 * np.tanh(r)) for r in radii],
    )
    argv = ["curvature", str(profile), "--fiber", "hyperbolic"]
    argv += ["--n", "4", "--rho", "0", "--Rbar", "-6", "-o", str(out)]
    assert cli.main(argv) == cli.EXIT_OK
    rows = _read_curvature(out)
    assert len(rows) == len(radii)
    for r, scalar, r11, ric_min, ric_max, weyl_max in rows:
        assert scalar == pytest.approx(-12.0, abs=1e-9)
        assert r11 == pytest.approx(-3.0, abs=1e-12)
        assert ric_min == pytest.approx(-3.0, abs=1e-9)
        assert ric_max == pytest.approx(-3.0, abs=1e-9)
        assert weyl_max < 1e-9


def test_curvature_product_of_spheres(tmp_path):
    # R x S2 x S2 (phi = 1) is not conformally flat
    profile, out = tmp_path / "s2s2.csv", tmp_path / "curv.csv"
    _write_profile_csv(profile, [(r, 1.0, 0.0, 0.0, r, 4.0, 0.0) for r in (0.0, 0.5, 1.0)])
    argv = ["curvature", str(profile), "--fiber", "product", "--factors", "2:1,2:1"]
    argv += ["--n", "5", "--rho", "1", "--Rbar", "4", "-o", str(out)]
    assert cli.main(argv) == cli.EXIT_OK
    rows = _read_curvature(out)
    assert len(rows) == 3
    for r, scalar, r11, ric_min, ric_max, weyl_max in rows:
        assert scalar == pytest.approx(4.0)
        assert r11 == 0.0
        assert ric_min == pytest.approx(1.0)
        assert ric_max == pytest.approx(1.0)
        assert weyl_max > 1e-3


def test_fiber_must_match_rbar(tmp_path):
    # the cylinder phi = 2 over a round fiber of curvature 2 has Rbar = 4
    profile = tmp_path / "cylinder.csv"
    params = ["--n", "3", "--rho", "1", "--Rbar", "4"]
    argv = ["solve", *params, "--phi0", "2", "--rmax", "1", "-o", str(profile)]
    assert cli.main(argv) == cli.EXIT_OK
    out = str(tmp_path / "out.csv")
    assert cli.main(["curvature", str(profile), *params, "-o", out]) == cli.EXIT_CONFIG
    assert cli.main(["curvature", str(profile), *params, "--kappa", "2", "-o", out]) == 0
    verify = ["verify", "--profile", str(profile), *params, "--checks", "soliton_residual"]
    assert cli.main([*verify, "-o", out]) == cli.EXIT_CONFIG


@pytest.mark.parametrize(
    "name, content",
    [
        ("short.csv", b"r,phi,dphi,ddphi,f,R,H\n0.0,1.0\n"),
        ("broken.json", b'{"columns": '),
        ("latin1.csv", b"r,phi,dphi,ddphi,f,R,H\n0.0,\xe9,0,0,0,0,0\n"),
    ],
)
def test_malformed_profile_is_a_config_error(tmp_path, name, content):
    profile = tmp_path / name
    profile.write_bytes(content)
    argv = ["classify", str(profile), "-o", str(tmp_path / "out.json")]
    assert cli.main(argv) == cli.EXIT_CONFIG


def test_flags_supply_profile_params(tmp_path):
    profile = tmp_path / "a.csv"
    solve_flat_expander(profile)
    config = cli.RunConfig.from_sources(
        "classify", {}, {"profile": str(profile), "n": 3, "rho": -1.0, "rbar": 2.0}
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        loaded = cli._read_profile(config)
    assert not [w for w in caught if "carries no soliton parameters" in str(w.message)]
    assert loaded.params.rbar == 2.0


def test_every_flag_has_help():
    parser = cli.build_parser()
    subparsers = next(a for a in parser._actions if a.choices and a.dest == "command")
    for name, sub in subparsers.choices.items():
        for action in sub._actions:
            if action.option_strings:
                assert action.help, f"{name} {action.option_strings} has no help"
