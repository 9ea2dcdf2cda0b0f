import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

import ckn


def test_formulas():
    assert ckn.mu_FS(2.8, 5) == pytest.approx(25 / 6, rel=1e-14)
    assert ckn.theta_critical(2.8, 5) == pytest.approx(5 / 7, rel=1e-14)
    assert ckn.lambda_FS(2.8, 5 / 7, 5) == pytest.approx(2.7778, rel=1e-4)
    assert ckn.best_constant(15.65) == pytest.approx(0.0639, rel=1e-3)
    with pytest.raises(ValueError):
        ckn.mu_FS(2.0, 5)


def test_closed_form_quotient():
    z = ckn.soliton_norms(ckn.mu_FS(2.8, 5), 2.8)["Z"]
    assert z ** (0.8 / 2.8) == pytest.approx(15.65, abs=0.01)
    curve = ckn.symmetric_curve([1.0, 2.0], 1.0)
    assert [mu for mu, lam, _, _ in curve] == [lam for _, lam, _, _ in curve]


def test_fields_and_eigenpair():
    g = ckn.build_grid(n_s=121, n_phi=25, measure_mode=ckn.MeasureMode.probability)
    mu = ckn.mu_FS(2.8, 5)
    u = ckn.sample_soliton(mu, g)
    assert u.shape == (g.n_s, g.n_phi)
    assert ckn.asymmetry(g, u) < 1e-14
    lam, ev = ckn.lowest_eigenpair(g, ckn.critical_value(g, u), ckn.potential_from(g, u))
    assert lam == pytest.approx(-mu, rel=5e-3)
    assert ev.min() >= -1e-8 * ev.max()

    r = ckn.roothan_solve(g, ckn.critical_value(g, u), ckn.potential_from(g, u))
    assert r["converged"]
    assert np.all(np.diff(r["lambda_history"]) <= 1e-12 * np.maximum(1, np.abs(r["lambda_history"][:-1])))
    with pytest.raises(ValueError):
        ckn.evaluate_norms(g, np.zeros((3, 3)))


def test_gn_level():
    prof = ckn.radial_ground_state(2.8, 5)
    assert prof["pohozaev_residual"] <= 1e-5
    J = ckn.J_infinity(2.8, 5)
    lv = ckn.lambda_GN(2.8, 5, J)
    assert lv["residual"] <= 1e-8 and lv["Lambda"] > 0


def test_short_branch():
    g = ckn.build_grid(n_s=121, n_phi=25)
    b = ckn.compute_branch(g, 1.2 * ckn.mu_FS(2.8, 5), 19.0)
    kappas = [pt["kappa"] for pt in b.points]
    assert kappas == sorted(kappas)
    assert any(pt["asymmetry"] > 1e-3 for pt in b.points)
    curve = b.theta_curve(1.0)
    assert all(math.isclose(mu, lam) for mu, lam, _, _ in curve)


def test_commands(tmp_path):
    cfg = ckn.config(theta_list=[1.0], out_dir=str(tmp_path))
    ckn.run("symmetric-curve", cfg)
    text = (tmp_path / "sym_curve_1.csv").read_text()
    assert text.startswith("# format: ckn-csv 1")
    with pytest.raises(ckn.IoError):
        ckn.run("analyze", cfg)
    with pytest.raises(ValueError):
        ckn.config(colour=1)
    with pytest.raises(ckn.ConfigError):
        ckn.run("symmetric-curve", cfg, theta_list=[0.1])


def test_svg_is_valid_xml(tmp_path):
    cfg = ckn.config(theta_list=[5 / 7, 1.0], out_dir=str(tmp_path), n_s=121, n_phi=25, kappa_stop=22.0)
    ckn.run("branch", cfg)
    ckn.run("analyze", cfg)
    for tag in ("0.714286", "1"):
        root = ET.parse(tmp_path / f"diagram_{tag}.svg").getroot()
        lines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        assert len(lines) == 2
        assert sum("stroke-dasharray" in el.attrib for el in lines) == 1
