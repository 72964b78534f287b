import math

import numpy as np
import pytest

import nodal_lab as nl


def test_square_navier_eigenvalue():
    d = nl.Domain2D.rectangle(1.0, 1.0)
    (pair,) = nl.solve_modes(d, 1.0 / 32, nl.BCType.navier, 1)
    # Discrete Laplacian eigenvalue of the (1,1) sine mode.
    exact = 2 * (4 / (1.0 / 32) ** 2) * math.sin(math.pi / 64) ** 2
    assert pair.lambda_ == pytest.approx(exact, rel=1e-8)


def test_field_values_shape():
    d = nl.Domain2D.rectangle(2.0, 1.0)
    g = nl.build_grid(d, 0.125)
    f = nl.ScalarField2D.sample(g, lambda x, y: x + 2 * y)
    a = f.values()
    assert a.shape == (g.ny, g.nx)
    assert a[1, 3] == pytest.approx(3 * 0.125 + 2 * 0.125)


def test_nodal_length_of_sine_mode():
    d = nl.Domain2D.rectangle(1.0, 1.0)
    pair = nl.navier_mode(d, 2, 1, 1.0 / 64)
    ns = nl.extract_nodal(pair.u)
    assert nl.nodal_length(ns) == pytest.approx(1.0, abs=4 / 64)
    est, err = nl.crofton_length(pair.u, lines=5000, seed=3)
    assert abs(est - 1.0) <= max(3 * err, 0.03)
    assert nl.nodal_length(ns, center=(0.5, 0.5), radius=0.2) == pytest.approx(0.4, abs=1e-9)


def test_lift_and_frequency_forms():
    d = nl.Domain2D.rectangle(1.0, 1.0)
    lp = nl.lift_pair(nl.navier_mode(d, 1, 1, 1.0 / 64))
    g0, _ = lp.eval((0.5, 0.5, 0.0))
    g1, _ = lp.eval((0.5, 0.5, 0.1))
    assert g0 == pytest.approx(lp.u.value((0.5, 0.5)), rel=1e-12)
    assert g1 == pytest.approx(g0 * math.exp(math.sqrt(lp.lambda_) * 0.1), rel=1e-12)
    prof = nl.frequency_profile(lp, (0.5, 0.5, 0.0), [0.05, 0.1, 0.15])
    assert len(prof["r"]) == 3
    assert np.all(np.isfinite(prof["n_volume"]))
    np.testing.assert_allclose(prof["n_volume"], prof["n_boundary"], rtol=2e-2)


def test_errors_are_typed():
    with pytest.raises(nl.ConfigError):
        nl.ExperimentConfig.parse_text("modes=0\n")
    d = nl.Domain2D.rectangle(1.0, 1.0)
    f = nl.ScalarField2D.sample(nl.build_grid(d, 1.0 / 16), lambda x, y: 0.0)
    with pytest.raises(nl.DegenerateError):
        nl.extract_nodal(f)
    assert issubclass(nl.GridError, nl.Error)


def test_config_round_trip_and_verify(tmp_path):
    c = nl.ExperimentConfig.parse_text("h=1/16\nmodes=2\nverify.centers=2\ncrofton.lines=1000\n")
    assert nl.ExperimentConfig.parse_text(c.to_text()) == c
    c.out = str(tmp_path / "run")
    code, rows = nl.verify(c)
    assert code == 0
    assert rows[0][0] == "frequency_bound.interior"
    assert (tmp_path / "run" / "reports.csv").exists()
