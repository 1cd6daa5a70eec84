import math

import numpy as np
import pytest

import spcasimir as sc

HBAR = 1.054571817e-34
C = 299792458.0


def test_plane_plane_closed_form():
    L = 1e-6
    spec = sc.JobSpec(R=10e-6, L=L)
    exact = -math.pi**2 * HBAR * C / (720 * L**3)
    assert sc.plane_plane_free_energy(spec, L) == pytest.approx(exact, rel=1e-6)
    assert sc.pfa_force(spec) == pytest.approx(-math.pi**3 * HBAR * C * 10e-6 / (360 * L**3), rel=1e-12)


def test_scattering_matrix_is_symmetric_positive_definite():
    S = sc.scattering_matrix(R=10e-6, L=1e-6, xi=C / 11e-6, m=1, ell_dim=30)
    assert S.shape == (60, 60)
    assert np.allclose(S, S.T, rtol=0, atol=1e-15)
    assert np.linalg.eigvalsh(S).min() > 0
    sign, logdet = np.linalg.slogdet(S)
    assert sign == 1
    for backend in ("cholesky", "hodlr"):
        got = sc.block_logdet(R=10e-6, L=1e-6, xi=C / 11e-6, m=1, ell_dim=30, backend=backend)
        assert got == pytest.approx(logdet, rel=1e-10)


def test_free_energy_result_dict():
    spec = sc.JobSpec(R=3e-6, L=1e-6, T=300.0, plane=sc.Material.gold_drude(),
                      sphere=sc.Material.gold_drude())
    res = sc.free_energy(spec)
    assert res["free_energy_J"] < 0
    total = sum(e["weight"] * e["logdet"] for e in res["ledger"])
    assert total == pytest.approx(res["free_energy_J"], rel=1e-12)
    assert res["spec"]["ell_dim"] == spec.resolved_ell_dim()


def test_spec_and_errors():
    spec = sc.JobSpec(R=1e-6, L=1e-7)
    spec.backend = "cholesky"
    spec.xi_tol = 1e-6
    assert spec.to_dict()["backend"] == "cholesky"
    with pytest.raises(ValueError):
        spec.backend = "lu"
    bad = sc.JobSpec(R=-1.0, L=1e-7)
    with pytest.raises(ValueError):
        bad.validate()
    assert sc.Material.parse("constant:4").epsilon(1e14) == pytest.approx(4.0)


def test_cli_entry_point():
    code, out, err = sc.run_cli(["compute", "--radius", "2e-6", "--gap", "1e-6",
                                 "--temperature", "300", "--quantity", "free-energy", "--no-ledger"])
    assert code == 0, err
    assert '"free_energy_J"' in out
    code, _, _ = sc.run_cli(["compute", "--gap", "1e-6"])
    assert code == 2
