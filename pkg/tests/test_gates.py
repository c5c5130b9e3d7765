import numpy as np
import pytest

from dfsrepeater.core import ValidationError
from dfsrepeater.lattice import (AncillaParams, detuning_scan, run_cphase,
                                 run_rx_gate, run_rz_gate)


def test_rz_interacting_gate_quality():
    res = run_rz_gate(75.0, theta=np.pi, n_samples=2)
    assert res.phase_error < 1e-3
    assert res.f0 > 1 - 1e-9
    assert res.f1 > 1 - 3e-3


def test_rz_free_mode():
    res = run_rz_gate(1e-2, mode="free", n_samples=2)
    assert res.gate_infidelity < 2e-3


def test_rx_gate_quality():
    res = run_rx_gate(75.0, n_samples=2)
    assert 1 - res.f_x_projected < 1e-3
    assert res.doublon_weight < 5e-3


def test_cphase_interacting_blocks_the_register():
    anc = AncillaParams(site=1, U_q0=100.0, U_q1=0.0, sigma=0)
    res = run_cphase(75.0, anc, mode="interacting", n_samples=2)
    assert res.blocked_prob > 1 - 1e-3
    assert res.leakage_max < 5e-4


def test_cphase_free_mode_swap():
    anc = AncillaParams(site=1, U_q0=100.0, U_q1=0.0, sigma=1)
    res = run_cphase(1e-6, anc, mode="free", n_samples=2)
    assert 1 - res.f_01 < 1e-6
    assert res.t_gate == pytest.approx(np.pi / np.sqrt(2))


def test_detuning_scan_shapes_and_validation():
    grid = np.array([0.0, 5e-3, 1e-2])
    res = detuning_scan("rz", "j2_over_j1", grid, u_over_j=100.0)
    assert res.infidelity.shape == grid.shape
    assert np.all(res.infidelity < 1e-3)
    assert np.all(np.isfinite(res.phase_error))
    with pytest.raises(ValidationError):
        detuning_scan("rz", "uq1_over_j", grid)
    with pytest.raises(ValidationError):
        detuning_scan("rz", "j2_over_j1", np.array([]))


def test_rx_scan_columns():
    res = detuning_scan("rx", "uab_over_u", np.array([0.98, 1.0, 1.02]),
                        u_over_j=75.0)
    cols = res.columns()
    assert list(cols) == ["uab_over_u", "infidelity", "phase_error", "leakage"]
    assert np.all(np.isnan(cols["phase_error"]))
