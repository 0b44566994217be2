import math

import numpy as np
import pytest

from qcorr.experiments import (
    ConfigError,
    GridConfig,
    OverlapError,
    RunConfig,
    SdpConfig,
    derive_seed,
    generate_split,
    grid_angles,
    grid_params,
    phase_csv,
    phase_rows,
    sdp_batch,
    simulate_item,
)
from qcorr.states import distance_to_degenerate, theoretical_label


class TestConfig:
    def test_round_trip_and_hash(self):
        cfg = RunConfig.from_dict({"seed": 3, "grid": {"n_p": 12}, "svm": {"C": 10.0}})
        assert cfg.grid.n_p == 12 and cfg.svm.C == 10.0
        again = RunConfig.from_dict(cfg.to_dict())
        assert again == cfg
        assert again.config_hash() == cfg.config_hash()
        assert cfg.with_overrides(seed=4).config_hash() != cfg.config_hash()

    @pytest.mark.parametrize(
        "bad",
        [{"sede": 1}, {"grid": {"np": 3}}, {"noise": "gaussian"}, {"n0": 0}, {"grid": {"n_train": 0}}],
    )
    def test_rejects_bad_config(self, bad):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(bad)

    def test_overrides_ignore_none(self):
        cfg = RunConfig(seed=5)
        assert cfg.with_overrides(seed=None, noise=None) == cfg
        assert cfg.with_overrides(noise="none").noise == "none"


def test_derive_seed():
    assert derive_seed(0, "train/poisson", 3) == derive_seed(0, "train/poisson", 3)
    seeds = {derive_seed(r, t, i) for r in (0, 1) for t in ("a", "b") for i in range(50)}
    assert len(seeds) == 200
    assert 0 <= derive_seed(7, "x", 1) < 2**64


class TestGrid:
    def test_default_sizes_and_exclusion(self):
        train, test = grid_params(GridConfig())
        assert len(train) == 445 and len(test) == 455
        for t in np.concatenate([train[:, 1], test[:, 1]]):
            assert distance_to_degenerate(t) >= 0.1
            assert 0 < t < 2 * math.pi
        assert np.all((train[:, 0] >= 0.02) & (train[:, 0] <= 0.98))

    def test_disjoint_and_offset(self):
        grid = GridConfig()
        train, test = grid_params(grid)
        pairs = {(round(p, 12), round(t, 12)) for p, t in train}
        assert not any((round(p, 12), round(t, 12)) in pairs for p, t in test)
        # every test angle sits half a training spacing after an angle of the base grid
        spacing = 2 * math.pi / grid.n_theta
        for t in np.unique(test[:, 1]):
            k = (t - spacing / 2 - spacing / 2) / spacing
            assert abs(k - round(k)) < 1e-9

    def test_layout_is_theta_major(self):
        train, _ = grid_params(GridConfig())
        np.testing.assert_allclose(train[:20, 0], np.linspace(0.02, 0.98, 20))
        assert np.all(train[:20, 1] == train[0, 1])

    @pytest.mark.parametrize("delta", [0.0, 2 * math.pi / 28])
    def test_overlap_rejected(self, delta):
        with pytest.raises(OverlapError):
            grid_params(GridConfig(delta_theta=delta))

    def test_too_many_requested(self):
        with pytest.raises(ConfigError):
            grid_params(GridConfig(n_p=5, n_theta=8, n_train=100))

    def test_angles_drop_windows(self):
        train, test = grid_angles(GridConfig(n_theta=8))
        assert len(train) == 8 and len(test) == 4


class TestSimulation:
    def test_exact_item(self):
        row = simulate_item(0.74, math.pi / 6, "none", 60000, seed=1)
        assert row["label"] == row["theory"] == 2
        assert row["f1"] == pytest.approx(0.74 / math.sqrt(2), abs=1e-14)
        assert row["fidelity"] == pytest.approx(1.0, abs=1e-12)
        assert row["source"] == "exact"

    def test_poisson_item_is_seeded(self):
        a = simulate_item(0.5, 1.0, "poisson", 60000, seed=2)
        b = simulate_item(0.5, 1.0, "poisson", 60000, seed=2)
        c = simulate_item(0.5, 1.0, "poisson", 60000, seed=3)
        assert a == b and a["f1"] != c["f1"]
        assert a["fidelity"] > 0.99

    def test_noiseless_labels_equal_theory(self, datasets, run_config):
        exact_test = generate_split(run_config, "test", "none")
        for ds in (datasets["exact_train"], exact_test):
            theory = [int(theoretical_label(p, t)) for p, t in ds.params]
            np.testing.assert_array_equal(ds.labels, theory)
            assert all(e["source"] == "exact" for e in ds.extra)

    def test_noisy_split_provenance(self, datasets):
        ds = datasets["test"]
        assert len(ds) == 455
        assert all(e["source"] == "poisson" for e in ds.extra)
        assert len({e["seed"] for e in ds.extra}) == 455
        assert min(e["fidelity"] for e in ds.extra) > 0.95

    def test_parallel_matches_serial(self):
        cfg = RunConfig(grid=GridConfig(n_p=4, n_theta=8, n_train=12, n_test=8))
        serial = generate_split(cfg, "test")
        parallel = generate_split(RunConfig(workers=2, grid=cfg.grid), "test")
        np.testing.assert_array_equal(serial.features, parallel.features)
        np.testing.assert_array_equal(serial.labels, parallel.labels)


def test_phase_export(datasets):
    ds = datasets["test"]
    pred = ds.labels.copy()
    pred[0] = (pred[0] + 1) % 4
    text = phase_csv(phase_rows(ds, pred))
    lines = text.splitlines()
    assert lines[0] == "p,theta,true,pred,correct"
    assert len(lines) == len(ds) + 1
    assert lines[1].endswith(",0") and lines[2].endswith(",1")
    p, theta = (float(v) for v in lines[1].split(",")[:2])
    assert (p, theta) == tuple(ds.params[0])


def test_sdp_batch_small():
    cfg = RunConfig(sdp=SdpConfig(dims=[[2, 2], [2, 3]], n_states=[30, 10]))
    rows, summary = sdp_batch(cfg)
    assert len(rows) == 40
    assert set(rows[0]) >= {"state_id", "ppt_min_eig", "status", "residual", "iterations", "wall_time_ms"}
    for run in summary["runs"]:
        errors = [e["error_rate"] for e in run["sweep"]]
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
        assert run["ppt_agreement"] >= 0.99
    rows2, summary2 = sdp_batch(cfg)
    strip = lambda rs: [{k: v for k, v in r.items() if k != "wall_time_ms"} for r in rs]
    assert strip(rows) == strip(rows2) and summary == summary2


def test_sdp_guard():
    with pytest.raises(ConfigError):
        sdp_batch(RunConfig(sdp=SdpConfig(dims=[[4, 7]], n_states=[1])))
