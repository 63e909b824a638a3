"""Sweep-runner tests: pairing, determinism, CSV round trip, config files."""

import json
import math

import numpy as np
import pytest

from fdhybf.config import desk_profile, paper_profile
from fdhybf.errors import ConfigError
from fdhybf.sweep import (
    CSV_HEADER,
    SweepSpec,
    axis_config,
    build_spec,
    child_seed,
    emit_csv,
    load_config,
    read_csv,
    run_sweep,
)


def small_cfg(**overrides):
    """Tiny system so each sweep cell solves in well under a second."""
    base = dict(
        bs_tx_ant=4, bs_rx_ant=4, tx_rf=2, rx_rf=2,
        n_ul=1, n_dl=1, ul_ant=2, dl_ant=2, ul_streams=1, dl_streams=1,
    )
    base.update(overrides)
    return desk_profile(**base)


def small_spec(**overrides):
    fields = dict(cfg=small_cfg(), axis="none", values=(0.0,),
                  schemes=("hybf-um",), realizations=2, seed=5)
    fields.update(overrides)
    return SweepSpec(**fields)


def strip_runtime(rows):
    return [(r.scheme, r.axis, r.axis_value, r.realization, r.seed,
             r.wsr_nats, r.wsr_bits, r.iters, r.max_violation)
            for r in rows]


class TestSweepSpec:
    def test_defaults_validate(self):
        small_spec().validate()

    @pytest.mark.parametrize("fields,needle", [
        (dict(axis="bandwidth"), "axis"),
        (dict(values=()), "values"),
        (dict(schemes=()), "schemes"),
        (dict(schemes=("zero-forcing",)), "schemes"),
        (dict(realizations=0), "realizations"),
        (dict(seed=1.5), "seed"),
    ])
    def test_invalid_fields_raise(self, fields, needle):
        with pytest.raises(ConfigError, match=needle):
            small_spec(**fields).validate()


class TestAxisConfig:
    def test_ldr_axis_moves_only_the_bs_pair(self):
        cfg = axis_config(small_cfg(), "ldr_db", -20.0)
        assert cfg.bs_tx_ldr_db == -20.0
        assert cfg.bs_rx_ldr_db == -20.0
        assert cfg.ue_tx_ldr_db == -60.0
        assert cfg.ue_rx_ldr_db == -60.0

    def test_snr_axis(self):
        assert axis_config(small_cfg(), "snr_db", 5.0).snr_db == 5.0

    def test_rf_axis_sets_both_chain_counts(self):
        cfg = axis_config(small_cfg(), "rf_chains", 4)
        assert cfg.tx_rf == 4 and cfg.rx_rf == 4

    def test_none_axis_returns_the_base(self):
        cfg = small_cfg()
        assert axis_config(cfg, "none", 0.0) is cfg


class TestChildSeed:
    def test_deterministic_and_realization_keyed(self):
        assert child_seed(3, 0) == child_seed(3, 0)
        assert child_seed(3, 0) != child_seed(3, 1)
        assert child_seed(3, 0) != child_seed(4, 0)


class TestRunSweep:
    def test_one_row_per_cell_in_canonical_order(self):
        spec = small_spec(axis="snr_db", values=(-10.0, 0.0),
                          schemes=("hybf-um", "digital-fd"), realizations=2)
        result = run_sweep(spec)
        assert len(result.rows) == 8
        key = [(r.axis_value, r.scheme, r.realization) for r in result.rows]
        assert key == sorted(key, key=lambda t: (
            spec.values.index(t[0]), spec.schemes.index(t[1]), t[2]))

    def test_schemes_share_channel_seed_per_realization(self):
        result = run_sweep(small_spec(schemes=("hybf-um", "digital-fd")))
        by_real = {}
        for row in result.rows:
            by_real.setdefault(row.realization, set()).add(row.seed)
        assert all(len(seeds) == 1 for seeds in by_real.values())

    def test_worker_count_does_not_change_rows(self):
        spec = small_spec(realizations=3)
        serial = run_sweep(spec, workers=1)
        parallel = run_sweep(spec, workers=3)
        assert strip_runtime(serial.rows) == strip_runtime(parallel.rows)

    def test_rerun_is_deterministic(self):
        spec = small_spec()
        a, b = run_sweep(spec), run_sweep(spec)
        assert strip_runtime(a.rows) == strip_runtime(b.rows)

    def test_axis_value_breaking_validation_fails_fast(self):
        spec = small_spec(axis="rf_chains", values=(64,))
        with pytest.raises(ConfigError, match="tx_rf"):
            run_sweep(spec)


class TestCsv:
    def test_header_and_round_trip(self, tmp_path):
        spec = small_spec(schemes=("hybf-um", "digital-fd"))
        result = run_sweep(spec)
        out = tmp_path / "rows.csv"
        emit_csv(result, out)
        text = out.read_bytes().decode("utf-8")
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert "\r" not in text
        back = read_csv(out)
        assert back.rows == result.rows

    def test_bits_column_is_nats_over_ln2(self, tmp_path):
        result = run_sweep(small_spec())
        for row in result.rows:
            assert row.wsr_bits == pytest.approx(
                row.wsr_nats / math.log(2.0), rel=1e-15)

    def test_single_row_gives_two_lines(self, tmp_path):
        result = run_sweep(small_spec(realizations=1))
        out = tmp_path / "one.csv"
        emit_csv(result, out)
        assert len(out.read_text().splitlines()) == 2

    def test_empty_result_rejected(self, tmp_path):
        from fdhybf.sweep import SweepResult
        with pytest.raises(ValueError, match="row"):
            emit_csv(SweepResult(rows=()), tmp_path / "none.csv")


class TestLoadConfig:
    def write(self, tmp_path, payload):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(payload))
        return path

    def test_empty_file_gives_full_scale_defaults(self, tmp_path):
        cfg, spec = load_config(self.write(tmp_path, {}))
        assert cfg == paper_profile()
        assert spec.axis == "none" and spec.realizations == 20

    def test_flat_overrides_and_sweep_block(self, tmp_path):
        payload = {
            "bs_tx_ant": 16, "bs_rx_ant": 8, "tx_rf": 4, "rx_rf": 4,
            "ul_ant": 2, "dl_ant": 2, "ul_streams": 1, "dl_streams": 1,
            "snr_db": -5.0,
            "sweep": {"axis": "ldr_db", "values": [-80, -60],
                      "schemes": ["hybf-um"], "realizations": 3,
                      "seed": 9, "out": "x.csv"},
        }
        cfg, spec = load_config(self.write(tmp_path, payload))
        assert cfg.bs_tx_ant == 16 and cfg.snr_db == -5.0
        assert spec.axis == "ldr_db"
        assert spec.values == (-80, -60)
        assert spec.realizations == 3 and spec.seed == 9
        assert spec.out == "x.csv"

    def test_rf_chain_override(self, tmp_path):
        cfg, _ = load_config(self.write(tmp_path,
                                        {"tx_rf": 32, "rx_rf": 32}))
        assert cfg.tx_rf == 32 and cfg.rx_rf == 32

    def test_unknown_field_named_in_error(self, tmp_path):
        with pytest.raises(ConfigError, match="bandwidth"):
            load_config(self.write(tmp_path, {"bandwidth": 1}))

    def test_unknown_sweep_field_named_in_error(self, tmp_path):
        with pytest.raises(ConfigError, match="sweep.retries"):
            load_config(self.write(tmp_path, {"sweep": {"retries": 2}}))

    def test_inconsistent_dims_rejected(self, tmp_path):
        payload = {"ul_streams": 9}
        with pytest.raises(ConfigError, match="ul_streams"):
            load_config(self.write(tmp_path, payload))

    def test_missing_file_is_a_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="config file"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json_is_a_config_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(path)

    def test_profile_base_applies_before_overrides(self, tmp_path):
        cfg, _ = load_config(self.write(tmp_path, {"snr_db": 0.0}),
                             profile=desk_profile)
        assert cfg.bs_tx_ant == 16 and cfg.snr_db == 0.0

    def test_build_spec_rejects_unknown_keys(self):
        with pytest.raises(ConfigError, match="sweep.budget"):
            build_spec(small_cfg(), {"budget": 1})
