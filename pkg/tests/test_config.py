import json
import math

import numpy as np
import pytest

from btcsense.config import (
    ConfigError,
    PhaseError,
    RunConfig,
    config_from_dict,
    load_config,
    resonance_defaults,
)
from btcsense.dynamics import SimParams
from btcsense.serialize import format_value, write_csv, write_json
from hypothesis import given
from hypothesis import strategies as st


class TestResonanceDefaults:
    def test_arithmetic_example(self):
        omega_ac, phi = resonance_defaults(2.0, 1.0)
        assert omega_ac == pytest.approx(math.sqrt(3.0))
        assert phi == pytest.approx(math.pi / 6.0)

    def test_small_kappa_limit(self):
        omega_ac, phi = resonance_defaults(4.0, 1e-9)
        assert omega_ac == pytest.approx(4.0, rel=1e-12)
        assert phi == pytest.approx(0.0, abs=1e-9)

    def test_outside_phase_raises(self):
        with pytest.raises(PhaseError):
            resonance_defaults(1.0, 1.0)
        with pytest.raises(PhaseError):
            resonance_defaults(0.5, 1.0)

    def test_arcsin_override(self):
        _, phi = resonance_defaults(4.0, 1.0, arcsin_omega=2.0)
        assert phi == pytest.approx(math.asin(0.5))


class TestRunConfig:
    def test_minimal_simulate(self):
        cfg = config_from_dict({"mode": "simulate", "params": {"n_spins": 4, "omega0": 4.0}})
        assert cfg.mode == "simulate"
        assert cfg.params.n_spins == 4

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            config_from_dict({"mode": "simulate", "params": {"n_spins": 2, "omega0": 1.0},
                              "bogus": 1})
        with pytest.raises(ConfigError, match="unknown params keys"):
            config_from_dict({"mode": "simulate", "params": {"n_spins": 2, "omega0": 1.0,
                                                             "nspins": 2}})

    def test_mode_required_and_validated(self):
        with pytest.raises(ConfigError, match="mode"):
            config_from_dict({"params": {"n_spins": 2, "omega0": 1.0}})
        with pytest.raises(ConfigError, match="unknown mode"):
            config_from_dict({"mode": "scan", "params": {"n_spins": 2, "omega0": 1.0}})

    def test_bad_params_wrapped(self):
        with pytest.raises(ConfigError, match="bad params"):
            config_from_dict({"mode": "simulate", "params": {"n_spins": 0, "omega0": 1.0}})

    @pytest.mark.parametrize(
        "mode,missing",
        [
            ("scan-n", "n_grid"),
            ("sweep-resonance", "delta_phi_grid"),
            ("scan-kappa", "kappa_grid"),
            ("compare-mf", "n_grid"),
            ("fit", "fit_inputs"),
        ],
    )
    def test_grids_required_per_mode(self, mode, missing):
        doc = {"mode": mode, "params": {"n_spins": 2, "omega0": 4.0}}
        if mode == "scan-kappa":
            doc["n_grid"] = [2, 4, 8, 16]  # the kappa grid is still missing
        with pytest.raises(ConfigError, match=missing):
            config_from_dict(doc)

    def test_resolve_field_fills_resonance(self):
        cfg = config_from_dict({"mode": "simulate", "params": {"n_spins": 4, "omega0": 4.0}})
        p = cfg.resolve_field()
        assert p.omega_ac == pytest.approx(math.sqrt(15.0))
        assert p.phi == pytest.approx(math.asin(0.25))

    def test_resolve_field_keeps_explicit_values(self):
        cfg = config_from_dict({
            "mode": "simulate",
            "params": {"n_spins": 4, "omega0": 4.0, "omega_ac": 2.0, "phi": 0.1},
        })
        p = cfg.resolve_field()
        assert (p.omega_ac, p.phi) == (2.0, 0.1)

    def test_resolve_field_outside_phase_is_config_error(self):
        cfg = config_from_dict({"mode": "simulate", "params": {"n_spins": 4, "omega0": 0.5}})
        with pytest.raises(ConfigError, match="set omega_ac and phi explicitly"):
            cfg.resolve_field()

    def test_load_config_with_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "mode": "simulate",
            "params": {"n_spins": 4, "omega0": 4.0, "t_max": 1.0},
            "output_dir": str(tmp_path / "a"),
        }))
        cfg = load_config(str(path), {"n_spins": 8, "output_dir": str(tmp_path / "b")})
        assert cfg.params.n_spins == 8
        assert cfg.params.t_max == 1.0
        assert cfg.output_dir == str(tmp_path / "b")

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(str(path))


class TestSerialize:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_format_value_round_trips(self, x):
        assert float(format_value(x)) == x

    def test_format_specials(self):
        assert format_value(float("nan")) == "nan"
        assert format_value(None) == "nan"
        assert format_value(float("inf")) == "inf"
        assert format_value(7) == "7"
        assert format_value(True) == "true"

    def test_write_csv_header_and_rows(self, tmp_path):
        path = tmp_path / "x.csv"
        write_csv(str(path), ["a", "b"], [(1, 0.5), (2, 1.0 / 3.0)])
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b"
        assert len(lines) == 3
        assert float(lines[2].split(",")[1]) == 1.0 / 3.0

    def test_write_csv_rejects_ragged_rows(self, tmp_path):
        with pytest.raises(ValueError, match="row width"):
            write_csv(str(tmp_path / "y.csv"), ["a", "b"], [(1,)])

    def test_write_json_atomic_replaces(self, tmp_path):
        path = tmp_path / "doc.json"
        write_json(str(path), {"x": 1})
        write_json(str(path), {"x": 2})
        assert json.loads(path.read_text()) == {"x": 2}
        leftovers = [p for p in tmp_path.iterdir() if p.name.startswith(".tmp")]
        assert leftovers == []


def test_simparams_is_picklable_for_workers():
    import pickle

    p = SimParams(n_spins=4, omega0=4.0, omega_ac=1.0, phi=0.2)
    assert pickle.loads(pickle.dumps(p)) == p


def test_runconfig_direct_construction_validates():
    with pytest.raises(ConfigError, match="n_workers"):
        RunConfig(mode="simulate", params=SimParams(n_spins=2, omega0=4.0), n_workers=0)
    with pytest.raises(ConfigError, match="envelope_threshold"):
        RunConfig(mode="simulate", params=SimParams(n_spins=2, omega0=4.0),
                  envelope_threshold=1.5)
