import json
import math

import numpy as np
import pytest

from hjplatoon import Grid, ValueField
from hjplatoon.config import from_dict, parse_config
from hjplatoon.errors import ConfigError
from hjplatoon.fieldio import read_field, write_field, write_slice_csv, write_trace_csv
from hjplatoon.safe_set import extract_slice


class TestParsing:
    def test_minimal_two_car_fills_defaults(self):
        cfg = parse_config('{"scenario": "two_car"}')
        assert cfg.scenario == "two_car"
        assert cfg.dim == 2
        assert cfg.grid.shape == (161, 161)
        assert cfg.bounds.control_lo == -2.0 and cfg.bounds.control_hi == 2.0
        assert cfg.bounds.dist_lo == -1.5 and cfg.bounds.dist_hi == 1.5
        assert cfg.box.x_lo == 0.0 and math.isinf(cfg.box.x_hi)
        assert cfg.box.v_lo == -10.0 and cfg.box.v_hi == 10.0
        assert cfg.solver.cfl == 0.9
        assert cfg.sim.initial_state == (20.0, 0.0)
        assert cfg.sim.follower is None
        assert "follower" not in cfg.to_dict()["simulation"]

    def test_minimal_three_car_fills_defaults(self):
        cfg = parse_config('{"scenario": "three_car"}')
        assert cfg.dim == 4
        assert cfg.grid.shape == (41, 41, 41, 41)
        assert cfg.sim.initial_state == (20.0, 0.0, 20.0, 0.0)
        assert cfg.sim.follower is not None
        assert cfg.to_dict()["simulation"]["follower"] == {
            "kind": "idm_fixed_t", "reaction_time": 1.0,
        }

    def test_reaction_time_without_idm_block_gets_defaults(self):
        cfg = parse_config(
            '{"scenario": "three_car", "disturbance_model": "reaction_time"}'
        )
        echoed = cfg.to_dict()["idm"]
        assert echoed == {
            "a": 1.5, "b": 1.5, "delta": 4.0, "v0": 30.0, "s0": 2.0,
            "t_min": 0.0, "t_max": 2.0, "v_ego_nominal": 10.0,
        }
        assert cfg.disturbance_model().kind == "reaction_time"

    def test_scenario_required(self):
        with pytest.raises(ConfigError, match="scenario"):
            parse_config("{}")

    def test_malformed_json(self):
        with pytest.raises(ConfigError, match="malformed"):
            parse_config("{not json")

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key.*extra"):
            parse_config('{"scenario": "two_car", "extra": 1}')

    def test_unknown_nested_key_has_path(self):
        with pytest.raises(ConfigError, match="config.idm"):
            parse_config('{"scenario": "three_car", "idm": {"zeta": 3}}')

    def test_reversed_control_bounds_named(self):
        with pytest.raises(ConfigError, match="config.bounds"):
            parse_config('{"scenario": "two_car", "bounds": {"control": [2, -2]}}')

    def test_two_car_rejects_follower(self):
        with pytest.raises(ConfigError, match="follower"):
            parse_config(
                '{"scenario": "two_car", '
                '"simulation": {"follower": {"kind": "idm_fixed_t"}}}'
            )

    def test_grid_dimension_mismatch(self):
        with pytest.raises(ConfigError, match="config.grid"):
            parse_config('{"scenario": "two_car", "grid": {"shape": [5, 5, 5, 5]}}')

    def test_initial_state_length_checked(self):
        with pytest.raises(ConfigError, match="initial_state"):
            parse_config(
                '{"scenario": "two_car", "simulation": {"initial_state": [1, 2, 3]}}'
            )

    def test_finite_gap_bound_accepted(self):
        cfg = parse_config(
            '{"scenario": "two_car", "constraint_box": {"gap": [0, 40]}}'
        )
        assert cfg.box.x_hi == 40.0

    def test_behavior_kinds(self):
        cfg = parse_config(json.dumps({
            "scenario": "three_car",
            "simulation": {
                "leader": {"kind": "scripted_brake", "t_start": 1.0, "accel": -1.0},
                "follower": {"kind": "adversarial_reaction"},
            },
        }))
        d = cfg.to_dict()["simulation"]
        assert d["leader"]["kind"] == "scripted_brake"
        assert d["follower"] == {"kind": "adversarial_reaction"}

    def test_bad_behavior_kind(self):
        with pytest.raises(ConfigError, match="leader.kind"):
            parse_config(
                '{"scenario": "two_car", "simulation": {"leader": {"kind": "teleport"}}}'
            )

    def test_scripted_accel_outside_disturbance_bounds(self):
        with pytest.raises(ConfigError, match="accel"):
            parse_config(
                '{"scenario": "two_car", '
                '"simulation": {"leader": {"kind": "constant", "accel": -3.0}}}'
            )


class TestRoundTrip:
    CASES = [
        '{"scenario": "two_car"}',
        '{"scenario": "three_car", "disturbance_model": "reaction_time"}',
        json.dumps({
            "scenario": "three_car",
            "disturbance_model": "extreme",
            "bounds": {"control": [-3, 3], "disturbance": [-1, 1]},
            "constraint_box": {"gap": [0, 35], "rel_speed": [-8, 8]},
            "grid": {"shape": [11, 11, 11, 11]},
            "solver": {"cfl": 0.5, "tau_max": 10.0},
            "idm": {"s0": 1.0, "v_ego_nominal": 15.0},
            "filter": {"activation_margin": 0.5,
                       "nominal": {"kind": "idm_leader", "reaction_time": 0.8}},
            "simulation": {"dt": 0.02, "horizon": 4.0,
                           "leader": {"kind": "adversarial"},
                           "follower": {"kind": "constant", "accel": 0.5}},
        }),
    ]

    @pytest.mark.parametrize("text", CASES)
    def test_parse_serialize_parse_identity(self, text):
        cfg = parse_config(text)
        normalized = cfg.to_dict()
        cfg2 = from_dict(json.loads(json.dumps(normalized)))
        assert cfg2.to_dict() == normalized

    def test_hash_ignores_simulation_and_filter(self):
        base = parse_config('{"scenario": "three_car"}')
        changed = parse_config(
            '{"scenario": "three_car", '
            '"simulation": {"dt": 0.01, "horizon": 3.0}, '
            '"filter": {"activation_margin": 1.0}}'
        )
        assert base.scenario_hash() == changed.scenario_hash()

    def test_hash_tracks_solver_inputs(self):
        base = parse_config('{"scenario": "three_car"}')
        other = parse_config(
            '{"scenario": "three_car", "grid": {"shape": [11, 11, 11, 11]}}'
        )
        assert base.scenario_hash() != other.scenario_hash()
        model = parse_config(
            '{"scenario": "three_car", "disturbance_model": "reaction_time"}'
        )
        assert base.scenario_hash() != model.scenario_hash()


class TestFieldFile:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(89)
        grid = Grid(lo=[-4.0, -12.0], hi=[44.0, 12.0], shape=(13, 9))
        field = ValueField(grid, rng.normal(size=grid.shape), tau=3.25,
                           iterations=42)
        path = tmp_path / "field.hjf"
        write_field(path, field, scenario="two_car", model="extreme",
                    converged=True, scenario_hash="abc123")
        loaded, header = read_field(path)
        assert np.array_equal(loaded.values, field.values)
        assert loaded.tau == 3.25 and loaded.iterations == 42
        assert loaded.grid.same_lattice(grid)
        assert header["scenario_hash"] == "abc123"
        assert header["converged"] is True
        # writing the loaded field again reproduces the file byte for byte
        path2 = tmp_path / "field2.hjf"
        write_field(path2, loaded, scenario="two_car", model="extreme",
                    converged=True, scenario_hash="abc123")
        assert path.read_bytes() == path2.read_bytes()

    def test_first_dimension_varies_fastest(self, tmp_path):
        grid = Grid(lo=[0.0, 0.0], hi=[1.0, 1.0], shape=(3, 3))
        values = np.arange(9.0).reshape(3, 3)
        field = ValueField(grid, values)
        path = tmp_path / "f.hjf"
        write_field(path, field, scenario="two_car", model="extreme",
                    converged=True, scenario_hash="x")
        payload = path.read_bytes().split(b"\n", 1)[1]
        flat = np.frombuffer(payload, dtype="<f8")
        assert np.array_equal(flat, values.ravel(order="F"))

    def test_truncated_payload_rejected(self, tmp_path):
        grid = Grid(lo=[0.0, 0.0], hi=[1.0, 1.0], shape=(3, 3))
        field = ValueField(grid, np.zeros((3, 3)))
        path = tmp_path / "f.hjf"
        write_field(path, field, scenario="two_car", model="extreme",
                    converged=True, scenario_hash="x")
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(ConfigError, match="payload"):
            read_field(path)

    def test_garbage_header_rejected(self, tmp_path):
        path = tmp_path / "f.hjf"
        path.write_bytes(b"\x00\x01binarygarbage\n" + b"\x00" * 64)
        with pytest.raises(ConfigError):
            read_field(path)


class TestCsvWriters:
    def test_slice_csv_structure(self, tmp_path):
        rng = np.random.default_rng(97)
        grid = Grid(lo=[0.0, -10.0], hi=[40.0, 10.0], shape=(5, 4))
        field = ValueField(grid, rng.normal(size=grid.shape))
        sl = extract_slice(field, {})
        path = tmp_path / "slice.csv"
        write_slice_csv(path, sl, tau=2.0, model="extreme")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        header = lines[1].split(",")
        assert header[0] == "x_g1\\v_g1"
        assert len(header) == 1 + 4
        assert len(lines) == 2 + 5
        row1 = lines[2].split(",")
        assert float(row1[0]) == 0.0
        assert float(row1[1]) == field.values[0, 0]

    def test_trace_csv_structure(self, tmp_path, field2d):
        from hjplatoon import ActuationBounds, ConstraintBox, IdmParams, run
        from hjplatoon.safe_set import SafetyFilterConfig
        from hjplatoon.sim import ConstantAccel, NominalConstant

        trace = run(np.array([20.0, 0.0]), ConstantAccel(0.0), None,
                    NominalConstant(0.0), field2d, SafetyFilterConfig(),
                    IdmParams(), ActuationBounds(), ConstraintBox(),
                    dt=0.05, horizon=0.2)
        path = tmp_path / "trace.csv"
        write_trace_csv(path, trace, scenario="two_car")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# hjplatoon trace")
        assert "violation=false" in lines[0]
        assert lines[1] == "t,x_g1,v_g1,u1,u2,value,margin,violation"
        assert len(lines) == 2 + trace.t.size
        last = lines[-1].split(",")
        assert last[3] == "" and last[4] == ""
