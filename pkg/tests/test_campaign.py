import json
import math

import numpy as np
import pytest

from pushbench.campaign import (
    CSV_COLUMNS,
    REFERENCE_GRID_SUCCESS_RATE,
    build_campaign_configs,
    export_csv,
    export_json,
    generate_grid_targets,
    generate_ring_targets,
    run_campaign,
    summarize,
)
from pushbench.geometry import Vec2
from pushbench.trial import TrialResult

QUICK_TARGETS = [Vec2(1.2, 0.0), Vec2(1.2, 0.4)]


class TestTargets:
    def test_grid_count(self):
        assert len(generate_grid_targets()) == 24

    def test_grid_excludes_origin(self):
        assert all((t.x, t.y) != (0.0, 0.0) for t in generate_grid_targets())

    def test_grid_includes_far_corner(self):
        assert any((t.x, t.y) == (-2.0, -2.0) for t in generate_grid_targets())

    def test_grid_lattice(self):
        for t in generate_grid_targets():
            assert t.x in (-2.0, -1.0, 0.0, 1.0, 2.0)
            assert t.y in (-2.0, -1.0, 0.0, 1.0, 2.0)

    def test_ring_count_and_radius(self):
        ring = generate_ring_targets()
        assert len(ring) == 8
        for t in ring:
            assert abs(t.norm() - 2.1) < 1e-12

    def test_ring_first_point_ahead(self):
        assert generate_ring_targets()[0] == Vec2(2.1, 0.0)

    def test_ring_equal_spacing(self):
        ring = generate_ring_targets()
        angles = [math.atan2(t.y, t.x) for t in ring]
        diffs = {round((b - a) % (2 * math.pi), 9) for a, b in zip(angles, angles[1:])}
        assert diffs == {round(math.pi / 4.0, 9)}


class TestConfigBuild:
    def test_full_grid_size(self):
        cfgs = build_campaign_configs("rps")
        assert len(cfgs) == 144
        assert len({c.seed for c in cfgs}) == 144

    def test_empty_targets_rejected(self):
        with pytest.raises(ValueError):
            build_campaign_configs("rps", targets=[])

    def test_empty_objects_rejected(self):
        with pytest.raises(ValueError):
            build_campaign_configs("rps", objects=[])

    def test_seed_enumeration_mode_independent(self):
        a = build_campaign_configs("rps", objects=["uniform_box"], targets=QUICK_TARGETS)
        b = build_campaign_configs("nps", objects=["uniform_box"], targets=QUICK_TARGETS)
        assert [c.seed for c in a] == [c.seed for c in b]
        assert [c.target for c in a] == [c.target for c in b]


def fake_result(obj="uniform_box", fric="S1", target=(1.0, 0.0), mode="rps",
                seed=0, outcome="success", min_distance=0.03):
    return TrialResult(
        object_kind=obj, friction_set=fric, target=target, mode=mode, seed=seed,
        outcome=outcome, min_distance=min_distance,
        completion_time=50.0 if outcome == "success" else None,
        deviation=0.02, realignments=1, contact_transitions=2,
        contact_lost_total=4.0, end_time=50.0)


class TestSummarize:
    def test_counts_and_cells(self):
        results = [
            fake_result(seed=0),
            fake_result(fric="S2", seed=1, outcome="timeout", min_distance=0.4),
            fake_result(obj="cylinder", seed=2),
        ]
        s = summarize("rps", results)
        assert s.n_trials == 3
        assert s.successes == 2
        assert s.cells[("uniform_box", "S1")] == {"successes": 1, "n": 1}
        assert s.outcome_counts == {"success": 2, "timeout": 1}
        pt = s.per_target[(1.0, 0.0)]
        assert pt["n"] == 3
        assert pt["avg_min_distance"] == pytest.approx((0.03 + 0.4 + 0.03) / 3)

    def test_to_dict_carries_reference_rate(self):
        s = summarize("rps", [fake_result()])
        d = s.to_dict()
        assert d["reference_success_rate"] == REFERENCE_GRID_SUCCESS_RATE["rps"]
        assert "1,0" in d["per_target"]


class TestExport:
    def test_csv_shape_and_header(self, tmp_path):
        results = [fake_result(seed=i) for i in range(5)]
        path = tmp_path / "trials.csv"
        export_csv(results, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 6

    def test_csv_sorted_independent_of_input_order(self, tmp_path):
        results = [fake_result(seed=i, target=(float(i % 3), 0.0)) for i in range(6)]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_csv(results, a)
        export_csv(list(reversed(results)), b)
        assert a.read_bytes() == b.read_bytes()

    def test_json_roundtrips(self, tmp_path):
        s = summarize("nps", [fake_result(mode="nps")])
        path = tmp_path / "summary.json"
        export_json(s, path)
        data = json.loads(path.read_text())
        assert data["mode"] == "nps"
        assert data["n_trials"] == 1
        assert data["cells"]["uniform_box|S1"]["successes"] == 1

    def test_nan_min_distance_becomes_empty(self, tmp_path):
        r = fake_result(outcome="timeout", min_distance=math.nan)
        path = tmp_path / "t.csv"
        export_csv([r], path)
        row = path.read_text().strip().split("\n")[1].split(",")
        assert row[CSV_COLUMNS.index("min_distance")] == ""
        assert row[CSV_COLUMNS.index("completion_time")] == ""


class TestRunCampaign:
    def test_small_campaign_serial_vs_parallel(self, tmp_path):
        kwargs = dict(objects=["uniform_box"], frictions=["S1"],
                      targets=QUICK_TARGETS, base_seed=0)
        s1 = run_campaign("rps", workers=1, **kwargs)
        s2 = run_campaign("rps", workers=2, **kwargs)
        a, b = tmp_path / "serial.csv", tmp_path / "parallel.csv"
        export_csv(s1.results, a)
        export_csv(s2.results, b)
        assert a.read_bytes() == b.read_bytes()
        assert s1.successes == s2.successes == 2

    def test_repeat_runs_byte_identical(self, tmp_path):
        kwargs = dict(objects=["uniform_box"], frictions=["S1"],
                      targets=QUICK_TARGETS, base_seed=5, workers=2)
        s1 = run_campaign("rps", **kwargs)
        s2 = run_campaign("rps", **kwargs)
        a, b = tmp_path / "one.csv", tmp_path / "two.csv"
        export_csv(s1.results, a)
        export_csv(s2.results, b)
        assert a.read_bytes() == b.read_bytes()
        ja, jb = tmp_path / "one.json", tmp_path / "two.json"
        export_json(s1, ja)
        export_json(s2, jb)
        assert ja.read_bytes() == jb.read_bytes()

    def test_traces_written_per_trial(self, tmp_path):
        run_campaign("rps", objects=["uniform_box"], frictions=["S1"],
                     targets=[Vec2(1.2, 0.0)], workers=1,
                     trace_dir=tmp_path / "traces")
        files = sorted((tmp_path / "traces").glob("*.jsonl"))
        assert len(files) == 1
        assert "uniform_box_S1_1.2_0_rps_0" in files[0].name
