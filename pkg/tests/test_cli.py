import json

import pytest
from click.testing import CliRunner

from resolvekit import NoResolvingSetError, __version__
from resolvekit.cli import _exit_mapped, main


@pytest.fixture
def runner():
    return CliRunner()


def payload_of(result):
    return json.loads(result.stdout)


def write_path3(tmp_path):
    path = tmp_path / "p3.txt"
    path.write_text("0 1\n1 2\n")
    return str(path)


def write_k3(tmp_path):
    path = tmp_path / "k3.txt"
    path.write_text("0 1\n0 2\n1 2\n")
    return str(path)


class TestSample:
    def test_preset_scaled_and_summarized(self, runner, tmp_path):
        out = str(tmp_path / "g.txt")
        result = runner.invoke(main, ["sample", "karate", "--n", "100", "--seed", "7", "--out", out])
        assert result.exit_code == 0
        data = payload_of(result)
        assert data["n"] == 100
        assert data["seed"] == 7
        assert data["version"] == __version__
        assert "config_hash" in data
        assert (tmp_path / "g.txt").exists()
        assert (tmp_path / "g.txt.labels").exists()

    def test_same_seed_identical_bytes(self, runner, tmp_path):
        a, b = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
        r1 = runner.invoke(main, ["sample", "karate", "--n", "60", "--seed", "3", "--out", a])
        r2 = runner.invoke(main, ["sample", "karate", "--n", "60", "--seed", "3", "--out", b])
        assert r1.exit_code == r2.exit_code == 0
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()

    def test_invalid_probability_names_entry(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"community_sizes": [2, 2], "P": [[1.2, 0.0], [0.0, 1.0]]}')
        result = runner.invoke(main, ["sample", str(bad), "--out", str(tmp_path / "x.txt")])
        assert result.exit_code == 2
        assert "1.2" in result.stderr

    def test_unknown_preset_rejected(self, runner, tmp_path):
        result = runner.invoke(main, ["sample", "nosuch", "--out", str(tmp_path / "x.txt")])
        assert result.exit_code == 2


class TestMine:
    def test_karate_reference_allocation(self, runner):
        result = runner.invoke(main, ["mine", "karate", "--n", "10000", "--alpha", "0.01"])
        assert result.exit_code == 0
        data = payload_of(result)
        assert data["total"] == 82
        assert data["feasible"] is True
        assert sum(data["allocation"]) == 82

    def test_huge_alpha_gives_zero_allocation(self, runner):
        result = runner.invoke(main, ["mine", "karate", "--alpha", "1e9"])
        assert result.exit_code == 0
        assert payload_of(result)["allocation"] == [0, 0]

    def test_alpha_zero_is_infeasible(self, runner):
        result = runner.invoke(main, ["mine", "karate", "--alpha", "0"])
        assert result.exit_code == 3


class TestResolve:
    def test_brute_on_path_distances(self, runner, tmp_path):
        result = runner.invoke(
            main, ["resolve", write_path3(tmp_path), "--method", "brute", "--target", "dist"]
        )
        assert result.exit_code == 0
        data = payload_of(result)
        assert data["size"] == 1
        assert data["verified"] is True
        assert data["verified_against"] == "D"

    def test_ich_on_triangle(self, runner, tmp_path):
        result = runner.invoke(main, ["resolve", write_k3(tmp_path), "--method", "ich"])
        assert result.exit_code == 0
        data = payload_of(result)
        assert data["size"] == 2
        assert data["verified_against"] == "A*"

    def test_greedy_requires_labels(self, runner, tmp_path):
        result = runner.invoke(main, ["resolve", write_path3(tmp_path), "--method", "greedy"])
        assert result.exit_code == 2

    def test_greedy_with_estimated_params(self, runner, tmp_path):
        labels = tmp_path / "labels.txt"
        labels.write_text("0\n0\n1\n")
        result = runner.invoke(
            main,
            [
                "resolve", write_path3(tmp_path), "--method", "greedy",
                "--labels", str(labels), "--seed", "5",
            ],
        )
        assert result.exit_code == 0
        data = payload_of(result)
        assert data["verified"] is True
        assert "estimated" in " ".join(data.get("notes", []))

    def test_preorder_flags_interpretation(self, runner, tmp_path):
        labels = tmp_path / "labels.txt"
        labels.write_text("0\n0\n1\n")
        result = runner.invoke(
            main,
            ["resolve", write_path3(tmp_path), "--method", "preorder", "--labels", str(labels)],
        )
        assert result.exit_code == 0
        assert any("empirical" in note for note in payload_of(result)["notes"])

    def test_brute_cap_refusal(self, runner, tmp_path):
        path = tmp_path / "big.txt"
        path.write_text("".join(f"{i} {i+1}\n" for i in range(20)))
        result = runner.invoke(main, ["resolve", str(path), "--method", "brute"])
        assert result.exit_code == 5

    def test_ich_distance_cap_and_override(self, runner, tmp_path):
        path = tmp_path / "big.txt"
        path.write_text("".join(f"{i} {i+1}\n" for i in range(20)))
        refused = runner.invoke(
            main, ["resolve", str(path), "--method", "ich", "--target", "dist"]
        )
        assert refused.exit_code == 5
        forced = runner.invoke(
            main,
            ["resolve", str(path), "--method", "ich", "--target", "dist", "--force-distance"],
        )
        assert forced.exit_code == 0
        assert payload_of(forced)["size"] == 1  # a path is resolved by one endpoint

    def test_no_resolving_set_maps_to_exit_4(self):
        @_exit_mapped
        def boom():
            raise NoResolvingSetError("twins")

        with pytest.raises(SystemExit) as exc:
            boom()
        assert exc.value.code == 4

    def test_random_seed_echoed(self, runner, tmp_path):
        result = runner.invoke(
            main, ["resolve", write_k3(tmp_path), "--method", "random", "--seed", "11"]
        )
        assert result.exit_code == 0
        assert payload_of(result)["seed"] == 11


class TestBench:
    def bench_config(self, tmp_path, seed=1):
        cfg = {
            "preset": "karate",
            "n_target": 120,
            "methods": ["GREEDY", "RANDOM"],
            "alphas": [0.1],
            "n_graphs": 2,
            "replicates": 2,
            "base_seed": seed,
        }
        path = tmp_path / "bench.json"
        path.write_text(json.dumps(cfg))
        return str(path)

    def test_writes_five_files(self, runner, tmp_path):
        result = runner.invoke(
            main, ["bench", self.bench_config(tmp_path), "--out", str(tmp_path / "res")]
        )
        assert result.exit_code == 0
        data = payload_of(result)
        assert len(data["files"]) == 5
        assert data["failures"] == 0

    def test_rerun_identical_size_table_bytes(self, runner, tmp_path):
        cfg = self.bench_config(tmp_path)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert runner.invoke(main, ["bench", cfg, "--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, ["bench", cfg, "--out", str(out2)]).exit_code == 0
        for stem in ("sizes", "validity"):
            a = next(out1.glob(f"{stem}_*.csv")).read_bytes()
            b = next(out2.glob(f"{stem}_*.csv")).read_bytes()
            assert a == b

    def test_unknown_preset_exits_2(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"preset": "atlantis"}')
        result = runner.invoke(main, ["bench", str(path)])
        assert result.exit_code == 2

    def test_multi_experiment_suite(self, runner, tmp_path):
        cfg = {
            "experiments": [
                {
                    "preset": name,
                    "n_target": 80,
                    "methods": ["RANDOM"],
                    "alphas": [0.1],
                    "n_graphs": 1,
                    "replicates": 1,
                }
                for name in ("karate", "copperfield")
            ]
        }
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(cfg))
        result = runner.invoke(main, ["bench", str(path), "--out", str(tmp_path / "res")])
        assert result.exit_code == 0
        assert payload_of(result)["experiments"] == ["karate", "copperfield"]


class TestBounds:
    def test_er_reference_values(self, runner):
        result = runner.invoke(main, ["bounds", "--n", "500", "--p", "0.5"])
        assert result.exit_code == 0
        data = payload_of(result)
        assert data["beta_upper"] == 18
        assert data["any_set"] == 27

    def test_symmetric_in_p(self, runner):
        a = payload_of(runner.invoke(main, ["bounds", "--n", "777", "--p", "0.3"]))
        b = payload_of(runner.invoke(main, ["bounds", "--n", "777", "--p", "0.7"]))
        assert (a["beta_upper"], a["any_set"]) == (b["beta_upper"], b["any_set"])

    def test_degenerate_probability_exits_2(self, runner):
        result = runner.invoke(main, ["bounds", "--n", "10", "--p", "1"])
        assert result.exit_code == 2

    def test_params_condition_reports(self, runner):
        result = runner.invoke(main, ["bounds", "karate", "--C", "1.5", "--C2", "0.5"])
        assert result.exit_code == 0
        data = payload_of(result)
        assert "diam_le_2_condition" in data
        assert "diam_gt_2_condition" in data
        assert data["version"] == __version__

    def test_requires_some_input(self, runner):
        assert runner.invoke(main, ["bounds"]).exit_code == 2
