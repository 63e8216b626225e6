"""Tests for the command-line application."""

import json

import numpy as np
import pytest

from knockoffkit import __version__
from knockoffkit.main import app
from knockoffkit.storage import read_bench, read_indices, read_matrix, read_vector, write_matrix, write_vector


def test_version(runner):
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert f"knockoffkit {__version__}" in result.output


@pytest.fixture
def bundle(runner, tmp_path):
    """A small synthetic dataset written by the synth command."""
    out = tmp_path / "data"
    result = runner.invoke(
        app, ["synth", "--out", str(out), "--n", "60", "--p", "15", "--k", "2", "--sparsity", "3", "--seed", "4"]
    )
    assert result.exit_code == 0, result.output
    return out


def test_synth_writes_bundle(runner, bundle, tmp_path):
    """Test the bundle layout and seed reproducibility."""
    for name in ("X.csv", "y.csv", "beta.csv", "support.csv", "d.csv", "V.csv"):
        assert (bundle / name).is_file()
    assert read_matrix(bundle / "X.csv").shape == (15, 60)
    assert len(read_indices(bundle / "support.csv")) == 3

    again = tmp_path / "again"
    runner.invoke(app, ["synth", "--out", str(again), "--n", "60", "--p", "15", "--k", "2", "--sparsity", "3", "--seed", "4"])
    assert (again / "X.csv").read_text() == (bundle / "X.csv").read_text()


def test_estimate(runner, bundle, tmp_path):
    """Test the factor fit output files and printed diagnostics."""
    out = tmp_path / "model"
    result = runner.invoke(app, ["estimate", str(bundle / "X.csv"), "--rank", "2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "residual=" in result.output
    assert "delta=" in result.output
    assert read_matrix(out / "U.csv").shape == (15, 2)
    assert read_vector(out / "d.csv").shape == (15,)

    result = runner.invoke(app, ["estimate", str(bundle / "X.csv"), "--no-shrink", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "delta=0" in result.output


def test_estimate_rank_deficient_feeds_factor_solver(runner, tmp_path, rng):
    """Test that n < p data gives d > 0 and a model the factor solver accepts."""
    write_matrix(tmp_path / "X.csv", rng.standard_normal((20, 5)))
    model = tmp_path / "model"
    result = runner.invoke(app, ["estimate", str(tmp_path / "X.csv"), "--rank", "4", "--no-shrink", "--out", str(model)])
    assert result.exit_code == 0, result.output
    d = read_vector(model / "d.csv")
    U = read_matrix(model / "U.csv")
    assert np.all(d > 0.0)
    assert np.allclose(d + np.sum(U**2, axis=1), 1.0)

    out = tmp_path / "s.csv"
    result = runner.invoke(
        app, ["solve", "--d", str(model / "d.csv"), "--u", str(model / "U.csv"), "--solver", "factor", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert np.all(read_vector(out) >= 0.0)
    assert json.loads((tmp_path / "s.json").read_text())["feasibility_margin"] >= -1e-6



def test_estimate_missing_file(runner, tmp_path):
    result = runner.invoke(app, ["estimate", str(tmp_path / "absent.csv")])
    assert result.exit_code == 4
    assert "FILE_NOT_FOUND" in result.output


def test_estimate_constant_feature(runner, tmp_path):
    write_matrix(tmp_path / "X.csv", np.array([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]))
    result = runner.invoke(app, ["estimate", str(tmp_path / "X.csv"), "--rank", "1"])
    assert result.exit_code == 1
    assert "DEGENERATE_FEATURE" in result.output


def test_solve_identity(runner, tmp_path):
    """Test that Σ = I gives s = 1 and a metrics sidecar."""
    write_matrix(tmp_path / "cov.csv", np.eye(4))
    out = tmp_path / "s.csv"
    result = runner.invoke(app, ["solve", "--cov", str(tmp_path / "cov.csv"), "--solver", "full", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert np.allclose(read_vector(out), 1.0, atol=1e-6)
    metrics = json.loads((tmp_path / "s.json").read_text())
    assert metrics["solver"] == "full"
    assert metrics["feasibility_margin"] >= 0.0


def test_solve_equi(runner, tmp_path, equicorrelated):
    write_matrix(tmp_path / "cov.csv", equicorrelated(0.8))
    out = tmp_path / "s.csv"
    result = runner.invoke(app, ["solve", "--cov", str(tmp_path / "cov.csv"), "--solver", "equi", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert np.allclose(read_vector(out), 0.4)


def test_solve_without_extrapolation(runner, tmp_path, equicorrelated):
    """Test the --no-extrapolate flag and the sweep count in the sidecar."""
    write_matrix(tmp_path / "cov.csv", equicorrelated(0.6))
    out = tmp_path / "s.csv"
    result = runner.invoke(
        app, ["solve", "--cov", str(tmp_path / "cov.csv"), "--solver", "full", "--no-extrapolate", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert "sweeps=" in result.output
    metrics = json.loads((tmp_path / "s.json").read_text())
    assert metrics["sweeps"] >= metrics["cycles"]
    assert np.all(read_vector(out) > 0.0)



def test_solve_standardize(runner, tmp_path, equicorrelated):
    """Test that --standardize rescales a covariance to correlation."""
    write_matrix(tmp_path / "cov.csv", 4.0 * equicorrelated(0.8))
    out = tmp_path / "s.csv"
    args = ["solve", "--cov", str(tmp_path / "cov.csv"), "--solver", "equi", "--out", str(out)]
    assert runner.invoke(app, args).exit_code != 0
    result = runner.invoke(app, args + ["--standardize"])
    assert result.exit_code == 0, result.output
    assert np.allclose(read_vector(out), 0.4)


def test_solve_rejects_indefinite(runner, tmp_path):
    write_matrix(tmp_path / "cov.csv", np.array([[1.0, 2.0], [2.0, 1.0]]))
    result = runner.invoke(
        app, ["solve", "--cov", str(tmp_path / "cov.csv"), "--solver", "equi", "--out", str(tmp_path / "s.csv")]
    )
    assert result.exit_code == 1
    assert "INPUT_NOT_PSD" in result.output


def test_solve_factor_needs_model(runner, tmp_path):
    write_matrix(tmp_path / "cov.csv", np.eye(3))
    result = runner.invoke(
        app, ["solve", "--cov", str(tmp_path / "cov.csv"), "--solver", "factor", "--out", str(tmp_path / "s.csv")]
    )
    assert result.exit_code == 2
    assert "INVALID_ARGUMENT" in result.output


def test_solve_needs_input(runner, tmp_path):
    result = runner.invoke(app, ["solve", "--out", str(tmp_path / "s.csv")])
    assert result.exit_code == 2


def test_solve_factor_model_files(runner, tmp_path):
    """Test the factor and hybrid solvers from d and U files."""
    write_vector(tmp_path / "d.csv", np.full(6, 0.5))
    write_matrix(tmp_path / "U.csv", np.full((6, 1), np.sqrt(0.5)))
    for solver in ("factor", "hybrid"):
        out = tmp_path / f"{solver}.csv"
        result = runner.invoke(
            app,
            ["solve", "--d", str(tmp_path / "d.csv"), "--u", str(tmp_path / "U.csv"), "--solver", solver, "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert np.all(read_vector(out) > 0.0)
        assert np.all(read_vector(out) <= 1.0 + 1e-9)


def test_sample_zero_s_copies_data(runner, tmp_path, rng):
    """Test that s = 0 reproduces the input and a seed fixes the draw."""
    X = rng.standard_normal((3, 8))
    write_matrix(tmp_path / "X.csv", X)
    write_matrix(tmp_path / "cov.csv", np.eye(3))
    write_vector(tmp_path / "zero.csv", np.zeros(3))
    write_vector(tmp_path / "half.csv", np.full(3, 0.5))
    base = ["sample", str(tmp_path / "X.csv"), "--cov", str(tmp_path / "cov.csv")]

    result = runner.invoke(app, base + ["--s", str(tmp_path / "zero.csv"), "--out", str(tmp_path / "copy.csv")])
    assert result.exit_code == 0, result.output
    assert np.array_equal(read_matrix(tmp_path / "copy.csv"), X)

    for name in ("a.csv", "b.csv"):
        result = runner.invoke(
            app, base + ["--s", str(tmp_path / "half.csv"), "--seed", "3", "--out", str(tmp_path / name)]
        )
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()


def test_sample_stream_matches_batch(runner, tmp_path, rng):
    """Test that --stream writes the same knockoffs as the batch sampler."""
    write_matrix(tmp_path / "X.csv", rng.standard_normal((6, 10)))
    write_vector(tmp_path / "d.csv", np.full(6, 0.5))
    write_matrix(tmp_path / "U.csv", np.full((6, 1), np.sqrt(0.5)))
    write_vector(tmp_path / "s.csv", np.full(6, 0.5))
    base = ["sample", str(tmp_path / "X.csv"), "--d", str(tmp_path / "d.csv"), "--u", str(tmp_path / "U.csv")]
    base += ["--s", str(tmp_path / "s.csv"), "--seed", "2"]
    for name, flags in (("batch.csv", []), ("stream.csv", ["--stream"])):
        result = runner.invoke(app, base + flags + ["--out", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
        assert "6×10" in result.output
    assert np.allclose(read_matrix(tmp_path / "stream.csv"), read_matrix(tmp_path / "batch.csv"), atol=1e-10)

    write_matrix(tmp_path / "cov.csv", np.eye(6))
    result = runner.invoke(
        app,
        ["sample", str(tmp_path / "X.csv"), "--cov", str(tmp_path / "cov.csv"), "--s", str(tmp_path / "s.csv")]
        + ["--stream", "--out", str(tmp_path / "o.csv")],
    )
    assert result.exit_code == 2
    assert "--stream" in result.output



def test_sample_infeasible(runner, tmp_path, equicorrelated):
    write_matrix(tmp_path / "X.csv", np.ones((2, 4)))
    write_matrix(tmp_path / "cov.csv", equicorrelated(0.8))
    write_vector(tmp_path / "s.csv", np.ones(2))
    result = runner.invoke(
        app,
        [
            "sample",
            str(tmp_path / "X.csv"),
            "--cov",
            str(tmp_path / "cov.csv"),
            "--s",
            str(tmp_path / "s.csv"),
            "--out",
            str(tmp_path / "Xt.csv"),
        ],
    )
    assert result.exit_code == 1
    assert "INFEASIBLE_S" in result.output
    assert "hybrid" in result.output


def test_sample_dimension_mismatch(runner, tmp_path):
    write_matrix(tmp_path / "X.csv", np.ones((3, 4)))
    write_matrix(tmp_path / "cov.csv", np.eye(2))
    write_vector(tmp_path / "s.csv", np.ones(2))
    result = runner.invoke(
        app,
        ["sample", str(tmp_path / "X.csv"), "--cov", str(tmp_path / "cov.csv"), "--s", str(tmp_path / "s.csv"), "--out", str(tmp_path / "o.csv")],
    )
    assert result.exit_code == 2


@pytest.fixture
def separable(tmp_path, rng):
    """Five signal features with noise knockoffs and five nulls whose knockoffs copy them."""
    n = 200
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    X = rng.standard_normal((10, n))
    X[:5] += 2.0 * labels
    Xt = X.copy()
    Xt[:5] = rng.standard_normal((5, n))
    write_matrix(tmp_path / "X.csv", X)
    write_matrix(tmp_path / "Xt.csv", Xt)
    write_vector(tmp_path / "labels.csv", labels)
    write_vector(tmp_path / "short.csv", labels[:-1])
    (tmp_path / "truth.csv").write_text("0\n1\n2\n3\n4\n")
    return tmp_path


def _filter_args(folder, response="labels.csv"):
    return [
        "filter",
        str(folder / "X.csv"),
        str(folder / "Xt.csv"),
        str(folder / response),
        "--statistic",
        "centroid",
        "--out",
        str(folder / "result"),
    ]


def test_filter_selects_signals(runner, separable):
    """Test selection, the sidecar and the evaluation against the truth."""
    result = runner.invoke(app, _filter_args(separable) + ["--q", "0.3", "--truth", str(separable / "truth.csv")])
    assert result.exit_code == 0, result.output
    assert list(read_indices(separable / "result" / "selected.csv")) == [0, 1, 2, 3, 4]
    report = json.loads((separable / "result" / "selection.json").read_text())
    assert report["selected_count"] == 5
    assert report["evaluation"] == {"fdp": 0.0, "power": 1.0}
    assert read_vector(separable / "result" / "W.csv").shape == (10,)
    assert "power=1" in result.output


def test_filter_empty_selection(runner, separable):
    """Test that a tiny q selects nothing and writes an infinite threshold."""
    result = runner.invoke(app, _filter_args(separable) + ["--q", "0.001"])
    assert result.exit_code == 0, result.output
    assert list(read_indices(separable / "result" / "selected.csv")) == []
    report = json.loads((separable / "result" / "selection.json").read_text())
    assert report["selection"]["threshold"] == float("inf")


def test_filter_length_mismatch(runner, separable):
    result = runner.invoke(app, _filter_args(separable, "short.csv"))
    assert result.exit_code == 2
    assert "DIMENSION_MISMATCH" in result.output


def test_bench_empty_grid(runner, tmp_path):
    """Test that an empty grid writes only the header."""
    out = tmp_path / "bench.csv"
    result = runner.invoke(app, ["bench", "solver-scaling", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert read_bench(out) == ()
    assert len(out.read_text().splitlines()) == 1


def test_bench_solver_scaling(runner, tmp_path):
    out = tmp_path / "bench.csv"
    result = runner.invoke(
        app,
        ["bench", "solver-scaling", "--out", str(out), "--p", "20", "--p", "40", "--solver", "factor", "--max-cycles", "5"],
    )
    assert result.exit_code == 0, result.output
    assert len(read_bench(out)) == 2
    fits = json.loads((tmp_path / "bench.slope.json").read_text())
    assert [fit["solver"] for fit in fits] == ["factor"]
    assert fits[0]["points"] == 2


def test_bench_fdr_power(runner, tmp_path):
    out = tmp_path / "bench.csv"
    result = runner.invoke(
        app,
        [
            "bench",
            "fdr-power",
            "--out",
            str(out),
            "--p",
            "20",
            "--k",
            "2",
            "--n",
            "80",
            "--sparsity",
            "3",
            "--amplitude",
            "6",
            "--solver",
            "equi",
            "--trials",
            "2",
        ],
    )
    assert result.exit_code == 0, result.output
    assert len(read_bench(out)) == 2
    summary = (tmp_path / "bench.summary.csv").read_text().splitlines()
    assert summary[0] == "solver,amplitude,trials,mean_fdp,mean_power"
    assert summary[1].startswith("equi,6.0,2,")


def test_pipeline_synthetic(runner, tmp_path):
    """Test an end-to-end run on synthetic data."""
    out = tmp_path / "run"
    result = runner.invoke(
        app,
        [
            "pipeline",
            "--out",
            str(out),
            "--n",
            "80",
            "--p",
            "20",
            "--k",
            "2",
            "--rank",
            "2",
            "--sparsity",
            "3",
            "--amplitude",
            "6",
            "--solver",
            "factor",
            "--max-cycles",
            "20",
        ],
    )
    assert result.exit_code == 0, result.output
    for name in ("dataset/X.csv", "d.csv", "U.csv", "s.csv", "s.json", "trial-0/knockoffs.csv", "trial-0/selection.json"):
        assert (out / name).is_file(), name
    report = json.loads((out / "trial-0" / "selection.json").read_text())
    assert report["evaluation"] is not None
    assert "mean fdp=" in result.output


def test_pipeline_exact_covariance_past_dense_cutoff(runner, tmp_path):
    """Test the hybrid solver on an exact covariance with 100 features."""
    out = tmp_path / "run"
    args = ["pipeline", "--out", str(out), "--n", "150", "--p", "100", "--k", "5", "--rank", "5"]
    args += ["--sparsity", "5", "--amplitude", "6", "--solver", "hybrid", "--exact", "--max-cycles", "20"]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    metrics = json.loads((out / "s.json").read_text())
    assert metrics["feasibility_margin"] >= -1e-6
    assert read_matrix(out / "trial-0" / "knockoffs.csv").shape == (100, 150)



def test_pipeline_config_file_with_override(runner, tmp_path):
    """Test that flags override values from the JSON config."""
    out = tmp_path / "run"
    config = {
        "n": 60,
        "p": 15,
        "k": 2,
        "rank": 2,
        "sparsity": 2,
        "solver": "equi",
        "statistic": "centroid",
        "trials": 2,
        "output_dir": str(out),
    }
    (tmp_path / "config.json").write_text(json.dumps(config))
    result = runner.invoke(app, ["pipeline", "--config", str(tmp_path / "config.json"), "--trials", "1"])
    assert result.exit_code == 0, result.output
    assert (out / "trial-0" / "selection.json").is_file()
    assert not (out / "trial-1").exists()


def test_pipeline_rejects_unknown_config_key(runner, tmp_path):
    (tmp_path / "config.json").write_text(json.dumps({"bogus": 1}))
    result = runner.invoke(app, ["pipeline", "--config", str(tmp_path / "config.json")])
    assert result.exit_code == 2
    assert "INVALID_ARGUMENT" in result.output


def test_pipeline_missing_data(runner, tmp_path):
    result = runner.invoke(
        app, ["pipeline", "--data", str(tmp_path / "X.csv"), "--response", str(tmp_path / "y.csv"), "--out", str(tmp_path)]
    )
    assert result.exit_code == 4
