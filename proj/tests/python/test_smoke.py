"""End-to-end smoke tests for the Python module and the command-line tool.

The compiled package is found through PYTHONPATH (pointed at the build
staging directory by ctest); GRIDWEAVE_CLI names the CLI binary.
"""

import json
import os
import subprocess

import pytest

import gridweave as gw


def small_platform(speed_a=1e9, speed_b=2e9):
    plat = gw.PlatformSpec()
    for name, speed in [("east", speed_a), ("west", speed_b)]:
        site = gw.SiteSpec()
        site.name = name
        site.host_count = 2
        site.cores_per_host = 8
        site.speed_per_core = speed
        site.memory_per_host_mb = 16000.0
        site.disk_capacity_gb = 1000.0
        site.uplink_bandwidth_bps = 1e9
        site.uplink_latency_s = 0.0
        plat.sites = plat.sites + [site]
    return plat


def truth_trace(plat, n=12, seed=11):
    spec = gw.WorkloadGenSpec()
    spec.n_sites = 2
    spec.jobs_per_site = n // 2
    spec.seed = seed
    spec.work_min = 1e9
    spec.work_max = 8e9
    spec.cores_choices = [1, 2, 4]
    spec.interarrival_mean_s = 1.0
    jobs = gw.generate_workload(spec)
    names = sorted(s.name for s in plat.sites)
    assignment = {job.id: names[i % len(names)] for i, job in enumerate(jobs)}
    return gw.synthesize_truth(jobs, plat, assignment)


def test_generate_run_summarize():
    plat = small_platform()
    trace = truth_trace(plat)
    options = gw.SimulationOptions()
    options.policy = "replay"
    result = gw.run_simulation(plat, trace, options)

    assert result.total_jobs == len(trace)
    assert result.finished_jobs == len(trace)
    assert all(o.state == gw.JobState.Finished for o in result.jobs)
    assert result.final_time_s > 0.0

    summary = gw.compute_summary(result, trace)
    assert {s.site for s in summary.per_site} == {"east", "west"}
    csv = gw.summary_to_csv(summary)
    assert csv.startswith(
        "site,n_jobs,rel_mae_walltime,rel_mae_queue,mean_utilization,throughput_jobs_per_s"
    )
    assert "__geomean__" in csv

    # Replaying at the truth platform reproduces the truth walltimes.
    for outcome, job in zip(result.jobs, trace):
        assert outcome.sim_walltime_s == pytest.approx(job.truth_walltime_s, rel=1e-12)


def test_trace_text_round_trip():
    plat = small_platform()
    trace = truth_trace(plat, n=6, seed=3)
    text = gw.trace_to_text(trace)
    back = gw.parse_trace_text(text)
    assert [j.id for j in back] == [j.id for j in trace]
    assert [j.work for j in back] == [j.work for j in trace]
    assert [j.truth_walltime_s for j in back] == [j.truth_walltime_s for j in trace]


def test_event_log_round_trip_and_utilization():
    plat = small_platform()
    trace = truth_trace(plat, n=8, seed=5)
    options = gw.SimulationOptions()
    options.policy = "replay"
    result = gw.run_simulation(plat, trace, options)

    csv = gw.event_log_to_csv(result.events)
    back = gw.parse_event_log_csv(csv)
    assert len(back) == len(result.events)
    assert back[0].state == gw.JobState.Pending

    series = gw.utilization_series(result.events, "east", 5.0, 16)
    assert all(0.0 <= u <= 1.0 for _, u in series)


def test_calibration_improves_objective():
    plat = small_platform()
    trace = truth_trace(plat)

    problem = gw.CalibrationProblem()
    problem.trace = trace
    problem.base_platform = small_platform(speed_a=2e9, speed_b=4e9)  # both doubled
    problem.parameter = gw.CalibrationParameter.SpeedPerCore
    problem.bounds = {"east": (2.5e8, 8e9), "west": (5e8, 1.6e10)}

    initial = {"east": 2e9, "west": 4e9}
    assert gw.evaluate(problem, initial) == pytest.approx(0.5)
    # At the exact truth every per-site error is zero, and the geometric mean
    # clamps zeros at 1e-6, so that is the floor the objective can reach.
    assert gw.evaluate(problem, {"east": 1e9, "west": 2e9}) <= 1e-6 + 1e-12

    result = gw.random_search(problem, 40, seed=9)
    assert result.objective_after <= result.objective_before
    assert result.objective_after < 0.5
    assert set(result.params) == {"east", "west"}


def test_errors_translate_to_python_exceptions():
    with pytest.raises(ValueError):
        gw.parse_trace_text("not,a,valid,header\n")
    spec = gw.WorkloadGenSpec()
    spec.jobs_per_site = 0
    with pytest.raises(ValueError):
        gw.generate_workload(spec)


# ---------------------------------------------------------------- CLI


@pytest.fixture()
def cli():
    path = os.environ.get("GRIDWEAVE_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("GRIDWEAVE_CLI not set")
    return path


@pytest.fixture()
def platform_files(tmp_path):
    infra = {
        "schema_version": 1,
        "sites": [
            {
                "name": "east",
                "host_count": 2,
                "cores_per_host": 8,
                "speed_per_core": 1e9,
                "memory_per_host_mb": 16000.0,
                "disk_capacity_gb": 1000.0,
            },
            {
                "name": "west",
                "host_count": 2,
                "cores_per_host": 8,
                "speed_per_core": 2e9,
                "memory_per_host_mb": 16000.0,
                "disk_capacity_gb": 1000.0,
            },
        ],
    }
    network = {
        "links": {
            "east": {"bandwidth_bps": 1e9, "latency_s": 0.0},
            "west": {"bandwidth_bps": 1e9, "latency_s": 0.01},
        }
    }
    infra_path = tmp_path / "infra.json"
    network_path = tmp_path / "network.json"
    infra_path.write_text(json.dumps(infra))
    network_path.write_text(json.dumps(network))
    return str(infra_path), str(network_path)


def run_cli(cli, *args):
    env = dict(os.environ)
    env.pop("GRIDWEAVE_OUTPUT_DIR", None)
    return subprocess.run([cli, *args], capture_output=True, text=True, env=env)


def test_cli_pipeline(cli, platform_files, tmp_path):
    infra, network = platform_files
    out = tmp_path / "out"

    gen = run_cli(
        cli, "gen-workload", "--sites", "2", "--jobs-per-site", "5", "--seed", "7",
        "--work-min", "1e9", "--work-max", "4e9", "--io-min", "1e6", "--io-max", "1e7",
        "--interarrival", "0.5", "--synth-truth", "--infra", infra, "--network", network,
        "--out", "trace.csv", "--output-dir", str(out),
    )
    assert gen.returncode == 0, gen.stderr
    trace = out / "trace.csv"
    assert trace.exists()

    run = run_cli(
        cli, "run", "--infra", infra, "--network", network, "--trace", str(trace),
        "--policy", "replay", "--output-dir", str(out),
    )
    assert run.returncode == 0, run.stderr
    assert (out / "event_log.csv").exists()
    assert (out / "summary.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "run"
    assert manifest["extra"]["finished_jobs"] == 10

    report = run_cli(
        cli, "report", "--log", str(out / "event_log.csv"), "--infra", infra,
        "--network", network, "--bucket", "5", "--chart", "--output-dir", str(out),
    )
    assert report.returncode == 0, report.stderr
    assert (out / "utilization_east.csv").exists()
    assert (out / "utilization_west.csv").exists()
    assert (out / "utilization_chart.svg").exists()
    rep_summary = json.loads((out / "report_summary.json").read_text())
    assert rep_summary["incomplete_jobs"] == 0


def test_cli_config_error_exit_code(cli, tmp_path):
    result = run_cli(
        cli, "gen-workload", "--jobs-per-site", "0", "--output-dir", str(tmp_path / "o")
    )
    assert result.returncode == 1
    assert "jobs-per-site" in result.stderr


def test_cli_workload_error_exit_code(cli, platform_files, tmp_path):
    infra, network = platform_files
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,valid,header\n1,2,3,4\n")
    result = run_cli(
        cli, "run", "--infra", infra, "--network", network, "--trace", str(bad),
        "--output-dir", str(tmp_path / "o"),
    )
    assert result.returncode == 2
    assert "error:" in result.stderr
