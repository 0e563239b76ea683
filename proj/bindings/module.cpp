#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridweave/bench.hpp"
#include "gridweave/calibrate.hpp"
#include "gridweave/cma_es.hpp"
#include "gridweave/errors.hpp"
#include "gridweave/metrics.hpp"
#include "gridweave/platform.hpp"
#include "gridweave/simulation.hpp"
#include "gridweave/telemetry.hpp"
#include "gridweave/workload.hpp"

namespace py = pybind11;
using namespace gridweave;

PYBIND11_MODULE(_core, m) {
  m.doc() = "discrete-event grid simulator core";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.category()) {
        case ErrorCategory::Config:
        case ErrorCategory::Workload:
          PyErr_SetString(PyExc_ValueError, e.what());
          return;
        case ErrorCategory::Io:
          PyErr_SetString(PyExc_OSError, e.what());
          return;
        case ErrorCategory::Runtime:
          PyErr_SetString(PyExc_RuntimeError, e.what());
          return;
      }
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  py::class_<SiteSpec>(m, "SiteSpec")
      .def(py::init<>())
      .def_readwrite("name", &SiteSpec::name)
      .def_readwrite("host_count", &SiteSpec::host_count)
      .def_readwrite("cores_per_host", &SiteSpec::cores_per_host)
      .def_readwrite("speed_per_core", &SiteSpec::speed_per_core)
      .def_readwrite("memory_per_host_mb", &SiteSpec::memory_per_host_mb)
      .def_readwrite("disk_capacity_gb", &SiteSpec::disk_capacity_gb)
      .def_readwrite("uplink_bandwidth_bps", &SiteSpec::uplink_bandwidth_bps)
      .def_readwrite("uplink_latency_s", &SiteSpec::uplink_latency_s)
      .def_readwrite("scheduling_overhead_s", &SiteSpec::scheduling_overhead_s)
      .def("total_cores", &SiteSpec::total_cores)
      .def("total_memory_mb", &SiteSpec::total_memory_mb);

  py::class_<PlatformSpec>(m, "PlatformSpec")
      .def(py::init<>())
      .def_readwrite("schema_version", &PlatformSpec::schema_version)
      .def_readwrite("sites", &PlatformSpec::sites)
      .def_readwrite("broker_latency_s", &PlatformSpec::broker_latency_s);

  py::class_<Job>(m, "Job")
      .def(py::init<>())
      .def_readwrite("id", &Job::id)
      .def_readwrite("submit_time_s", &Job::submit_time_s)
      .def_readwrite("work", &Job::work)
      .def_readwrite("cores", &Job::cores)
      .def_readwrite("memory_mb", &Job::memory_mb)
      .def_readwrite("input_bytes", &Job::input_bytes)
      .def_readwrite("output_bytes", &Job::output_bytes)
      .def_readwrite("target_site", &Job::target_site)
      .def_readwrite("truth_walltime_s", &Job::truth_walltime_s)
      .def_readwrite("truth_queue_time_s", &Job::truth_queue_time_s);

  py::class_<WorkloadGenSpec>(m, "WorkloadGenSpec")
      .def(py::init<>())
      .def_readwrite("n_sites", &WorkloadGenSpec::n_sites)
      .def_readwrite("jobs_per_site", &WorkloadGenSpec::jobs_per_site)
      .def_readwrite("seed", &WorkloadGenSpec::seed)
      .def_readwrite("work_min", &WorkloadGenSpec::work_min)
      .def_readwrite("work_max", &WorkloadGenSpec::work_max)
      .def_readwrite("cores_choices", &WorkloadGenSpec::cores_choices)
      .def_readwrite("interarrival_mean_s", &WorkloadGenSpec::interarrival_mean_s)
      .def_readwrite("io_min_bytes", &WorkloadGenSpec::io_min_bytes)
      .def_readwrite("io_max_bytes", &WorkloadGenSpec::io_max_bytes);

  py::enum_<JobState>(m, "JobState")
      .value("Pending", JobState::Pending)
      .value("Assigned", JobState::Assigned)
      .value("Running", JobState::Running)
      .value("Finished", JobState::Finished)
      .value("Failed", JobState::Failed);

  py::enum_<SnapshotMode>(m, "SnapshotMode")
      .value("OnTransition", SnapshotMode::OnTransition)
      .value("Periodic", SnapshotMode::Periodic);

  py::class_<SimulationOptions>(m, "SimulationOptions")
      .def(py::init<>())
      .def_readwrite("policy", &SimulationOptions::policy)
      .def_readwrite("seed", &SimulationOptions::seed)
      .def_readwrite("snapshot_mode", &SimulationOptions::snapshot_mode)
      .def_readwrite("snapshot_interval_s", &SimulationOptions::snapshot_interval_s)
      .def_readwrite("stop_time_s", &SimulationOptions::stop_time_s);

  py::class_<JobOutcome>(m, "JobOutcome")
      .def_readonly("id", &JobOutcome::id)
      .def_readonly("state", &JobOutcome::state)
      .def_readonly("site", &JobOutcome::site)
      .def_readonly("submitted_s", &JobOutcome::submitted_s)
      .def_readonly("assigned_s", &JobOutcome::assigned_s)
      .def_readonly("running_s", &JobOutcome::running_s)
      .def_readonly("terminal_s", &JobOutcome::terminal_s)
      .def_readonly("sim_walltime_s", &JobOutcome::sim_walltime_s)
      .def_readonly("sim_queue_time_s", &JobOutcome::sim_queue_time_s)
      .def_readonly("stage_in_s", &JobOutcome::stage_in_s)
      .def_readonly("overhead_s", &JobOutcome::overhead_s)
      .def_readonly("stage_out_s", &JobOutcome::stage_out_s);

  py::class_<SiteStats>(m, "SiteStats")
      .def_readonly("name", &SiteStats::name)
      .def_readonly("total_cores", &SiteStats::total_cores)
      .def_readonly("total_memory_mb", &SiteStats::total_memory_mb)
      .def_readonly("assigned_jobs", &SiteStats::assigned_jobs)
      .def_readonly("finished_jobs", &SiteStats::finished_jobs)
      .def_readonly("failed_jobs", &SiteStats::failed_jobs)
      .def_readonly("busy_core_seconds", &SiteStats::busy_core_seconds);

  py::class_<EventRecord>(m, "EventRecord")
      .def_readonly("event_id", &EventRecord::event_id)
      .def_readonly("sim_time_s", &EventRecord::sim_time_s)
      .def_readonly("job_id", &EventRecord::job_id)
      .def_readonly("state", &EventRecord::state)
      .def_readonly("site", &EventRecord::site)
      .def_readonly("available_cores", &EventRecord::available_cores)
      .def_readonly("pending_jobs", &EventRecord::pending_jobs)
      .def_readonly("assigned_jobs", &EventRecord::assigned_jobs)
      .def_readonly("finished_jobs", &EventRecord::finished_jobs);

  py::class_<SnapshotRow>(m, "SnapshotRow")
      .def_readonly("sim_time_s", &SnapshotRow::sim_time_s)
      .def_readonly("site", &SnapshotRow::site)
      .def_readonly("available_cores", &SnapshotRow::available_cores)
      .def_readonly("pending_jobs", &SnapshotRow::pending_jobs)
      .def_readonly("assigned_jobs", &SnapshotRow::assigned_jobs)
      .def_readonly("finished_jobs", &SnapshotRow::finished_jobs);

  py::class_<SimulationResult>(m, "SimulationResult")
      .def_readonly("final_time_s", &SimulationResult::final_time_s)
      .def_readonly("truncated", &SimulationResult::truncated)
      .def_readonly("total_jobs", &SimulationResult::total_jobs)
      .def_readonly("finished_jobs", &SimulationResult::finished_jobs)
      .def_readonly("failed_jobs", &SimulationResult::failed_jobs)
      .def_readonly("jobs", &SimulationResult::jobs)
      .def_readonly("sites", &SimulationResult::sites)
      .def_readonly("events", &SimulationResult::events)
      .def_readonly("snapshots", &SimulationResult::snapshots)
      .def_readonly("online_geomean_rel_mae", &SimulationResult::online_geomean_rel_mae)
      .def_readonly("warnings", &SimulationResult::warnings);

  py::class_<SiteSummary>(m, "SiteSummary")
      .def_readonly("site", &SiteSummary::site)
      .def_readonly("n_jobs", &SiteSummary::n_jobs)
      .def_readonly("rel_mae_walltime", &SiteSummary::rel_mae_walltime)
      .def_readonly("rel_mae_queue", &SiteSummary::rel_mae_queue)
      .def_readonly("mean_utilization", &SiteSummary::mean_utilization)
      .def_readonly("throughput_jobs_per_s", &SiteSummary::throughput_jobs_per_s);

  py::class_<SummaryMetrics>(m, "SummaryMetrics")
      .def_readonly("per_site", &SummaryMetrics::per_site)
      .def_readonly("geomean_rel_mae", &SummaryMetrics::geomean_rel_mae)
      .def_readonly("geomean_rel_mae_queue", &SummaryMetrics::geomean_rel_mae_queue)
      .def_readonly("makespan_s", &SummaryMetrics::makespan_s)
      .def_readonly("excluded_zero_truth_walltime", &SummaryMetrics::excluded_zero_truth_walltime)
      .def_readonly("excluded_zero_truth_queue", &SummaryMetrics::excluded_zero_truth_queue)
      .def_readonly("geomean_clamped", &SummaryMetrics::geomean_clamped)
      .def_readonly("warnings", &SummaryMetrics::warnings);

  py::enum_<CalibrationParameter>(m, "CalibrationParameter")
      .value("SpeedPerCore", CalibrationParameter::SpeedPerCore)
      .value("SchedulingOverhead", CalibrationParameter::SchedulingOverhead);
  py::enum_<CalibrationObjective>(m, "CalibrationObjective")
      .value("RelMaeWalltime", CalibrationObjective::RelMaeWalltime)
      .value("RelMaeQueue", CalibrationObjective::RelMaeQueue);
  py::enum_<CalibrationMode>(m, "CalibrationMode")
      .value("PerSiteIndependent", CalibrationMode::PerSiteIndependent)
      .value("Joint", CalibrationMode::Joint);

  py::class_<CalibrationProblem>(m, "CalibrationProblem")
      .def(py::init<>())
      .def_readwrite("trace", &CalibrationProblem::trace)
      .def_readwrite("base_platform", &CalibrationProblem::base_platform)
      .def_readwrite("parameter", &CalibrationProblem::parameter)
      .def_readwrite("bounds", &CalibrationProblem::bounds)
      .def_readwrite("objective", &CalibrationProblem::objective)
      .def_readwrite("mode", &CalibrationProblem::mode);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("params", &CalibrationResult::params)
      .def_readonly("objective_before", &CalibrationResult::objective_before)
      .def_readonly("objective_after", &CalibrationResult::objective_after)
      .def_readonly("evaluations_used", &CalibrationResult::evaluations_used)
      .def_readonly("per_site_error", &CalibrationResult::per_site_error)
      .def_readonly("per_site_error_before", &CalibrationResult::per_site_error_before)
      .def_readonly("clamped", &CalibrationResult::clamped)
      .def_readonly("warnings", &CalibrationResult::warnings);

  m.def(
      "load_platform",
      [](const std::string& infra, const std::string& network) {
        LoadedPlatform loaded = load_platform(infra, network);
        return py::make_tuple(loaded.platform, loaded.warnings);
      },
      py::arg("infrastructure_path"), py::arg("network_path"),
      "load and validate the two platform files; returns (platform, warnings)");

  m.def("parse_trace", &parse_trace, py::arg("path"));
  m.def("parse_trace_text", &parse_trace_text, py::arg("text"));
  m.def("trace_to_text", &trace_to_text, py::arg("jobs"));
  m.def("write_trace", &write_trace, py::arg("path"), py::arg("jobs"));
  m.def("generate_workload", &generate_workload, py::arg("spec"));
  m.def("synthesize_truth", &synthesize_truth, py::arg("jobs"), py::arg("platform"),
        py::arg("assignment"),
        "fill target_site and truth columns from a replay reference run");

  m.def(
      "run_simulation",
      [](const PlatformSpec& platform, const std::vector<Job>& jobs,
         const SimulationOptions& options) { return run_simulation(platform, jobs, options); },
      py::arg("platform"), py::arg("jobs"), py::arg("options") = SimulationOptions{});

  m.def("compute_summary", &compute_summary, py::arg("result"), py::arg("trace"));
  m.def("summary_to_csv", &summary_to_csv, py::arg("summary"));
  m.def("per_class_rel_mae", &per_class_rel_mae, py::arg("result"), py::arg("trace"));

  m.def("event_log_to_csv", &event_log_to_csv, py::arg("records"));
  m.def("event_log_to_jsonl", &event_log_to_jsonl, py::arg("records"));
  m.def("parse_event_log_csv", &parse_event_log_csv, py::arg("text"));
  m.def("parse_event_log_jsonl", &parse_event_log_jsonl, py::arg("text"));
  m.def("rel_mae", &rel_mae, py::arg("sim_truth_pairs"));
  m.def("geomean", &geomean, py::arg("values"));
  m.def("utilization_series", &utilization_series, py::arg("records"), py::arg("site"),
        py::arg("bucket_s"), py::arg("total_cores"));

  m.def("evaluate", &evaluate, py::arg("problem"), py::arg("params"));
  m.def("random_search", &random_search, py::arg("problem"), py::arg("n_samples"),
        py::arg("seed"));
  m.def("grid_search", &grid_search, py::arg("problem"), py::arg("points_per_site"));
  m.def("cma_es_calibrate", &cma_es_calibrate, py::arg("problem"), py::arg("population"),
        py::arg("generations"), py::arg("seed"));
  m.def("target_sites", &target_sites, py::arg("problem"));

  m.attr("__version__") = "0.1.0";
}
