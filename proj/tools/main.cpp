#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridweave/bench.hpp"
#include "gridweave/calibrate.hpp"
#include "gridweave/errors.hpp"
#include "gridweave/manifest.hpp"
#include "gridweave/metrics.hpp"
#include "gridweave/num_io.hpp"
#include "gridweave/platform.hpp"
#include "gridweave/simulation.hpp"
#include "gridweave/telemetry.hpp"
#include "gridweave/workload.hpp"

namespace {

using namespace gridweave;
namespace fs = std::filesystem;

constexpr const char* kCodeVersion = "gridweave 0.1.0";

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return 1;
    case ErrorCategory::Workload: return 2;
    case ErrorCategory::Runtime: return 3;
    case ErrorCategory::Io: return 4;
  }
  return 3;
}

// GRIDWEAVE_OUTPUT_DIR, when set, wins over both the flag and any params file.
std::string resolved_output_dir(const std::string& configured) {
  const char* env = std::getenv("GRIDWEAVE_OUTPUT_DIR");
  if (env != nullptr && *env != '\0') return env;
  return configured;
}

// Every write stays inside the output directory.
fs::path join_output(const fs::path& dir, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute())
    throw config_error("AbsoluteOutputPath",
                       "output file '" + name + "' must be relative to the output directory");
  return dir / p;
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("IoError", "cannot write '" + path.string() + "'");
  out << body;
  if (!out.flush()) throw io_error("IoError", "short write to '" + path.string() + "'");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sanitize_filename(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
      c = '_';
  return out;
}

std::string snapshots_to_csv(const std::vector<SnapshotRow>& rows) {
  std::string csv = "sim_time_s,site,available_cores,pending_jobs,assigned_jobs,finished_jobs\n";
  for (const SnapshotRow& row : rows) {
    csv += format_double(row.sim_time_s);
    csv += ',';
    csv += row.site;
    csv += ',';
    csv += std::to_string(row.available_cores);
    csv += ',';
    csv += std::to_string(row.pending_jobs);
    csv += ',';
    csv += std::to_string(row.assigned_jobs);
    csv += ',';
    csv += std::to_string(row.finished_jobs);
    csv += '\n';
  }
  return csv;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string infra, network, params, trace;
  std::string policy = "first_fit";
  std::uint64_t seed = 0;
  double stop_time = 0.0;
  double snapshot_interval = 0.0;
  std::string output_dir = "gridweave_out";
  std::string log_format = "csv";
  CLI::Option* policy_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* stop_opt = nullptr;
  CLI::Option* interval_opt = nullptr;
  CLI::Option* outdir_opt = nullptr;
};

int cmd_run(const RunArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();

  LoadedPlatform loaded = load_platform(args.infra, args.network);
  std::vector<std::string> warnings = loaded.warnings;

  ExecutionParams params;
  if (!args.params.empty()) {
    LoadedExecutionParams lp = load_execution_params(args.params);
    params = lp.params;
    warnings.insert(warnings.end(), lp.warnings.begin(), lp.warnings.end());
  }
  if (args.policy_opt->count() > 0 || params.policy.empty()) params.policy = args.policy;
  if (args.seed_opt->count() > 0) params.seed = args.seed;
  if (args.stop_opt->count() > 0) params.stop_time_s = args.stop_time;
  if (args.interval_opt->count() > 0) {
    params.snapshot_mode = SnapshotMode::Periodic;
    params.snapshot_interval_s = args.snapshot_interval;
  }
  if (args.outdir_opt->count() > 0) params.output_dir = args.output_dir;
  const fs::path outdir = resolved_output_dir(params.output_dir);

  if (args.log_format != "csv" && args.log_format != "jsonl")
    throw config_error("InvalidFlag", "--log-format must be csv or jsonl");

  const std::vector<Job> jobs = parse_trace(args.trace);

  SimulationOptions options;
  options.policy = params.policy;
  options.seed = params.seed;
  options.snapshot_mode = params.snapshot_mode;
  options.snapshot_interval_s = params.snapshot_interval_s;
  options.stop_time_s = params.stop_time_s;

  const SimulationResult result = run_simulation(loaded.platform, jobs, options);
  const SummaryMetrics summary = compute_summary(result, jobs);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  warnings.insert(warnings.end(), summary.warnings.begin(), summary.warnings.end());

  fs::create_directories(outdir);
  const bool jsonl = args.log_format == "jsonl";
  const fs::path log_path = join_output(outdir, jsonl ? "event_log.jsonl" : "event_log.csv");
  export_event_log(result.events, jsonl ? ExportFormat::Jsonl : ExportFormat::Csv,
                   log_path.string());
  const fs::path summary_path = join_output(outdir, "summary.csv");
  write_text_file(summary_path, summary_to_csv(summary));

  RunManifest manifest;
  manifest.command = "run";
  manifest.inputs.emplace_back(args.infra, hash_file(args.infra));
  manifest.inputs.emplace_back(args.network, hash_file(args.network));
  if (!args.params.empty()) manifest.inputs.emplace_back(args.params, hash_file(args.params));
  manifest.inputs.emplace_back(args.trace, hash_file(args.trace));
  manifest.seed = params.seed;
  manifest.policy = params.policy;
  manifest.code_version = kCodeVersion;
  manifest.truncated = result.truncated;
  manifest.warnings = warnings;
  manifest.outputs = {log_path.string(), summary_path.string()};
  if (params.snapshot_mode == SnapshotMode::Periodic) {
    const fs::path snap_path = join_output(outdir, "snapshots.csv");
    write_text_file(snap_path, snapshots_to_csv(result.snapshots));
    manifest.outputs.push_back(snap_path.string());
  }
  manifest.extra = {{"final_time_s", result.final_time_s},
                    {"total_jobs", result.total_jobs},
                    {"finished_jobs", result.finished_jobs},
                    {"failed_jobs", result.failed_jobs}};
  manifest.wall_runtime_s = elapsed_s(t0);
  write_manifest(manifest, join_output(outdir, "manifest.json").string());

  print_warnings(warnings);
  std::cout << "run complete: " << result.total_jobs << " jobs (" << result.finished_jobs
            << " finished, " << result.failed_jobs << " failed), simulated "
            << format_double(result.final_time_s) << " s"
            << (result.truncated ? " (truncated)" : "") << "; outputs in " << outdir.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string infra, network, trace;
  std::string optimizer = "random";
  int samples = 200;
  int points = 16;
  int population = 8;
  int generations = 50;
  std::uint64_t seed = 0;
  std::string parameter = "speed";
  std::string objective = "walltime";
  std::string mode = "per-site";
  double bounds_factor = 10.0;
  std::string bounds_file;
  std::string emit_platform;
  bool per_class = false;
  std::string output_dir = "gridweave_out";
};

std::map<std::string, std::pair<double, double>> load_bounds_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("MissingFile", "cannot read '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("SchemaViolation", "bounds file '" + path + "': " + e.what());
  }
  if (!doc.is_object())
    throw config_error("SchemaViolation", "bounds file must be an object of site -> [low, high]");
  std::map<std::string, std::pair<double, double>> bounds;
  for (const auto& [site, range] : doc.items()) {
    if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
      throw config_error("SchemaViolation",
                         "bounds for '" + site + "' must be a two-number array");
    bounds[site] = {range[0].get<double>(), range[1].get<double>()};
  }
  return bounds;
}

int cmd_calibrate(const CalibrateArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();

  LoadedPlatform loaded = load_platform(args.infra, args.network);
  std::vector<std::string> warnings = loaded.warnings;

  CalibrationProblem problem;
  problem.trace = parse_trace(args.trace);
  problem.base_platform = loaded.platform;

  if (args.parameter == "speed")
    problem.parameter = CalibrationParameter::SpeedPerCore;
  else if (args.parameter == "overhead")
    problem.parameter = CalibrationParameter::SchedulingOverhead;
  else
    throw config_error("InvalidFlag", "--parameter must be speed or overhead");

  if (args.objective == "walltime")
    problem.objective = CalibrationObjective::RelMaeWalltime;
  else if (args.objective == "queue")
    problem.objective = CalibrationObjective::RelMaeQueue;
  else
    throw config_error("InvalidFlag", "--objective must be walltime or queue");

  if (args.mode == "per-site")
    problem.mode = CalibrationMode::PerSiteIndependent;
  else if (args.mode == "joint")
    problem.mode = CalibrationMode::Joint;
  else
    throw config_error("InvalidFlag", "--mode must be per-site or joint");

  if (!args.bounds_file.empty()) {
    problem.bounds = load_bounds_file(args.bounds_file);
  } else {
    if (args.bounds_factor <= 1.0)
      throw config_error("InvalidFlag", "--bounds-factor must be > 1");
    for (const std::string& site : target_sites(problem)) {
      const SiteSpec* spec = problem.base_platform.find_site(site);
      if (spec == nullptr) continue;  // validation inside the optimizer reports this
      if (problem.parameter == CalibrationParameter::SpeedPerCore)
        problem.bounds[site] = {spec->speed_per_core / args.bounds_factor,
                                spec->speed_per_core * args.bounds_factor};
      else
        problem.bounds[site] = {0.0, std::max(600.0, spec->scheduling_overhead_s *
                                                         args.bounds_factor)};
    }
  }

  OptimizerSpec spec;
  if (args.optimizer == "random")
    spec.kind = OptimizerKind::RandomSearch;
  else if (args.optimizer == "grid")
    spec.kind = OptimizerKind::GridSearch;
  else if (args.optimizer == "cma")
    spec.kind = OptimizerKind::CmaEs;
  else
    throw config_error("InvalidFlag", "--optimizer must be random, grid, or cma");
  spec.n_samples = args.samples;
  spec.points = args.points;
  spec.population = args.population;
  spec.generations = args.generations;
  spec.seed = args.seed;

  const CalibrationResult result = calibrate(problem, spec);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());

  const fs::path outdir = resolved_output_dir(args.output_dir);
  fs::create_directories(outdir);
  const fs::path report_path = join_output(outdir, "calibration_report.csv");
  write_text_file(report_path, calibration_report_csv(problem, result));

  RunManifest manifest;
  manifest.command = "calibrate";
  manifest.inputs.emplace_back(args.infra, hash_file(args.infra));
  manifest.inputs.emplace_back(args.network, hash_file(args.network));
  manifest.inputs.emplace_back(args.trace, hash_file(args.trace));
  if (!args.bounds_file.empty())
    manifest.inputs.emplace_back(args.bounds_file, hash_file(args.bounds_file));
  manifest.seed = args.seed;
  manifest.policy = "replay";
  manifest.code_version = kCodeVersion;
  manifest.outputs = {report_path.string()};

  nlohmann::json bounds_json = nlohmann::json::object();
  for (const auto& [site, range] : problem.bounds)
    bounds_json[site] = {range.first, range.second};
  nlohmann::json params_json = nlohmann::json::object();
  for (const auto& [site, value] : result.params) params_json[site] = value;
  manifest.extra = {{"optimizer", args.optimizer},
                    {"parameter", args.parameter},
                    {"objective", args.objective},
                    {"mode", args.mode},
                    {"bounds", bounds_json},
                    {"samples", args.samples},
                    {"points", args.points},
                    {"population", args.population},
                    {"generations", args.generations},
                    {"objective_before", result.objective_before},
                    {"objective_after", result.objective_after},
                    {"evaluations_used", result.evaluations_used},
                    {"params", params_json}};

  if (!args.emit_platform.empty()) {
    const PlatformSpec calibrated =
        apply_params(problem.base_platform, problem.parameter, result.params);
    const fs::path platform_path = join_output(outdir, args.emit_platform);
    write_text_file(platform_path, dump_infrastructure_json(calibrated).dump(2) + "\n");
    manifest.outputs.push_back(platform_path.string());
  }

  if (args.per_class) {
    const PlatformSpec calibrated =
        apply_params(problem.base_platform, problem.parameter, result.params);
    SimulationOptions options;
    options.policy = "replay";
    const SimulationResult replay = run_simulation(calibrated, problem.trace, options);
    const std::map<std::string, double> per_class = per_class_rel_mae(replay, problem.trace);
    nlohmann::json pc = nlohmann::json::object();
    std::cout << "per-class rel-MAE (experimental):";
    for (const auto& [cls, err] : per_class) {
      pc[cls] = err;
      std::cout << ' ' << cls << '=' << format_double(err);
    }
    std::cout << "\n";
    manifest.extra["per_class_rel_mae"] = pc;
  }

  manifest.warnings = warnings;
  manifest.wall_runtime_s = elapsed_s(t0);
  write_manifest(manifest, join_output(outdir, "manifest.json").string());

  print_warnings(warnings);
  std::cout << "calibration: objective " << format_double(result.objective_before) << " -> "
            << format_double(result.objective_after) << " in " << result.evaluations_used
            << " evaluations; report in " << report_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- gen-workload

struct GenArgs {
  std::int64_t sites = 1;
  std::int64_t jobs_per_site = 1;
  std::uint64_t seed = 0;
  double work_min = 1e12, work_max = 5e12;
  std::vector<std::int64_t> cores = {1, 2, 4, 8};
  double interarrival = 1.0;
  double io_min = 1e8, io_max = 1e9;
  std::string out = "trace.csv";
  bool synth_truth = false;
  std::string infra, network;
  std::string output_dir = "gridweave_out";
};

int cmd_gen_workload(const GenArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();

  // Flag validation is a config concern; the generator's own checks sit
  // behind it for library callers.
  if (args.sites < 1) throw config_error("InvalidFlag", "--sites must be >= 1");
  if (args.jobs_per_site < 1) throw config_error("InvalidFlag", "--jobs-per-site must be >= 1");
  if (!(args.work_min >= 0.0) || !(args.work_max >= args.work_min))
    throw config_error("InvalidFlag", "--work-min/--work-max must satisfy 0 <= min <= max");
  if (!(args.io_min >= 0.0) || !(args.io_max >= args.io_min))
    throw config_error("InvalidFlag", "--io-min/--io-max must satisfy 0 <= min <= max");
  if (!(args.interarrival > 0.0))
    throw config_error("InvalidFlag", "--interarrival must be > 0");
  if (args.cores.empty()) throw config_error("InvalidFlag", "--cores must list at least one value");
  for (std::int64_t c : args.cores)
    if (c < 1) throw config_error("InvalidFlag", "--cores entries must be >= 1");

  WorkloadGenSpec spec;
  spec.n_sites = args.sites;
  spec.jobs_per_site = args.jobs_per_site;
  spec.seed = args.seed;
  spec.work_min = args.work_min;
  spec.work_max = args.work_max;
  spec.cores_choices = args.cores;
  spec.interarrival_mean_s = args.interarrival;
  spec.io_min_bytes = args.io_min;
  spec.io_max_bytes = args.io_max;

  std::vector<Job> jobs = generate_workload(spec);
  std::vector<std::string> warnings;

  RunManifest manifest;
  manifest.command = "gen-workload";

  if (args.synth_truth) {
    if (args.infra.empty() || args.network.empty())
      throw config_error("MissingFlag", "--synth-truth needs --infra and --network");
    LoadedPlatform loaded = load_platform(args.infra, args.network);
    warnings = loaded.warnings;
    std::vector<std::string> names;
    names.reserve(loaded.platform.sites.size());
    for (const SiteSpec& site : loaded.platform.sites) names.push_back(site.name);
    std::sort(names.begin(), names.end());
    std::map<std::uint64_t, std::string> assignment;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      assignment[jobs[i].id] = names[i % names.size()];
    jobs = synthesize_truth(jobs, loaded.platform, assignment);
    manifest.inputs.emplace_back(args.infra, hash_file(args.infra));
    manifest.inputs.emplace_back(args.network, hash_file(args.network));
  }

  const fs::path outdir = resolved_output_dir(args.output_dir);
  fs::create_directories(outdir);
  const fs::path out_path = join_output(outdir, args.out);
  fs::create_directories(out_path.parent_path());
  write_trace(out_path.string(), jobs);

  manifest.seed = args.seed;
  manifest.code_version = kCodeVersion;
  manifest.outputs = {out_path.string()};
  manifest.warnings = warnings;
  manifest.extra = {{"jobs", jobs.size()}, {"synth_truth", args.synth_truth}};
  manifest.wall_runtime_s = elapsed_s(t0);
  write_manifest(manifest, join_output(outdir, "manifest.json").string());

  print_warnings(warnings);
  std::cout << "wrote " << jobs.size() << " jobs to " << out_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string log, infra, network;
  std::string site;
  double bucket = 60.0;
  bool chart = false;
  std::string output_dir = "gridweave_out";
};

std::string render_chart_svg(
    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
    double bucket_s) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double ml = 60, mt = 20, mb = 40;
  const double plot_w = 600, plot_h = 400;
  double x_max = bucket_s;
  for (const auto& [site, pts] : series)
    for (const auto& [t, u] : pts) x_max = std::max(x_max, t + bucket_s);

  const double width = ml + plot_w + 220;
  const double height = mt + plot_h + mb;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    format_double(width) + "\" height=\"" + format_double(height) +
                    "\" viewBox=\"0 0 " + format_double(width) + " " + format_double(height) +
                    "\">\n";
  svg += "<rect x=\"" + format_double(ml) + "\" y=\"" + format_double(mt) + "\" width=\"" +
         format_double(plot_w) + "\" height=\"" + format_double(plot_h) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double y = mt + plot_h * (1.0 - frac);
    svg += "<line x1=\"" + format_double(ml - 4) + "\" y1=\"" + format_double(y) + "\" x2=\"" +
           format_double(ml) + "\" y2=\"" + format_double(y) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" + format_double(y + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" +
           format_double(frac) + "</text>\n";
    const double x = ml + plot_w * frac;
    svg += "<line x1=\"" + format_double(x) + "\" y1=\"" + format_double(mt + plot_h) +
           "\" x2=\"" + format_double(x) + "\" y2=\"" + format_double(mt + plot_h + 4) +
           "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(mt + plot_h + 18) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
           format_double(x_max * frac) + "</text>\n";
  }
  svg += "<text x=\"" + format_double(ml + plot_w / 2) + "\" y=\"" +
         format_double(height - 6) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">simulated time "
         "(s)</text>\n";

  int color = 0;
  double legend_y = mt + 14;
  for (const auto& [site, pts] : series) {
    const char* stroke = kPalette[color % 10];
    if (!pts.empty()) {
      std::string points;
      for (const auto& [t, u] : pts) {
        const double x = ml + (t + bucket_s / 2.0) / x_max * plot_w;
        const double y = mt + (1.0 - std::min(1.0, std::max(0.0, u))) * plot_h;
        points += format_double(x) + "," + format_double(y) + " ";
      }
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    const double lx = ml + plot_w + 16;
    svg += "<line x1=\"" + format_double(lx) + "\" y1=\"" + format_double(legend_y - 4) +
           "\" x2=\"" + format_double(lx + 24) + "\" y2=\"" + format_double(legend_y - 4) +
           "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_double(lx + 30) + "\" y=\"" + format_double(legend_y) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + site + "</text>\n";
    legend_y += 18;
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

int cmd_report(const ReportArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(args.bucket > 0.0)) throw config_error("InvalidFlag", "--bucket must be > 0");

  const bool jsonl = fs::path(args.log).extension() == ".jsonl";
  const std::vector<EventRecord> records =
      import_event_log(args.log, jsonl ? ExportFormat::Jsonl : ExportFormat::Csv);
  LoadedPlatform loaded = load_platform(args.infra, args.network);

  std::vector<std::string> sites;
  if (!args.site.empty()) {
    if (loaded.platform.find_site(args.site) == nullptr)
      throw config_error("UnknownSite", "no site named '" + args.site + "' in the platform");
    sites.push_back(args.site);
  } else {
    for (const SiteSpec& site : loaded.platform.sites) sites.push_back(site.name);
    std::sort(sites.begin(), sites.end());
  }

  const fs::path outdir = resolved_output_dir(args.output_dir);
  fs::create_directories(outdir);

  RunManifest manifest;
  manifest.command = "report";
  manifest.inputs.emplace_back(args.log, hash_file(args.log));
  manifest.inputs.emplace_back(args.infra, hash_file(args.infra));
  manifest.inputs.emplace_back(args.network, hash_file(args.network));
  manifest.code_version = kCodeVersion;

  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> all_series;
  for (const std::string& site : sites) {
    const SiteSpec* spec = loaded.platform.find_site(site);
    const auto series = utilization_series(records, site, args.bucket, spec->total_cores());
    std::string csv = "t_s,utilization\n";
    for (const auto& [t, u] : series) {
      csv += format_double(t);
      csv += ',';
      csv += format_double(u);
      csv += '\n';
    }
    const fs::path path = join_output(outdir, "utilization_" + sanitize_filename(site) + ".csv");
    write_text_file(path, csv);
    manifest.outputs.push_back(path.string());
    all_series.emplace_back(site, series);
  }

  // Jobs whose last recorded state is non-terminal: evidence of a truncated
  // or still-running log.
  std::map<std::uint64_t, JobState> last_state;
  for (const EventRecord& r : records) last_state[r.job_id] = r.state;
  std::int64_t finished = 0, failed = 0, incomplete = 0;
  for (const auto& [id, state] : last_state) {
    if (state == JobState::Finished)
      ++finished;
    else if (state == JobState::Failed)
      ++failed;
    else
      ++incomplete;
  }
  double horizon = 0.0;
  for (const EventRecord& r : records) horizon = std::max(horizon, r.sim_time_s);

  nlohmann::json summary = {{"events", records.size()},
                            {"horizon_s", horizon},
                            {"jobs", last_state.size()},
                            {"finished_jobs", finished},
                            {"failed_jobs", failed},
                            {"incomplete_jobs", incomplete},
                            {"bucket_s", args.bucket},
                            {"sites", sites}};
  const fs::path summary_path = join_output(outdir, "report_summary.json");
  write_text_file(summary_path, summary.dump(2) + "\n");
  manifest.outputs.push_back(summary_path.string());

  if (args.chart) {
    const fs::path chart_path = join_output(outdir, "utilization_chart.svg");
    write_text_file(chart_path, render_chart_svg(all_series, args.bucket));
    manifest.outputs.push_back(chart_path.string());
  }

  manifest.extra = summary;
  manifest.wall_runtime_s = elapsed_s(t0);
  write_manifest(manifest, join_output(outdir, "manifest.json").string());

  std::cout << "report: " << records.size() << " events over " << format_double(horizon)
            << " s, " << incomplete << " incomplete jobs; outputs in " << outdir.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- scale-bench

struct BenchArgs {
  int max_sites = 20;
  int jobs_per_site = 200;
  int repeats = 3;
  std::int64_t job_min = 1000;
  std::int64_t job_max = 8000;
  std::int64_t job_step = 1000;
  std::uint64_t seed = 0;
  bool skip_site_sweep = false;
  bool skip_job_sweep = false;
  std::string output_dir = "gridweave_out";
};

int cmd_scale_bench(const BenchArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path outdir = resolved_output_dir(args.output_dir);
  fs::create_directories(outdir);

  RunManifest manifest;
  manifest.command = "scale-bench";
  manifest.seed = args.seed;
  manifest.code_version = kCodeVersion;
  nlohmann::json summary = {{"repeats", args.repeats}};

  if (!args.skip_site_sweep) {
    const auto rows = run_site_sweep(args.max_sites, args.jobs_per_site, args.repeats, args.seed);
    const fs::path path = join_output(outdir, "site_sweep.csv");
    write_text_file(path, timing_csv(rows));
    manifest.outputs.push_back(path.string());
    if (rows.size() >= 2) {
      std::vector<std::pair<double, double>> xy;
      for (const BenchRow& row : rows)
        xy.emplace_back(static_cast<double>(row.sites), row.runtime_s_median);
      const double slope = fit_loglog_slope(xy);
      summary["site_slope"] = slope;
      std::cout << "site sweep: 1-" << args.max_sites << " sites x " << args.jobs_per_site
                << " jobs/site, log-log slope " << format_double(slope) << "\n";
    }
  }

  if (!args.skip_job_sweep) {
    const auto rows =
        run_job_sweep(args.job_min, args.job_max, args.job_step, args.repeats, args.seed);
    const fs::path path = join_output(outdir, "job_sweep.csv");
    write_text_file(path, timing_csv(rows));
    manifest.outputs.push_back(path.string());
    if (rows.size() >= 2) {
      std::vector<std::pair<double, double>> xy;
      for (const BenchRow& row : rows)
        xy.emplace_back(static_cast<double>(row.jobs), row.runtime_s_median);
      const double slope = fit_loglog_slope(xy);
      summary["job_slope"] = slope;
      std::cout << "job sweep: " << args.job_min << "-" << args.job_max
                << " jobs on one site, log-log slope " << format_double(slope) << "\n";
    }
  }

  const fs::path summary_path = join_output(outdir, "bench_summary.json");
  write_text_file(summary_path, summary.dump(2) + "\n");
  manifest.outputs.push_back(summary_path.string());
  manifest.extra = summary;
  manifest.wall_runtime_s = elapsed_s(t0);
  write_manifest(manifest, join_output(outdir, "manifest.json").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-event simulator for distributed computing grids"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate a trace against a platform");
  run_cmd->add_option("--infra", run_args.infra, "infrastructure JSON")->required();
  run_cmd->add_option("--network", run_args.network, "network JSON")->required();
  run_cmd->add_option("--trace", run_args.trace, "workload trace CSV")->required();
  run_cmd->add_option("--params", run_args.params, "execution-parameters JSON");
  run_args.policy_opt =
      run_cmd->add_option("--policy", run_args.policy, "allocation policy name");
  run_args.seed_opt = run_cmd->add_option("--seed", run_args.seed, "policy seed");
  run_args.stop_opt =
      run_cmd->add_option("--stop-time", run_args.stop_time, "truncate at this sim time (s)");
  run_args.interval_opt = run_cmd->add_option("--snapshot-interval", run_args.snapshot_interval,
                                              "enable periodic snapshots at this interval (s)");
  run_args.outdir_opt =
      run_cmd->add_option("--output-dir", run_args.output_dir, "output directory");
  run_cmd->add_option("--log-format", run_args.log_format, "event log format: csv or jsonl");

  CalibrateArgs cal_args;
  CLI::App* cal_cmd = app.add_subcommand("calibrate", "tune per-site parameters against truth");
  cal_cmd->add_option("--infra", cal_args.infra, "infrastructure JSON")->required();
  cal_cmd->add_option("--network", cal_args.network, "network JSON")->required();
  cal_cmd->add_option("--trace", cal_args.trace, "truth-bearing trace CSV")->required();
  cal_cmd->add_option("--optimizer", cal_args.optimizer, "random, grid, or cma");
  cal_cmd->add_option("--samples", cal_args.samples, "random-search candidate vectors");
  cal_cmd->add_option("--points", cal_args.points, "grid points per site");
  cal_cmd->add_option("--population", cal_args.population, "evolution-strategy population");
  cal_cmd->add_option("--generations", cal_args.generations, "evolution-strategy generations");
  cal_cmd->add_option("--seed", cal_args.seed, "optimizer seed");
  cal_cmd->add_option("--parameter", cal_args.parameter, "speed or overhead");
  cal_cmd->add_option("--objective", cal_args.objective, "walltime or queue");
  cal_cmd->add_option("--mode", cal_args.mode, "per-site or joint");
  cal_cmd->add_option("--bounds-factor", cal_args.bounds_factor,
                      "derive bounds as initial/factor .. initial*factor");
  cal_cmd->add_option("--bounds-file", cal_args.bounds_file,
                      "JSON object: site -> [low, high]");
  cal_cmd->add_option("--emit-platform", cal_args.emit_platform,
                      "also write a calibrated infrastructure JSON with this name");
  cal_cmd->add_flag("--per-class", cal_args.per_class,
                    "report rel-MAE split by single/multi-core (experimental)");
  cal_cmd->add_option("--output-dir", cal_args.output_dir, "output directory");

  GenArgs gen_args;
  CLI::App* gen_cmd = app.add_subcommand("gen-workload", "generate a synthetic trace");
  gen_cmd->add_option("--sites", gen_args.sites, "number of sites the workload targets");
  gen_cmd->add_option("--jobs-per-site", gen_args.jobs_per_site, "jobs per site");
  gen_cmd->add_option("--seed", gen_args.seed, "generator seed");
  gen_cmd->add_option("--work-min", gen_args.work_min, "min work per job (compute units)");
  gen_cmd->add_option("--work-max", gen_args.work_max, "max work per job (compute units)");
  gen_cmd->add_option("--cores", gen_args.cores, "comma-separated core choices")
      ->delimiter(',');
  gen_cmd->add_option("--interarrival", gen_args.interarrival, "mean interarrival time (s)");
  gen_cmd->add_option("--io-min", gen_args.io_min, "min input/output bytes");
  gen_cmd->add_option("--io-max", gen_args.io_max, "max input/output bytes");
  gen_cmd->add_option("--out", gen_args.out, "trace filename inside the output directory");
  gen_cmd->add_flag("--synth-truth", gen_args.synth_truth,
                    "fill truth columns from a reference run (needs --infra/--network)");
  gen_cmd->add_option("--infra", gen_args.infra, "infrastructure JSON for --synth-truth");
  gen_cmd->add_option("--network", gen_args.network, "network JSON for --synth-truth");
  gen_cmd->add_option("--output-dir", gen_args.output_dir, "output directory");

  ReportArgs rep_args;
  CLI::App* rep_cmd = app.add_subcommand("report", "utilization series from an event log");
  rep_cmd->add_option("--log", rep_args.log, "event log (csv or jsonl)")->required();
  rep_cmd->add_option("--infra", rep_args.infra, "infrastructure JSON")->required();
  rep_cmd->add_option("--network", rep_args.network, "network JSON")->required();
  rep_cmd->add_option("--site", rep_args.site, "restrict to one site");
  rep_cmd->add_option("--bucket", rep_args.bucket, "bucket width in seconds");
  rep_cmd->add_flag("--chart", rep_args.chart, "also render a self-contained SVG chart");
  rep_cmd->add_option("--output-dir", rep_args.output_dir, "output directory");

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("scale-bench", "runtime scaling sweeps");
  bench_cmd->add_option("--max-sites", bench_args.max_sites, "site sweep upper bound");
  bench_cmd->add_option("--jobs-per-site", bench_args.jobs_per_site, "jobs per site");
  bench_cmd->add_option("--repeats", bench_args.repeats, "timed repeats per configuration");
  bench_cmd->add_option("--job-min", bench_args.job_min, "job sweep start");
  bench_cmd->add_option("--job-max", bench_args.job_max, "job sweep end");
  bench_cmd->add_option("--job-step", bench_args.job_step, "job sweep step");
  bench_cmd->add_option("--seed", bench_args.seed, "workload seed");
  bench_cmd->add_flag("--skip-site-sweep", bench_args.skip_site_sweep, "skip the site sweep");
  bench_cmd->add_flag("--skip-job-sweep", bench_args.skip_job_sweep, "skip the job sweep");
  bench_cmd->add_option("--output-dir", bench_args.output_dir, "output directory");

  std::function<int()> action;
  run_cmd->callback([&]() { action = [&]() { return cmd_run(run_args); }; });
  cal_cmd->callback([&]() { action = [&]() { return cmd_calibrate(cal_args); }; });
  gen_cmd->callback([&]() { action = [&]() { return cmd_gen_workload(gen_args); }; });
  rep_cmd->callback([&]() { action = [&]() { return cmd_report(rep_args); }; });
  bench_cmd->callback([&]() { action = [&]() { return cmd_scale_bench(bench_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are config errors
  }

  try {
    return action ? action() : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(ErrorCategory::Runtime);
  }
}
