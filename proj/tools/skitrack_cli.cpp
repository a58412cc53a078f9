// skitrack: command-line entry point.
//
//   skitrack synth-gen     --out DIR [--spec FILE] [--seed N] [--embedding-noise S]
//   skitrack run           --config FILE --out DIR [threshold overrides...]
//   skitrack eval          --manifest M --gt G --pred P [...] [--out FILE] [--thresholded]
//   skitrack compare       --a REPORT --b REPORT [--out FILE]
//   skitrack check-client  --backend CMD | --replay TRACK

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skitrack/conformance.hpp"
#include "skitrack/dataio.hpp"
#include "skitrack/eval.hpp"
#include "skitrack/pipeline.hpp"
#include "skitrack/subprocess.hpp"
#include "skitrack/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skitrack;

namespace
{

// ---------------------------------------------------------------------------
// synth-gen

pipeline::RunConfig fixture_config(const std::vector<synth::SynthSpec>& specs, std::uint64_t seed)
{
  pipeline::RunConfig cfg;
  cfg.seed = seed;
  for (const auto& s : specs)
  {
    const fs::path d = s.sequence_id;
    pipeline::SequenceInputs in;
    in.manifest = d / synth::SequenceFiles::manifest;
    in.annotations = d / synth::SequenceFiles::annotations;
    in.base_track = d / synth::SequenceFiles::base_track;
    in.embeddings = d / synth::SequenceFiles::embeddings;
    in.detections = d / synth::SequenceFiles::detections;
    in.secondary_track = d / synth::SequenceFiles::secondary_track;
    in.oracle = d / synth::SequenceFiles::oracle;
    cfg.sequences.push_back(in);
  }
  return cfg;
}

int cmd_synth_gen(const std::string& spec_path, const fs::path& out, std::uint64_t seed, double noise,
                  bool expected)
{
  std::vector<synth::SynthSpec> specs;
  if (spec_path.empty())
  {
    specs = synth::default_fixture(seed, noise);
  }
  else
  {
    const json j = json::parse(dataio::read_file(spec_path));
    if (j.contains("sequences"))
    {
      for (const auto& s : j.at("sequences"))
      {
        specs.push_back(synth::spec_from_json(s));
      }
    }
    else
    {
      specs.push_back(synth::spec_from_json(j));
    }
  }

  for (const auto& s : specs)
  {
    synth::write_sequence(s, synth::generate(s), out / s.sequence_id);
  }
  const auto cfg = fixture_config(specs, seed);
  dataio::write_file(out / "run.json", pipeline::config_to_json(cfg).dump(2) + "\n");
  std::cout << "wrote " << specs.size() << " sequence(s) to " << out.string() << "\n";

  if (expected)
  {
    auto loaded = pipeline::load_config(out / "run.json");
    auto with = pipeline::run(loaded);
    loaded.reid_enabled = false;
    auto without = pipeline::run(loaded);
    if (!with.ok() || !without.ok() || !with.final_metrics || !without.final_metrics)
    {
      std::cerr << "error: fixture pipeline run failed\n";
      for (const auto& e : with.errors)
      {
        std::cerr << "  " << e << "\n";
      }
      return 1;
    }
    json corrected = json::object();
    for (const auto& s : with.sequences)
    {
      std::size_t n = 0;
      for (const auto& c : s.clips)
      {
        n += c.action == reid::ClipAction::corrected ? 1 : 0;
      }
      corrected[s.manifest.sequence_id] = n;
    }
    const json exp = {{"overall_f1_with_reid", with.final_metrics->overall_f1},
                      {"overall_f1_without_reid", without.final_metrics->overall_f1},
                      {"corrected_clips", corrected}};
    dataio::write_file(out / "expected_results.json", exp.dump(2) + "\n");
    std::cout << "overall F1 with reid " << eval::fmt3(with.final_metrics->overall_f1) << ", without "
              << eval::fmt3(without.final_metrics->overall_f1) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunOverrides
{
  std::optional<double> theta;
  std::optional<double> tau;
  std::optional<std::string> mode;
  std::optional<std::string> aggregation;
  std::optional<double> gate_iou;
  std::optional<double> q_pos;
  std::optional<double> q_vel;
  std::optional<double> r_meas;
  std::optional<double> v0;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> tracker_command;
  bool no_reid = false;
  bool thresholded = false;
};

int cmd_run(const fs::path& config, const fs::path& out, const RunOverrides& o)
{
  pipeline::RunConfig cfg;
  try
  {
    cfg = pipeline::load_config(config);
    if (o.theta) cfg.reid.similarity_threshold = *o.theta;
    if (o.tau) cfg.fusion.iou_threshold = *o.tau;
    if (o.mode) cfg.mode = pipeline::parse_mode(*o.mode);
    if (o.aggregation)
    {
      if (*o.aggregation != "mean" && *o.aggregation != "median")
      {
        throw ConfigError("unknown --aggregation '" + *o.aggregation + "' (valid: mean, median)");
      }
      cfg.reid.clip_aggregation = *o.aggregation == "mean" ? reid::Aggregation::mean : reid::Aggregation::median;
    }
    if (o.gate_iou) cfg.kalman.gate_iou = *o.gate_iou;
    if (o.q_pos) cfg.kalman.process_noise_pos = *o.q_pos;
    if (o.q_vel) cfg.kalman.process_noise_vel = *o.q_vel;
    if (o.r_meas) cfg.kalman.measurement_noise = *o.r_meas;
    if (o.v0) cfg.kalman.initial_velocity_variance = *o.v0;
    if (o.workers) cfg.workers = *o.workers;
    if (o.seed) cfg.seed = *o.seed;
    if (o.tracker_command)
    {
      cfg.tracker.kind = pipeline::TrackerKind::subprocess;
      cfg.tracker.command = *o.tracker_command;
    }
    if (o.no_reid) cfg.reid_enabled = false;
    if (o.thresholded) cfg.eval.thresholded = true;
    pipeline::validate(cfg);
  }
  catch (const std::exception& e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  const auto outcome = pipeline::run(cfg);
  pipeline::write_outputs(cfg, outcome, out);

  for (const auto& s : outcome.sequences)
  {
    std::cout << s.manifest.sequence_id << " [" << to_string(s.manifest.discipline) << ", "
              << pipeline::to_string(s.mode) << "]";
    std::vector<std::string> corrected;
    for (const auto& c : s.clips)
    {
      if (c.action == reid::ClipAction::corrected)
      {
        corrected.push_back(c.clip_id);
      }
    }
    std::cout << " corrected clips:";
    if (corrected.empty())
    {
      std::cout << " none";
    }
    for (const auto& c : corrected)
    {
      std::cout << " " << c;
    }
    std::cout << "\n";
  }
  if (outcome.final_metrics)
  {
    std::cout << eval::render_table(*outcome.final_metrics, "final");
  }
  for (const auto& w : outcome.warnings)
  {
    std::cerr << "warning: " << w << "\n";
  }
  for (const auto& e : outcome.errors)
  {
    std::cerr << "error: " << e << "\n";
  }
  return outcome.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// eval / compare

int cmd_eval(const std::vector<std::string>& manifests, const std::vector<std::string>& gts,
             const std::vector<std::string>& preds, const std::string& from_report, const std::string& out,
             bool thresholded)
{
  eval::MetricReport report;
  if (!from_report.empty())
  {
    report = dataio::load_report(from_report);
  }
  else
  {
    if (manifests.empty() || manifests.size() != gts.size() || manifests.size() != preds.size())
    {
      std::cerr << "error: --manifest, --gt and --pred must be given the same number of times (at least once)\n";
      return 1;
    }
    std::map<std::string, eval::SequenceEntry> entries;
    eval::EvalConfig cfg;
    cfg.thresholded = thresholded;
    for (std::size_t i = 0; i < manifests.size(); ++i)
    {
      const auto m = dataio::load_manifest(manifests[i]);
      const auto gt = dataio::load_annotations(gts[i], m);
      const auto pred = dataio::load_track(preds[i], m);
      entries[m.sequence_id] = {m.discipline, eval::score_sequence(pred, gt, cfg)};
    }
    report = eval::aggregate(entries);
  }
  std::cout << eval::render_table(report);
  for (const auto& [id, e] : report.per_sequence)
  {
    std::cout << "  " << id << " (" << to_string(e.discipline) << "): F1 " << eval::fmt3(e.score.f1) << "  P "
              << eval::fmt3(e.score.precision) << "  R " << eval::fmt3(e.score.recall) << "\n";
  }
  if (!out.empty())
  {
    dataio::save_report(report, out);
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out)
{
  const auto c = eval::ablation_compare(dataio::load_report(a), dataio::load_report(b));
  std::printf("overall F1 delta %+.4f  (improved %d, worsened %d, unchanged %d)\n", c.overall_f1_delta, c.improved,
              c.worsened, c.unchanged);
  for (const auto& [d, v] : c.per_discipline)
  {
    std::printf("  %s  dF1 %+.4f  dP %+.4f  dR %+.4f\n", std::string(to_string(d)).c_str(), v.f1, v.precision,
                v.recall);
  }
  for (const auto& [id, v] : c.per_sequence)
  {
    std::printf("  %s  dF1 %+.4f\n", id.c_str(), v.f1);
  }
  if (!out.empty())
  {
    dataio::write_file(out, dataio::comparison_to_json(c).dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// check-client

int cmd_check_client(const std::string& backend, const std::string& replay, int frames, std::int64_t timeout_ms)
{
  std::unique_ptr<TrackerClient> client;
  ConformanceProbe probe;
  if (!replay.empty())
  {
    const Track t = dataio::load_track(replay);
    FrameIndex first = -1;
    for (const auto& r : t.records())
    {
      if (r.present)
      {
        first = r.frame;
        break;
      }
    }
    if (first < 0)
    {
      std::cerr << "error: replay track has no present frames\n";
      return 1;
    }
    probe.clip_start = t.first_frame();
    probe.clip_end = t.last_frame();
    probe.prompt_box = [t](FrameIndex f) {
      const auto& r = t.at(f);
      return r.present ? r.box : BoundingBox{10, 10, 20, 40};
    };
    client = std::make_unique<ReplayTracker>(t);
  }
  else
  {
    SubprocessConfig sc;
    sc.command = split_command(backend);
    sc.timeout = std::chrono::milliseconds(timeout_ms);
    sc.enforce_contract = false;
    sc = with_env_override(sc);
    if (sc.command.empty())
    {
      std::cerr << "error: no backend: pass --backend or set " << kBackendEnvVar << "\n";
      return 1;
    }
    probe.clip_start = 0;
    probe.clip_end = frames - 1;
    probe.prompt_box = [](FrameIndex f) { return BoundingBox{100.0 + f, 50.0, 40.0, 80.0}; };
    client = std::make_unique<SubprocessTracker>(sc);
  }

  const auto report = run_conformance(*client, probe);
  for (const auto& c : report.checks)
  {
    std::cout << (c.skipped ? "SKIP " : c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.passed || c.skipped)
    {
      std::cout << ": " << c.detail;
    }
    std::cout << "\n";
  }
  std::cout << (report.passed() ? "conformant" : "NOT conformant") << "\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"skitrack: ReID-based skier tracking pipeline and evaluation"};
  app.require_subcommand(1);

  // synth-gen
  auto* synth_cmd = app.add_subcommand("synth-gen", "Generate a synthetic multi-camera fixture");
  std::string synth_spec;
  std::string synth_out;
  std::uint64_t synth_seed = 42;
  double synth_noise = 0.05;
  bool synth_no_expected = false;
  synth_cmd->add_option("--spec", synth_spec, "Synth spec JSON (one spec or {\"sequences\": [...]}); default fixture if omitted");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "Fixture seed (default fixture only)")->capture_default_str();
  synth_cmd->add_option("--embedding-noise", synth_noise, "Embedding noise sigma (default fixture only)")->capture_default_str();
  synth_cmd->add_flag("--no-expected", synth_no_expected, "Skip computing expected_results.json");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run reid correction and post-processing");
  std::string run_config;
  std::string run_out;
  RunOverrides ov;
  run_cmd->add_option("--config", run_config, "Run configuration JSON")->required();
  run_cmd->add_option("--out", run_out, "Output directory")->required();
  run_cmd->add_option("--theta", ov.theta, "Reid similarity threshold (default 0.6)");
  run_cmd->add_option("--tau", ov.tau, "Fusion IoU threshold (default 0.5)");
  run_cmd->add_option("--mode", ov.mode, "auto | single_skier | multi_skier (default auto)");
  run_cmd->add_option("--aggregation", ov.aggregation, "Clip similarity aggregation: mean | median (default mean)");
  run_cmd->add_option("--gate-iou", ov.gate_iou, "Kalman detection gate IoU (default 0.3)");
  run_cmd->add_option("--process-noise-pos", ov.q_pos, "Kalman position process noise (default 1.0)");
  run_cmd->add_option("--process-noise-vel", ov.q_vel, "Kalman velocity process noise (default 0.1)");
  run_cmd->add_option("--measurement-noise", ov.r_meas, "Kalman measurement noise (default 1.0)");
  run_cmd->add_option("--initial-velocity-variance", ov.v0, "Kalman initial velocity variance (default 10.0)");
  run_cmd->add_option("--workers", ov.workers, "Sequences processed in parallel (default 1)");
  run_cmd->add_option("--seed", ov.seed, "Seed for stochastic clients (default 42)");
  run_cmd->add_option("--tracker-command", ov.tracker_command, "Use a subprocess tracker backend");
  run_cmd->add_flag("--no-reid", ov.no_reid, "Disable the reid correction pass");
  run_cmd->add_flag("--thresholded", ov.thresholded, "Score frames as hit/miss at IoU >= 0.5");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  std::vector<std::string> eval_manifests;
  std::vector<std::string> eval_gts;
  std::vector<std::string> eval_preds;
  std::string eval_from;
  std::string eval_out;
  bool eval_thresholded = false;
  eval_cmd->add_option("--manifest", eval_manifests, "Sequence manifest (repeat per sequence)");
  eval_cmd->add_option("--gt", eval_gts, "Annotations file (repeat per sequence)");
  eval_cmd->add_option("--pred", eval_preds, "Predicted track file (repeat per sequence)");
  eval_cmd->add_option("--from-report", eval_from, "Render an existing metrics report instead");
  eval_cmd->add_option("--out", eval_out, "Write the metrics report JSON here");
  eval_cmd->add_flag("--thresholded", eval_thresholded, "Score frames as hit/miss at IoU >= 0.5");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Compare two metrics reports (deltas are b - a)");
  std::string cmp_a;
  std::string cmp_b;
  std::string cmp_out;
  cmp_cmd->add_option("--a", cmp_a, "Baseline report")->required();
  cmp_cmd->add_option("--b", cmp_b, "Candidate report")->required();
  cmp_cmd->add_option("--out", cmp_out, "Write the comparison JSON here");

  // check-client
  auto* chk_cmd = app.add_subcommand("check-client", "Run the tracker client conformance suite");
  std::string chk_backend;
  std::string chk_replay;
  int chk_frames = 21;
  std::int64_t chk_timeout = 10000;
  chk_cmd->add_option("--backend", chk_backend, std::string("Backend command line (or set ") + kBackendEnvVar + ")");
  chk_cmd->add_option("--replay", chk_replay, "Check the replay client over this track file instead");
  chk_cmd->add_option("--frames", chk_frames, "Probe clip length")->capture_default_str()->check(CLI::PositiveNumber);
  chk_cmd->add_option("--timeout-ms", chk_timeout, "Per-session timeout")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*synth_cmd)
    {
      return cmd_synth_gen(synth_spec, synth_out, synth_seed, synth_noise, !synth_no_expected);
    }
    if (*run_cmd)
    {
      return cmd_run(run_config, run_out, ov);
    }
    if (*eval_cmd)
    {
      return cmd_eval(eval_manifests, eval_gts, eval_preds, eval_from, eval_out, eval_thresholded);
    }
    if (*cmp_cmd)
    {
      return cmd_compare(cmp_a, cmp_b, cmp_out);
    }
    if (*chk_cmd)
    {
      return cmd_check_client(chk_backend, chk_replay, chk_frames, chk_timeout);
    }
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
