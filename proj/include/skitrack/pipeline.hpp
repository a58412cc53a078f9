///////////////////////////////////////////////////////////////////////////////
// pipeline.hpp: run configuration and end-to-end orchestration
//
// Stage order per sequence: base track -> reid pass -> post-processing
// (Kalman refinement for single-skier mode, IoU fusion for multi-skier mode)
// -> optional evaluation against ground truth.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "skitrack/clients.hpp"
#include "skitrack/dataio.hpp"
#include "skitrack/eval.hpp"
#include "skitrack/fusion.hpp"
#include "skitrack/kalman.hpp"
#include "skitrack/reid.hpp"
#include "skitrack/subprocess.hpp"

namespace skitrack::pipeline
{

namespace fs = std::filesystem;
using nlohmann::json;

enum class Mode
{
  auto_select,
  single_skier,
  multi_skier
};

inline std::string_view to_string(Mode m)
{
  switch (m)
  {
    case Mode::auto_select: return "auto";
    case Mode::single_skier: return "single_skier";
    case Mode::multi_skier: return "multi_skier";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s)
{
  if (s == "auto")
  {
    return Mode::auto_select;
  }
  if (s == "single_skier")
  {
    return Mode::single_skier;
  }
  if (s == "multi_skier")
  {
    return Mode::multi_skier;
  }
  throw ConfigError("unknown mode '" + s + "' (valid: auto, single_skier, multi_skier)");
}

/// AL and JP are single-skier disciplines; FS is multi-skier.
inline Mode mode_for(Discipline d)
{
  return d == Discipline::FS ? Mode::multi_skier : Mode::single_skier;
}

enum class TrackerKind
{
  oracle,
  replay,
  subprocess
};

struct TrackerSettings
{
  TrackerKind kind = TrackerKind::oracle;
  std::string command;  // subprocess
  std::int64_t timeout_ms = 60000;
};

/// Paths are resolved against the config file's directory.
struct SequenceInputs
{
  fs::path manifest;
  fs::path annotations;
  fs::path base_track;
  fs::path embeddings;
  fs::path detections;
  fs::path secondary_track;
  fs::path oracle;
  fs::path replay_track;
  std::optional<Mode> mode;
};

struct RunConfig
{
  std::vector<SequenceInputs> sequences;
  Mode mode = Mode::auto_select;
  bool reid_enabled = true;
  reid::ReidConfig reid;
  std::size_t embedding_dim = 0;
  fusion::FusionConfig fusion;
  kalman::KalmanParams kalman;
  TrackerSettings tracker;
  eval::EvalConfig eval;
  std::uint64_t seed = 42;
  int workers = 1;
};

// ---------------------------------------------------------------------------
// Config (de)serialization

inline std::string path_str(const fs::path& p)
{
  return p.empty() ? std::string() : p.generic_string();
}

inline json config_to_json(const RunConfig& c)
{
  json seqs = json::array();
  for (const auto& s : c.sequences)
  {
    json j = {{"manifest", path_str(s.manifest)}};
    auto opt = [&](const char* key, const fs::path& p) {
      if (!p.empty())
      {
        j[key] = path_str(p);
      }
    };
    opt("annotations", s.annotations);
    opt("base_track", s.base_track);
    opt("embeddings", s.embeddings);
    opt("detections", s.detections);
    opt("secondary_track", s.secondary_track);
    opt("oracle", s.oracle);
    opt("replay_track", s.replay_track);
    if (s.mode)
    {
      j["mode"] = std::string(to_string(*s.mode));
    }
    seqs.push_back(j);
  }
  const char* kind = c.tracker.kind == TrackerKind::oracle   ? "oracle"
                     : c.tracker.kind == TrackerKind::replay ? "replay"
                                                             : "subprocess";
  return {{"sequences", seqs},
          {"mode", std::string(to_string(c.mode))},
          {"reid",
           {{"enabled", c.reid_enabled},
            {"similarity_threshold", c.reid.similarity_threshold},
            {"clip_aggregation", std::string(reid::to_string(c.reid.clip_aggregation))},
            {"embedding_dim", c.embedding_dim}}},
          {"fusion", {{"iou_threshold", c.fusion.iou_threshold}}},
          {"kalman",
           {{"process_noise_pos", c.kalman.process_noise_pos},
            {"process_noise_vel", c.kalman.process_noise_vel},
            {"measurement_noise", c.kalman.measurement_noise},
            {"initial_velocity_variance", c.kalman.initial_velocity_variance},
            {"gate_iou", c.kalman.gate_iou}}},
          {"tracker", {{"kind", kind}, {"command", c.tracker.command}, {"timeout_ms", c.tracker.timeout_ms}}},
          {"eval", {{"thresholded", c.eval.thresholded}, {"hit_iou", c.eval.hit_iou}}},
          {"seed", c.seed},
          {"workers", c.workers}};
}

inline RunConfig config_from_json(const json& j, const fs::path& base_dir)
{
  RunConfig c;
  auto resolve = [&](const json& obj, const char* key) -> fs::path {
    if (!obj.contains(key))
    {
      return {};
    }
    fs::path p = obj.at(key).get<std::string>();
    if (p.empty())
    {
      return {};
    }
    return p.is_absolute() ? p : base_dir / p;
  };
  try
  {
    if (!j.contains("sequences") || !j.at("sequences").is_array() || j.at("sequences").empty())
    {
      throw ConfigError("config: 'sequences' must be a non-empty array");
    }
    for (const auto& s : j.at("sequences"))
    {
      SequenceInputs in;
      in.manifest = resolve(s, "manifest");
      in.annotations = resolve(s, "annotations");
      in.base_track = resolve(s, "base_track");
      in.embeddings = resolve(s, "embeddings");
      in.detections = resolve(s, "detections");
      in.secondary_track = resolve(s, "secondary_track");
      in.oracle = resolve(s, "oracle");
      in.replay_track = resolve(s, "replay_track");
      if (s.contains("mode"))
      {
        in.mode = parse_mode(s.at("mode").get<std::string>());
      }
      c.sequences.push_back(std::move(in));
    }
    c.mode = parse_mode(j.value("mode", std::string("auto")));
    if (j.contains("reid"))
    {
      const auto& r = j.at("reid");
      c.reid_enabled = r.value("enabled", c.reid_enabled);
      c.reid.similarity_threshold = r.value("similarity_threshold", c.reid.similarity_threshold);
      const auto agg = r.value("clip_aggregation", std::string("mean"));
      if (agg == "mean")
      {
        c.reid.clip_aggregation = reid::Aggregation::mean;
      }
      else if (agg == "median")
      {
        c.reid.clip_aggregation = reid::Aggregation::median;
      }
      else
      {
        throw ConfigError("config: unknown clip_aggregation '" + agg + "' (valid: mean, median)");
      }
      c.embedding_dim = r.value("embedding_dim", c.embedding_dim);
    }
    if (j.contains("fusion"))
    {
      c.fusion.iou_threshold = j.at("fusion").value("iou_threshold", c.fusion.iou_threshold);
    }
    if (j.contains("kalman"))
    {
      const auto& k = j.at("kalman");
      c.kalman.process_noise_pos = k.value("process_noise_pos", c.kalman.process_noise_pos);
      c.kalman.process_noise_vel = k.value("process_noise_vel", c.kalman.process_noise_vel);
      c.kalman.measurement_noise = k.value("measurement_noise", c.kalman.measurement_noise);
      c.kalman.initial_velocity_variance = k.value("initial_velocity_variance", c.kalman.initial_velocity_variance);
      c.kalman.gate_iou = k.value("gate_iou", c.kalman.gate_iou);
    }
    if (j.contains("tracker"))
    {
      const auto& t = j.at("tracker");
      const auto kind = t.value("kind", std::string("oracle"));
      if (kind == "oracle")
      {
        c.tracker.kind = TrackerKind::oracle;
      }
      else if (kind == "replay")
      {
        c.tracker.kind = TrackerKind::replay;
      }
      else if (kind == "subprocess")
      {
        c.tracker.kind = TrackerKind::subprocess;
      }
      else
      {
        throw ConfigError("config: unknown tracker kind '" + kind + "' (valid: oracle, replay, subprocess)");
      }
      c.tracker.command = t.value("command", std::string());
      c.tracker.timeout_ms = t.value("timeout_ms", c.tracker.timeout_ms);
    }
    if (j.contains("eval"))
    {
      c.eval.thresholded = j.at("eval").value("thresholded", c.eval.thresholded);
      c.eval.hit_iou = j.at("eval").value("hit_iou", c.eval.hit_iou);
    }
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
  }
  catch (const json::exception& e)
  {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const fs::path& path)
{
  const auto text = dataio::read_file(path);
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

/// Checks everything that can be checked without reading inputs.
inline void validate(const RunConfig& c)
{
  reid::validate(c.reid);
  fusion::validate(c.fusion);
  kalman::validate(c.kalman);
  if (c.workers < 1)
  {
    throw ConfigError("config: workers must be >= 1");
  }
  if (c.tracker.timeout_ms <= 0)
  {
    throw ConfigError("config: tracker timeout_ms must be > 0");
  }
  if (c.reid_enabled && c.tracker.kind == TrackerKind::subprocess && c.tracker.command.empty() &&
      !std::getenv(kBackendEnvVar))
  {
    throw ConfigError(std::string("config: subprocess tracker needs 'command' or ") + kBackendEnvVar);
  }
  for (std::size_t i = 0; i < c.sequences.size(); ++i)
  {
    const auto& s = c.sequences[i];
    const std::string where = "config: sequences[" + std::to_string(i) + "]";
    auto need = [&](const fs::path& p, const char* key, const char* why) {
      if (p.empty())
      {
        throw ConfigError(where + ": missing '" + key + "' path (" + why + ")");
      }
      if (!fs::exists(p))
      {
        throw ConfigError(where + ": '" + key + "' file " + p.string() + " does not exist");
      }
    };
    need(s.manifest, "manifest", "always required");
    need(s.base_track, "base_track", "always required");
    if (!s.annotations.empty())
    {
      need(s.annotations, "annotations", "optional");
    }
    if (!s.detections.empty())
    {
      need(s.detections, "detections", "optional");
    }
    if (!s.secondary_track.empty())
    {
      need(s.secondary_track, "secondary_track", "optional");
    }
    if (c.reid_enabled)
    {
      need(s.embeddings, "embeddings", "required when reid is enabled");
      need(s.detections, "detections", "required when reid is enabled");
      if (c.tracker.kind == TrackerKind::oracle)
      {
        need(s.oracle, "oracle", "required by the oracle tracker");
      }
      if (c.tracker.kind == TrackerKind::replay)
      {
        need(s.replay_track, "replay_track", "required by the replay tracker");
      }
    }
    const Mode m = s.mode.value_or(c.mode);
    if (m == Mode::multi_skier)
    {
      need(s.secondary_track, "secondary_track", "required in multi_skier mode");
    }
  }
}

// ---------------------------------------------------------------------------
// Oracle tracker file

inline OracleConfig load_oracle(const fs::path& path, const SequenceManifest& manifest, std::uint64_t seed)
{
  const auto text = dataio::read_file(path);
  OracleConfig cfg;
  try
  {
    const json j = json::parse(text);
    const fs::path dir = path.parent_path();
    cfg.target = dataio::load_annotations(dir / j.at("target").get<std::string>(), manifest);
    const json distractors = j.value("distractors", json::object());
    for (const auto& [k, v] : distractors.items())
    {
      cfg.distractors[std::stoi(k)] = dataio::load_annotations(dir / v.get<std::string>(), manifest);
    }
    for (const auto& e : j.value("switches", json::array()))
    {
      cfg.schedule.push_back({e.at("frame").get<FrameIndex>(), e.at("distractor").get<int>()});
    }
    cfg.noise_sigma = j.value("noise_sigma", 0.0);
    cfg.initial_frame = j.value("initial_frame", manifest.first_frame());
    cfg.seed = j.value("seed", seed);
  }
  catch (const json::exception& e)
  {
    throw ConfigError("oracle file '" + path.string() + "': " + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Running

struct StageError : Error
{
  StageError(const std::string& sequence, const std::string& stage, const std::string& what)
    : Error("sequence '" + sequence + "', stage '" + stage + "': " + what), stage(stage)
  {
  }
  std::string stage;
};

struct SequenceResult
{
  std::size_t input_index = 0;
  SequenceManifest manifest;
  Mode mode = Mode::single_skier;
  Track base_track;
  Track reid_track;
  Track final_track;
  std::vector<reid::ClipReport> clips;
  std::optional<fusion::FusionResult> fusion;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
  std::optional<GroundTruth> ground_truth;
};

inline std::unique_ptr<TrackerClient> make_tracker(const RunConfig& cfg, const SequenceInputs& in,
                                                   const SequenceManifest& manifest, std::vector<std::string>& warnings)
{
  switch (cfg.tracker.kind)
  {
    case TrackerKind::oracle:
      return std::make_unique<OracleTracker>(load_oracle(in.oracle, manifest, cfg.seed));
    case TrackerKind::replay:
      return std::make_unique<ReplayTracker>(dataio::load_track(in.replay_track, manifest),
                                             [&warnings](const std::string& w) { warnings.push_back(w); });
    case TrackerKind::subprocess:
    {
      SubprocessConfig sc;
      sc.command = split_command(cfg.tracker.command);
      sc.timeout = std::chrono::milliseconds(cfg.tracker.timeout_ms);
      return std::make_unique<SubprocessTracker>(with_env_override(sc));
    }
  }
  throw ConfigError("unknown tracker kind");
}

inline SequenceResult run_sequence(const RunConfig& cfg, const SequenceInputs& in)
{
  SequenceResult res;
  std::string seq = in.manifest.string();
  auto stage = [&](const char* name, auto&& fn) {
    try
    {
      fn();
    }
    catch (const StageError&)
    {
      throw;
    }
    catch (const std::exception& e)
    {
      throw StageError(seq, name, e.what());
    }
  };

  DetectionsByFrame detections;
  stage("load", [&] {
    res.manifest = dataio::load_manifest(in.manifest);
    seq = res.manifest.sequence_id;
    res.base_track = dataio::load_track(in.base_track, res.manifest);
    if (!in.annotations.empty())
    {
      res.ground_truth = dataio::load_annotations(in.annotations, res.manifest);
    }
    if (!in.detections.empty())
    {
      detections = dataio::load_detections(in.detections);
    }
  });
  res.mode = in.mode.value_or(cfg.mode);
  if (res.mode == Mode::auto_select)
  {
    res.mode = mode_for(res.manifest.discipline);
  }

  res.reid_track = res.base_track;
  if (cfg.reid_enabled)
  {
    stage("reid", [&] {
      auto store = std::make_shared<EmbeddingStore>(dataio::load_embeddings(in.embeddings, cfg.embedding_dim));
      if (!store->anchor())
      {
        throw InputError("embeddings file " + in.embeddings.string() + " has no anchor record");
      }
      ReplayDetector detector(detections, store);
      auto tracker = make_tracker(cfg, in, res.manifest, res.warnings);
      auto out = reid::reid_pass(res.base_track, res.manifest, *store->anchor(), *store, detector, *tracker, cfg.reid);
      res.reid_track = std::move(out.track);
      res.clips = std::move(out.clips);
      for (const auto& c : res.clips)
      {
        if (c.action == reid::ClipAction::no_candidates)
        {
          res.warnings.push_back("clip '" + c.clip_id + "': " + c.message);
        }
        else if (c.action == reid::ClipAction::tracker_failed)
        {
          res.errors.push_back("sequence '" + seq + "', stage 'reid': clip '" + c.clip_id +
                               "' correction aborted: " + c.message);
        }
      }
    });
  }

  stage("postprocess", [&] {
    if (res.mode == Mode::single_skier)
    {
      res.final_track = kalman::refine_single_skier(res.reid_track, res.manifest, detections, cfg.kalman);
    }
    else
    {
      const Track secondary = dataio::load_track(in.secondary_track, res.manifest);
      res.fusion = fusion::fuse_tracks(res.reid_track, secondary, cfg.fusion);
      res.final_track = res.fusion->track;
      if (!res.fusion->absent_primary_frames.empty())
      {
        res.warnings.push_back(std::to_string(res.fusion->absent_primary_frames.size()) +
                               " frame(s) absent in the primary track but present in the secondary; kept absent");
      }
    }
  });
  return res;
}

struct RunOutcome
{
  std::vector<SequenceResult> sequences;
  std::optional<eval::MetricReport> base_metrics;
  std::optional<eval::MetricReport> reid_metrics;
  std::optional<eval::MetricReport> final_metrics;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

inline std::optional<eval::MetricReport> metrics_for(const std::vector<SequenceResult>& seqs,
                                                     const Track SequenceResult::*which, const eval::EvalConfig& cfg)
{
  std::map<std::string, eval::SequenceEntry> entries;
  for (const auto& s : seqs)
  {
    if (!s.ground_truth)
    {
      return std::nullopt;
    }
    entries[s.manifest.sequence_id] = {s.manifest.discipline, eval::score_sequence(s.*which, *s.ground_truth, cfg)};
  }
  return eval::aggregate(entries);
}

/// Runs every sequence (up to cfg.workers in parallel). Stage errors are
/// collected rather than thrown; a failed sequence produces no outputs.
inline RunOutcome run(const RunConfig& cfg)
{
  validate(cfg);
  const std::size_t n = cfg.sequences.size();
  std::vector<std::optional<SequenceResult>> results(n);
  std::vector<std::string> failures(n);

  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;)
    {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n)
        {
          return;
        }
        i = next++;
      }
      try
      {
        results[i] = run_sequence(cfg, cfg.sequences[i]);
        results[i]->input_index = i;
      }
      catch (const std::exception& e)
      {
        failures[i] = e.what();
      }
    }
  };
  const int nworkers = std::min<int>(cfg.workers, static_cast<int>(n));
  if (nworkers <= 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w)
    {
      pool.emplace_back(worker);
    }
    for (auto& t : pool)
    {
      t.join();
    }
  }

  RunOutcome out;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!failures[i].empty())
    {
      out.errors.push_back(failures[i]);
      continue;
    }
    auto& r = *results[i];
    for (const auto& e : r.errors)
    {
      out.errors.push_back(e);
    }
    for (const auto& w : r.warnings)
    {
      out.warnings.push_back("sequence '" + r.manifest.sequence_id + "': " + w);
    }
    out.sequences.push_back(std::move(r));
  }
  if (out.errors.empty() && !out.sequences.empty())
  {
    try
    {
      out.base_metrics = metrics_for(out.sequences, &SequenceResult::base_track, cfg.eval);
      out.reid_metrics = metrics_for(out.sequences, &SequenceResult::reid_track, cfg.eval);
      out.final_metrics = metrics_for(out.sequences, &SequenceResult::final_track, cfg.eval);
    }
    catch (const std::exception& e)
    {
      out.errors.push_back(std::string("stage 'eval': ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Outputs

inline json clip_report_json(const reid::ClipReport& c)
{
  json j = {{"clip_id", c.clip_id}, {"similarity", c.similarity}, {"action", std::string(reid::to_string(c.action))}};
  if (c.b_mid)
  {
    j["b_mid"] = protocol::box_to_json(*c.b_mid);
  }
  if (!c.message.empty())
  {
    j["message"] = c.message;
  }
  return j;
}

inline json run_report_json(const RunOutcome& o)
{
  json seqs = json::object();
  for (const auto& s : o.sequences)
  {
    json clips = json::array();
    std::vector<std::string> corrected;
    for (const auto& c : s.clips)
    {
      clips.push_back(clip_report_json(c));
      if (c.action == reid::ClipAction::corrected)
      {
        corrected.push_back(c.clip_id);
      }
    }
    json j = {{"discipline", std::string(to_string(s.manifest.discipline))},
              {"mode", std::string(to_string(s.mode))},
              {"clips", clips},
              {"corrected_clips", corrected},
              {"warnings", s.warnings}};
    if (s.fusion)
    {
      j["fusion"] = {{"adopted_frames", s.fusion->adopted},
                     {"absent_primary_frames", s.fusion->absent_primary_frames}};
    }
    seqs[s.manifest.sequence_id] = j;
  }
  json rep = {{"sequences", seqs}, {"errors", o.errors}, {"warnings", o.warnings}};
  if (o.base_metrics)
  {
    rep["metrics"] = {{"base", dataio::report_to_json(*o.base_metrics)},
                      {"reid", dataio::report_to_json(*o.reid_metrics)},
                      {"final", dataio::report_to_json(*o.final_metrics)}};
  }
  return rep;
}

/// Effective config: every default resolved, per-sequence modes filled in.
inline json effective_config_json(RunConfig cfg, const RunOutcome& o)
{
  for (const auto& r : o.sequences)
  {
    cfg.sequences[r.input_index].mode = r.mode;
  }
  if (cfg.embedding_dim == 0)
  {
    for (const auto& s : cfg.sequences)
    {
      if (!s.embeddings.empty() && fs::exists(s.embeddings))
      {
        cfg.embedding_dim = dataio::load_embeddings(s.embeddings).dim();
        break;
      }
    }
  }
  if (cfg.tracker.kind == TrackerKind::subprocess)
  {
    if (const char* env = std::getenv(kBackendEnvVar); env && *env)
    {
      cfg.tracker.command = env;
    }
  }
  return config_to_json(cfg);
}

/// Writes per-sequence tracks, run_report.json, effective_config.json and,
/// when ground truth is available, metrics.json.
inline void write_outputs(const RunConfig& cfg, const RunOutcome& o, const fs::path& out_dir)
{
  fs::create_directories(out_dir);
  for (const auto& s : o.sequences)
  {
    const fs::path dir = out_dir / s.manifest.sequence_id;
    dataio::save_track(s.reid_track, dir / "reid_track.csv");
    dataio::save_track(s.final_track, dir / "final_track.csv");
  }
  dataio::write_file(out_dir / "run_report.json", run_report_json(o).dump(2) + "\n");
  dataio::write_file(out_dir / "effective_config.json", effective_config_json(cfg, o).dump(2) + "\n");
  if (o.final_metrics)
  {
    dataio::save_report(*o.final_metrics, out_dir / "metrics.json");
  }
}

}  // namespace skitrack::pipeline
