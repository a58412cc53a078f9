///////////////////////////////////////////////////////////////////////////////
// synth.hpp: deterministic synthetic multi-camera sequences
//
// Identity 0 is the target; 1..n-1 are distractors. Each clip is a new camera
// and every identity's trajectory restarts there. The base track follows the
// target's GT (plus box noise) until a switch event, then the distractor's GT
// for the rest of that clip.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "skitrack/clients.hpp"
#include "skitrack/dataio.hpp"

namespace skitrack::synth
{

enum class TrajectoryKind
{
  linear_descent,
  parabolic_jump
};

struct SynthSwitch
{
  int clip_index = 0;
  FrameIndex frame_offset = 0;
  int distractor = 1;
};

struct SynthSpec
{
  std::string sequence_id = "synth";
  Discipline discipline = Discipline::AL;
  std::uint64_t seed = 42;
  int n_identities = 2;
  int n_clips = 3;
  int frames_per_clip = 60;
  int image_width = 1280;
  int image_height = 720;
  TrajectoryKind trajectory = TrajectoryKind::linear_descent;
  int embedding_dim = 32;
  double embedding_noise = 0.05;
  double box_noise = 1.0;
  std::vector<SynthSwitch> switches;
};

inline constexpr double kMaxLatentCosine = 0.3;
inline constexpr int kMaxLatentTries = 1000;

inline void validate(const SynthSpec& s)
{
  if (s.n_identities < 1 || s.n_clips < 1 || s.frames_per_clip < 1 || s.embedding_dim < 1)
  {
    throw ConfigError("synth '" + s.sequence_id + "': counts and dimensions must be >= 1");
  }
  if (s.image_width <= 0 || s.image_height <= 0)
  {
    throw ConfigError("synth '" + s.sequence_id + "': image size must be positive");
  }
  if (s.embedding_noise < 0.0 || s.box_noise < 0.0)
  {
    throw ConfigError("synth '" + s.sequence_id + "': noise levels must be >= 0");
  }
  for (const auto& sw : s.switches)
  {
    if (sw.distractor == 0 || sw.distractor < 0 || sw.distractor >= s.n_identities)
    {
      throw ConfigError("synth '" + s.sequence_id + "': switch distractor id " + std::to_string(sw.distractor) +
                        " must name a non-target identity in [1," + std::to_string(s.n_identities - 1) + "]");
    }
    if (sw.clip_index < 0 || sw.clip_index >= s.n_clips || sw.frame_offset < 0 ||
        sw.frame_offset >= s.frames_per_clip)
    {
      throw ConfigError("synth '" + s.sequence_id + "': switch outside the clip range");
    }
  }
}

struct SynthOutput
{
  SequenceManifest manifest;
  GroundTruth ground_truth;
  /// GT of every identity, index 0 = target.
  std::vector<GroundTruth> identities;
  Track base_track;
  Track secondary_track;
  DetectionsByFrame detections;
  EmbeddingStore embeddings;
  std::vector<Embedding> latents;
  std::vector<SwitchEvent> switch_frames;
};

inline std::string candidate_id(int identity)
{
  return "id" + std::to_string(identity);
}

namespace detail
{

inline Embedding noisy_unit(const Embedding& latent, double sigma, std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(latent.values().begin(), latent.values().end());
  for (auto& x : v)
  {
    x += sigma * n(rng);
  }
  return Embedding(std::move(v)).normalized();
}

inline std::vector<Embedding> sample_latents(const SynthSpec& spec, std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  for (int attempt = 0; attempt < kMaxLatentTries; ++attempt)
  {
    std::vector<Embedding> out;
    for (int k = 0; k < spec.n_identities; ++k)
    {
      std::vector<double> v(static_cast<std::size_t>(spec.embedding_dim));
      for (auto& x : v)
      {
        x = n(rng);
      }
      out.push_back(Embedding(std::move(v)).normalized());
    }
    bool separated = true;
    for (std::size_t i = 0; i < out.size() && separated; ++i)
    {
      for (std::size_t j = i + 1; j < out.size(); ++j)
      {
        if (cosine_similarity(out[i], out[j]) >= kMaxLatentCosine)
        {
          separated = false;
          break;
        }
      }
    }
    if (separated)
    {
      return out;
    }
  }
  throw ConfigError("synth '" + spec.sequence_id + "': could not separate " + std::to_string(spec.n_identities) +
                    " identity latents in dimension " + std::to_string(spec.embedding_dim) + " after " +
                    std::to_string(kMaxLatentTries) + " tries (embedding_dim too small)");
}

/// Noise-free box of identity k at clip-relative time t.
struct ClipLayout
{
  double x0;
  double y0;
  double vx;
  double vy;
  double w;
  double h;
};

inline BoundingBox trajectory_box(const SynthSpec& spec, const ClipLayout& l, int t)
{
  const double T = std::max(1, spec.frames_per_clip - 1);
  double cx = l.x0 + l.vx * t;
  double cy = l.y0 + l.vy * t;
  if (spec.trajectory == TrajectoryKind::parabolic_jump)
  {
    // Rises then falls; apex 0.2 image heights above the linear path at mid-clip.
    const double apex = 0.2 * spec.image_height;
    cy -= 4.0 * apex * t * (T - t) / (T * T);
  }
  return BoundingBox::from_center(cx, cy, l.w, l.h);
}

inline BoundingBox jitter(const BoundingBox& b, double sigma, std::mt19937_64& rng)
{
  if (sigma <= 0.0)
  {
    return b;
  }
  std::normal_distribution<double> n(0.0, sigma);
  BoundingBox out{b.x + n(rng), b.y + n(rng), b.w + n(rng), b.h + n(rng)};
  if (out.w <= 0.0)
  {
    out.w = b.w;
  }
  if (out.h <= 0.0)
  {
    out.h = b.h;
  }
  return out;
}

}  // namespace detail

inline SynthOutput generate(const SynthSpec& spec)
{
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthOutput out;
  out.latents = detail::sample_latents(spec, rng);

  auto& m = out.manifest;
  m.sequence_id = spec.sequence_id;
  m.discipline = spec.discipline;
  m.image_width = spec.image_width;
  m.image_height = spec.image_height;
  for (int c = 0; c < spec.n_clips; ++c)
  {
    const FrameIndex start = static_cast<FrameIndex>(c) * spec.frames_per_clip;
    m.clips.push_back({"cam" + std::to_string(c), start, start + spec.frames_per_clip - 1});
  }
  validate(m);

  // Ground truth per identity.
  const double W = spec.image_width;
  const double H = spec.image_height;
  const double lane = W / (spec.n_identities + 1);
  std::vector<std::vector<std::optional<BoundingBox>>> gt(static_cast<std::size_t>(spec.n_identities));
  for (int c = 0; c < spec.n_clips; ++c)
  {
    const double T = std::max(1, spec.frames_per_clip - 1);
    for (int k = 0; k < spec.n_identities; ++k)
    {
      detail::ClipLayout l;
      l.w = 0.05 * W * (0.9 + 0.2 * unit(rng));
      l.h = 0.18 * H * (0.9 + 0.2 * unit(rng));
      l.x0 = lane * (k + 0.5) + 0.1 * lane * (unit(rng) - 0.5);
      l.y0 = 0.35 * H + 0.1 * H * (unit(rng) - 0.5);
      l.vx = 0.5 * lane / T;
      l.vy = (spec.trajectory == TrajectoryKind::linear_descent ? 0.4 : 0.2) * H / T;
      for (int t = 0; t < spec.frames_per_clip; ++t)
      {
        const BoundingBox raw = detail::trajectory_box(spec, l, t);
        std::optional<BoundingBox> b;
        try
        {
          b = clamp_box(raw, spec.image_width, spec.image_height);
        }
        catch (const OutOfFrameError&)
        {
        }
        gt[static_cast<std::size_t>(k)].push_back(b);
      }
    }
  }
  for (auto& g : gt)
  {
    out.identities.emplace_back(m.first_frame(), std::move(g));
  }
  out.ground_truth = out.identities.front();

  // Switch schedule in global frames.
  for (const auto& sw : spec.switches)
  {
    out.switch_frames.push_back({m.clips[static_cast<std::size_t>(sw.clip_index)].start_frame + sw.frame_offset,
                                 sw.distractor});
  }
  auto followed_at = [&](const CameraClip& clip, FrameIndex f) {
    int who = 0;
    FrameIndex latest = -1;
    for (const auto& ev : out.switch_frames)
    {
      if (clip.contains(ev.frame) && ev.frame <= f && ev.frame >= latest)
      {
        who = ev.distractor;
        latest = ev.frame;
      }
    }
    return who;
  };

  // Anchor from the first-frame prompt.
  out.embeddings = EmbeddingStore(static_cast<std::size_t>(spec.embedding_dim));
  out.embeddings.set_anchor(detail::noisy_unit(out.latents[0], spec.embedding_noise, rng));

  std::vector<FrameRecord> base;
  std::vector<FrameRecord> secondary;
  for (const auto& clip : m.clips)
  {
    const FrameIndex mid = clip.middle();
    for (FrameIndex f = clip.start_frame; f <= clip.end_frame; ++f)
    {
      const int who = followed_at(clip, f);
      const auto& followed = out.identities[static_cast<std::size_t>(who)].at(f);
      if (!followed)
      {
        base.push_back(FrameRecord::absent(f));
      }
      else if (f == m.first_frame())
      {
        base.push_back(FrameRecord::with_box(f, *followed, 1.0));
      }
      else
      {
        base.push_back(FrameRecord::with_box(f, detail::jitter(*followed, spec.box_noise, rng), 0.9));
      }
      if (followed)
      {
        out.embeddings.insert(f, std::string(EmbeddingStore::kTrackCandidate),
                              detail::noisy_unit(out.latents[static_cast<std::size_t>(who)], spec.embedding_noise, rng));
      }

      const auto& target = out.ground_truth.at(f);
      secondary.push_back(target ? FrameRecord::with_box(f, detail::jitter(*target, 0.5 * spec.box_noise, rng), 0.8)
                                 : FrameRecord::absent(f));

      for (int k = 0; k < spec.n_identities; ++k)
      {
        const auto& b = out.identities[static_cast<std::size_t>(k)].at(f);
        if (!b)
        {
          continue;
        }
        out.detections[f].push_back({*b, 0.9 - 0.05 * k, candidate_id(k)});
        if (f == mid)
        {
          out.embeddings.insert(f, candidate_id(k),
                                detail::noisy_unit(out.latents[static_cast<std::size_t>(k)], spec.embedding_noise, rng));
        }
      }
    }
  }
  out.base_track = Track(spec.sequence_id, std::move(base));
  out.secondary_track = Track(spec.sequence_id, std::move(secondary));
  return out;
}

// ---------------------------------------------------------------------------
// JSON and on-disk layout

inline std::string_view to_string(TrajectoryKind k)
{
  return k == TrajectoryKind::linear_descent ? "linear_descent" : "parabolic_jump";
}

inline nlohmann::json spec_to_json(const SynthSpec& s)
{
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& e : s.switches)
  {
    sw.push_back({{"clip_index", e.clip_index}, {"frame_offset", e.frame_offset}, {"distractor", e.distractor}});
  }
  return {{"sequence_id", s.sequence_id},
          {"discipline", std::string(skitrack::to_string(s.discipline))},
          {"seed", s.seed},
          {"n_identities", s.n_identities},
          {"n_clips", s.n_clips},
          {"frames_per_clip", s.frames_per_clip},
          {"image_width", s.image_width},
          {"image_height", s.image_height},
          {"trajectory", std::string(to_string(s.trajectory))},
          {"embedding_dim", s.embedding_dim},
          {"embedding_noise", s.embedding_noise},
          {"box_noise", s.box_noise},
          {"switches", sw}};
}

inline SynthSpec spec_from_json(const nlohmann::json& j)
{
  SynthSpec s;
  try
  {
    s.sequence_id = j.value("sequence_id", s.sequence_id);
    const auto disc = j.value("discipline", std::string("AL"));
    const auto d = parse_discipline(disc);
    if (!d)
    {
      throw ConfigError("synth spec: unknown discipline '" + disc + "' (valid: AL, JP, FS)");
    }
    s.discipline = *d;
    s.seed = j.value("seed", s.seed);
    s.n_identities = j.value("n_identities", s.n_identities);
    s.n_clips = j.value("n_clips", s.n_clips);
    s.frames_per_clip = j.value("frames_per_clip", s.frames_per_clip);
    s.image_width = j.value("image_width", s.image_width);
    s.image_height = j.value("image_height", s.image_height);
    const auto traj = j.value("trajectory", std::string("linear_descent"));
    if (traj == "linear_descent")
    {
      s.trajectory = TrajectoryKind::linear_descent;
    }
    else if (traj == "parabolic_jump")
    {
      s.trajectory = TrajectoryKind::parabolic_jump;
    }
    else
    {
      throw ConfigError("synth spec: unknown trajectory '" + traj + "' (valid: linear_descent, parabolic_jump)");
    }
    s.embedding_dim = j.value("embedding_dim", s.embedding_dim);
    s.embedding_noise = j.value("embedding_noise", s.embedding_noise);
    s.box_noise = j.value("box_noise", s.box_noise);
    for (const auto& e : j.value("switches", nlohmann::json::array()))
    {
      s.switches.push_back(
        {e.at("clip_index").get<int>(), e.at("frame_offset").get<FrameIndex>(), e.at("distractor").get<int>()});
    }
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  validate(s);
  return s;
}

/// The three-sequence fixture (one per discipline, one identity switch each).
inline std::vector<SynthSpec> default_fixture(std::uint64_t seed = 42, double embedding_noise = 0.05)
{
  std::vector<SynthSpec> out;
  const struct
  {
    const char* id;
    Discipline d;
    TrajectoryKind kind;
    int identities;
    int switch_clip;
  } rows[] = {
    {"AL_synth", Discipline::AL, TrajectoryKind::linear_descent, 2, 1},
    {"JP_synth", Discipline::JP, TrajectoryKind::parabolic_jump, 2, 2},
    {"FS_synth", Discipline::FS, TrajectoryKind::parabolic_jump, 3, 1},
  };
  std::uint64_t i = 0;
  for (const auto& r : rows)
  {
    SynthSpec s;
    s.sequence_id = r.id;
    s.discipline = r.d;
    s.seed = seed + i++;
    s.n_identities = r.identities;
    s.n_clips = 4;
    s.frames_per_clip = 60;
    s.trajectory = r.kind;
    s.embedding_noise = embedding_noise;
    s.switches = {{r.switch_clip, 10, 1}};
    out.push_back(s);
  }
  return out;
}

/// Relative file names inside a sequence directory.
struct SequenceFiles
{
  static constexpr const char* manifest = "manifest.json";
  static constexpr const char* annotations = "gt.csv";
  static constexpr const char* base_track = "base_track.csv";
  static constexpr const char* secondary_track = "secondary_track.csv";
  static constexpr const char* detections = "detections.csv";
  static constexpr const char* embeddings = "embeddings.csv";
  static constexpr const char* oracle = "oracle.json";
  static std::string identity(int k) { return "identity_" + std::to_string(k) + ".csv"; }
};

inline void write_sequence(const SynthSpec& spec, const SynthOutput& o, const std::filesystem::path& dir)
{
  using namespace dataio;
  save_manifest(o.manifest, dir / SequenceFiles::manifest);
  save_annotations(o.ground_truth, dir / SequenceFiles::annotations);
  save_track(o.base_track, dir / SequenceFiles::base_track);
  save_track(o.secondary_track, dir / SequenceFiles::secondary_track);
  save_detections(o.detections, dir / SequenceFiles::detections);
  save_embeddings(o.embeddings, dir / SequenceFiles::embeddings);

  nlohmann::json distractors = nlohmann::json::object();
  for (std::size_t k = 1; k < o.identities.size(); ++k)
  {
    save_annotations(o.identities[k], dir / SequenceFiles::identity(static_cast<int>(k)));
    distractors[std::to_string(k)] = SequenceFiles::identity(static_cast<int>(k));
  }
  nlohmann::json switches = nlohmann::json::array();
  for (const auto& ev : o.switch_frames)
  {
    switches.push_back({{"frame", ev.frame}, {"distractor", ev.distractor}});
  }
  nlohmann::json oracle = {{"target", SequenceFiles::annotations},
                           {"distractors", distractors},
                           {"switches", switches},
                           {"noise_sigma", spec.box_noise},
                           {"initial_frame", o.manifest.first_frame()}};
  write_file(dir / SequenceFiles::oracle, oracle.dump(2) + "\n");
  write_file(dir / "synth_spec.json", spec_to_json(spec).dump(2) + "\n");
}

}  // namespace skitrack::synth
