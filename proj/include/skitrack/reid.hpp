///////////////////////////////////////////////////////////////////////////////
// reid.hpp: anchor-embedding identity verification and correction
//
// Per camera clip: compare the tracked target's per-frame embeddings with the
// anchor feature taken from the first-frame prompt. A clip whose aggregated
// similarity falls below the threshold is re-detected on its middle frame,
// the candidate most similar to the anchor becomes the new prompt, and the
// clip is re-tracked forward and backward from there.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "skitrack/clients.hpp"
#include "skitrack/core.hpp"
#include "skitrack/embedding.hpp"

namespace skitrack::reid
{

enum class Aggregation
{
  mean,
  median
};

inline std::string_view to_string(Aggregation a)
{
  return a == Aggregation::mean ? "mean" : "median";
}

struct ReidConfig
{
  double similarity_threshold = 0.6;
  Aggregation clip_aggregation = Aggregation::mean;
};

inline void validate(const ReidConfig& cfg)
{
  if (!(cfg.similarity_threshold >= -1.0 && cfg.similarity_threshold <= 1.0))
  {
    throw ConfigError("reid: similarity_threshold must lie in [-1,1]");
  }
}

/// Similarity returned for a clip without present frames.
inline constexpr double kEmptyClipSimilarity = -1.0;

inline double aggregate(std::vector<double> sims, Aggregation how)
{
  if (sims.empty())
  {
    return kEmptyClipSimilarity;
  }
  if (how == Aggregation::mean)
  {
    double s = 0.0;
    for (double v : sims)
    {
      s += v;
    }
    return s / static_cast<double>(sims.size());
  }
  std::sort(sims.begin(), sims.end());
  const std::size_t n = sims.size();
  return n % 2 == 1 ? sims[n / 2] : 0.5 * (sims[n / 2 - 1] + sims[n / 2]);
}

inline double clip_similarity(const Track& track, const CameraClip& clip, const EmbeddingStore& embeddings,
                              const Embedding& anchor, const ReidConfig& cfg)
{
  std::vector<double> sims;
  for (FrameIndex f = clip.start_frame; f <= clip.end_frame; ++f)
  {
    if (!track.at(f).present)
    {
      continue;
    }
    const Embedding* e = embeddings.find(f, std::string(EmbeddingStore::kTrackCandidate));
    if (!e)
    {
      throw InputError("reid: no track embedding for present frame " + std::to_string(f) + " in clip '" +
                       clip.clip_id + "'");
    }
    sims.push_back(cosine_similarity(*e, anchor));
  }
  return aggregate(std::move(sims), cfg.clip_aggregation);
}

class NoCandidateError : public InputError
{
public:
  using InputError::InputError;
};

/// Index of the candidate whose embedding is most similar to the anchor.
/// Ties go to the higher detector score, then the lower index.
inline std::size_t select_b_mid_index(const std::vector<Candidate>& candidates, const Embedding& anchor)
{
  if (candidates.empty())
  {
    throw NoCandidateError("reid: no candidate detections");
  }
  std::size_t best = 0;
  double best_sim = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i)
  {
    const auto& c = candidates[i];
    if (!c.embedding)
    {
      throw InputError("reid: candidate " + std::to_string(i) + " has no embedding");
    }
    const double sim = cosine_similarity(*c.embedding, anchor);
    if (i == 0 || sim > best_sim ||
        (sim == best_sim && c.detection.score > candidates[best].detection.score))
    {
      best = i;
      best_sim = sim;
    }
  }
  return best;
}

inline BoundingBox select_b_mid(const std::vector<Candidate>& candidates, const Embedding& anchor)
{
  return candidates[select_b_mid_index(candidates, anchor)].detection.box;
}

/// Re-track one clip from (middle frame, b_mid) in both directions and splice
/// the result into the track. On tracker failure the input is returned
/// unchanged and the ClientError propagates to the caller.
inline Track correct_clip(const Track& track, const CameraClip& clip, const BoundingBox& b_mid,
                          TrackerClient& tracker)
{
  require_valid(b_mid, "b_mid");
  const FrameIndex m = clip.middle();

  const auto backward = run_session(tracker, {clip.start_frame, clip.end_frame, m, b_mid, Direction::backward});
  const auto forward = run_session(tracker, {clip.start_frame, clip.end_frame, m, b_mid, Direction::forward});

  // Both sessions are checked before touching the track so a bad session
  // leaves it intact.
  std::vector<FrameRecord> merged;
  merged.reserve(static_cast<std::size_t>(clip.size()));
  for (auto it = backward.rbegin(); it != backward.rend(); ++it)
  {
    if (it->frame != m)
    {
      merged.push_back(*it);
    }
  }
  for (const auto& r : forward)
  {
    merged.push_back(r);
  }
  if (merged.size() != static_cast<std::size_t>(clip.size()))
  {
    throw ClientError(Violation::density, "correction of clip '" + clip.clip_id + "' produced " +
                                            std::to_string(merged.size()) + " records for " +
                                            std::to_string(clip.size()) + " frames");
  }
  for (std::size_t i = 0; i < merged.size(); ++i)
  {
    if (merged[i].frame != clip.start_frame + static_cast<FrameIndex>(i))
    {
      throw ClientError(Violation::density, "correction of clip '" + clip.clip_id +
                                              "' is not dense at frame " +
                                              std::to_string(clip.start_frame + static_cast<FrameIndex>(i)));
    }
    validate(merged[i]);
  }

  Track out = track;
  for (const auto& r : merged)
  {
    out.set(r);
  }
  return out;
}

enum class ClipAction
{
  passed,
  corrected,
  no_candidates,
  tracker_failed,
};

inline std::string_view to_string(ClipAction a)
{
  switch (a)
  {
    case ClipAction::passed: return "passed";
    case ClipAction::corrected: return "corrected";
    case ClipAction::no_candidates: return "no_candidates";
    case ClipAction::tracker_failed: return "tracker_failed";
  }
  return "?";
}

struct ClipReport
{
  std::string clip_id;
  double similarity = 0.0;
  ClipAction action = ClipAction::passed;
  std::optional<BoundingBox> b_mid;
  std::string message;
};

struct ReidResult
{
  Track track;
  std::vector<ClipReport> clips;

  std::size_t corrections() const
  {
    return static_cast<std::size_t>(std::count_if(clips.begin(), clips.end(), [](const ClipReport& c) {
      return c.action == ClipAction::corrected;
    }));
  }
};

inline ReidResult reid_pass(const Track& track, const SequenceManifest& manifest, const Embedding& anchor,
                            const EmbeddingStore& embeddings, DetectorClient& detector, TrackerClient& tracker,
                            const ReidConfig& cfg)
{
  validate(cfg);
  require_domain(track, manifest);

  ReidResult result{track, {}};
  for (const auto& clip : manifest.clips)
  {
    ClipReport report;
    report.clip_id = clip.clip_id;
    report.similarity = clip_similarity(track, clip, embeddings, anchor, cfg);
    if (report.similarity >= cfg.similarity_threshold)
    {
      report.action = ClipAction::passed;
      result.clips.push_back(std::move(report));
      continue;
    }

    const FrameIndex m = clip.middle();
    const auto candidates = detector.detect(m);
    if (candidates.empty())
    {
      report.action = ClipAction::no_candidates;
      report.message = "detector returned no candidates on middle frame " + std::to_string(m);
      result.clips.push_back(std::move(report));
      continue;
    }
    const BoundingBox b_mid = select_b_mid(candidates, anchor);
    report.b_mid = b_mid;
    try
    {
      result.track = correct_clip(result.track, clip, b_mid, tracker);
      report.action = ClipAction::corrected;
    }
    catch (const ClientError& e)
    {
      report.action = ClipAction::tracker_failed;
      report.message = e.what();
    }
    result.clips.push_back(std::move(report));
  }
  return result;
}

}  // namespace skitrack::reid
