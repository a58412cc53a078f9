///////////////////////////////////////////////////////////////////////////////
// clients.hpp: pluggable tracker/detector backends
//
// TrackerClient contract: after start(request), step() yields exactly one
// FrameRecord per frame from the prompt frame to the clip boundary in the
// requested direction, then nullopt. The first record is the prompt frame,
// present, with box = prompt box and confidence 1.0.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "skitrack/core.hpp"
#include "skitrack/embedding.hpp"
#include "skitrack/protocol.hpp"

namespace skitrack
{

enum class Violation
{
  prompt_frame,
  density,
  direction,
  confidence_range,
  protocol,
  timeout,
  backend_exit,
  coverage,
};

inline std::string_view to_string(Violation v)
{
  switch (v)
  {
    case Violation::prompt_frame: return "prompt-frame";
    case Violation::density: return "density";
    case Violation::direction: return "direction";
    case Violation::confidence_range: return "confidence-range";
    case Violation::protocol: return "protocol";
    case Violation::timeout: return "timeout";
    case Violation::backend_exit: return "backend-exit";
    case Violation::coverage: return "coverage";
  }
  return "?";
}

class ClientError : public Error
{
public:
  ClientError(Violation kind, const std::string& what)
    : Error(std::string(to_string(kind)) + " violation: " + what), kind_(kind)
  {
  }
  Violation kind() const { return kind_; }

private:
  Violation kind_;
};

/// Prompt boxes are compared with this absolute tolerance per field.
inline constexpr double kPromptBoxTolerance = 1e-9;

inline bool boxes_close(const BoundingBox& a, const BoundingBox& b, double tol = kPromptBoxTolerance)
{
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.w - b.w) <= tol &&
         std::abs(a.h - b.h) <= tol;
}

/// Incremental check of a session's record stream; throws ClientError on the
/// first violation.
class SessionValidator
{
public:
  explicit SessionValidator(const SessionRequest& req) : req_(req), expected_(req.prompt_frame) {}

  void check(const FrameRecord& r)
  {
    if (done_)
    {
      throw ClientError(Violation::density,
                        "extra frame " + std::to_string(r.frame) + " after the clip boundary");
    }
    if (r.present && !(r.confidence >= 0.0 && r.confidence <= 1.0))
    {
      throw ClientError(Violation::confidence_range, "frame " + std::to_string(r.frame) +
                                                       " confidence " + std::to_string(r.confidence));
    }
    if (!r.present && r.confidence != 0.0)
    {
      throw ClientError(Violation::confidence_range,
                        "frame " + std::to_string(r.frame) + " absent with nonzero confidence");
    }
    if (r.frame != expected_)
    {
      if ((r.frame - expected_) * req_.step() < 0)
      {
        throw ClientError(Violation::direction,
                          "expected frame " + std::to_string(expected_) + " (" +
                            std::string(to_string(req_.direction)) + ") but got frame " +
                            std::to_string(r.frame));
      }
      throw ClientError(Violation::density, "missing frame " + std::to_string(expected_) +
                                              " (got frame " + std::to_string(r.frame) + ")");
    }
    if (r.frame == req_.prompt_frame)
    {
      if (!r.present || !boxes_close(r.box, req_.prompt_box) || r.confidence != 1.0)
      {
        throw ClientError(Violation::prompt_frame,
                          "record at prompt frame " + std::to_string(r.frame) +
                            " must be present with the prompt box and confidence 1.0");
      }
    }
    else if (r.present && !r.box.valid())
    {
      throw ClientError(Violation::protocol,
                        "frame " + std::to_string(r.frame) + " has invalid box " + to_string(r.box));
    }
    if (r.frame == req_.final_frame())
    {
      done_ = true;
    }
    expected_ += req_.step();
  }

  /// Called when the stream ends.
  void finish() const
  {
    if (!done_)
    {
      throw ClientError(Violation::density, "missing frame " + std::to_string(expected_) +
                                              " (session ended early)");
    }
  }

private:
  SessionRequest req_;
  FrameIndex expected_;
  bool done_ = false;
};

class TrackerClient
{
public:
  virtual ~TrackerClient() = default;
  virtual void start(const SessionRequest& request) = 0;
  /// Next record of the active session, or nullopt once it is complete.
  virtual std::optional<FrameRecord> step() = 0;
  virtual std::string name() const = 0;
};

/// Runs a whole session and returns its records in direction order.
inline std::vector<FrameRecord> run_session(TrackerClient& client, const SessionRequest& request)
{
  client.start(request);
  std::vector<FrameRecord> out;
  out.reserve(request.expected_count());
  while (auto r = client.step())
  {
    out.push_back(*r);
  }
  return out;
}

/// Base for in-process clients that compute a session eagerly.
class BufferedTrackerClient : public TrackerClient
{
public:
  void start(const SessionRequest& request) override
  {
    validate(request);
    pending_ = produce(request);
    pos_ = 0;
  }
  std::optional<FrameRecord> step() override
  {
    if (pos_ >= pending_.size())
    {
      return std::nullopt;
    }
    return pending_[pos_++];
  }

protected:
  virtual std::vector<FrameRecord> produce(const SessionRequest& request) = 0;

private:
  std::vector<FrameRecord> pending_;
  std::size_t pos_ = 0;
};

using WarningSink = std::function<void(const std::string&)>;

/// Replays a stored track (precomputed-results mode).
class ReplayTracker : public BufferedTrackerClient
{
public:
  static constexpr double kPromptIouTolerance = 0.99;

  explicit ReplayTracker(Track stored, WarningSink warn = {})
    : stored_(std::move(stored)), warn_(std::move(warn))
  {
  }

  std::string name() const override { return "replay"; }
  const std::vector<std::string>& warnings() const { return warnings_; }

protected:
  std::vector<FrameRecord> produce(const SessionRequest& req) override
  {
    if (!stored_.covers(req.clip_start) || !stored_.covers(req.clip_end))
    {
      throw ClientError(Violation::coverage,
                        "replay track '" + stored_.sequence_id() + "' covers [" +
                          std::to_string(stored_.first_frame()) + "," +
                          std::to_string(stored_.last_frame()) + "], requested [" +
                          std::to_string(req.clip_start) + "," + std::to_string(req.clip_end) + "]");
    }
    const FrameRecord& at_prompt = stored_.at(req.prompt_frame);
    if (!at_prompt.present || iou(at_prompt.box, req.prompt_box) < kPromptIouTolerance)
    {
      warn("replay: stored record at prompt frame " + std::to_string(req.prompt_frame) +
           " does not match the prompt box (IoU < 0.99); replaying stored records after the prompt");
    }
    // The prompt record is always the prompt itself so replay honours the
    // same prompt-frame invariant as live trackers.
    std::vector<FrameRecord> out{FrameRecord::with_box(req.prompt_frame, req.prompt_box, 1.0)};
    for (FrameIndex f = req.prompt_frame; f != req.final_frame();)
    {
      f += req.step();
      out.push_back(stored_.at(f));
    }
    return out;
  }

private:
  void warn(const std::string& msg)
  {
    warnings_.push_back(msg);
    if (warn_)
    {
      warn_(msg);
    }
  }

  Track stored_;
  WarningSink warn_;
  std::vector<std::string> warnings_;
};

struct SwitchEvent
{
  FrameIndex frame = 0;
  int distractor = 0;

  friend bool operator==(const SwitchEvent&, const SwitchEvent&) = default;
};

struct OracleConfig
{
  GroundTruth target;
  std::map<int, GroundTruth> distractors;
  std::vector<SwitchEvent> schedule;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  /// Frame of the original first-frame prompt. Sessions prompted anywhere
  /// else are re-prompts.
  FrameIndex initial_frame = 0;
  double confidence = 0.9;
};

/// Follows ground truth with seeded Gaussian box noise. From each scheduled
/// switch frame to the end of the session's clip it follows the event's
/// distractor instead. A re-prompt whose box has IoU > 0.5 with the target's
/// GT at the prompt frame clears the schedule.
class OracleTracker : public BufferedTrackerClient
{
public:
  explicit OracleTracker(OracleConfig cfg) : cfg_(std::move(cfg))
  {
    for (const auto& ev : cfg_.schedule)
    {
      if (!cfg_.distractors.contains(ev.distractor))
      {
        throw InputError("oracle tracker: switch to unknown distractor " +
                         std::to_string(ev.distractor));
      }
    }
  }

  std::string name() const override { return "oracle"; }

  /// True when the session would ignore the switch schedule.
  bool schedule_cleared(const SessionRequest& req) const
  {
    if (req.prompt_frame == cfg_.initial_frame || !cfg_.target.covers(req.prompt_frame))
    {
      return false;
    }
    const auto& gt = cfg_.target.at(req.prompt_frame);
    return gt && iou(*gt, req.prompt_box) > 0.5;
  }

protected:
  std::vector<FrameRecord> produce(const SessionRequest& req) override
  {
    const bool cleared = schedule_cleared(req);
    std::seed_seq seq{static_cast<std::uint64_t>(cfg_.seed), static_cast<std::uint64_t>(req.prompt_frame),
                      static_cast<std::uint64_t>(req.direction == Direction::forward ? 1 : 2)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<FrameRecord> out;
    for (FrameIndex f = req.prompt_frame;; f += req.step())
    {
      if (f == req.prompt_frame)
      {
        out.push_back(FrameRecord::with_box(f, req.prompt_box, 1.0));
      }
      else
      {
        const GroundTruth& followed = identity_at(f, req, cleared);
        const auto& gt = followed.covers(f) ? followed.at(f) : std::optional<BoundingBox>{};
        if (!gt)
        {
          out.push_back(FrameRecord::absent(f));
        }
        else
        {
          BoundingBox b = *gt;
          if (cfg_.noise_sigma > 0.0)
          {
            BoundingBox n{b.x + cfg_.noise_sigma * noise(rng), b.y + cfg_.noise_sigma * noise(rng),
                          b.w + cfg_.noise_sigma * noise(rng), b.h + cfg_.noise_sigma * noise(rng)};
            if (n.w <= 0.0)
            {
              n.w = b.w;
            }
            if (n.h <= 0.0)
            {
              n.h = b.h;
            }
            b = n;
          }
          out.push_back(FrameRecord::with_box(f, b, cfg_.confidence));
        }
      }
      if (f == req.final_frame())
      {
        break;
      }
    }
    return out;
  }

private:
  const GroundTruth& identity_at(FrameIndex f, const SessionRequest& req, bool cleared) const
  {
    if (cleared)
    {
      return cfg_.target;
    }
    const SwitchEvent* active = nullptr;
    for (const auto& ev : cfg_.schedule)
    {
      if (ev.frame >= req.clip_start && ev.frame <= req.clip_end && ev.frame <= f &&
          (!active || ev.frame >= active->frame))
      {
        active = &ev;
      }
    }
    return active ? cfg_.distractors.at(active->distractor) : cfg_.target;
  }

  OracleConfig cfg_;
};

// ---------------------------------------------------------------------------
// Detectors

struct Candidate
{
  Detection detection;
  std::optional<Embedding> embedding;
};

class DetectorClient
{
public:
  virtual ~DetectorClient() = default;
  virtual std::vector<Candidate> detect(FrameIndex frame) = 0;
};

/// Serves stored detections, resolving embedding refs against a store.
class ReplayDetector : public DetectorClient
{
public:
  ReplayDetector(DetectionsByFrame detections, std::shared_ptr<const EmbeddingStore> store)
    : detections_(std::move(detections)), store_(std::move(store))
  {
  }

  std::vector<Candidate> detect(FrameIndex frame) override
  {
    std::vector<Candidate> out;
    const auto it = detections_.find(frame);
    if (it == detections_.end())
    {
      return out;
    }
    for (const auto& d : it->second)
    {
      Candidate c{d, std::nullopt};
      if (d.embedding_ref && store_)
      {
        if (const Embedding* e = store_->find(frame, *d.embedding_ref))
        {
          c.embedding = *e;
        }
      }
      out.push_back(std::move(c));
    }
    return out;
  }

private:
  DetectionsByFrame detections_;
  std::shared_ptr<const EmbeddingStore> store_;
};

}  // namespace skitrack
