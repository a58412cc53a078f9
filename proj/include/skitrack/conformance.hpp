///////////////////////////////////////////////////////////////////////////////
// conformance.hpp: shared TrackerClient conformance suite
//
// Named checks: prompt-frame, density, direction, confidence-range. Each
// check fails with a detail message naming the offending frame.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <set>
#include <string>
#include <vector>

#include "skitrack/clients.hpp"

namespace skitrack
{

struct CheckResult
{
  std::string name;
  bool passed = true;
  std::string detail;
  /// Not evaluated because a session aborted before producing records.
  bool skipped = false;
};

struct ConformanceReport
{
  std::vector<CheckResult> checks;

  bool passed() const
  {
    for (const auto& c : checks)
    {
      if (!c.passed)
      {
        return false;
      }
    }
    return true;
  }
  const CheckResult* find(std::string_view name) const
  {
    for (const auto& c : checks)
    {
      if (c.name == name)
      {
        return &c;
      }
    }
    return nullptr;
  }
};

/// Clip to probe plus a prompt box per frame (the client must accept any of
/// them as a prompt).
struct ConformanceProbe
{
  FrameIndex clip_start = 0;
  FrameIndex clip_end = 0;
  std::function<BoundingBox(FrameIndex)> prompt_box;
};

namespace detail
{

inline void fail_check(std::vector<CheckResult>& checks, std::string_view name, const std::string& detail)
{
  for (auto& c : checks)
  {
    if (c.name == name && c.passed)
    {
      c.passed = false;
      c.detail = detail;
    }
  }
}

/// Independent inspection of one session's records.
inline void inspect_session(const SessionRequest& req, const std::vector<FrameRecord>& recs,
                            std::vector<CheckResult>& checks)
{
  const std::string tag = " [" + std::string(to_string(req.direction)) + " from " +
                          std::to_string(req.prompt_frame) + "]";

  if (recs.empty() || recs.front().frame != req.prompt_frame)
  {
    fail_check(checks, "prompt-frame", "first record is not the prompt frame" + tag);
  }
  else
  {
    const auto& r = recs.front();
    if (!r.present || !boxes_close(r.box, req.prompt_box) || r.confidence != 1.0)
    {
      fail_check(checks, "prompt-frame",
                 "prompt frame " + std::to_string(r.frame) +
                   " record is not the prompt box with confidence 1.0" + tag);
    }
  }

  for (std::size_t i = 1; i < recs.size(); ++i)
  {
    const FrameIndex delta = recs[i].frame - recs[i - 1].frame;
    if (delta * req.step() <= 0)
    {
      fail_check(checks, "direction",
                 "frame " + std::to_string(recs[i].frame) + " follows frame " +
                   std::to_string(recs[i - 1].frame) + tag);
      break;
    }
  }

  std::set<FrameIndex> seen;
  for (const auto& r : recs)
  {
    if (!seen.insert(r.frame).second)
    {
      fail_check(checks, "density", "duplicate frame " + std::to_string(r.frame) + tag);
    }
    if (r.frame < req.clip_start || r.frame > req.clip_end ||
        (r.frame - req.prompt_frame) * req.step() < 0)
    {
      fail_check(checks, "density", "frame " + std::to_string(r.frame) + " outside the requested range" + tag);
    }
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0) || (!r.present && r.confidence != 0.0))
    {
      fail_check(checks, "confidence-range",
                 "frame " + std::to_string(r.frame) + " confidence " + std::to_string(r.confidence) + tag);
    }
  }
  for (FrameIndex f = req.prompt_frame;; f += req.step())
  {
    if (!seen.contains(f))
    {
      fail_check(checks, "density", "missing frame " + std::to_string(f) + tag);
      break;
    }
    if (f == req.final_frame())
    {
      break;
    }
  }
}

}  // namespace detail

inline ConformanceReport run_conformance(TrackerClient& client, const ConformanceProbe& probe)
{
  std::vector<CheckResult> checks = {
    {"prompt-frame", true, ""}, {"density", true, ""}, {"direction", true, ""}, {"confidence-range", true, ""}};

  const FrameIndex mid = CameraClip{"", probe.clip_start, probe.clip_end}.middle();
  std::vector<SessionRequest> sessions = {
    {probe.clip_start, probe.clip_end, mid, probe.prompt_box(mid), Direction::forward},
    {probe.clip_start, probe.clip_end, mid, probe.prompt_box(mid), Direction::backward},
    {probe.clip_start, probe.clip_end, probe.clip_start, probe.prompt_box(probe.clip_start), Direction::forward},
    {probe.clip_start, probe.clip_end, probe.clip_end, probe.prompt_box(probe.clip_end), Direction::backward},
  };

  for (const auto& req : sessions)
  {
    std::vector<FrameRecord> recs;
    try
    {
      client.start(req);
      // Cap the read so a runaway backend cannot stall the suite.
      const std::size_t cap = req.expected_count() + 16;
      while (auto r = client.step())
      {
        recs.push_back(*r);
        if (recs.size() > cap)
        {
          break;
        }
      }
    }
    catch (const ClientError& e)
    {
      switch (e.kind())
      {
        case Violation::prompt_frame: detail::fail_check(checks, "prompt-frame", e.what()); break;
        case Violation::direction: detail::fail_check(checks, "direction", e.what()); break;
        case Violation::confidence_range: detail::fail_check(checks, "confidence-range", e.what()); break;
        case Violation::density: detail::fail_check(checks, "density", e.what()); break;
        default:
          for (auto& c : checks)
          {
            if (c.passed)
            {
              c.skipped = true;
              c.detail = "not evaluated: session aborted";
            }
          }
          checks.push_back({"session", false, e.what()});
          return {checks};
      }
      continue;
    }
    detail::inspect_session(req, recs, checks);
  }
  return {checks};
}

}  // namespace skitrack
