#pragma once

#include <vector>

#include "skitrack/core.hpp"

namespace skitrack::fusion
{

struct FusionConfig
{
  double iou_threshold = 0.5;
};

inline void validate(const FusionConfig& cfg)
{
  if (!(cfg.iou_threshold >= 0.0 && cfg.iou_threshold <= 1.0))
  {
    throw ConfigError("fusion: iou_threshold must lie in [0,1]");
  }
}

struct FusionResult
{
  Track track;
  std::size_t adopted = 0;
  /// Frames where the primary is absent but the secondary reports a box.
  std::vector<FrameIndex> absent_primary_frames;
};

/// Per frame: adopt the secondary box when both are present and their IoU
/// strictly exceeds the threshold; otherwise keep the primary record.
/// Presence and confidence always come from the primary.
inline FusionResult fuse_tracks(const Track& primary, const Track& secondary, const FusionConfig& cfg)
{
  validate(cfg);
  if (primary.first_frame() != secondary.first_frame() || primary.last_frame() != secondary.last_frame() ||
      primary.size() != secondary.size())
  {
    throw InputError("fusion: frame domains differ: primary [" + std::to_string(primary.first_frame()) + "," +
                     std::to_string(primary.last_frame()) + "], secondary [" +
                     std::to_string(secondary.first_frame()) + "," + std::to_string(secondary.last_frame()) +
                     "]");
  }

  FusionResult res;
  std::vector<FrameRecord> out;
  out.reserve(primary.size());
  for (std::size_t i = 0; i < primary.size(); ++i)
  {
    const FrameRecord& p = primary.records()[i];
    const FrameRecord& s = secondary.records()[i];
    if (p.present && s.present && iou(p.box, s.box) > cfg.iou_threshold)
    {
      out.push_back(FrameRecord::with_box(p.frame, s.box, p.confidence));
      ++res.adopted;
      continue;
    }
    if (!p.present && s.present)
    {
      res.absent_primary_frames.push_back(p.frame);
    }
    out.push_back(p);
  }
  res.track = Track(primary.sequence_id(), std::move(out));
  return res;
}

}  // namespace skitrack::fusion
