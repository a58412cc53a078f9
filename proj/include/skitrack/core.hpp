///////////////////////////////////////////////////////////////////////////////
// core.hpp: domain types and bounding-box geometry shared by all modules
//
// Boxes are top-left + width/height in continuous pixel coordinates;
// area = w*h exactly. Frames use one global index space per sequence and
// camera clips address contiguous sub-ranges of it.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skitrack/error.hpp"

namespace skitrack
{

using FrameIndex = std::int64_t;

struct BoundingBox
{
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  bool finite() const
  {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h);
  }
  bool valid() const { return finite() && w > 0.0 && h > 0.0; }

  static BoundingBox from_center(double cx, double cy, double w, double h)
  {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline std::string to_string(const BoundingBox& b)
{
  return "(" + std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," +
         std::to_string(b.h) + ")";
}

inline void require_valid(const BoundingBox& b, std::string_view what = "box")
{
  if (!b.valid())
  {
    throw GeometryError(std::string(what) + " has invalid geometry " + to_string(b) +
                        " (need finite fields and w,h > 0)");
  }
}

/// Intersection over union of two valid boxes.
inline double iou(const BoundingBox& a, const BoundingBox& b)
{
  require_valid(a, "iou lhs");
  require_valid(b, "iou rhs");
  if (a == b)
  {
    return 1.0;
  }
  // Corner arithmetic can round past a side length; a box never overlaps
  // more than its own extent.
  const double iw = std::min({a.x + a.w, b.x + b.w, std::max(a.x, b.x) + std::min(a.w, b.w)}) - std::max(a.x, b.x);
  const double ih = std::min({a.y + a.h, b.y + b.h, std::max(a.y, b.y) + std::min(a.h, b.h)}) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0)
  {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Intersect a box with the [0,width]x[0,height] image rectangle.
inline BoundingBox clamp_box(const BoundingBox& b, int width, int height)
{
  if (width <= 0 || height <= 0)
  {
    throw GeometryError("clamp_box: image size must be positive, got " + std::to_string(width) +
                        "x" + std::to_string(height));
  }
  if (!b.finite())
  {
    throw GeometryError("clamp_box: non-finite box " + to_string(b));
  }
  const double x0 = std::max(b.x, 0.0);
  const double y0 = std::max(b.y, 0.0);
  const double x1 = std::min(b.x + b.w, static_cast<double>(width));
  const double y1 = std::min(b.y + b.h, static_cast<double>(height));
  if (x1 <= x0 || y1 <= y0)
  {
    throw OutOfFrameError("clamp_box: box " + to_string(b) + " lies outside the " +
                          std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

inline double center_distance(const BoundingBox& a, const BoundingBox& b)
{
  require_valid(a, "center_distance lhs");
  require_valid(b, "center_distance rhs");
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

// ---------------------------------------------------------------------------
// Sequence structure

enum class Discipline
{
  AL,
  JP,
  FS
};

inline constexpr std::array<Discipline, 3> kAllDisciplines = {Discipline::AL, Discipline::JP,
                                                              Discipline::FS};

inline std::string_view to_string(Discipline d)
{
  switch (d)
  {
    case Discipline::AL: return "AL";
    case Discipline::JP: return "JP";
    case Discipline::FS: return "FS";
  }
  return "?";
}

inline std::optional<Discipline> parse_discipline(std::string_view s)
{
  for (auto d : kAllDisciplines)
  {
    if (s == to_string(d))
    {
      return d;
    }
  }
  return std::nullopt;
}

struct CameraClip
{
  std::string clip_id;
  FrameIndex start_frame = 0;  // inclusive
  FrameIndex end_frame = 0;    // inclusive

  FrameIndex size() const { return end_frame - start_frame + 1; }
  bool contains(FrameIndex f) const { return f >= start_frame && f <= end_frame; }
  /// Middle frame in global indices, floor((start+end)/2).
  FrameIndex middle() const
  {
    const FrameIndex s = start_frame + end_frame;
    return s >= 0 ? s / 2 : -((-s + 1) / 2);
  }

  friend bool operator==(const CameraClip&, const CameraClip&) = default;
};

struct SequenceManifest
{
  std::string sequence_id;
  Discipline discipline = Discipline::AL;
  std::vector<CameraClip> clips;
  int image_width = 0;
  int image_height = 0;

  FrameIndex first_frame() const { return clips.front().start_frame; }
  FrameIndex last_frame() const { return clips.back().end_frame; }
  std::size_t frame_count() const
  {
    return static_cast<std::size_t>(last_frame() - first_frame() + 1);
  }

  friend bool operator==(const SequenceManifest&, const SequenceManifest&) = default;
};

/// Checks ordering, contiguity and image size. Throws InputError.
inline void validate(const SequenceManifest& m)
{
  if (m.clips.empty())
  {
    throw InputError("manifest '" + m.sequence_id + "': no clips");
  }
  if (m.image_width <= 0 || m.image_height <= 0)
  {
    throw InputError("manifest '" + m.sequence_id + "': image size must be positive");
  }
  for (std::size_t i = 0; i < m.clips.size(); ++i)
  {
    const auto& c = m.clips[i];
    if (c.start_frame > c.end_frame)
    {
      throw InputError("manifest '" + m.sequence_id + "': clip '" + c.clip_id +
                       "' has start_frame > end_frame");
    }
    if (i > 0)
    {
      const auto& p = m.clips[i - 1];
      if (c.start_frame <= p.end_frame)
      {
        throw InputError("manifest '" + m.sequence_id + "': overlapping clips '" + p.clip_id +
                         "' and '" + c.clip_id + "'");
      }
      if (c.start_frame != p.end_frame + 1)
      {
        throw InputError("manifest '" + m.sequence_id + "': gap between clips '" + p.clip_id +
                         "' and '" + c.clip_id + "'");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Per-frame records

struct FrameRecord
{
  FrameIndex frame = 0;
  bool present = false;
  BoundingBox box;  // meaningful only when present
  double confidence = 0.0;

  static FrameRecord absent(FrameIndex f) { return {f, false, {}, 0.0}; }
  static FrameRecord with_box(FrameIndex f, const BoundingBox& b, double conf)
  {
    return {f, true, b, conf};
  }

  friend bool operator==(const FrameRecord& a, const FrameRecord& b)
  {
    if (a.frame != b.frame || a.present != b.present)
    {
      return false;
    }
    return !a.present || (a.box == b.box && a.confidence == b.confidence);
  }
};

inline void validate(const FrameRecord& r)
{
  if (!r.present)
  {
    if (r.confidence != 0.0)
    {
      throw InputError("frame " + std::to_string(r.frame) + ": absent record with nonzero confidence");
    }
    return;
  }
  require_valid(r.box, "frame " + std::to_string(r.frame) + " box");
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
  {
    throw InputError("frame " + std::to_string(r.frame) + ": confidence " +
                     std::to_string(r.confidence) + " outside [0,1]");
  }
}

/// Dense per-frame records over one contiguous frame range.
class Track
{
public:
  Track() = default;

  /// Records must be contiguous and increasing in frame index.
  Track(std::string sequence_id, std::vector<FrameRecord> records)
    : sequence_id_(std::move(sequence_id)), records_(std::move(records))
  {
    for (std::size_t i = 0; i < records_.size(); ++i)
    {
      validate(records_[i]);
      if (i > 0 && records_[i].frame != records_[i - 1].frame + 1)
      {
        throw InputError("track '" + sequence_id_ + "': records not dense at frame " +
                         std::to_string(records_[i - 1].frame + 1));
      }
    }
  }

  static Track all_absent(std::string sequence_id, FrameIndex first, FrameIndex last)
  {
    std::vector<FrameRecord> recs;
    for (FrameIndex f = first; f <= last; ++f)
    {
      recs.push_back(FrameRecord::absent(f));
    }
    return Track(std::move(sequence_id), std::move(recs));
  }

  const std::string& sequence_id() const { return sequence_id_; }
  const std::vector<FrameRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  FrameIndex first_frame() const { return records_.empty() ? 0 : records_.front().frame; }
  FrameIndex last_frame() const { return records_.empty() ? -1 : records_.back().frame; }
  bool covers(FrameIndex f) const { return !records_.empty() && f >= first_frame() && f <= last_frame(); }

  const FrameRecord& at(FrameIndex f) const
  {
    if (!covers(f))
    {
      throw InputError("track '" + sequence_id_ + "': no record for frame " + std::to_string(f));
    }
    return records_[static_cast<std::size_t>(f - first_frame())];
  }

  /// Replace the record at r.frame (must already be covered).
  void set(const FrameRecord& r)
  {
    validate(r);
    if (!covers(r.frame))
    {
      throw InputError("track '" + sequence_id_ + "': cannot set frame " + std::to_string(r.frame) +
                       " outside the track domain");
    }
    records_[static_cast<std::size_t>(r.frame - first_frame())] = r;
  }

  bool matches(const SequenceManifest& m) const
  {
    return !records_.empty() && first_frame() == m.first_frame() && last_frame() == m.last_frame();
  }

  friend bool operator==(const Track&, const Track&) = default;

private:
  std::string sequence_id_;
  std::vector<FrameRecord> records_;
};

inline void require_domain(const Track& t, const SequenceManifest& m)
{
  if (!t.matches(m))
  {
    throw InputError("track '" + t.sequence_id() + "' covers frames [" +
                     std::to_string(t.first_frame()) + "," + std::to_string(t.last_frame()) +
                     "] but manifest '" + m.sequence_id + "' covers [" +
                     std::to_string(m.first_frame()) + "," + std::to_string(m.last_frame()) + "]");
  }
}

/// Per-frame optional box; nullopt = target not visible.
class GroundTruth
{
public:
  GroundTruth() = default;
  GroundTruth(FrameIndex first_frame, std::vector<std::optional<BoundingBox>> boxes)
    : first_frame_(first_frame), boxes_(std::move(boxes))
  {
    for (std::size_t i = 0; i < boxes_.size(); ++i)
    {
      if (boxes_[i])
      {
        require_valid(*boxes_[i], "ground-truth frame " + std::to_string(first_frame_ + static_cast<FrameIndex>(i)));
      }
    }
  }

  FrameIndex first_frame() const { return first_frame_; }
  FrameIndex last_frame() const { return first_frame_ + static_cast<FrameIndex>(boxes_.size()) - 1; }
  std::size_t size() const { return boxes_.size(); }
  bool covers(FrameIndex f) const { return f >= first_frame_ && f <= last_frame(); }

  const std::optional<BoundingBox>& at(FrameIndex f) const
  {
    if (!covers(f))
    {
      throw InputError("ground truth has no frame " + std::to_string(f));
    }
    return boxes_[static_cast<std::size_t>(f - first_frame_)];
  }

  const std::vector<std::optional<BoundingBox>>& boxes() const { return boxes_; }

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;

private:
  FrameIndex first_frame_ = 0;
  std::vector<std::optional<BoundingBox>> boxes_;
};

struct Detection
{
  BoundingBox box;
  double score = 0.0;
  std::optional<std::string> embedding_ref;

  friend bool operator==(const Detection&, const Detection&) = default;
};

inline void validate(const Detection& d)
{
  require_valid(d.box, "detection box");
  if (!(d.score >= 0.0 && d.score <= 1.0))
  {
    throw InputError("detection score " + std::to_string(d.score) + " outside [0,1]");
  }
}

/// Detections for a sequence, keyed by frame. Missing frames mean no detections.
using DetectionsByFrame = std::map<FrameIndex, std::vector<Detection>>;

}  // namespace skitrack
