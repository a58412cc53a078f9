///////////////////////////////////////////////////////////////////////////////
// eval.hpp: long-term tracking Precision / Recall / F1
//
//   precision = sum of per-frame quality over frames where the tracker reports
//               the target / number of such frames
//   recall    = sum of per-frame quality over frames where the target is
//               visible / number of such frames
//   f1        = 2PR / (P + R), 0 when P + R = 0
//
// Per-frame quality is the IoU with ground truth (0 when either side is
// absent), or a 0/1 hit at IoU >= 0.5 in thresholded mode. Disciplines
// average their sequences; the overall F1 averages the disciplines.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skitrack/core.hpp"

namespace skitrack::eval
{

struct EvalConfig
{
  bool thresholded = false;
  double hit_iou = 0.5;
};

struct SequenceScore
{
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t frames_evaluated = 0;

  friend bool operator==(const SequenceScore&, const SequenceScore&) = default;
};

inline double f1_score(double p, double r)
{
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline SequenceScore score_sequence(const Track& pred, const GroundTruth& gt, const EvalConfig& cfg = {})
{
  if (pred.size() != gt.size() || pred.first_frame() != gt.first_frame())
  {
    throw InputError("eval: prediction '" + pred.sequence_id() + "' and ground truth cover different frames");
  }
  double pred_sum = 0.0;
  double gt_sum = 0.0;
  std::int64_t pred_n = 0;
  std::int64_t gt_n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
  {
    const FrameRecord& p = pred.records()[i];
    const auto& g = gt.boxes()[i];
    double q = 0.0;
    if (p.present && g)
    {
      q = iou(p.box, *g);
      if (cfg.thresholded)
      {
        q = q >= cfg.hit_iou ? 1.0 : 0.0;
      }
    }
    if (p.present)
    {
      pred_sum += q;
      ++pred_n;
    }
    if (g)
    {
      gt_sum += q;
      ++gt_n;
    }
  }
  if (gt_n == 0)
  {
    throw InputError("eval: ground truth for '" + pred.sequence_id() + "' has no visible frames");
  }
  SequenceScore s;
  s.precision = pred_n > 0 ? pred_sum / static_cast<double>(pred_n) : 0.0;
  s.recall = gt_sum / static_cast<double>(gt_n);
  s.f1 = f1_score(s.precision, s.recall);
  s.frames_evaluated = static_cast<std::int64_t>(pred.size());
  return s;
}

struct SequenceEntry
{
  Discipline discipline = Discipline::AL;
  SequenceScore score;

  friend bool operator==(const SequenceEntry&, const SequenceEntry&) = default;
};

struct MetricReport
{
  std::map<std::string, SequenceEntry> per_sequence;
  std::map<Discipline, SequenceScore> per_discipline;
  double overall_f1 = 0.0;
  /// Disciplines without sequences; overall_f1 averages only the others.
  std::vector<Discipline> missing_disciplines;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline MetricReport aggregate(const std::map<std::string, SequenceEntry>& sequences)
{
  MetricReport rep;
  rep.per_sequence = sequences;
  double f1_sum = 0.0;
  int present = 0;
  for (auto d : kAllDisciplines)
  {
    SequenceScore acc;
    int n = 0;
    for (const auto& [id, e] : sequences)
    {
      if (e.discipline != d)
      {
        continue;
      }
      acc.precision += e.score.precision;
      acc.recall += e.score.recall;
      acc.f1 += e.score.f1;
      acc.frames_evaluated += e.score.frames_evaluated;
      ++n;
    }
    if (n == 0)
    {
      rep.missing_disciplines.push_back(d);
      continue;
    }
    acc.precision /= n;
    acc.recall /= n;
    acc.f1 /= n;
    rep.per_discipline[d] = acc;
    f1_sum += acc.f1;
    ++present;
  }
  rep.overall_f1 = present > 0 ? f1_sum / present : 0.0;
  return rep;
}

/// Component-wise mean of a set of scores (used for the "All" row).
inline SequenceScore mean_score(const MetricReport& rep)
{
  SequenceScore s;
  if (rep.per_discipline.empty())
  {
    return s;
  }
  for (const auto& [d, sc] : rep.per_discipline)
  {
    s.precision += sc.precision;
    s.recall += sc.recall;
    s.frames_evaluated += sc.frames_evaluated;
  }
  const double n = static_cast<double>(rep.per_discipline.size());
  s.precision /= n;
  s.recall /= n;
  s.f1 = rep.overall_f1;
  return s;
}

inline std::string fmt3(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Text table: one column per discipline plus "All"; F1 on the first row with
/// precision and recall beneath it.
inline std::string render_table(const MetricReport& rep, const std::string& method = "result")
{
  std::ostringstream os;
  std::vector<std::pair<std::string, SequenceScore>> cols;
  cols.emplace_back("All", mean_score(rep));
  for (const auto& [d, sc] : rep.per_discipline)
  {
    cols.emplace_back(std::string(to_string(d)), sc);
  }
  os << "Discipline  " << method << "\n";
  for (const auto& [name, sc] : cols)
  {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s  F1   %s\n%-10s  Pr   %s\n%-10s  Re   %s\n", name.c_str(),
                  fmt3(sc.f1).c_str(), "", fmt3(sc.precision).c_str(), "", fmt3(sc.recall).c_str());
    os << line;
  }
  if (!rep.missing_disciplines.empty())
  {
    os << "note: no sequences for";
    for (auto d : rep.missing_disciplines)
    {
      os << " " << to_string(d);
    }
    os << "; overall F1 averages the remaining disciplines\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Ablation comparison

struct ScoreDelta
{
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline ScoreDelta delta(const SequenceScore& a, const SequenceScore& b)
{
  return {b.precision - a.precision, b.recall - a.recall, b.f1 - a.f1};
}

struct Comparison
{
  std::map<std::string, ScoreDelta> per_sequence;
  std::map<Discipline, ScoreDelta> per_discipline;
  double overall_f1_delta = 0.0;
  int improved = 0;
  int worsened = 0;
  int unchanged = 0;
};

/// Deltas are b - a.
inline Comparison ablation_compare(const MetricReport& a, const MetricReport& b)
{
  if (a.per_sequence.size() != b.per_sequence.size())
  {
    throw InputError("compare: reports cover different sequence sets");
  }
  Comparison c;
  for (const auto& [id, ea] : a.per_sequence)
  {
    const auto it = b.per_sequence.find(id);
    if (it == b.per_sequence.end())
    {
      throw InputError("compare: sequence '" + id + "' missing from the second report");
    }
    const ScoreDelta d = delta(ea.score, it->second.score);
    c.per_sequence[id] = d;
    if (d.f1 > 0.0)
    {
      ++c.improved;
    }
    else if (d.f1 < 0.0)
    {
      ++c.worsened;
    }
    else
    {
      ++c.unchanged;
    }
  }
  for (const auto& [disc, sa] : a.per_discipline)
  {
    if (const auto it = b.per_discipline.find(disc); it != b.per_discipline.end())
    {
      c.per_discipline[disc] = delta(sa, it->second);
    }
  }
  c.overall_f1_delta = b.overall_f1 - a.overall_f1;
  return c;
}

}  // namespace skitrack::eval
