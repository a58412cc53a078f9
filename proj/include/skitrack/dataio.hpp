///////////////////////////////////////////////////////////////////////////////
// dataio.hpp: on-disk formats
//
//   manifest     JSON  {"sequence_id","discipline","image_width","image_height",
//                       "clips":[{"clip_id","start_frame","end_frame"}]}
//   annotations  CSV   frame,x,y,w,h | frame,absent
//   track        CSV   "# sequence <id>" header, then
//                      frame,x,y,w,h,confidence | frame,absent
//   detections   CSV   frame,candidate_id,x,y,w,h,score
//   embeddings   CSV   frame,candidate_id,v1,...,vD   (anchor: anchor,anchor,v1,...)
//   report       JSON  see report_to_json
//
// Lines starting with '#' and blank lines are ignored by every CSV reader.
// Reals are written in shortest round-trip form so save/load is byte-stable.
// See docs/formats.md for the grammar of each format.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "skitrack/core.hpp"
#include "skitrack/embedding.hpp"
#include "skitrack/eval.hpp"

namespace skitrack::dataio
{

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Low-level helpers

inline std::string read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw InputError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content)
{
  if (path.has_parent_path())
  {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    throw InputError("cannot open '" + path.string() + "' for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
  {
    throw InputError("write to '" + path.string() + "' failed");
  }
}

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
  {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
  {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;)
  {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos)
    {
      break;
    }
    start = pos + 1;
  }
  return out;
}

/// Content lines with 1-based line numbers; comments and blanks dropped.
struct Line
{
  std::size_t number;
  std::string_view text;
};

inline std::vector<Line> content_lines(std::string_view text)
{
  std::vector<Line> out;
  std::size_t n = 0;
  std::size_t start = 0;
  while (start <= text.size())
  {
    const auto pos = text.find('\n', start);
    const auto raw = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++n;
    const auto t = trim(raw);
    if (!t.empty() && t.front() != '#')
    {
      out.push_back({n, t});
    }
    if (pos == std::string_view::npos)
    {
      break;
    }
    start = pos + 1;
  }
  return out;
}

/// Field-aware parsing context for one file.
struct Cursor
{
  std::string file;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const
  {
    throw ParseError(file, line, field, what);
  }

  double real(std::string_view s, const std::string& field) const
  {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    {
      fail(field, "expected a number, got '" + std::string(s) + "'");
    }
    if (!std::isfinite(v))
    {
      fail(field, "non-finite value '" + std::string(s) + "'");
    }
    return v;
  }

  FrameIndex integer(std::string_view s, const std::string& field) const
  {
    FrameIndex v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    {
      fail(field, "expected an integer, got '" + std::string(s) + "'");
    }
    return v;
  }

  BoundingBox box(const std::vector<std::string_view>& f, std::size_t at) const
  {
    BoundingBox b{real(f[at], "x"), real(f[at + 1], "y"), real(f[at + 2], "w"), real(f[at + 3], "h")};
    if (!(b.w > 0.0))
    {
      fail("w", "box width must be > 0 (zero-area box)");
    }
    if (!(b.h > 0.0))
    {
      fail("h", "box height must be > 0 (zero-area box)");
    }
    return b;
  }
};

inline std::string box_csv(const BoundingBox& b)
{
  return format_double(b.x) + "," + format_double(b.y) + "," + format_double(b.w) + "," + format_double(b.h);
}

// ---------------------------------------------------------------------------
// Manifest

inline json manifest_to_json(const SequenceManifest& m)
{
  json clips = json::array();
  for (const auto& c : m.clips)
  {
    clips.push_back({{"clip_id", c.clip_id}, {"start_frame", c.start_frame}, {"end_frame", c.end_frame}});
  }
  return {{"sequence_id", m.sequence_id},
          {"discipline", std::string(to_string(m.discipline))},
          {"image_width", m.image_width},
          {"image_height", m.image_height},
          {"clips", clips}};
}

/// 1-based line of the n-th (0-based) occurrence of "key" in text, 0 if none.
inline std::size_t locate_key(std::string_view text, std::string_view key, std::size_t occurrence = 0)
{
  const std::string quoted = "\"" + std::string(key) + "\"";
  std::size_t pos = 0;
  for (std::size_t i = 0;; ++i)
  {
    pos = text.find(quoted, pos);
    if (pos == std::string_view::npos)
    {
      return 0;
    }
    if (i == occurrence)
    {
      break;
    }
    pos += quoted.size();
  }
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n')) + 1;
}

inline SequenceManifest parse_manifest(const std::string& text, const std::string& source)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n')) + 1;
    throw ParseError(source, line, "<json>", std::string("malformed JSON: ") + e.what());
  }

  auto fail = [&](const std::string& field, std::size_t occurrence, const std::string& what) -> void {
    const std::string leaf = field.substr(field.rfind('.') + 1);
    throw ParseError(source, locate_key(text, leaf, occurrence), field, what);
  };

  SequenceManifest m;
  try
  {
    if (!j.is_object())
    {
      throw ParseError(source, 1, "<root>", "manifest must be a JSON object");
    }
    for (const char* key : {"sequence_id", "discipline", "image_width", "image_height", "clips"})
    {
      if (!j.contains(key))
      {
        throw ParseError(source, 1, key, "missing required field");
      }
    }
    m.sequence_id = j.at("sequence_id").get<std::string>();
    const auto disc = j.at("discipline").get<std::string>();
    const auto parsed = parse_discipline(disc);
    if (!parsed)
    {
      fail("discipline", 0, "unknown discipline '" + disc + "' (valid: AL, JP, FS)");
    }
    m.discipline = *parsed;
    m.image_width = j.at("image_width").get<int>();
    m.image_height = j.at("image_height").get<int>();
    if (m.image_width <= 0)
    {
      fail("image_width", 0, "must be > 0");
    }
    if (m.image_height <= 0)
    {
      fail("image_height", 0, "must be > 0");
    }
    const auto& clips = j.at("clips");
    if (!clips.is_array() || clips.empty())
    {
      fail("clips", 0, "must be a non-empty array");
    }
    for (std::size_t i = 0; i < clips.size(); ++i)
    {
      const auto& c = clips.at(i);
      const std::string prefix = "clips[" + std::to_string(i) + "]";
      for (const char* key : {"clip_id", "start_frame", "end_frame"})
      {
        if (!c.contains(key))
        {
          throw ParseError(source, locate_key(text, "clip_id", i), prefix + "." + key, "missing required field");
        }
      }
      CameraClip clip{c.at("clip_id").get<std::string>(), c.at("start_frame").get<FrameIndex>(),
                      c.at("end_frame").get<FrameIndex>()};
      if (clip.start_frame > clip.end_frame)
      {
        fail(prefix + ".end_frame", i, "end_frame < start_frame");
      }
      if (i > 0)
      {
        const auto& prev = m.clips.back();
        if (clip.start_frame <= prev.end_frame)
        {
          fail(prefix + ".start_frame", i,
               "overlapping clips: '" + clip.clip_id + "' starts at " + std::to_string(clip.start_frame) +
                 " but '" + prev.clip_id + "' ends at " + std::to_string(prev.end_frame));
        }
        if (clip.start_frame != prev.end_frame + 1)
        {
          fail(prefix + ".start_frame", i,
               "gap between clips: '" + prev.clip_id + "' ends at " + std::to_string(prev.end_frame) + " but '" +
                 clip.clip_id + "' starts at " + std::to_string(clip.start_frame));
        }
      }
      m.clips.push_back(std::move(clip));
    }
  }
  catch (const json::exception& e)
  {
    throw ParseError(source, 0, "<json>", std::string("wrong field type: ") + e.what());
  }
  validate(m);
  return m;
}

inline SequenceManifest load_manifest(const fs::path& path)
{
  return parse_manifest(read_file(path), path.string());
}

inline std::string manifest_text(const SequenceManifest& m)
{
  return manifest_to_json(m).dump(2) + "\n";
}

inline void save_manifest(const SequenceManifest& m, const fs::path& path)
{
  write_file(path, manifest_text(m));
}

// ---------------------------------------------------------------------------
// Dataset-native layouts
//
// The interchange formats above are this project's own. A dataset that ships
// its annotations in another layout plugs in by implementing this interface;
// convert() then writes manifest.json and gt.csv that every command accepts.
// No native layout is bundled.

class NativeLayoutConverter
{
public:
  virtual ~NativeLayoutConverter() = default;
  virtual std::string name() const = 0;
  virtual SequenceManifest read_manifest(const fs::path& native_dir) const = 0;
  virtual GroundTruth read_annotations(const fs::path& native_dir, const SequenceManifest& manifest) const = 0;

  void convert(const fs::path& native_dir, const fs::path& out_dir) const;
};

// ---------------------------------------------------------------------------
// Annotations

inline GroundTruth parse_annotations(std::string_view text, const std::string& source, const SequenceManifest& manifest)
{
  const auto lines = content_lines(text);
  const std::size_t expected = manifest.frame_count();
  std::vector<std::optional<BoundingBox>> boxes;
  boxes.reserve(expected);
  Cursor cur{source, 0};
  for (const auto& ln : lines)
  {
    cur.line = ln.number;
    const auto f = split_csv(ln.text);
    const FrameIndex frame = cur.integer(f[0], "frame");
    const FrameIndex want = manifest.first_frame() + static_cast<FrameIndex>(boxes.size());
    if (frame != want)
    {
      if (boxes.size() >= expected)
      {
        cur.fail("frame", "count mismatch: manifest '" + manifest.sequence_id + "' has " + std::to_string(expected) +
                            " frames but the file has more (frame " + std::to_string(frame) + ")");
      }
      cur.fail("frame", "expected frame " + std::to_string(want) + ", got " + std::to_string(frame));
    }
    if (f.size() == 2 && f[1] == "absent")
    {
      boxes.emplace_back(std::nullopt);
      continue;
    }
    if (f.size() != 5)
    {
      cur.fail("record", "expected 'frame,x,y,w,h' or 'frame,absent', got " + std::to_string(f.size()) + " fields");
    }
    boxes.emplace_back(cur.box(f, 1));
  }
  if (boxes.size() != expected)
  {
    throw ParseError(source, lines.empty() ? 0 : lines.back().number, "frame",
                     "count mismatch: file has " + std::to_string(boxes.size()) + " frames, manifest '" +
                       manifest.sequence_id + "' has " + std::to_string(expected));
  }
  return GroundTruth(manifest.first_frame(), std::move(boxes));
}

inline GroundTruth load_annotations(const fs::path& path, const SequenceManifest& manifest)
{
  return parse_annotations(read_file(path), path.string(), manifest);
}

inline std::string annotations_text(const GroundTruth& gt)
{
  std::string out;
  for (std::size_t i = 0; i < gt.size(); ++i)
  {
    const FrameIndex f = gt.first_frame() + static_cast<FrameIndex>(i);
    const auto& b = gt.boxes()[i];
    out += std::to_string(f) + "," + (b ? box_csv(*b) : std::string("absent")) + "\n";
  }
  return out;
}

inline void save_annotations(const GroundTruth& gt, const fs::path& path)
{
  write_file(path, annotations_text(gt));
}

inline void NativeLayoutConverter::convert(const fs::path& native_dir, const fs::path& out_dir) const
{
  const SequenceManifest m = read_manifest(native_dir);
  validate(m);
  const GroundTruth gt = read_annotations(native_dir, m);
  if (gt.size() != m.frame_count() || gt.first_frame() != m.first_frame())
  {
    throw InputError(name() + ": converted annotations cover " + std::to_string(gt.size()) +
                     " frames, manifest has " + std::to_string(m.frame_count()));
  }
  save_manifest(m, out_dir / "manifest.json");
  save_annotations(gt, out_dir / "gt.csv");
}

// ---------------------------------------------------------------------------
// Tracks

inline constexpr std::string_view kTrackHeader = "# sequence ";

inline std::string track_text(const Track& t)
{
  std::string out = std::string(kTrackHeader) + t.sequence_id() + "\n";
  for (const auto& r : t.records())
  {
    if (r.present)
    {
      out += std::to_string(r.frame) + "," + box_csv(r.box) + "," + format_double(r.confidence) + "\n";
    }
    else
    {
      out += std::to_string(r.frame) + ",absent\n";
    }
  }
  return out;
}

inline Track parse_track(std::string_view text, const std::string& source)
{
  std::string sequence_id;
  if (text.starts_with(kTrackHeader))
  {
    const auto eol = text.find('\n');
    sequence_id = std::string(trim(text.substr(kTrackHeader.size(), eol == std::string_view::npos ? std::string_view::npos : eol - kTrackHeader.size())));
  }
  Cursor cur{source, 0};
  std::vector<FrameRecord> recs;
  for (const auto& ln : content_lines(text))
  {
    cur.line = ln.number;
    const auto f = split_csv(ln.text);
    const FrameIndex frame = cur.integer(f[0], "frame");
    if (!recs.empty() && frame != recs.back().frame + 1)
    {
      cur.fail("frame", "expected frame " + std::to_string(recs.back().frame + 1) + ", got " + std::to_string(frame));
    }
    if (f.size() == 2 && f[1] == "absent")
    {
      recs.push_back(FrameRecord::absent(frame));
      continue;
    }
    if (f.size() != 6)
    {
      cur.fail("record", "expected 'frame,x,y,w,h,confidence' or 'frame,absent', got " + std::to_string(f.size()) +
                           " fields");
    }
    const BoundingBox b = cur.box(f, 1);
    const double conf = cur.real(f[5], "confidence");
    if (conf < 0.0 || conf > 1.0)
    {
      cur.fail("confidence", "confidence " + std::string(f[5]) + " outside [0,1]");
    }
    recs.push_back(FrameRecord::with_box(frame, b, conf));
  }
  return Track(sequence_id, std::move(recs));
}

inline Track load_track(const fs::path& path)
{
  return parse_track(read_file(path), path.string());
}

/// Loads and checks the track covers exactly the manifest's frames.
inline Track load_track(const fs::path& path, const SequenceManifest& manifest)
{
  Track t = load_track(path);
  if (t.size() != manifest.frame_count() || !t.matches(manifest))
  {
    throw ParseError(path.string(), 0, "frame",
                     "count mismatch: track has " + std::to_string(t.size()) + " frames [" +
                       std::to_string(t.first_frame()) + "," + std::to_string(t.last_frame()) + "], manifest '" +
                       manifest.sequence_id + "' has " + std::to_string(manifest.frame_count()) + " [" +
                       std::to_string(manifest.first_frame()) + "," + std::to_string(manifest.last_frame()) + "]");
  }
  return t;
}

inline void save_track(const Track& t, const fs::path& path)
{
  write_file(path, track_text(t));
}

// ---------------------------------------------------------------------------
// Detections

inline DetectionsByFrame parse_detections(std::string_view text, const std::string& source)
{
  DetectionsByFrame out;
  Cursor cur{source, 0};
  for (const auto& ln : content_lines(text))
  {
    cur.line = ln.number;
    const auto f = split_csv(ln.text);
    if (f.size() != 7)
    {
      cur.fail("record", "expected 'frame,candidate_id,x,y,w,h,score', got " + std::to_string(f.size()) + " fields");
    }
    const FrameIndex frame = cur.integer(f[0], "frame");
    if (f[1].empty())
    {
      cur.fail("candidate_id", "empty candidate id");
    }
    Detection d;
    d.embedding_ref = std::string(f[1]);
    d.box = cur.box(f, 2);
    d.score = cur.real(f[6], "score");
    if (d.score < 0.0 || d.score > 1.0)
    {
      cur.fail("score", "score " + std::string(f[6]) + " outside [0,1]");
    }
    out[frame].push_back(std::move(d));
  }
  return out;
}

inline DetectionsByFrame load_detections(const fs::path& path)
{
  return parse_detections(read_file(path), path.string());
}

inline std::string detections_text(const DetectionsByFrame& dets)
{
  std::string out;
  for (const auto& [frame, list] : dets)
  {
    for (const auto& d : list)
    {
      out += std::to_string(frame) + "," + d.embedding_ref.value_or("-") + "," + box_csv(d.box) + "," +
             format_double(d.score) + "\n";
    }
  }
  return out;
}

inline void save_detections(const DetectionsByFrame& dets, const fs::path& path)
{
  write_file(path, detections_text(dets));
}

// ---------------------------------------------------------------------------
// Embeddings

/// expected_dim = 0 takes the dimension of the first record.
inline EmbeddingStore parse_embeddings(std::string_view text, const std::string& source, std::size_t expected_dim = 0)
{
  EmbeddingStore store(expected_dim);
  Cursor cur{source, 0};
  for (const auto& ln : content_lines(text))
  {
    cur.line = ln.number;
    const auto f = split_csv(ln.text);
    if (f.size() < 3)
    {
      cur.fail("record", "expected 'frame,candidate_id,v1,...,vD'");
    }
    const std::size_t dim = f.size() - 2;
    if (store.dim() != 0 && dim != store.dim())
    {
      cur.fail("values", "dimension mismatch: record has " + std::to_string(dim) + " values, expected " +
                           std::to_string(store.dim()));
    }
    std::vector<double> values;
    values.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i)
    {
      values.push_back(cur.real(f[2 + i], "v" + std::to_string(i + 1)));
    }
    std::optional<Embedding> e;
    try
    {
      e.emplace(std::move(values));
    }
    catch (const InputError& err)
    {
      cur.fail("values", err.what());
    }
    try
    {
      if (f[0] == EmbeddingStore::kAnchorKey)
      {
        if (f[1] != EmbeddingStore::kAnchorKey)
        {
          cur.fail("candidate_id", "anchor record must use key 'anchor,anchor'");
        }
        store.set_anchor(std::move(*e));
      }
      else
      {
        store.insert(cur.integer(f[0], "frame"), std::string(f[1]), std::move(*e));
      }
    }
    catch (const ParseError&)
    {
      throw;
    }
    catch (const InputError& err)
    {
      cur.fail("key", err.what());
    }
  }
  return store;
}

inline EmbeddingStore load_embeddings(const fs::path& path, std::size_t expected_dim = 0)
{
  return parse_embeddings(read_file(path), path.string(), expected_dim);
}

inline std::string embeddings_text(const EmbeddingStore& store)
{
  auto values = [](const Embedding& e) {
    std::string s;
    for (double v : e.values())
    {
      s += "," + format_double(v);
    }
    return s;
  };
  std::string out;
  if (store.anchor())
  {
    out += std::string(EmbeddingStore::kAnchorKey) + "," + std::string(EmbeddingStore::kAnchorKey) +
           values(*store.anchor()) + "\n";
  }
  for (const auto& [key, e] : store.entries())
  {
    out += std::to_string(key.first) + "," + key.second + values(e) + "\n";
  }
  return out;
}

inline void save_embeddings(const EmbeddingStore& store, const fs::path& path)
{
  write_file(path, embeddings_text(store));
}

// ---------------------------------------------------------------------------
// Metric reports

inline json score_to_json(const eval::SequenceScore& s)
{
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"frames_evaluated", s.frames_evaluated}};
}

inline eval::SequenceScore score_from_json(const json& j)
{
  eval::SequenceScore s;
  s.precision = j.at("precision").get<double>();
  s.recall = j.at("recall").get<double>();
  s.f1 = j.at("f1").get<double>();
  s.frames_evaluated = j.at("frames_evaluated").get<std::int64_t>();
  return s;
}

inline json report_to_json(const eval::MetricReport& r)
{
  json seqs = json::object();
  for (const auto& [id, e] : r.per_sequence)
  {
    json s = score_to_json(e.score);
    s["discipline"] = std::string(to_string(e.discipline));
    seqs[id] = s;
  }
  json discs = json::object();
  for (const auto& [d, s] : r.per_discipline)
  {
    discs[std::string(to_string(d))] = score_to_json(s);
  }
  json missing = json::array();
  for (auto d : r.missing_disciplines)
  {
    missing.push_back(std::string(to_string(d)));
  }
  return {{"per_sequence", seqs}, {"per_discipline", discs}, {"overall_f1", r.overall_f1},
          {"missing_disciplines", missing}};
}

inline Discipline discipline_or_throw(const std::string& s, const std::string& source)
{
  const auto d = parse_discipline(s);
  if (!d)
  {
    throw ParseError(source, 0, "discipline", "unknown discipline '" + s + "' (valid: AL, JP, FS)");
  }
  return *d;
}

inline eval::MetricReport report_from_json(const json& j, const std::string& source = "<report>")
{
  eval::MetricReport r;
  try
  {
    for (const auto& [id, s] : j.at("per_sequence").items())
    {
      r.per_sequence[id] = {discipline_or_throw(s.at("discipline").get<std::string>(), source), score_from_json(s)};
    }
    for (const auto& [d, s] : j.at("per_discipline").items())
    {
      r.per_discipline[discipline_or_throw(d, source)] = score_from_json(s);
    }
    r.overall_f1 = j.at("overall_f1").get<double>();
    for (const auto& d : j.at("missing_disciplines"))
    {
      r.missing_disciplines.push_back(discipline_or_throw(d.get<std::string>(), source));
    }
  }
  catch (const json::exception& e)
  {
    throw ParseError(source, 0, "<report>", e.what());
  }
  return r;
}

inline std::string report_text(const eval::MetricReport& r)
{
  return report_to_json(r).dump(2) + "\n";
}

inline void save_report(const eval::MetricReport& r, const fs::path& path)
{
  write_file(path, report_text(r));
}

inline eval::MetricReport load_report(const fs::path& path)
{
  const auto text = read_file(path);
  try
  {
    return report_from_json(json::parse(text), path.string());
  }
  catch (const json::parse_error& e)
  {
    throw ParseError(path.string(), 0, "<json>", e.what());
  }
}

inline json comparison_to_json(const eval::Comparison& c)
{
  auto d2j = [](const eval::ScoreDelta& d) {
    return json{{"precision", d.precision}, {"recall", d.recall}, {"f1", d.f1}};
  };
  json seqs = json::object();
  for (const auto& [id, d] : c.per_sequence)
  {
    seqs[id] = d2j(d);
  }
  json discs = json::object();
  for (const auto& [disc, d] : c.per_discipline)
  {
    discs[std::string(to_string(disc))] = d2j(d);
  }
  return {{"per_sequence", seqs},
          {"per_discipline", discs},
          {"overall_f1_delta", c.overall_f1_delta},
          {"improved", c.improved},
          {"worsened", c.worsened},
          {"unchanged", c.unchanged}};
}

}  // namespace skitrack::dataio
