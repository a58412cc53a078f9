#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "skitrack/core.hpp"

namespace testutil
{

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string& tag)
  {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("skitrack_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
  std::filesystem::path path_;
};

inline skitrack::BoundingBox random_box(std::mt19937_64& rng, double extent = 500.0)
{
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> size(1.0, extent / 4.0);
  return {pos(rng), pos(rng), size(rng), size(rng)};
}

/// Random dense track over [first, first+n), presence with probability p.
inline skitrack::Track random_track(std::mt19937_64& rng, skitrack::FrameIndex first, std::size_t n, double p = 0.8,
                                    const std::string& id = "seq")
{
  std::bernoulli_distribution present(p);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<skitrack::FrameRecord> recs;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto f = first + static_cast<skitrack::FrameIndex>(i);
    if (present(rng))
    {
      recs.push_back(skitrack::FrameRecord::with_box(f, random_box(rng), conf(rng)));
    }
    else
    {
      recs.push_back(skitrack::FrameRecord::absent(f));
    }
  }
  return skitrack::Track(id, std::move(recs));
}

inline skitrack::SequenceManifest simple_manifest(const std::string& id, skitrack::Discipline d,
                                                  std::vector<std::pair<long, long>> ranges)
{
  skitrack::SequenceManifest m;
  m.sequence_id = id;
  m.discipline = d;
  m.image_width = 1280;
  m.image_height = 720;
  int k = 0;
  for (auto [s, e] : ranges)
  {
    m.clips.push_back({"cam" + std::to_string(k++), s, e});
  }
  return m;
}

}  // namespace testutil
