#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skitrack/core.hpp"

namespace skitrack
{

/// ReID feature vector. Finite, non-zero norm; not necessarily unit length.
class Embedding
{
public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values) : values_(std::move(values))
  {
    if (values_.empty())
    {
      throw InputError("embedding: empty vector");
    }
    double sq = 0.0;
    for (double v : values_)
    {
      if (!std::isfinite(v))
      {
        throw InputError("embedding: non-finite component");
      }
      sq += v * v;
    }
    if (!(sq > 0.0))
    {
      throw InputError("embedding: zero-norm vector");
    }
  }

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double norm() const
  {
    double sq = 0.0;
    for (double v : values_)
    {
      sq += v * v;
    }
    return std::sqrt(sq);
  }
  Embedding normalized() const
  {
    const double n = norm();
    std::vector<double> out(values_);
    for (auto& v : out)
    {
      v /= n;
    }
    return Embedding(std::move(out));
  }

  friend bool operator==(const Embedding&, const Embedding&) = default;

private:
  std::vector<double> values_;
};

inline double cosine_similarity(const Embedding& a, const Embedding& b)
{
  if (a.dim() == 0 || b.dim() == 0)
  {
    throw InputError("cosine_similarity: zero-norm (empty) embedding");
  }
  if (a.dim() != b.dim())
  {
    throw InputError("cosine_similarity: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
  {
    dot += a.values()[i] * b.values()[i];
  }
  return std::clamp(dot / (a.norm() * b.norm()), -1.0, 1.0);
}

/// Embeddings keyed by (frame, candidate id), plus the anchor feature.
class EmbeddingStore
{
public:
  /// Candidate id used for the crop of the tracked box itself.
  static constexpr std::string_view kTrackCandidate = "track";
  /// Reserved key written to files for the anchor record.
  static constexpr std::string_view kAnchorKey = "anchor";

  using Key = std::pair<FrameIndex, std::string>;

  explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  void insert(FrameIndex frame, const std::string& candidate, Embedding e)
  {
    check_dim(e);
    if (candidate == kAnchorKey)
    {
      throw InputError("embedding store: candidate id 'anchor' is reserved");
    }
    auto [it, inserted] = entries_.emplace(Key{frame, candidate}, std::move(e));
    if (!inserted)
    {
      throw InputError("embedding store: duplicate key (frame " + std::to_string(frame) +
                       ", id " + candidate + ")");
    }
  }

  void set_anchor(Embedding e)
  {
    check_dim(e);
    if (anchor_)
    {
      throw InputError("embedding store: duplicate anchor record");
    }
    anchor_ = std::move(e);
  }

  const std::optional<Embedding>& anchor() const { return anchor_; }

  const Embedding* find(FrameIndex frame, const std::string& candidate) const
  {
    auto it = entries_.find(Key{frame, candidate});
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<Key, Embedding>& entries() const { return entries_; }

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

private:
  void check_dim(const Embedding& e)
  {
    if (dim_ == 0)
    {
      dim_ = e.dim();
    }
    if (e.dim() != dim_)
    {
      throw InputError("embedding store: dimension " + std::to_string(e.dim()) + " != expected " +
                       std::to_string(dim_));
    }
  }

  std::size_t dim_;
  std::optional<Embedding> anchor_;
  std::map<Key, Embedding> entries_;
};

}  // namespace skitrack
