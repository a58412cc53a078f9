#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "skitrack/reid.hpp"

using namespace skitrack;
using namespace skitrack::reid;

TEST(Cosine, Examples)
{
  EXPECT_DOUBLE_EQ(cosine_similarity(Embedding({1, 0}), Embedding({1, 0})), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Embedding({1, 0}), Embedding({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Embedding({1, 0}), Embedding({-1, 0})), -1.0);
  EXPECT_NEAR(cosine_similarity(Embedding({1, 1}), Embedding({1, 0})), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Cosine, RejectsBadInput)
{
  EXPECT_THROW(Embedding({0, 0, 0}), InputError);
  EXPECT_THROW(Embedding(std::vector<double>{}), InputError);
  EXPECT_THROW(cosine_similarity(Embedding({1, 0}), Embedding({1, 0, 0})), InputError);
}

TEST(Cosine, BoundedSymmetricAndScaleInvariant)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 500; ++i)
  {
    std::vector<double> a(16), b(16);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const Embedding ea(a), eb(b);
    const double s = cosine_similarity(ea, eb);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_DOUBLE_EQ(s, cosine_similarity(eb, ea));
    const double k = scale(rng);
    auto ak = a;
    for (auto& v : ak) v *= k;
    EXPECT_NEAR(cosine_similarity(Embedding(ak), eb), s, 1e-12);
  }
}

namespace
{

/// Unit vector in 2-D whose cosine with (1,0) is exactly c (up to rounding).
Embedding at_cosine(double c)
{
  return Embedding({c, std::sqrt(1.0 - c * c)});
}

}  // namespace

TEST(ClipSimilarity, MeanMedianAndEmpty)
{
  const Embedding anchor({1, 0});
  const CameraClip clip{"c", 0, 3};
  EmbeddingStore store;
  store.insert(0, "track", at_cosine(0.9));
  store.insert(1, "track", at_cosine(0.5));
  store.insert(2, "track", at_cosine(0.7));
  Track t("s", {FrameRecord::with_box(0, {0, 0, 1, 1}, 1), FrameRecord::with_box(1, {0, 0, 1, 1}, 1),
                FrameRecord::with_box(2, {0, 0, 1, 1}, 1), FrameRecord::absent(3)});
  EXPECT_NEAR(clip_similarity(t, clip, store, anchor, {0.6, Aggregation::mean}), 0.7, 1e-12);
  EXPECT_NEAR(clip_similarity(t, clip, store, anchor, {0.6, Aggregation::median}), 0.7, 1e-12);

  const Track empty = Track::all_absent("s", 0, 3);
  EXPECT_EQ(clip_similarity(empty, clip, store, anchor, {}), -1.0);
}

TEST(ClipSimilarity, MissingEmbeddingIsAnError)
{
  const Embedding anchor({1, 0});
  EmbeddingStore store;
  store.insert(0, "track", anchor);
  Track t("s", {FrameRecord::with_box(0, {0, 0, 1, 1}, 1), FrameRecord::with_box(1, {0, 0, 1, 1}, 1)});
  EXPECT_THROW(clip_similarity(t, {"c", 0, 1}, store, anchor, {}), InputError);
}

TEST(SelectBMid, PicksMostSimilar)
{
  const Embedding anchor({1, 0});
  std::vector<Candidate> cands{
    {{{0, 0, 5, 5}, 0.99, std::nullopt}, at_cosine(0.2)},
    {{{10, 0, 5, 5}, 0.10, std::nullopt}, at_cosine(0.95)},
    {{{20, 0, 5, 5}, 0.50, std::nullopt}, at_cosine(0.6)},
  };
  EXPECT_EQ(select_b_mid_index(cands, anchor), 1u);
  EXPECT_EQ(select_b_mid(cands, anchor), (BoundingBox{10, 0, 5, 5}));
}

TEST(SelectBMid, TiesGoToScoreThenIndex)
{
  const Embedding anchor({1, 0});
  std::vector<Candidate> cands{
    {{{0, 0, 5, 5}, 0.5, std::nullopt}, Embedding({2, 0})},
    {{{10, 0, 5, 5}, 0.8, std::nullopt}, Embedding({3, 0})},
    {{{20, 0, 5, 5}, 0.8, std::nullopt}, Embedding({1, 0})},
  };
  EXPECT_EQ(select_b_mid_index(cands, anchor), 1u);
  cands[1].detection.score = 0.5;
  cands[2].detection.score = 0.5;
  EXPECT_EQ(select_b_mid_index(cands, anchor), 0u);
}

TEST(SelectBMid, EmptyOrUnembeddedCandidates)
{
  const Embedding anchor({1, 0});
  EXPECT_THROW(select_b_mid_index({}, anchor), NoCandidateError);
  std::vector<Candidate> cands{{{{0, 0, 5, 5}, 0.5, std::nullopt}, std::nullopt}};
  EXPECT_THROW(select_b_mid_index(cands, anchor), InputError);
}

// ---------------------------------------------------------------------------
// correct_clip / reid_pass on a two-skier toy world

namespace
{

struct World
{
  SequenceManifest manifest;
  GroundTruth target;
  GroundTruth distractor;
  Embedding anchor{std::vector<double>{1, 0}};
  Embedding other{std::vector<double>{0, 1}};

  BoundingBox target_box(FrameIndex f) const { return *target.at(f); }
  BoundingBox distractor_box(FrameIndex f) const { return *distractor.at(f); }

  OracleTracker clean_oracle() const
  {
    OracleConfig cfg;
    cfg.target = target;
    cfg.distractors = {{1, distractor}};
    cfg.initial_frame = manifest.first_frame();
    return OracleTracker(cfg);
  }
};

World make_world(std::vector<std::pair<long, long>> ranges)
{
  World w;
  w.manifest = testutil::simple_manifest("toy", Discipline::AL, std::move(ranges));
  std::vector<std::optional<BoundingBox>> t, d;
  for (FrameIndex f = w.manifest.first_frame(); f <= w.manifest.last_frame(); ++f)
  {
    const double x = 100.0 + 4.0 * static_cast<double>(f);
    t.push_back(BoundingBox{x, 100, 40, 80});
    d.push_back(BoundingBox{x, 400, 40, 80});
  }
  w.target = GroundTruth(w.manifest.first_frame(), t);
  w.distractor = GroundTruth(w.manifest.first_frame(), d);
  return w;
}

double mean_iou(const Track& t, const GroundTruth& gt, const CameraClip& clip)
{
  double s = 0.0;
  for (FrameIndex f = clip.start_frame; f <= clip.end_frame; ++f)
  {
    s += t.at(f).present ? iou(t.at(f).box, *gt.at(f)) : 0.0;
  }
  return s / static_cast<double>(clip.size());
}

}  // namespace

TEST(CorrectClip, GroundTruthTrackerRecoversWholeClip)
{
  const World w = make_world({{0, 10}});
  const auto& clip = w.manifest.clips[0];
  ASSERT_EQ(clip.middle(), 5);
  auto tracker = w.clean_oracle();
  const Track in = Track::all_absent("toy", 0, 10);
  const Track out = correct_clip(in, clip, w.target_box(5), tracker);
  for (FrameIndex f = 0; f <= 10; ++f)
  {
    ASSERT_TRUE(out.at(f).present);
    EXPECT_EQ(out.at(f).box, w.target_box(f)) << f;
  }
  EXPECT_EQ(out.at(5).confidence, 1.0);
}

TEST(CorrectClip, SingleFrameClip)
{
  const World w = make_world({{7, 7}});
  auto tracker = w.clean_oracle();
  const Track out = correct_clip(Track::all_absent("toy", 7, 7), w.manifest.clips[0], {1, 2, 3, 4}, tracker);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.at(7).box, (BoundingBox{1, 2, 3, 4}));
}

TEST(CorrectClip, RepairsSwitchAfterMiddle)
{
  const World w = make_world({{0, 20}});
  const auto& clip = w.manifest.clips[0];
  const FrameIndex m = clip.middle();
  std::vector<FrameRecord> recs;
  for (FrameIndex f = 0; f <= 20; ++f)
  {
    recs.push_back(FrameRecord::with_box(f, f < m + 3 ? w.target_box(f) : w.distractor_box(f), 0.9));
  }
  const Track in("toy", recs);
  auto tracker = w.clean_oracle();
  const Track out = correct_clip(in, clip, w.target_box(m), tracker);
  EXPECT_GT(mean_iou(out, w.target, clip), mean_iou(in, w.target, clip));
  EXPECT_DOUBLE_EQ(mean_iou(out, w.target, clip), 1.0);
}

TEST(CorrectClip, TrackerFailureLeavesInputIntact)
{
  const World w = make_world({{0, 10}});
  // Replay source that does not cover the clip.
  ReplayTracker broken(Track::all_absent("toy", 0, 4));
  const Track in = Track::all_absent("toy", 0, 10);
  Track copy = in;
  EXPECT_THROW(correct_clip(in, w.manifest.clips[0], w.target_box(5), broken), ClientError);
  EXPECT_EQ(in.records(), copy.records());
}

namespace
{

struct ReidScenario
{
  World world;
  Track track;
  EmbeddingStore store;
  DetectionsByFrame detections;
  std::shared_ptr<EmbeddingStore> det_store = std::make_shared<EmbeddingStore>();
};

/// Five 11-frame clips; clip `bad` follows the distractor.
ReidScenario make_scenario(int bad)
{
  ReidScenario s{make_world({{0, 10}, {11, 21}, {22, 32}, {33, 43}, {44, 54}}), Track::all_absent("toy", 0, 54), EmbeddingStore(), {}};
  const auto& w = s.world;
  for (int k = 0; k < 5; ++k)
  {
    const auto& clip = w.manifest.clips[static_cast<std::size_t>(k)];
    for (FrameIndex f = clip.start_frame; f <= clip.end_frame; ++f)
    {
      const bool wrong = k == bad;
      s.track.set(FrameRecord::with_box(f, wrong ? w.distractor_box(f) : w.target_box(f), 0.9));
      s.store.insert(f, "track", wrong ? w.other : w.anchor);
    }
    const FrameIndex m = clip.middle();
    s.detections[m] = {{w.distractor_box(m), 0.95, "id1"}, {w.target_box(m), 0.9, "id0"}};
    s.det_store->insert(m, "id0", w.anchor);
    s.det_store->insert(m, "id1", w.other);
  }
  return s;
}

}  // namespace

TEST(ReidPass, AllClipsPassWhenClean)
{
  auto s = make_scenario(-1);
  ReplayDetector det(s.detections, s.det_store);
  auto tracker = s.world.clean_oracle();
  const auto r = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, tracker, {});
  EXPECT_EQ(r.corrections(), 0u);
  EXPECT_EQ(r.track.records(), s.track.records());
  for (const auto& c : r.clips)
  {
    EXPECT_EQ(c.action, ClipAction::passed);
    EXPECT_NEAR(c.similarity, 1.0, 1e-12);
  }
}

TEST(ReidPass, CorrectsOnlyTheSwitchedClip)
{
  auto s = make_scenario(2);
  ReplayDetector det(s.detections, s.det_store);
  auto tracker = s.world.clean_oracle();
  const auto r = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, tracker, {});
  ASSERT_EQ(r.clips.size(), 5u);
  EXPECT_EQ(r.corrections(), 1u);
  EXPECT_EQ(r.clips[2].action, ClipAction::corrected);
  EXPECT_NEAR(r.clips[2].similarity, 0.0, 1e-12);
  ASSERT_TRUE(r.clips[2].b_mid);
  EXPECT_EQ(*r.clips[2].b_mid, s.world.target_box(27));
  for (FrameIndex f = 0; f <= 54; ++f)
  {
    EXPECT_EQ(r.track.at(f).box, s.world.target_box(f)) << f;
    if (f < 22 || f > 32)
    {
      EXPECT_EQ(r.track.at(f), s.track.at(f));
    }
  }
}

TEST(ReidPass, ThresholdMinusOneNeverCorrects)
{
  auto s = make_scenario(2);
  ReplayDetector det(s.detections, s.det_store);
  auto tracker = s.world.clean_oracle();
  const auto r = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, tracker, {-1.0, Aggregation::mean});
  EXPECT_EQ(r.corrections(), 0u);
  EXPECT_EQ(r.track.records(), s.track.records());
}

TEST(ReidPass, NoCandidatesKeepsClip)
{
  auto s = make_scenario(2);
  s.detections.erase(27);
  ReplayDetector det(s.detections, s.det_store);
  auto tracker = s.world.clean_oracle();
  const auto r = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, tracker, {});
  EXPECT_EQ(r.clips[2].action, ClipAction::no_candidates);
  EXPECT_EQ(r.track.records(), s.track.records());
}

TEST(ReidPass, TrackerFailureKeepsClip)
{
  auto s = make_scenario(2);
  ReplayDetector det(s.detections, s.det_store);
  ReplayTracker broken(Track::all_absent("toy", 0, 4));
  const auto r = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, broken, {});
  EXPECT_EQ(r.clips[2].action, ClipAction::tracker_failed);
  EXPECT_FALSE(r.clips[2].message.empty());
  EXPECT_EQ(r.track.records(), s.track.records());
}

TEST(ReidPass, Deterministic)
{
  auto s = make_scenario(3);
  ReplayDetector det(s.detections, s.det_store);
  OracleConfig cfg;
  cfg.target = s.world.target;
  cfg.distractors = {{1, s.world.distractor}};
  cfg.noise_sigma = 2.0;
  cfg.seed = 99;
  OracleTracker t1(cfg), t2(cfg);
  const auto a = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, t1, {});
  const auto b = reid_pass(s.track, s.world.manifest, s.world.anchor, s.store, det, t2, {});
  EXPECT_EQ(a.track.records(), b.track.records());
}

TEST(ReidConfig, Validation)
{
  EXPECT_THROW(validate(ReidConfig{1.5, Aggregation::mean}), ConfigError);
  EXPECT_NO_THROW(validate(ReidConfig{-1.0, Aggregation::median}));
}
