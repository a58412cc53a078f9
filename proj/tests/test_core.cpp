#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "skitrack/core.hpp"

using namespace skitrack;

TEST(Iou, IdenticalBoxesGiveOne)
{
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
}

TEST(Iou, DisjointBoxesGiveZero)
{
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0);
}

TEST(Iou, HalfShiftMatchesRasterOracle)
{
  // Frozen from oracle::raster_iou: 50 shared cells out of 150.
  const double expected = oracle::raster_iou({0, 0, 10, 10}, {5, 0, 10, 10});
  EXPECT_DOUBLE_EQ(expected, 50.0 / 150.0);
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 10, 10}), expected, 1e-12);
}

TEST(Iou, TouchingEdgesGiveZero)
{
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
}

TEST(Iou, DegenerateBoxIsRejected)
{
  EXPECT_THROW(iou({0, 0, 0, 10}, {0, 0, 10, 10}), GeometryError);
  EXPECT_THROW(iou({0, 0, 10, 10}, {0, 0, 10, -1}), GeometryError);
  EXPECT_THROW(iou({0, 0, std::nan(""), 10}, {0, 0, 10, 10}), GeometryError);
}

TEST(Iou, PropertiesOnRandomBoxes)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shift(-300.0, 300.0);
  for (int i = 0; i < 2000; ++i)
  {
    const auto a = testutil::random_box(rng, 200.0);
    const auto b = testutil::random_box(rng, 200.0);
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    const double dx = shift(rng);
    const double dy = shift(rng);
    const BoundingBox at{a.x + dx, a.y + dy, a.w, a.h};
    const BoundingBox bt{b.x + dx, b.y + dy, b.w, b.h};
    EXPECT_NEAR(iou(at, bt), v, 1e-9);
  }
}

TEST(ClampBox, LeftEdgeClip)
{
  EXPECT_EQ(clamp_box({-5, 0, 10, 10}, 100, 100), (BoundingBox{0, 0, 5, 10}));
}

TEST(ClampBox, IdentityInside)
{
  EXPECT_EQ(clamp_box({10, 10, 5, 5}, 100, 100), (BoundingBox{10, 10, 5, 5}));
}

TEST(ClampBox, FullyOutsideThrows)
{
  EXPECT_THROW(clamp_box({200, 200, 10, 10}, 100, 100), OutOfFrameError);
  EXPECT_THROW(clamp_box({0, 0, 10, 10}, 0, 100), GeometryError);
}

TEST(CenterDistance, Examples)
{
  EXPECT_DOUBLE_EQ(center_distance({0, 0, 2, 2}, {0, 0, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(center_distance({0, 0, 2, 2}, {3, 4, 2, 2}), 5.0);
  // centers (2,1) and (2,3)
  EXPECT_DOUBLE_EQ(center_distance({0, 0, 4, 2}, {1, 1, 2, 4}), 2.0);
  EXPECT_THROW(center_distance({0, 0, 0, 2}, {1, 1, 2, 4}), GeometryError);
}

TEST(Discipline, ParsesExactlyThree)
{
  EXPECT_EQ(parse_discipline("AL"), Discipline::AL);
  EXPECT_EQ(parse_discipline("JP"), Discipline::JP);
  EXPECT_EQ(parse_discipline("FS"), Discipline::FS);
  EXPECT_FALSE(parse_discipline("XC"));
  EXPECT_FALSE(parse_discipline("al"));
}

TEST(CameraClip, MiddleIsFloorOfMean)
{
  EXPECT_EQ((CameraClip{"c", 0, 10}.middle()), 5);
  EXPECT_EQ((CameraClip{"c", 0, 9}.middle()), 4);
  EXPECT_EQ((CameraClip{"c", 7, 7}.middle()), 7);
  EXPECT_EQ((CameraClip{"c", -3, 0}.middle()), -2);
}

TEST(Manifest, ValidationCatchesOverlapAndGap)
{
  auto m = testutil::simple_manifest("s", Discipline::AL, {{0, 99}, {100, 249}});
  EXPECT_NO_THROW(validate(m));
  EXPECT_EQ(m.frame_count(), 250u);
  m.clips[1].start_frame = 50;
  EXPECT_THROW(validate(m), InputError);
  m.clips[1].start_frame = 120;
  EXPECT_THROW(validate(m), InputError);
}

TEST(Track, RejectsNonDenseOrInvalidRecords)
{
  EXPECT_THROW(Track("t", {FrameRecord::absent(0), FrameRecord::absent(2)}), InputError);
  EXPECT_THROW(Track("t", {FrameRecord::with_box(0, {0, 0, 0, 5}, 0.5)}), GeometryError);
  EXPECT_THROW(Track("t", {FrameRecord::with_box(0, {0, 0, 5, 5}, 1.5)}), InputError);
  EXPECT_THROW(Track("t", {FrameRecord{0, false, {}, 0.3}}), InputError);
}

TEST(Track, DensityAndLookup)
{
  auto t = Track::all_absent("t", 10, 19);
  EXPECT_EQ(t.size(), 10u);
  EXPECT_FALSE(t.at(15).present);
  t.set(FrameRecord::with_box(15, {1, 2, 3, 4}, 0.5));
  EXPECT_TRUE(t.at(15).present);
  EXPECT_THROW(t.at(20), InputError);
  EXPECT_THROW(t.set(FrameRecord::absent(9)), InputError);
}

TEST(FrameRecord, AbsentRecordsIgnoreBox)
{
  FrameRecord a = FrameRecord::absent(3);
  FrameRecord b = a;
  b.box = {1, 1, 1, 1};
  EXPECT_EQ(a, b);
}
