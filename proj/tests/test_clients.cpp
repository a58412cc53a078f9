#include <cstdlib>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "skitrack/conformance.hpp"
#include "skitrack/subprocess.hpp"

using namespace skitrack;

namespace
{

BoundingBox probe_box(FrameIndex f)
{
  return {10.0 + static_cast<double>(f), 20.0, 30.0, 60.0};
}

ConformanceProbe probe(FrameIndex s, FrameIndex e)
{
  return {s, e, probe_box};
}

GroundTruth moving_gt(FrameIndex first, FrameIndex last, double y)
{
  std::vector<std::optional<BoundingBox>> boxes;
  for (FrameIndex f = first; f <= last; ++f)
  {
    boxes.push_back(BoundingBox{10.0 + 2.0 * static_cast<double>(f), y, 30, 60});
  }
  return GroundTruth(first, boxes);
}

SubprocessConfig fake(const std::string& mode, bool enforce = true, int timeout_ms = 10000)
{
  return {{FAKE_BACKEND, mode}, std::chrono::milliseconds(timeout_ms), enforce};
}

Violation violation_of(TrackerClient& c, const SessionRequest& req)
{
  try
  {
    run_session(c, req);
  }
  catch (const ClientError& e)
  {
    return e.kind();
  }
  ADD_FAILURE() << "session succeeded unexpectedly";
  return Violation::protocol;
}

const SessionRequest kForward{0, 20, 10, {1, 2, 3, 4}, Direction::forward};

}  // namespace

TEST(SessionRequest, FinalFrameAndCount)
{
  EXPECT_EQ(kForward.final_frame(), 20);
  EXPECT_EQ(kForward.expected_count(), 11u);
  SessionRequest b = kForward;
  b.direction = Direction::backward;
  EXPECT_EQ(b.final_frame(), 0);
  b.prompt_frame = 25;
  EXPECT_THROW(validate(b), InputError);
}

TEST(Protocol, RequestRoundTrip)
{
  const SessionRequest req{100, 249, 174, {1.5, 2.25, 30, 60.125}, Direction::backward};
  const auto line = protocol::encode_request(req);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto back = protocol::decode_request(line);
  EXPECT_EQ(back.clip_start, 100);
  EXPECT_EQ(back.prompt_frame, 174);
  EXPECT_EQ(back.prompt_box, req.prompt_box);
  EXPECT_EQ(back.direction, Direction::backward);
}

TEST(Protocol, ResponsesDecode)
{
  const auto r = protocol::decode_response(protocol::encode_record(FrameRecord::with_box(3, {1, 2, 3, 4}, 0.5)));
  ASSERT_TRUE(std::holds_alternative<FrameRecord>(r));
  EXPECT_EQ(std::get<FrameRecord>(r).box, (BoundingBox{1, 2, 3, 4}));
  const auto a = protocol::decode_response(R"({"frame":4,"present":false})");
  EXPECT_FALSE(std::get<FrameRecord>(a).present);
  EXPECT_TRUE(std::holds_alternative<protocol::Done>(protocol::decode_response(R"({"type":"done"})")));
  EXPECT_EQ(std::get<protocol::BackendFailure>(protocol::decode_response(R"({"type":"error","message":"x"})")).message, "x");
  EXPECT_THROW(protocol::decode_response("nope"), InputError);
  EXPECT_THROW(protocol::decode_response(R"({"frame":1})"), InputError);
}

TEST(Conformance, ReplayTrackerPasses)
{
  std::vector<FrameRecord> recs;
  for (FrameIndex f = 0; f <= 20; ++f)
  {
    recs.push_back(FrameRecord::with_box(f, probe_box(f), 1.0));
  }
  ReplayTracker replay(Track("s", recs));
  const auto rep = run_conformance(replay, probe(0, 20));
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.checks.size(), 4u);
}

TEST(Conformance, OracleTrackerPasses)
{
  OracleConfig cfg;
  cfg.target = moving_gt(0, 30, 100);
  cfg.distractors = {{1, moving_gt(0, 30, 400)}};
  cfg.schedule = {{12, 1}};
  cfg.noise_sigma = 1.5;
  cfg.seed = 5;
  OracleTracker oracle(cfg);
  EXPECT_TRUE(run_conformance(oracle, probe(0, 30)).passed());
}

TEST(Conformance, EchoBackendPasses)
{
  SubprocessTracker t(fake("echo", false));
  const auto rep = run_conformance(t, probe(0, 20));
  for (const auto& c : rep.checks)
  {
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  }
}

TEST(Conformance, BrokenBackendsFailTheNamedCheck)
{
  const std::vector<std::pair<std::string, std::string>> cases = {
    {"drop", "density"}, {"reverse", "direction"}, {"badprompt", "prompt-frame"}, {"badconf", "confidence-range"}};
  for (const auto& [mode, check] : cases)
  {
    SubprocessTracker t(fake(mode, false));
    const auto rep = run_conformance(t, probe(0, 20));
    const auto* c = rep.find(check);
    ASSERT_NE(c, nullptr);
    EXPECT_FALSE(c->passed) << mode;
    EXPECT_FALSE(c->detail.empty());
  }
}

TEST(Conformance, AbortedSessionSkipsRemainingChecks)
{
  SubprocessTracker t(fake("crash", false));
  const auto rep = run_conformance(t, probe(0, 20));
  EXPECT_FALSE(rep.passed());
  ASSERT_NE(rep.find("session"), nullptr);
  EXPECT_TRUE(rep.find("density")->skipped);
}

TEST(Subprocess, EchoSessionRoundTrip)
{
  SubprocessTracker t(fake("loopback"));
  const auto recs = run_session(t, kForward);
  ASSERT_EQ(recs.size(), 11u);
  EXPECT_EQ(recs.front().frame, 10);
  EXPECT_EQ(recs.back().frame, 20);
  const auto& echoed = t.last_done().at("request");
  EXPECT_EQ(echoed.at("prompt_frame").get<FrameIndex>(), 10);
  EXPECT_EQ(echoed.at("direction").get<std::string>(), "forward");
  // The same process serves a second session.
  SessionRequest b = kForward;
  b.direction = Direction::backward;
  EXPECT_EQ(run_session(t, b).back().frame, 0);
}

TEST(Subprocess, EnforcedContractViolations)
{
  {
    SubprocessTracker t(fake("drop"));
    EXPECT_EQ(violation_of(t, kForward), Violation::density);
  }
  {
    SubprocessTracker t(fake("reverse"));
    EXPECT_EQ(violation_of(t, kForward), Violation::direction);
  }
  {
    SubprocessTracker t(fake("badprompt"));
    EXPECT_EQ(violation_of(t, kForward), Violation::prompt_frame);
  }
  {
    SubprocessTracker t(fake("badconf"));
    EXPECT_EQ(violation_of(t, kForward), Violation::confidence_range);
  }
  {
    SubprocessTracker t(fake("garbage"));
    EXPECT_EQ(violation_of(t, kForward), Violation::protocol);
  }
}

TEST(Subprocess, TimeoutKillsHungBackend)
{
  SubprocessTracker t(fake("hang", true, 300));
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(violation_of(t, kForward), Violation::timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
}

TEST(Subprocess, CrashReportsStderr)
{
  SubprocessTracker t(fake("crash"));
  try
  {
    run_session(t, kForward);
    FAIL() << "expected ClientError";
  }
  catch (const ClientError& e)
  {
    EXPECT_EQ(e.kind(), Violation::backend_exit);
    EXPECT_NE(std::string(e.what()).find("simulated crash"), std::string::npos);
  }
}

TEST(Subprocess, MissingExecutable)
{
  SubprocessTracker t({{"/nonexistent/backend"}, std::chrono::milliseconds(2000), true});
  EXPECT_THROW(run_session(t, kForward), ClientError);
}

TEST(Subprocess, EnvironmentOverride)
{
  ::setenv(kBackendEnvVar, "/bin/true --flag", 1);
  const auto cfg = with_env_override({{"original"}, std::chrono::milliseconds(1), true});
  ::unsetenv(kBackendEnvVar);
  EXPECT_EQ(cfg.command, (std::vector<std::string>{"/bin/true", "--flag"}));
  EXPECT_EQ(split_command("  a  b\tc "), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Replay, SavedSessionReplaysIdentically)
{
  OracleConfig cfg;
  cfg.target = moving_gt(0, 20, 100);
  cfg.noise_sigma = 1.0;
  cfg.seed = 3;
  OracleTracker oracle(cfg);
  const SessionRequest req{0, 20, 0, *cfg.target.at(0), Direction::forward};
  const auto live = run_session(oracle, req);
  ReplayTracker replay(Track("s", live));
  EXPECT_EQ(run_session(replay, req), live);
  EXPECT_TRUE(replay.warnings().empty());
}

TEST(Replay, CoverageAndPromptWarning)
{
  std::vector<FrameRecord> recs;
  for (FrameIndex f = 0; f <= 20; ++f)
  {
    recs.push_back(FrameRecord::with_box(f, probe_box(f), 0.8));
  }
  std::vector<std::string> seen;
  ReplayTracker replay(Track("s", recs), [&](const std::string& w) { seen.push_back(w); });
  SessionRequest req{0, 25, 5, probe_box(5), Direction::forward};
  EXPECT_EQ(violation_of(replay, req), Violation::coverage);

  req = {0, 20, 5, {500, 500, 10, 10}, Direction::forward};
  const auto out = run_session(replay, req);
  EXPECT_EQ(out.size(), 16u);
  EXPECT_EQ(out.front().box, (BoundingBox{500, 500, 10, 10}));
  EXPECT_EQ(out.front().confidence, 1.0);
  EXPECT_EQ(out[1], recs[6]);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(replay.warnings().size(), 1u);
}

TEST(Oracle, FollowsTargetAndSwitches)
{
  OracleConfig cfg;
  cfg.target = moving_gt(0, 20, 100);
  cfg.distractors = {{1, moving_gt(0, 20, 400)}};
  cfg.schedule = {{15, 1}};
  OracleTracker oracle(cfg);

  // Original prompt at frame 0: follows the target then switches at 15.
  auto out = run_session(oracle, {0, 20, 0, *cfg.target.at(0), Direction::forward});
  EXPECT_EQ(out[14].box, *cfg.target.at(14));
  EXPECT_EQ(out[14].confidence, 0.9);
  EXPECT_EQ(out[15].box, *cfg.distractors.at(1).at(15));
  EXPECT_EQ(out[20].box, *cfg.distractors.at(1).at(20));

  // A re-prompt on the target clears the schedule.
  out = run_session(oracle, {0, 20, 10, *cfg.target.at(10), Direction::forward});
  EXPECT_EQ(out.back().box, *cfg.target.at(20));

  // A re-prompt on the distractor does not.
  out = run_session(oracle, {0, 20, 10, *cfg.distractors.at(1).at(10), Direction::forward});
  EXPECT_EQ(out.back().box, *cfg.distractors.at(1).at(20));
}

TEST(Oracle, SwitchOutsideClipIsIgnoredAndAbsentGtIsAbsent)
{
  std::vector<std::optional<BoundingBox>> boxes(11, BoundingBox{0, 0, 5, 5});
  boxes[7] = std::nullopt;
  OracleConfig cfg;
  cfg.target = GroundTruth(0, boxes);
  cfg.distractors = {{2, GroundTruth(0, std::vector<std::optional<BoundingBox>>(11, BoundingBox{50, 50, 5, 5}))}};
  cfg.schedule = {{3, 2}};
  OracleTracker oracle(cfg);
  const auto out = run_session(oracle, {5, 10, 5, {0, 0, 5, 5}, Direction::forward});
  EXPECT_FALSE(out[2].present);
  EXPECT_EQ(out[1].box, (BoundingBox{0, 0, 5, 5}));
  EXPECT_THROW(OracleTracker({cfg.target, {}, {{3, 9}}}), InputError);
}

TEST(Oracle, NoiseIsDeterministicPerSeed)
{
  OracleConfig cfg;
  cfg.target = moving_gt(0, 40, 100);
  cfg.noise_sigma = 2.0;
  cfg.seed = 7;
  OracleTracker a(cfg), b(cfg);
  const SessionRequest req{0, 40, 20, *cfg.target.at(20), Direction::backward};
  EXPECT_EQ(run_session(a, req), run_session(b, req));
  cfg.seed = 8;
  OracleTracker c(cfg);
  EXPECT_NE(run_session(a, req), run_session(c, req));
}

TEST(Detector, ResolvesEmbeddingRefs)
{
  auto store = std::make_shared<EmbeddingStore>();
  store->insert(4, "id0", Embedding({1, 0}));
  DetectionsByFrame dets;
  dets[4] = {{{0, 0, 5, 5}, 0.9, "id0"}, {{9, 9, 5, 5}, 0.8, "id9"}};
  ReplayDetector d(dets, store);
  const auto c = d.detect(4);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_TRUE(c[0].embedding);
  EXPECT_FALSE(c[1].embedding);
  EXPECT_TRUE(d.detect(5).empty());
}
