///////////////////////////////////////////////////////////////////////////////
// protocol.hpp: line-delimited JSON wire format for external tracker backends
//
// client -> backend, one line per session:
//   {"type":"track","clip":[s,e],"prompt_frame":m,"prompt_box":[x,y,w,h],"direction":"forward"}
// backend -> client, one line per frame in direction order, then a terminator:
//   {"frame":f,"present":true,"box":[x,y,w,h],"confidence":c}
//   {"frame":f,"present":false}
//   {"type":"done"}
// a backend may abort a session with {"type":"error","message":"..."}.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "skitrack/core.hpp"

namespace skitrack
{

enum class Direction
{
  forward,
  backward
};

inline std::string_view to_string(Direction d)
{
  return d == Direction::forward ? "forward" : "backward";
}

/// One tracking session: run from (prompt_frame, prompt_box) toward one end
/// of the clip [clip_start, clip_end].
struct SessionRequest
{
  FrameIndex clip_start = 0;
  FrameIndex clip_end = 0;
  FrameIndex prompt_frame = 0;
  BoundingBox prompt_box;
  Direction direction = Direction::forward;

  /// Last frame the session yields.
  FrameIndex final_frame() const
  {
    return direction == Direction::forward ? clip_end : clip_start;
  }
  FrameIndex step() const { return direction == Direction::forward ? 1 : -1; }
  std::size_t expected_count() const
  {
    return static_cast<std::size_t>(direction == Direction::forward ? clip_end - prompt_frame + 1
                                                                   : prompt_frame - clip_start + 1);
  }

  friend bool operator==(const SessionRequest&, const SessionRequest&) = default;
};

inline void validate(const SessionRequest& r)
{
  if (r.clip_start > r.clip_end || r.prompt_frame < r.clip_start || r.prompt_frame > r.clip_end)
  {
    throw InputError("session request: prompt frame " + std::to_string(r.prompt_frame) +
                     " not inside clip [" + std::to_string(r.clip_start) + "," +
                     std::to_string(r.clip_end) + "]");
  }
  require_valid(r.prompt_box, "session prompt box");
}

namespace protocol
{

using nlohmann::json;

inline json box_to_json(const BoundingBox& b)
{
  return json::array({b.x, b.y, b.w, b.h});
}

inline BoundingBox box_from_json(const json& j)
{
  if (!j.is_array() || j.size() != 4)
  {
    throw InputError("box must be a 4-element array");
  }
  BoundingBox b;
  b.x = j.at(0).get<double>();
  b.y = j.at(1).get<double>();
  b.w = j.at(2).get<double>();
  b.h = j.at(3).get<double>();
  return b;
}

inline std::string encode_request(const SessionRequest& r)
{
  json j;
  j["type"] = "track";
  j["clip"] = json::array({r.clip_start, r.clip_end});
  j["prompt_frame"] = r.prompt_frame;
  j["prompt_box"] = box_to_json(r.prompt_box);
  j["direction"] = to_string(r.direction);
  return j.dump();
}

inline SessionRequest request_from_json(const json& j)
{
  if (j.value("type", "") != "track")
  {
    throw InputError("request: expected type 'track'");
  }
  SessionRequest r;
  const auto& clip = j.at("clip");
  if (!clip.is_array() || clip.size() != 2)
  {
    throw InputError("request: 'clip' must be [start, end]");
  }
  r.clip_start = clip.at(0).get<FrameIndex>();
  r.clip_end = clip.at(1).get<FrameIndex>();
  r.prompt_frame = j.at("prompt_frame").get<FrameIndex>();
  r.prompt_box = box_from_json(j.at("prompt_box"));
  const auto dir = j.at("direction").get<std::string>();
  if (dir == "forward")
  {
    r.direction = Direction::forward;
  }
  else if (dir == "backward")
  {
    r.direction = Direction::backward;
  }
  else
  {
    throw InputError("request: unknown direction '" + dir + "'");
  }
  return r;
}

inline SessionRequest decode_request(const std::string& line)
{
  try
  {
    return request_from_json(json::parse(line));
  }
  catch (const json::exception& e)
  {
    throw InputError(std::string("request: ") + e.what());
  }
}

inline std::string encode_record(const FrameRecord& r)
{
  json j;
  j["frame"] = r.frame;
  j["present"] = r.present;
  if (r.present)
  {
    j["box"] = box_to_json(r.box);
    j["confidence"] = r.confidence;
  }
  return j.dump();
}

inline std::string encode_done(const json& extra = json::object())
{
  json j = extra.is_object() ? extra : json::object();
  j["type"] = "done";
  return j.dump();
}

inline std::string encode_error(const std::string& message)
{
  return json{{"type", "error"}, {"message", message}}.dump();
}

struct Done
{
  json payload;
};
struct BackendFailure
{
  std::string message;
};
using Response = std::variant<FrameRecord, Done, BackendFailure>;

/// Decodes one backend line. Record values are not range-checked here.
inline Response decode_response(const std::string& line)
{
  json j;
  try
  {
    j = json::parse(line);
  }
  catch (const json::exception& e)
  {
    throw InputError(std::string("malformed response line: ") + e.what());
  }
  if (!j.is_object())
  {
    throw InputError("response line is not a JSON object");
  }
  try
  {
    if (j.contains("type"))
    {
      const auto type = j.at("type").get<std::string>();
      if (type == "done")
      {
        return Done{j};
      }
      if (type == "error")
      {
        return BackendFailure{j.value("message", std::string("unspecified backend error"))};
      }
      throw InputError("unknown response type '" + type + "'");
    }
    FrameRecord r;
    r.frame = j.at("frame").get<FrameIndex>();
    r.present = j.at("present").get<bool>();
    if (r.present)
    {
      r.box = box_from_json(j.at("box"));
      r.confidence = j.at("confidence").get<double>();
    }
    return r;
  }
  catch (const json::exception& e)
  {
    throw InputError(std::string("response line: ") + e.what());
  }
}

}  // namespace protocol
}  // namespace skitrack
