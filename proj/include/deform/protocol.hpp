#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deform/script.hpp"
#include "deform/session.hpp"

// Session protocol spoken by `deform serve`: each message is a 4-byte
// little-endian payload length followed by a UTF-8 JSON object with a
// "type" field (HELLO, LOAD, EDIT, SNAPSHOT_REQUEST, GEOMETRY, ERROR).
namespace deform::protocol {

using nlohmann::json;

inline constexpr int kVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

std::string encode_frame(const json& message);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  /// Next complete message, if any. Throws std::runtime_error on an
  /// oversized frame or malformed JSON.
  std::optional<json> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

std::string base64_encode(std::string_view bytes);
/// Throws std::invalid_argument on malformed input.
std::string base64_decode(std::string_view text);

/// n x 3 positions as base64 of little-endian float32, row-major.
std::string encode_positions(const Points& p);
Points decode_positions(std::string_view text, std::size_t rows);

json encode_edit(const EditDelta& delta);
/// Throws std::invalid_argument on malformed deltas.
EditDelta decode_edit(const json& delta);

json error_message(const std::string& code, const std::string& text);

/// GEOMETRY message. With `topology`, triangles and joint parents are added.
json geometry_message(std::uint64_t frame, const Snapshot& snap, const SteadyStateAudit& audit,
                      const Rig* topology);

struct EndpointOptions {
  SessionConfig config;
  /// Where relative LOAD rig paths resolve; fixture names always work.
  std::filesystem::path data_dir;
  /// When set, the accepted LOAD and EDIT stream is kept as a replayable
  /// edit script at this path (rewritten after every accepted message).
  std::filesystem::path record_path;
};

/// Transport-independent message handler holding one live session.
class Endpoint {
 public:
  explicit Endpoint(EndpointOptions options);
  ~Endpoint();

  /// Replies to one request (zero or more messages).
  std::vector<json> handle(const json& request);

  const SyncSession* session() const { return session_.get(); }
  const EditScript& recording() const { return recording_; }
  std::uint64_t last_frame() const { return frame_; }

 private:
  json load(const json& request);
  json edit(const json& request);
  json geometry(bool topology);
  void save_recording() const;

  EndpointOptions options_;
  std::unique_ptr<SyncSession> session_;
  EditScript recording_;
  std::uint64_t frame_ = 0;
};

}  // namespace deform::protocol
