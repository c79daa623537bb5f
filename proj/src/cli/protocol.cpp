#include "deform/protocol.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "deform/errors.hpp"
#include "deform/fixtures.hpp"
#include "deform/io.hpp"

namespace deform::protocol {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

json triangles_json(const std::vector<Triangle>& tris) {
  json out = json::array();
  for (const auto& t : tris) out.push_back({t[0], t[1], t[2]});
  return out;
}

bool is_fixture_name(const std::string& name) {
  return name == "bar" || name == "arm" || name == "large" || name == "biped";
}

}  // namespace

std::string encode_frame(const json& message) {
  const std::string payload = message.dump();
  if (payload.size() > kMaxFrameBytes) throw std::length_error("message exceeds frame limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xffu));
  out += payload;
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<json> FrameDecoder::next() {
  if (buffered() < 4) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) {
    n |= static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[offset_ + i])) << (8 * i);
  }
  if (n > kMaxFrameBytes) throw std::runtime_error("frame of " + std::to_string(n) + " bytes exceeds limit");
  if (buffered() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  const std::string_view payload(buffer_.data() + offset_ + 4, n);
  offset_ += 4 + n;
  json msg = json::parse(payload);  // throws json::parse_error (a std::exception)
  if (offset_ > (1u << 20)) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  return msg;
}

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                            static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int d = 0;
      if (c == '=' && last && k >= 2) {
        ++pad;
      } else if (pad > 0 || (d = base64_value(c)) < 0) {
        throw std::invalid_argument("invalid base64 character");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out += static_cast<char>((v >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((v >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(v & 0xff);
  }
  return out;
}

std::string encode_positions(const Points& p) {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(p.size()) * 4);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const float f = static_cast<float>(p(i, k));
      std::uint32_t u = 0;
      std::memcpy(&u, &f, 4);
      for (int b = 0; b < 4; ++b) bytes += static_cast<char>((u >> (8 * b)) & 0xffu);
    }
  }
  return base64_encode(bytes);
}

Points decode_positions(std::string_view text, std::size_t rows) {
  const std::string bytes = base64_decode(text);
  if (bytes.size() != rows * 12) throw std::invalid_argument("position array does not match count");
  Points p(static_cast<Eigen::Index>(rows), 3);
  for (std::size_t i = 0; i < rows * 3; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    float f = 0.0f;
    std::memcpy(&f, &u, 4);
    p(static_cast<Eigen::Index>(i / 3), static_cast<Eigen::Index>(i % 3)) = f;
  }
  return p;
}

json encode_edit(const EditDelta& delta) {
  json out{{"kind", to_string(delta.kind)}};
  if (delta.kind == EditDelta::Kind::SkelRotate) {
    const Quat& q = delta.rotation;
    out["joint"] = delta.joint;
    out["rotation"] = {q.w(), q.x(), q.y(), q.z()};
  } else {
    json offsets = json::array();
    for (const auto& [k, d] : delta.offsets) offsets.push_back({k, d.x(), d.y(), d.z()});
    out["offsets"] = std::move(offsets);
  }
  return out;
}

EditDelta decode_edit(const json& delta) {
  if (!delta.is_object() || !delta.contains("kind") || !delta["kind"].is_string()) {
    throw std::invalid_argument("edit delta needs a string 'kind'");
  }
  const std::string kind = delta["kind"];
  try {
    if (kind == "SKEL_ROTATE") {
      const auto& r = delta.at("rotation");
      if (!r.is_array() || r.size() != 4) throw std::invalid_argument("rotation must be [w, x, y, z]");
      return EditDelta::rotate(delta.at("joint").get<int>(),
                               Quat(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                    r[3].get<double>()));
    }
    if (kind == "CAGE_REST" || kind == "CAGE_CURR") {
      VertexOffsets offsets;
      for (const auto& o : delta.at("offsets")) {
        if (!o.is_array() || o.size() != 4) throw std::invalid_argument("offset must be [k, dx, dy, dz]");
        offsets.emplace_back(o[0].get<int>(),
                             Vec3(o[1].get<double>(), o[2].get<double>(), o[3].get<double>()));
      }
      return kind == "CAGE_REST" ? EditDelta::cage_rest(std::move(offsets))
                                 : EditDelta::cage_curr(std::move(offsets));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed edit delta: ") + e.what());
  }
  throw std::invalid_argument("unknown edit kind '" + kind + "'");
}

json error_message(const std::string& code, const std::string& text) {
  return {{"type", "ERROR"}, {"code", code}, {"text", text}};
}

json geometry_message(std::uint64_t frame, const Snapshot& snap, const SteadyStateAudit& audit,
                      const Rig* topology) {
  json out{{"type", "GEOMETRY"},
           {"frame", frame},
           {"counts",
            {{"skin", snap.skin_curr.rows()},
             {"cage", snap.cage_curr.rows()},
             {"joints", snap.joints_curr.rows()}}},
           {"skin", encode_positions(snap.skin_curr)},
           {"skin_rest", encode_positions(snap.skin_rest)},
           {"cage_rest", encode_positions(snap.cage_rest)},
           {"cage_curr", encode_positions(snap.cage_curr)},
           {"joints_rest", encode_positions(snap.joints_rest)},
           {"joints_curr", encode_positions(snap.joints_curr)},
           {"audit", audit.worst()}};
  if (topology) {
    json parents = json::array();
    json names = json::array();
    for (const auto& j : topology->skeleton.joints) {
      parents.push_back(j.parent);
      names.push_back(j.name);
    }
    out["topology"] = {{"skin_triangles", triangles_json(topology->skin.triangles)},
                       {"cage_triangles", triangles_json(topology->cage.triangles)},
                       {"joint_parents", std::move(parents)},
                       {"joint_names", std::move(names)}};
  }
  return out;
}

Endpoint::Endpoint(EndpointOptions options) : options_(std::move(options)) {}
Endpoint::~Endpoint() = default;

std::vector<json> Endpoint::handle(const json& request) {
  if (!request.is_object() || !request.contains("type") || !request["type"].is_string()) {
    return {error_message("bad_message", "message must be an object with a string 'type'")};
  }
  const std::string type = request["type"];
  if (type == "HELLO") {
    const auto v = request.value("version", -1);
    if (v != kVersion) {
      return {error_message("version_mismatch",
                            "server speaks protocol version " + std::to_string(kVersion))};
    }
    return {json{{"type", "HELLO"}, {"version", kVersion}, {"server", "deform"}}};
  }
  if (type == "LOAD") return {load(request)};
  if (type == "EDIT") return {edit(request)};
  if (type == "SNAPSHOT_REQUEST") {
    if (!session_) return {error_message("no_session", "LOAD a rig first")};
    return {geometry(request.value("topology", false))};
  }
  return {error_message("unknown_type", "unknown message type '" + type + "'")};
}

json Endpoint::load(const json& request) {
  std::string ref;
  SessionConfig cfg = options_.config;
  try {
    ref = request.at("rig").get<std::string>();
    if (request.contains("config")) {
      const auto& c = request["config"];
      if (c.contains("skinning")) cfg.method = parse_skinning_method(c["skinning"].get<std::string>());
      if (c.contains("ghost")) cfg.ghost = c["ghost"].get<bool>();
      if (c.contains("refit_skeleton")) cfg.refit_skeleton = c["refit_skeleton"].get<bool>();
      if (c.contains("edit_cap")) cfg.edit_cap = c["edit_cap"].get<double>();
      if (c.contains("audit_tolerance")) cfg.audit_tolerance = c["audit_tolerance"].get<double>();
    }
  } catch (const std::exception& e) {
    return error_message("bad_message", std::string("LOAD: ") + e.what());
  }

  std::string script_ref;
  try {
    Rig rig;
    if (ref.rfind("fixture:", 0) == 0 || is_fixture_name(ref)) {
      script_ref = ref.rfind("fixture:", 0) == 0 ? ref : "fixture:" + ref;
      rig = load_script_rig(script_ref, {});
    } else {
      std::filesystem::path p(ref);
      if (p.is_relative()) p = options_.data_dir / p;
      p = std::filesystem::absolute(p);
      script_ref = p.string();
      rig = load_rig(p);
    }
    session_ = std::make_unique<SyncSession>(std::move(rig), cfg);
  } catch (const std::exception& e) {
    return error_message("load_failed", e.what());
  }
  recording_ = EditScript{};
  recording_.rig = script_ref;
  recording_.config = cfg;
  save_recording();
  return geometry(true);
}

json Endpoint::edit(const json& request) {
  if (!session_) return error_message("no_session", "LOAD a rig first");
  EditDelta delta;
  try {
    delta = decode_edit(request.at("delta"));
  } catch (const std::exception& e) {
    return error_message("bad_message", e.what());
  }
  try {
    session_->edit(delta);
  } catch (const std::exception& e) {
    return error_message("edit_rejected", e.what());
  }
  ScriptStep step;
  switch (delta.kind) {
    case EditDelta::Kind::SkelRotate:
      step.kind = ScriptStep::Kind::Rotate;
      step.joint = std::to_string(delta.joint);
      step.rotation = delta.rotation;
      break;
    case EditDelta::Kind::CageRest: step.kind = ScriptStep::Kind::CageRest; break;
    case EditDelta::Kind::CageCurr: step.kind = ScriptStep::Kind::CageCurr; break;
  }
  step.offsets = delta.offsets;
  recording_.steps.push_back(std::move(step));
  save_recording();
  return geometry(false);
}

json Endpoint::geometry(bool topology) {
  const auto snap = session_->snapshot();
  return geometry_message(++frame_, *snap, session_->audit(), topology ? &session_->rig() : nullptr);
}

void Endpoint::save_recording() const {
  if (options_.record_path.empty()) return;
  auto out = io::open_out(options_.record_path);
  write_script(out, recording_);
}

}  // namespace deform::protocol
