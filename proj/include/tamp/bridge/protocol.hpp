#pragma once

// Wire messages for the demonstration service. Every websocket text frame is
// one JSON object with a "type" field; docs/protocol.md lists the fields.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tamp/core/error.hpp"

namespace tamp::bridge {

struct Box {
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool operator==(const Box&) const = default;
};

struct ObjectView {
  std::string name;
  std::string type;
  std::vector<std::pair<std::string, double>> features;  // type feature order
  bool operator==(const ObjectView&) const = default;
};

struct Start {
  std::optional<std::uint64_t> seed;  // server picks one when absent
  bool operator==(const Start&) const = default;
};

struct Snapshot {
  std::string session;
  std::vector<ObjectView> objects;
  std::vector<std::string> atoms;  // abstract(current state), sorted
  std::vector<std::string> goal;
  Box reachable_zone;
  Box arena;
  std::map<std::string, double> geometry;  // sizes for drawing
  std::string status;                      // active | done | abandoned
  std::size_t steps = 0;
  bool operator==(const Snapshot&) const = default;
};

struct Input {
  enum class Kind { kMove, kPressKey };
  Kind kind = Kind::kMove;
  std::optional<double> x, y;  // move only
  bool operator==(const Input&) const = default;
};

/// Raw environment action, for automated clients.
struct ActionMsg {
  std::vector<double> vector;
  bool operator==(const ActionMsg&) const = default;
};

/// Client sends "save" or "discard"; the server answers with "saved" or
/// "discarded".
struct Finish {
  std::string outcome;
  bool operator==(const Finish&) const = default;
};

struct ErrorMsg {
  std::string code;  // bad_message | no_session | session_state | internal
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<Start, Snapshot, Input, ActionMsg, Finish, ErrorMsg>;

class ProtocolError : public Error {
 public:
  using Error::Error;
};

std::string serialize(const Message& m);
/// Throws ProtocolError on malformed JSON, unknown types, missing or extra
/// fields.
Message parse(std::string_view text);

}  // namespace tamp::bridge
