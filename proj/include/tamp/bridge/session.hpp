#pragma once

#include <mutex>
#include <optional>
#include <string>

#include "tamp/bridge/protocol.hpp"
#include "tamp/envs/stick_button.hpp"

namespace tamp::bridge {

enum class Status { kActive, kDone, kAbandoned };
std::string to_string(Status s);

/// Carries a protocol error code.
class SessionError : public Error {
 public:
  SessionError(std::string code, const std::string& message)
      : Error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// One human (or scripted) demonstration in progress. The session is the
/// only thing that steps the environment, so the recording replays exactly.
class DemoSession {
 public:
  DemoSession(std::string id, std::uint64_t seed);

  const std::string& id() const { return id_; }
  Status status() const { return status_; }
  const Demonstration& recording() const { return demo_; }
  const envs::StickButtonEnv& env() const { return env_; }

  Snapshot snapshot() const;

  /// move: translation toward (x, y) with its length clipped to the
  /// environment's max step. press_key: a full-force action, which grasps,
  /// presses or does nothing depending on geometry.
  Action translate(const Input& in) const;

  Snapshot apply(const Input& in);
  Snapshot apply(const ActionMsg& a);

  /// "save" returns the recording (status must be done) and "discard"
  /// abandons the session.
  std::optional<Demonstration> finish(const std::string& outcome);
  void abandon() { status_ = Status::kAbandoned; }

 private:
  Snapshot step(const Action& a);

  std::string id_;
  const envs::StickButtonEnv& env_;
  Demonstration demo_;
  Status status_ = Status::kActive;
};

/// Appends demonstrations to a demos file; writes the header when the file
/// is new or empty. Safe to share between sessions.
class DemoWriter {
 public:
  explicit DemoWriter(std::string path) : path_(std::move(path)) {}
  void append(const Demonstration& demo);
  std::size_t appended() const;

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::size_t appended_ = 0;
};

}  // namespace tamp::bridge
