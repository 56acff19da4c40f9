#pragma once

// Durable home of one engine instance: a directory holding an append-only
// event log (from genesis) and a head snapshot rewritten after each
// committed command. The log is the commit point; replaying it from genesis
// must land exactly on the head state.

#include <memory>
#include <string>
#include <vector>

#include "driftline/state.hpp"
#include "driftline/types.hpp"

namespace driftline {

class EventSink {
 public:
  virtual ~EventSink() = default;
  // Must be durable (or intentionally buffered, as in tests) before returning.
  virtual void append(const LifecycleEvent& event) = 0;
};

class MemorySink final : public EventSink {
 public:
  void append(const LifecycleEvent& event) override { events_.push_back(event); }
  const std::vector<LifecycleEvent>& events() const { return events_; }

 private:
  std::vector<LifecycleEvent> events_;
};

class StateStore final : public EventSink {
 public:
  // Starts a fresh store; throws StorageError if one already exists here.
  static StateStore create(const std::string& dir, const Config& config,
                           const std::string& provider_name);
  static StateStore open(const std::string& dir);
  static bool exists(const std::string& dir);

  const Config& config() const { return config_; }
  const std::string& provider_name() const { return provider_name_; }
  const std::string& dir() const { return dir_; }

  void append(const LifecycleEvent& event) override;
  std::vector<LifecycleEvent> read_events() const;

  void write_snapshot(const EngineState& state);
  bool has_snapshot() const;

  // Head = snapshot plus any log records past it (crash recovery path).
  EngineState load_head(const EmbeddingProvider& provider) const;
  EngineState replay_from_genesis(const EmbeddingProvider& provider) const;
  // Empty when replay reproduces the head exactly, else the first divergence.
  std::string verify_replay(const EmbeddingProvider& provider) const;

  static std::string event_to_line(const LifecycleEvent& event);
  static LifecycleEvent event_from_line(const std::string& line);

 private:
  StateStore() = default;

  std::string dir_;
  Config config_;
  std::string provider_name_;
  std::uint64_t last_appended_id_ = 0;
};

// One command per state directory at a time; the lock file vanishes with
// the guard.
class DirLock {
 public:
  explicit DirLock(const std::string& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
};

// Spec-level snapshot round trip, independent of a store directory.
void save_snapshot(const EngineState& state, const std::string& path);
EngineState restore_snapshot(const std::string& path, const EmbeddingProvider& provider);

}  // namespace driftline
