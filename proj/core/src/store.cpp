#include "driftline/store.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "driftline/errors.hpp"
#include "driftline/textio.hpp"

namespace fs = std::filesystem;

namespace driftline {
namespace {

constexpr const char* kEventsFile = "events.log";
constexpr const char* kSnapshotFile = "state.snapshot";
constexpr const char* kLockFile = "lock";
constexpr const char* kLogVersion = "driftline-events v1";

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw StorageError("cannot read " + p.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void append_line(const fs::path& p, const std::string& line) {
  std::ofstream f(p, std::ios::app | std::ios::binary);
  if (!f) throw StorageError("cannot open " + p.string() + " for append");
  f << line << '\n';
  f.flush();
  if (!f) throw StorageError("write failed on " + p.string());
}

}  // namespace

std::string StateStore::event_to_line(const LifecycleEvent& event) {
  std::ostringstream out;
  out << event.event_id << '\t' << event.day << '\t' << to_string(event.kind);
  for (const auto& [k, v] : event.fields) out << '\t' << k << '=' << escape_field(v);
  return out.str();
}

LifecycleEvent StateStore::event_from_line(const std::string& line) {
  const std::vector<std::string> f = split_tabs(line);
  if (f.size() < 3) throw EventFormatError("short event line: " + line);
  LifecycleEvent e;
  {
    std::uint64_t id = 0;
    auto r = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
    if (r.ec != std::errc()) throw EventFormatError("bad event id: " + f[0]);
    e.event_id = id;
  }
  {
    int day = 0;
    auto r = std::from_chars(f[1].data(), f[1].data() + f[1].size(), day);
    if (r.ec != std::errc()) throw EventFormatError("bad event day: " + f[1]);
    e.day = day;
  }
  const auto kind = event_kind_from_string(f[2]);
  if (!kind.has_value()) throw EventFormatError("bad event kind: " + f[2]);
  e.kind = *kind;
  for (std::size_t i = 3; i < f.size(); ++i) {
    const std::size_t eq = f[i].find('=');
    if (eq == std::string::npos) throw EventFormatError("bad event field: " + f[i]);
    e.fields.emplace_back(f[i].substr(0, eq), unescape_field(f[i].substr(eq + 1)));
  }
  return e;
}

bool StateStore::exists(const std::string& dir) {
  return fs::exists(fs::path(dir) / kEventsFile);
}

StateStore StateStore::create(const std::string& dir, const Config& config,
                              const std::string& provider_name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StorageError("cannot create state directory " + dir + ": " + ec.message());
  if (exists(dir)) throw StorageError("state already exists in " + dir);

  StateStore store;
  store.dir_ = dir;
  store.config_ = config;
  store.provider_name_ = provider_name;

  std::ofstream f(fs::path(dir) / kEventsFile, std::ios::binary);
  if (!f) throw StorageError("cannot create event log in " + dir);
  f << kLogVersion << '\n';
  f << "config\t" << escape_field(config_to_text(config)) << '\n';
  f << "provider\t" << escape_field(provider_name) << '\n';
  f.flush();
  if (!f) throw StorageError("cannot initialize event log in " + dir);
  return store;
}

StateStore StateStore::open(const std::string& dir) {
  if (!exists(dir)) throw StorageError("no state in " + dir);
  StateStore store;
  store.dir_ = dir;

  std::ifstream f(fs::path(dir) / kEventsFile, std::ios::binary);
  std::string line;
  if (!std::getline(f, line) || line != kLogVersion)
    throw VersionMismatchError("event log version line missing or unsupported");
  bool have_config = false, have_provider = false;
  while ((!have_config || !have_provider) && std::getline(f, line)) {
    const auto fields = split_tabs(line);
    if (fields.size() >= 2 && fields[0] == "config") {
      store.config_ = parse_config_text(unescape_field(fields[1]));
      have_config = true;
    } else if (fields.size() >= 2 && fields[0] == "provider") {
      store.provider_name_ = unescape_field(fields[1]);
      have_provider = true;
    } else {
      break;
    }
  }
  if (!have_config || !have_provider)
    throw VersionMismatchError("event log header incomplete in " + dir);

  // Track the last id so appends can stay contiguous after reopening.
  const auto events = store.read_events();
  if (!events.empty()) store.last_appended_id_ = events.back().event_id;
  return store;
}

void StateStore::append(const LifecycleEvent& event) {
  if (last_appended_id_ != 0 && event.event_id != last_appended_id_ + 1)
    throw IdGapError("append expected id " + std::to_string(last_appended_id_ + 1) + ", got " +
                     std::to_string(event.event_id));
  append_line(fs::path(dir_) / kEventsFile, event_to_line(event));
  last_appended_id_ = event.event_id;
}

std::vector<LifecycleEvent> StateStore::read_events() const {
  std::ifstream f(fs::path(dir_) / kEventsFile, std::ios::binary);
  if (!f) throw StorageError("cannot read event log in " + dir_);
  std::vector<LifecycleEvent> events;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto fields = split_tabs(line);
    if (!fields.empty() && (fields[0] == "config" || fields[0] == "provider")) continue;
    events.push_back(event_from_line(line));
  }
  return events;
}

bool StateStore::has_snapshot() const { return fs::exists(fs::path(dir_) / kSnapshotFile); }

void StateStore::write_snapshot(const EngineState& state) {
  const fs::path final_path = fs::path(dir_) / kSnapshotFile;
  const fs::path tmp_path = fs::path(dir_) / (std::string(kSnapshotFile) + ".tmp");
  {
    std::ofstream f(tmp_path, std::ios::binary | std::ios::trunc);
    if (!f) throw StorageError("cannot write snapshot in " + dir_);
    f << serialize_state(state);
    f.flush();
    if (!f) throw StorageError("snapshot write failed in " + dir_);
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) throw StorageError("snapshot rename failed: " + ec.message());
}

EngineState StateStore::load_head(const EmbeddingProvider& provider) const {
  EngineState state;
  if (has_snapshot()) {
    state = deserialize_state(read_file(fs::path(dir_) / kSnapshotFile), provider);
  } else {
    state.config = config_;
    state.provider_name = provider_name_;
  }
  for (const auto& e : read_events())
    if (e.event_id > state.last_event_id) apply_event(state, e, provider);
  return state;
}

EngineState StateStore::replay_from_genesis(const EmbeddingProvider& provider) const {
  EngineState state;
  state.config = config_;
  state.provider_name = provider_name_;
  for (const auto& e : read_events()) apply_event(state, e, provider);
  return state;
}

std::string StateStore::verify_replay(const EmbeddingProvider& provider) const {
  const EngineState head = load_head(provider);
  const EngineState replayed = replay_from_genesis(provider);
  return first_divergence(serialize_state(replayed), serialize_state(head));
}

DirLock::DirLock(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  path_ = (fs::path(dir) / kLockFile).string();
  FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr)
    throw StorageError("state directory is locked by another command: " + path_);
  std::fclose(f);
}

DirLock::~DirLock() { std::remove(path_.c_str()); }

void save_snapshot(const EngineState& state, const std::string& path) {
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw StorageError("cannot write snapshot " + path);
    f << serialize_state(state);
    f.flush();
    if (!f) throw StorageError("snapshot write failed: " + path);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StorageError("snapshot rename failed: " + ec.message());
}

EngineState restore_snapshot(const std::string& path, const EmbeddingProvider& provider) {
  if (!fs::exists(path)) throw MissingFileError(path);
  return deserialize_state(read_file(path), provider);
}

}  // namespace driftline
