#include "driftline/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "driftline/errors.hpp"

namespace driftline {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_i64(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") { out = true; return true; }
  if (s == "false" || s == "0") { out = false; return true; }
  return false;
}

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> apply;
};

void want_fraction(const std::string& key, const std::string& raw, double v, double lo, double hi) {
  if (v < lo || v > hi) throw RangeError(key, raw);
}

}  // namespace

Config parse_config_text(const std::string& text) {
  Config cfg;

  const std::map<std::string, Field> fields = {
      {"dedup_threshold", {[](Config& c, const std::string& k, const std::string& raw) {
         double v; if (!parse_double(raw, v)) throw RangeError(k, raw);
         want_fraction(k, raw, v, 0.0, 1.0); c.dedup_threshold = v; }}},
      {"shortlist_size", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 1 || v > 1000) throw RangeError(k, raw);
         c.shortlist_size = static_cast<int>(v); }}},
      {"merge_threshold", {[](Config& c, const std::string& k, const std::string& raw) {
         double v; if (!parse_double(raw, v)) throw RangeError(k, raw);
         want_fraction(k, raw, v, 0.0, 1.0); c.merge_threshold = v; }}},
      {"new_cluster_min", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 2) throw RangeError(k, raw);
         c.new_cluster_min = static_cast<int>(v); }}},
      {"dbi_trigger", {[](Config& c, const std::string& k, const std::string& raw) {
         double v; if (!parse_double(raw, v) || v < 0.0) throw RangeError(k, raw);
         c.dbi_trigger = v; }}},
      {"silhouette_trigger", {[](Config& c, const std::string& k, const std::string& raw) {
         double v; if (!parse_double(raw, v)) throw RangeError(k, raw);
         want_fraction(k, raw, v, -1.0, 1.0); c.silhouette_trigger = v; }}},
      {"z_trigger", {[](Config& c, const std::string& k, const std::string& raw) {
         double v; if (!parse_double(raw, v) || v < 0.0) throw RangeError(k, raw);
         c.z_trigger = v; }}},
      {"prune_inactivity_days", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 0) throw RangeError(k, raw);
         c.prune_inactivity_days = static_cast<int>(v); }}},
      {"prune_min_count", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 0) throw RangeError(k, raw);
         c.prune_min_count = static_cast<int>(v); }}},
      {"min_history_for_z", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 1) throw RangeError(k, raw);
         c.min_history_for_z = static_cast<int>(v); }}},
      {"embedding_dim", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 2 || v > 65536) throw RangeError(k, raw);
         c.embedding_dim = static_cast<int>(v); }}},
      {"reduced_dim", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 1 || v > 65536) throw RangeError(k, raw);
         c.reduced_dim = static_cast<int>(v); }}},
      {"min_cluster_size", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 2) throw RangeError(k, raw);
         c.min_cluster_size = static_cast<int>(v); }}},
      {"min_samples", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 1) throw RangeError(k, raw);
         c.min_samples = static_cast<int>(v); }}},
      {"seed", {[](Config& c, const std::string& k, const std::string& raw) {
         std::uint64_t v; if (!parse_u64(raw, v)) throw RangeError(k, raw);
         c.seed = v; }}},
      {"assign_threshold", {[](Config& c, const std::string& k, const std::string& raw) {
         double v; if (!parse_double(raw, v)) throw RangeError(k, raw);
         want_fraction(k, raw, v, -1.0, 1.0); c.assign_threshold = v; }}},
      {"enable_split", {[](Config& c, const std::string& k, const std::string& raw) {
         bool v; if (!parse_bool(raw, v)) throw RangeError(k, raw); c.enable_split = v; }}},
      {"enable_merge", {[](Config& c, const std::string& k, const std::string& raw) {
         bool v; if (!parse_bool(raw, v)) throw RangeError(k, raw); c.enable_merge = v; }}},
      {"enable_prune", {[](Config& c, const std::string& k, const std::string& raw) {
         bool v; if (!parse_bool(raw, v)) throw RangeError(k, raw); c.enable_prune = v; }}},
      {"oracle_timeout_ms", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 1) throw RangeError(k, raw);
         c.oracle_timeout_ms = static_cast<int>(v); }}},
      {"oracle_max_retries", {[](Config& c, const std::string& k, const std::string& raw) {
         long long v; if (!parse_i64(raw, v) || v < 0) throw RangeError(k, raw);
         c.oracle_max_retries = static_cast<int>(v); }}},
  };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("unknown key: " + key, line_no);
    it->second.apply(cfg, key, value);
  }

  if (cfg.reduced_dim >= cfg.embedding_dim)
    throw RangeError("reduced_dim", std::to_string(cfg.reduced_dim) + " (must be < embedding_dim)");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingFileError(path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const Config& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "dedup_threshold = " << cfg.dedup_threshold << '\n'
      << "shortlist_size = " << cfg.shortlist_size << '\n'
      << "merge_threshold = " << cfg.merge_threshold << '\n'
      << "new_cluster_min = " << cfg.new_cluster_min << '\n'
      << "dbi_trigger = " << cfg.dbi_trigger << '\n'
      << "silhouette_trigger = " << cfg.silhouette_trigger << '\n'
      << "z_trigger = " << cfg.z_trigger << '\n'
      << "prune_inactivity_days = " << cfg.prune_inactivity_days << '\n'
      << "prune_min_count = " << cfg.prune_min_count << '\n'
      << "min_history_for_z = " << cfg.min_history_for_z << '\n'
      << "embedding_dim = " << cfg.embedding_dim << '\n'
      << "reduced_dim = " << cfg.reduced_dim << '\n'
      << "min_cluster_size = " << cfg.min_cluster_size << '\n'
      << "min_samples = " << cfg.min_samples << '\n'
      << "seed = " << cfg.seed << '\n'
      << "assign_threshold = " << cfg.assign_threshold << '\n'
      << "enable_split = " << (cfg.enable_split ? "true" : "false") << '\n'
      << "enable_merge = " << (cfg.enable_merge ? "true" : "false") << '\n'
      << "enable_prune = " << (cfg.enable_prune ? "true" : "false") << '\n'
      << "oracle_timeout_ms = " << cfg.oracle_timeout_ms << '\n'
      << "oracle_max_retries = " << cfg.oracle_max_retries << '\n';
  return out.str();
}

}  // namespace driftline
