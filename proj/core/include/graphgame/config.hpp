#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "graphgame/sim.hpp"

namespace graphgame {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Flat `key = value` configuration with dotted section names and `#`
/// comments. Values are strings; typed getters parse on demand. Agent
/// numbering in files is 1-based and node 0 denotes the leader, matching
/// the trace column naming.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  /// Keys that were never read by any getter; used to reject typos.
  std::vector<std::string> unread_keys() const;

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> read_;
};

/// Build a run configuration: scenario preset (key `scenario`, default
/// example_1d when topology keys are absent) plus overrides. Topology,
/// formation, and drift parameters may be given explicitly using the
/// scalar plant family. Throws ConfigError on unknown keys or malformed
/// values.
SimConfig config_from_kv(const KeyValueConfig& kv);
SimConfig config_from_file(const std::string& path);

}  // namespace graphgame
