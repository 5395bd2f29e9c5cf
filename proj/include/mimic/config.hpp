#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mimic {

// Key-value text config: one `key = value` per line, `#` comments.
// All run configs (robot model, sim, env, ppo, experiment specs) use this
// format, and every run writes back a resolved snapshot for reproducibility.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  // Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, int64_t value);
  void set_doubles(const std::string& key, const std::vector<double>& values);

  // Canonical text form: sorted keys, one per line. Stable across runs, so
  // it doubles as the hashing input for config fingerprints.
  std::string to_string() const;
  void write_file(const std::string& path) const;

  // FNV-1a over the canonical text.
  uint64_t hash() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string format_double(double v);        // round-trippable %.17g
std::string format_double_short(double v);  // %.6g, for messages and plots

}  // namespace mimic
