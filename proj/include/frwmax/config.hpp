#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "frwmax/types.hpp"

namespace frwmax {

/// Bad configuration. what() names the offending field(s).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat key = value configuration. Lines starting with '#' and blank lines
/// are ignored; later assignments override earlier ones. Lists use commas
/// (numbers) and semicolons (points).
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  /// Typed getters. Each records the key as used and throws ConfigError
  /// naming the key when the text does not parse.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;
  std::vector<Vec3> get_points(const std::string& key, const std::vector<Vec3>& fallback) const;

  /// Keys that were set but never read.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

double parse_double(const std::string& text, const std::string& key);
std::string format_double(double v);

}  // namespace frwmax
