#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace offgrid {

/// Flat key=value configuration with dotted keys, '#' comments, and
/// consumed-key tracking so unknown keys can be rejected by name.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  /// Insert or replace one key (used by -D command line overrides).
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_real(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_reals(const std::string& key,
                                const std::vector<double>& dflt) const;

  std::string require_str(const std::string& key) const;
  double require_real(const std::string& key) const;

  /// Keys present in the file that no getter has touched.
  std::vector<std::string> unconsumed() const;

  /// Errors (Config kind) naming the first unconsumed key.
  void reject_unknown() const;

  /// FNV-1a fingerprint of the sorted key=value pairs.
  uint64_t fingerprint() const;

  /// Canonical "key=value" lines, sorted by key.
  std::string canonical() const;

 private:
  double parse_real(const std::string& key, const std::string& raw) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace offgrid
