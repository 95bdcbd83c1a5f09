#pragma once
// Plain-text `key = value` run configuration with `#` comments.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pekar {

class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  // Throws a config error naming the first key not in `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def, double lo, double hi) const;
  long long get_int(const std::string& key, long long def, long long lo, long long hi) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& def, double lo,
                                      double hi) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def, int lo, int hi) const;

  // Canonical text (sorted keys) used for hashing.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace pekar
