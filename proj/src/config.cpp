#include "pekar/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pekar/error.hpp"

namespace pekar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::config, "key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) bad(key, "'" + text + "' is not a finite number");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) bad(key, "'" + text + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": empty key");
    if (c.values_.count(key)) bad(key, "duplicate key");
    c.values_[key] = value;
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::config, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

void RunConfig::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_)
    if (!allowed.count(k)) throw Error(ErrorCode::config, "unknown key '" + k + "'");
}

const std::string& RunConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) bad(key, "missing");
  return it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& def) const {
  return has(key) ? raw(key) : def;
}

double RunConfig::get_double(const std::string& key, double def, double lo, double hi) const {
  const double v = has(key) ? parse_double(key, raw(key)) : def;
  if (!(v >= lo && v <= hi)) bad(key, "value out of range");
  return v;
}

long long RunConfig::get_int(const std::string& key, long long def, long long lo, long long hi) const {
  const long long v = has(key) ? parse_int(key, raw(key)) : def;
  if (v < lo || v > hi) bad(key, "value out of range");
  return v;
}

std::uint64_t RunConfig::get_seed(const std::string& key, std::uint64_t def) const {
  if (!has(key)) return def;
  std::uint64_t v = 0;
  const std::string& t = raw(key);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) bad(key, "'" + t + "' is not an unsigned integer");
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  std::string t = raw(key);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad(key, "'" + raw(key) + "' is not a boolean");
}

std::vector<double> RunConfig::get_double_list(const std::string& key, const std::vector<double>& def, double lo,
                                               double hi) const {
  std::vector<double> out;
  if (!has(key)) {
    out = def;
  } else {
    for (const auto& t : split_list(raw(key))) out.push_back(parse_double(key, t));
  }
  for (double v : out)
    if (!(v >= lo && v <= hi)) bad(key, "value out of range");
  return out;
}

std::vector<int> RunConfig::get_int_list(const std::string& key, const std::vector<int>& def, int lo, int hi) const {
  std::vector<int> out;
  if (!has(key)) {
    out = def;
  } else {
    for (const auto& t : split_list(raw(key))) {
      const long long v = parse_int(key, t);
      if (v < lo || v > hi) bad(key, "value out of range");
      out.push_back(static_cast<int>(v));
    }
  }
  for (int v : out)
    if (v < lo || v > hi) bad(key, "value out of range");
  return out;
}

std::string RunConfig::canonical() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

}  // namespace pekar
