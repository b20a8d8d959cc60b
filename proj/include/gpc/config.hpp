#ifndef GPC_CONFIG_HPP
#define GPC_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gpc/errors.hpp"

namespace gpc {

// Flat typed key-value configuration with [section] headers. Keys are stored
// as "section.key"; values keep their literal text so that a parse/serialize
// round trip is exact.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is, const std::string& origin = "<stream>") {
    Config c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty())
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": empty section name");
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      std::string val = trim(t.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      std::string full = section.empty() ? key : section + "." + key;
      if (c.values_.count(full))
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": duplicate key '" + full + "'");
      c.values_[full] = val;
      c.order_.push_back(full);
    }
    return c;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return parse(f, path);
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::vector<std::string>& keys() const { return order_; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required field '" + key + "'");
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key) const {
    return to_double(key, get_string(key));
  }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  long long get_int(const std::string& key) const {
    const std::string s = get_string(key);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "': not an integer: '" + s + "'");
    }
    if (pos != s.size())
      throw ConfigError("field '" + key + "': trailing characters in '" + s + "'");
    return v;
  }
  long long get_int(const std::string& key, long long dflt) const {
    return has(key) ? get_int(key) : dflt;
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t dflt) const {
    if (!has(key)) return dflt;
    const std::string s = get_string(key);
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "': not a seed value: '" + s + "'");
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("field '" + key + "': not a boolean: '" + s + "'");
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
  }
  void set_double(const std::string& key, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    set(key, os.str());
  }
  void set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }

  // Serialize grouped by section, keys in first-seen order within a section.
  std::string serialize() const {
    std::ostringstream os;
    std::vector<std::string> sections;
    for (const auto& k : order_) {
      std::string sec = section_of(k);
      bool seen = false;
      for (const auto& s : sections) seen = seen || s == sec;
      if (!seen) sections.push_back(sec);
    }
    for (const auto& sec : sections) {
      if (!sec.empty()) os << "[" << sec << "]\n";
      for (const auto& k : order_)
        if (section_of(k) == sec)
          os << key_of(k) << " = " << values_.at(k) << "\n";
      os << "\n";
    }
    return os.str();
  }

  bool operator==(const Config& o) const { return values_ == o.values_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
  static std::string section_of(const std::string& full) {
    auto d = full.find('.');
    return d == std::string::npos ? "" : full.substr(0, d);
  }
  static std::string key_of(const std::string& full) {
    auto d = full.find('.');
    return d == std::string::npos ? full : full.substr(d + 1);
  }
  double to_double(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "': not a number: '" + s + "'");
    }
    if (pos != s.size())
      throw ConfigError("field '" + key + "': trailing characters in '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace gpc

#endif
