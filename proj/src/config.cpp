#include "offgrid/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "offgrid/errors.hpp"

namespace offgrid {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' &&
        c != '_' && c != '-') {
      return false;
    }
  }
  return true;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  // a missing scenario file is a configuration mistake, not an I/O fault
  require(in.good(), ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text,
                            const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config,
            origin + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(valid_key(key), ErrorKind::Config,
            origin + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  require(valid_key(key), ErrorKind::Config, "bad key '" + key + "'");
  values_[trim(key)] = trim(value);
}

bool Config::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string Config::get_str(const std::string& key,
                            const std::string& dflt) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

double Config::parse_real(const std::string& key,
                          const std::string& raw) const {
  try {
    size_t pos = 0;
    double v = std::stod(raw, &pos);
    require(pos == raw.size(), ErrorKind::Config,
            "key '" + key + "': trailing characters in number '" + raw + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::Config, "key '" + key + "': not a number: '" + raw + "'");
  }
}

double Config::get_real(const std::string& key, double dflt) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? dflt : parse_real(key, it->second);
}

int Config::get_int(const std::string& key, int dflt) const {
  double v = get_real(key, static_cast<double>(dflt));
  int i = static_cast<int>(v);
  require(static_cast<double>(i) == v, ErrorKind::Config,
          "key '" + key + "': expected an integer");
  return i;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(ErrorKind::Config, "key '" + key + "': expected a boolean, got '" +
                              it->second + "'");
}

std::vector<double> Config::get_reals(const std::string& key,
                                      const std::vector<double>& dflt) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  std::vector<double> out;
  std::string item;
  std::istringstream in(it->second);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_real(key, item));
  }
  require(!out.empty(), ErrorKind::Config,
          "key '" + key + "': expected a comma separated list of numbers");
  return out;
}

std::string Config::require_str(const std::string& key) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  require(it != values_.end(), ErrorKind::Config,
          "missing required key '" + key + "'");
  return it->second;
}

double Config::require_real(const std::string& key) const {
  return parse_real(key, require_str(key));
}

std::vector<std::string> Config::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& kv : values_) {
    if (!consumed_.count(kv.first)) out.push_back(kv.first);
  }
  return out;
}

void Config::reject_unknown() const {
  auto extra = unconsumed();
  if (!extra.empty()) {
    fail(ErrorKind::Config, "unknown config key '" + extra.front() + "'");
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& kv : values_) {
    out += kv.first;
    out += '=';
    out += kv.second;
    out += '\n';
  }
  return out;
}

uint64_t Config::fingerprint() const {
  uint64_t h = 1469598103934665603ull;
  for (char c : canonical()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace offgrid
