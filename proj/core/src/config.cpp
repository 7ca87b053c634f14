#include "pdsr/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pdsr/errors.hpp"

namespace pdsr {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError("key '" + key + "': '" + value + "' is not a number");
  }
  return v;
}

uint64_t parse_uint(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || value.front() == '-') {
    throw ConfigError("key '" + key + "': '" + value +
                      "' is not a non-negative integer");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> config;
  std::stringstream ss(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    config[key] = trim(line.substr(eq + 1));
  }
  return config;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_override(std::map<std::string, std::string>& config,
                    const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  config[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string ConfigView::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
  read_[key] = true;
  return it->second;
}

std::string ConfigView::get_string(const std::string& key,
                                   const std::string& fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigView::get_double(const std::string& key, double fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

uint64_t ConfigView::get_uint(const std::string& key, uint64_t fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_uint(key, it->second);
}

bool ConfigView::get_bool(const std::string& key, bool fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "on" || it->second == "true" || it->second == "1") return true;
  if (it->second == "off" || it->second == "false" || it->second == "0") return false;
  throw ConfigError("key '" + key + "': expected on/off, got '" + it->second + "'");
}

std::vector<double> ConfigView::get_double_list(const std::string& key,
                                                std::vector<double> fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& part : split_list(it->second)) out.push_back(parse_double(key, part));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<uint64_t> ConfigView::get_uint_list(
    const std::string& key, std::vector<uint64_t> fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<uint64_t> out;
  for (const auto& part : split_list(it->second)) out.push_back(parse_uint(key, part));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::string> ConfigView::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!read_.count(key)) out.push_back(key);
  }
  return out;
}

}  // namespace pdsr
