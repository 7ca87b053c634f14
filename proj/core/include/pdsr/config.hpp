#pragma once

#include <map>
#include <string>
#include <vector>

namespace pdsr {

// Flat key=value run configuration: one pair per line, '#' starts a comment,
// blank lines ignored, whitespace around keys/values trimmed. Duplicate keys
// keep the last value.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies one "key=value" override (the CLI's --set flag).
void apply_override(std::map<std::string, std::string>& config,
                    const std::string& assignment);

// Typed access with precise errors; remembers which keys were read so the
// caller can reject typos (unread keys) before doing any work.
class ConfigView {
 public:
  explicit ConfigView(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  uint64_t get_uint(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Comma-separated lists: "3,4,5".
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;
  std::vector<uint64_t> get_uint_list(const std::string& key,
                                      std::vector<uint64_t> fallback) const;

  // Keys present in the file but never read by any getter.
  std::vector<std::string> unread_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
};

}  // namespace pdsr
