#pragma once

#include <map>
#include <string>
#include <vector>

namespace dtgi {

// Flat dotted-key configuration. Files use TOML-style text:
//
//   [train]
//   lr = 6e-4
//
// which sets "train.lr". Only keys present in the defaults are accepted.
class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> defaults) : values_(std::move(defaults)) {}

  // Rejects unknown keys with a ConfigError listing every valid key.
  void set(const std::string& key, const std::string& value);
  // Parses "key=value".
  void set_override(const std::string& assignment);
  void load_text(const std::string& text, const std::string& origin = "<text>");
  void load_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& str(const std::string& key) const;
  long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;  // comma separated

  std::vector<std::string> keys() const;
  // Sectioned text that load_text() reads back to the same values.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace dtgi
