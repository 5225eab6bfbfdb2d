#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tailcq/common.hpp"

namespace tailcq {

// Flat key=value configuration. Values resolve as: command line > file > subcommand defaults.
// Unknown keys and malformed values raise ConfigError.
class Config {
 public:
  // Known keys for the given subcommand with their defaults.
  static Config defaults_for(const std::string& subcommand);

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value, const std::string& origin);
  void apply_override(const std::string& assignment);  // "key=value"

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;  // comma separated, may be empty
  std::vector<long long> integers(const std::string& key) const;

  const std::string& subcommand() const { return sub_; }
  // Writes "# key = value" lines for the resolved configuration.
  void echo(std::ostream& os) const;

 private:
  struct Entry {
    std::string value;
    std::string origin;
  };
  std::string sub_;
  std::map<std::string, Entry> values_;
};

// Checks ranges and combinations for the subcommand; throws ConfigError with the offending key.
void validate(const Config& c);

}  // namespace tailcq
