#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evmesh {

/// Parsed `key = value` text. Blank lines and '#' comments are skipped;
/// a repeated key or a line without '=' is a ParseError.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, std::string_view stage);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::string stage_;
  std::map<std::string, std::string> entries_;
};

std::vector<double> parse_number_list(std::string_view text, std::string_view stage);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace evmesh
