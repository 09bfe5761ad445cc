#include "evmesh/config.hpp"

#include <charconv>
#include <sstream>

#include "evmesh/error.hpp"

namespace evmesh {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view token, std::string_view stage) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(std::string(stage), "not a number: '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text, std::string_view stage) {
  KeyValues kv;
  kv.stage_ = std::string(stage);
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(kv.stage_, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(kv.stage_, "line " + std::to_string(line_no) + ": empty key");
    if (!kv.entries_.emplace(key, value).second) {
      throw ParseError(kv.stage_, "duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValues::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ParseError(stage_, "missing key '" + key + "'");
  return *v;
}

double KeyValues::number(const std::string& key) const { return parse_double(require(key), stage_); }

double KeyValues::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t KeyValues::integer(const std::string& key) const {
  const std::string text = require(key);
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ParseError(stage_, "not an integer: '" + text + "' for " + key);
  return value;
}

std::int64_t KeyValues::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::vector<double> KeyValues::numbers(const std::string& key) const {
  return parse_number_list(require(key), stage_);
}

std::vector<double> parse_number_list(std::string_view text, std::string_view stage) {
  std::vector<double> out;
  while (true) {
    const auto start = text.find_first_not_of(" \t,");
    if (start == std::string_view::npos) break;
    text = text.substr(start);
    const auto stop = text.find_first_of(" \t,");
    out.push_back(parse_double(text.substr(0, stop), stage));
    if (stop == std::string_view::npos) break;
    text = text.substr(stop);
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace evmesh
