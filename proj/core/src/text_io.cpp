#include "pqpf/text_io.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include "pqpf/error.hpp"

namespace pqpf {

std::string format_decimal(double value) {
  std::array<char, 512> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                       std::chars_format::fixed);
  if (ec != std::errc{}) fail(ErrorKind::Numerical, "cannot format value");
  return std::string(buf.data(), ptr);
}

std::string format_precise(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                       std::chars_format::scientific, 16);
  if (ec != std::errc{}) fail(ErrorKind::Numerical, "cannot format value");
  return std::string(buf.data(), ptr);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_int(std::string_view text, long long& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::NotFound, "cannot open " + path);
  KeyValues kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::Parse, path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const auto key = trim(view.substr(0, eq));
    if (key.empty()) fail(ErrorKind::Parse, path + ":" + std::to_string(number) + ": empty key");
    kv.insert_or_assign(std::string(key), std::string(trim(view.substr(eq + 1))));
  }
  return kv;
}

void write_key_values(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::NotFound, "cannot write " + path);
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  if (!out) fail(ErrorKind::NotFound, "write failed for " + path);
}

double require_double(const KeyValues& kv, std::string_view key) {
  const auto it = kv.find(key);
  if (it == kv.end()) fail(ErrorKind::Parse, "missing key '" + std::string(key) + "'");
  double v = 0.0;
  if (!parse_double(it->second, v)) {
    fail(ErrorKind::Parse, "key '" + std::string(key) + "' is not a number: " + it->second);
  }
  return v;
}

}  // namespace pqpf
