#include "tohm/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tohm/errors.hpp"

namespace tohm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.path_ = name;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  long lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(name, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError(name, lineno, "empty section name");
      cfg.sections_[section];  // a section may legitimately stay empty
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(name, lineno, "expected 'key = value' or '[section]'");
    if (section.empty())
      throw ParseError(name, lineno, "key outside of any [section]");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(name, lineno, "empty key");
    if (value.empty()) throw ParseError(name, lineno, "empty value for key '" + key + "'");
    auto& sec = cfg.sections_[section];
    if (sec.count(key))
      throw ParseError(name, lineno, "duplicate key '" + key + "' in [" + section + "]");
    sec[key] = Entry{value, lineno, false};
  }
  return cfg;
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  k->second.used = true;
  return &k->second;
}

const Config::Entry& Config::require(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw ValidationError(path_ + ": missing key '" + key + "' in [" + section + "]");
  return *e;
}

std::string Config::require_string(const std::string& section, const std::string& key) const {
  return require(section, key).value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

namespace {

double parse_double_token(const std::string& tok, const std::string& path, long line,
                          const std::string& key) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + tok.size() || !std::isfinite(v))
    throw ParseError(path, line, "malformed number '" + tok + "' for key '" + key + "'");
  return v;
}

}  // namespace

double Config::require_double(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  return parse_double_token(e.value, path_, e.line, key);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return parse_double_token(e->value, path_, e->line, key);
}

long long Config::require_int(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 10);
  if (end != begin + e.value.size() || errno == ERANGE)
    throw ParseError(path_, e.line, "malformed integer '" + e.value + "' for key '" + key + "'");
  return v;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
  if (!has(section, key)) return fallback;
  return require_int(section, key);
}

std::uint64_t Config::require_u64(const std::string& section, const std::string& key) const {
  const Entry& e = require(section, key);
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(begin, &end, 10);
  if (end != begin + e.value.size() || errno == ERANGE || e.value.front() == '-')
    throw ParseError(path_, e.line,
                     "malformed unsigned integer '" + e.value + "' for key '" + key + "'");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> Config::require_doubles(const std::string& section,
                                            const std::string& key) const {
  const Entry& e = require(section, key);
  std::vector<std::string> toks = split_tokens(e.value);
  std::vector<double> out;
  out.reserve(toks.size());
  for (const std::string& t : toks) out.push_back(parse_double_token(t, path_, e.line, key));
  return out;
}

std::vector<std::string> Config::require_tokens(const std::string& section,
                                                const std::string& key) const {
  return split_tokens(require(section, key).value);
}

void Config::reject_unknown(const std::string& section) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return;
  for (const auto& kv : s->second)
    if (!kv.second.used)
      throw ValidationError(path_ + ":" + std::to_string(kv.second.line) + ": unknown key '" +
                            kv.first + "' in [" + section + "]");
}

}  // namespace tohm
