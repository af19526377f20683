#ifndef TOHM_CONFIG_HPP
#define TOHM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tohm {

/// Sectioned key = value run configuration:
///
///   # comment (a '#' starts a comment anywhere on a line)
///   [section]
///   key = value
///
/// Keys are unique per section, values are non-empty, and every lookup
/// remembers it happened, so a command can reject keys it never read
/// (typos fail loudly instead of silently losing a parameter).  Sections
/// a command does not own are left alone; one file can serve several
/// commands.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text, const std::string& name);

  const std::string& path() const { return path_; }

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  /// Missing key -> ValidationError naming the section and key.
  std::string require_string(const std::string& section, const std::string& key) const;
  double require_double(const std::string& section, const std::string& key) const;
  long long require_int(const std::string& section, const std::string& key) const;
  std::uint64_t require_u64(const std::string& section, const std::string& key) const;
  std::vector<double> require_doubles(const std::string& section, const std::string& key) const;
  std::vector<std::string> require_tokens(const std::string& section,
                                          const std::string& key) const;

  /// Defaulted variants; absent keys return the fallback.
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const;

  /// Throws ValidationError if the section exists and holds a key no
  /// lookup ever touched.
  void reject_unknown(const std::string& section) const;

 private:
  struct Entry {
    std::string value;
    long line = 0;
    mutable bool used = false;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& require(const std::string& section, const std::string& key) const;

  std::string path_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace tohm

#endif
