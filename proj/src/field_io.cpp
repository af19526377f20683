#include "tohm/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "tohm/errors.hpp"

namespace tohm {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

// Token stream over a text file that remembers the 1-based line of every
// token, for error messages.
class TokenReader {
 public:
  TokenReader(const std::string& path, std::istream& in) : path_(path), in_(in) {}

  // Next whole line (for the header section).  Returns false at EOF.
  bool next_line(std::string& out) {
    if (!pending_.empty()) {
      out = pending_;
      pending_.clear();
      return true;
    }
    if (!std::getline(in_, out)) return false;
    ++line_;
    return true;
  }

  void push_back_line(const std::string& line) { pending_ = line; }

  // Next whitespace-delimited token from the remaining lines; false at EOF.
  bool next_token(std::string& out) {
    for (;;) {
      if (pos_ < current_.size()) {
        std::size_t start = current_.find_first_not_of(" \t\r", pos_);
        if (start != std::string::npos) {
          std::size_t end = current_.find_first_of(" \t\r", start);
          if (end == std::string::npos) end = current_.size();
          out = current_.substr(start, end - start);
          pos_ = end;
          return true;
        }
      }
      if (!next_line(current_)) return false;
      pos_ = 0;
    }
  }

  long line() const { return line_; }
  const std::string& path() const { return path_; }

  double parse_double(const std::string& token, const char* what) {
    const char* begin = token.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + token.size())
      throw ParseError(path_, line_, std::string("malformed ") + what + " '" + token + "'");
    return v;
  }

 private:
  std::string path_;
  std::istream& in_;
  std::string pending_;
  std::string current_;
  std::size_t pos_ = 0;
  long line_ = 0;
};

}  // namespace

FieldSample load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open field file '" + path + "'");
  TokenReader reader(path, in);

  std::string line;
  if (!reader.next_line(line)) throw ParseError(path, 1, "empty file");
  int dims = 0;
  {
    std::istringstream hs(line);
    std::string hash, name, version, dimtok;
    hs >> hash >> name >> version >> dimtok;
    if (hash != "#" || name != "tohm-field" || version != "v1" ||
        dimtok.rfind("dims=", 0) != 0)
      throw ParseError(path, reader.line(), "expected header '# tohm-field v1 dims=D'");
    dims = std::atoi(dimtok.c_str() + 5);
    if (dims < 1) throw ParseError(path, reader.line(), "dims must be >= 1");
  }

  std::vector<std::vector<double>> axes(dims);
  for (int d = 0; d < dims; ++d) {
    if (!reader.next_line(line))
      throw ParseError(path, reader.line(), "missing '# axis' line");
    std::istringstream as(line);
    std::string hash, axis;
    int which = 0;
    as >> hash >> axis >> which;
    if (hash != "#" || axis != "axis" || which != d + 1)
      throw ParseError(path, reader.line(),
                       "expected '# axis " + std::to_string(d + 1) + " ...'");
    std::string tok;
    while (as >> tok) axes[d].push_back(reader.parse_double(tok, "axis coordinate"));
    if (axes[d].empty())
      throw ParseError(path, reader.line(), "axis " + std::to_string(d + 1) + " has no points");
  }

  std::int64_t cells = 1;
  for (const auto& ax : axes) cells *= (std::int64_t)ax.size();

  bool has_mask = false;
  if (reader.next_line(line)) {
    std::istringstream ms(line);
    std::string hash, word;
    ms >> hash >> word;
    if (hash == "#" && word == "mask") {
      has_mask = true;
    } else {
      reader.push_back_line(line);
    }
  }

  std::vector<std::uint8_t> mask;
  if (has_mask) {
    mask.resize(cells);
    std::string tok;
    for (std::int64_t i = 0; i < cells; ++i) {
      if (!reader.next_token(tok))
        throw ParseError(path, reader.line(),
                         "mask ended after " + std::to_string(i) + " of " +
                             std::to_string(cells) + " entries");
      if (tok == "0") mask[i] = 0;
      else if (tok == "1") mask[i] = 1;
      else throw ParseError(path, reader.line(), "mask entry must be 0 or 1, got '" + tok + "'");
    }
  }

  LatticePtr lattice;
  try {
    lattice = has_mask ? std::make_shared<Lattice>(std::move(axes), std::move(mask))
                       : std::make_shared<Lattice>(std::move(axes));
  } catch (const ValidationError& e) {
    throw ParseError(path, reader.line(), e.what());
  }

  const std::int64_t want = lattice->size();
  std::vector<double> values;
  values.reserve(want);
  std::string tok;
  while (reader.next_token(tok)) {
    if ((std::int64_t)values.size() == want)
      throw ParseError(path, reader.line(),
                       "expected " + std::to_string(want) + " values but found more");
    double v = reader.parse_double(tok, "field value");
    if (!std::isfinite(v))
      throw ParseError(path, reader.line(), "field value '" + tok + "' is not finite");
    values.push_back(v);
  }
  if ((std::int64_t)values.size() != want)
    throw ParseError(path, reader.line(),
                     "expected " + std::to_string(want) + " values, found " +
                         std::to_string(values.size()));

  return FieldSample{std::move(lattice), std::move(values)};
}

void save_field(const FieldSample& field, const std::string& path) {
  if (!field.lattice) throw ValidationError("save_field: field has no lattice");
  const Lattice& lat = *field.lattice;
  if ((std::int64_t)field.values.size() != lat.size())
    throw ValidationError("save_field: value count does not match lattice size");

  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write field file '" + path + "'");
  out << "# tohm-field v1 dims=" << lat.dims() << "\n";
  for (int d = 0; d < lat.dims(); ++d) {
    out << "# axis " << (d + 1);
    for (double x : lat.axis(d)) out << ' ' << format_double(x);
    out << "\n";
  }
  if (lat.has_mask()) {
    out << "# mask\n";
    // One line per row of the leading axes, last-axis entries across.
    const std::int64_t row = lat.axis_size(lat.dims() - 1);
    const auto& mask = lat.mask();
    for (std::int64_t cell = 0; cell < lat.cell_count(); cell += row) {
      for (std::int64_t j = 0; j < row; ++j) {
        if (j) out << ' ';
        out << (mask[cell + j] ? '1' : '0');
      }
      out << "\n";
    }
  }
  for (double v : field.values) out << format_double(v) << "\n";
  if (!out) throw ValidationError("failed while writing '" + path + "'");
}

}  // namespace tohm
