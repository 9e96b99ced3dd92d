#include "geoflow/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

// Splits a line on single spaces, recording the 1-based column of each token.
struct Token {
  std::string_view text;
  int column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

double parse_double(const Token& tok, int line) {
  double v = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("expected a decimal number, got '" + std::string(tok.text) + "'",
                     line, tok.column);
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is) {
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty matrix file", 1, 1);
  ++lineno;
  const auto header = tokenize(line);
  if (header.size() != 1) throw ParseError("expected the dimension n alone on the first line", 1, 1);
  int n = 0;
  {
    auto [ptr, ec] = std::from_chars(header[0].text.data(),
                                     header[0].text.data() + header[0].text.size(), n);
    if (ec != std::errc() || ptr != header[0].text.data() + header[0].text.size() || n < 1) {
      throw ParseError("dimension must be a positive integer", 1, header[0].column);
    }
  }
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(is, line)) {
      throw ParseError("expected " + std::to_string(n) + " matrix rows", lineno + 1, 1);
    }
    ++lineno;
    const auto toks = tokenize(line);
    if (static_cast<int>(toks.size()) != n) {
      throw ParseError("expected " + std::to_string(n) + " entries, got " +
                           std::to_string(toks.size()),
                       lineno, 1);
    }
    for (int j = 0; j < n; ++j) m(i, j) = parse_double(toks[j], lineno);
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!tokenize(line).empty()) throw ParseError("trailing data after matrix", lineno, 1);
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string());
  write_matrix(os, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::invalid_argument, "cannot read " + path.string());
  return read_matrix(is);
}

}  // namespace geoflow
