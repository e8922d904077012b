#include "roaddbn/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "roaddbn/errors.hpp"

namespace roaddbn {

namespace detail {

std::vector<std::string> LineReader::next(const char* expecting) {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    std::istringstream fields(text);
    std::vector<std::string> tokens;
    for (std::string token; fields >> token;) tokens.push_back(token);
    if (!tokens.empty()) return tokens;
  }
  throw ParseError(std::string("unexpected end of input, expected ") + expecting, line_ + 1);
}

bool LineReader::at_end() {
  while (true) {
    const int c = in_.peek();
    if (c == std::char_traits<char>::eof()) return true;
    if (c == '\n') {
      in_.get();
      ++line_;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      in_.get();
      continue;
    }
    return false;
  }
}

void LineReader::fail(const std::string& message) const { throw ParseError(message, line_); }

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  return buffer;
}

double parse_real(const std::string& token, const LineReader& reader) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
    reader.fail("invalid real value '" + token + "'");
  }
  return value;
}

long parse_integer(const std::string& token, const LineReader& reader) {
  errno = 0;
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
    reader.fail("invalid integer '" + token + "'");
  }
  return value;
}

void write_vector(std::ostream& out, const char* tag, const Vector& values) {
  out << tag;
  for (Index i = 0; i < values.size(); ++i) out << ' ' << format_real(values[i]);
  out << '\n';
}

Vector read_vector(LineReader& reader, const char* tag, Index expected) {
  const auto tokens = reader.next(tag);
  if (tokens.front() != tag) reader.fail(std::string("expected '") + tag + "' record");
  if (static_cast<Index>(tokens.size()) - 1 != expected) {
    reader.fail(std::string("'") + tag + "' record has " + std::to_string(tokens.size() - 1) +
                " values, expected " + std::to_string(expected));
  }
  Vector values(expected);
  for (Index i = 0; i < expected; ++i) values[i] = parse_real(tokens[static_cast<std::size_t>(i) + 1], reader);
  return values;
}

}  // namespace detail

void write_rbm(std::ostream& out, const RbmParams& params) {
  params.validate();
  out << "RBMPARAMS 1 hexfloat\n" << params.visible() << ' ' << params.hidden() << '\n';
  detail::write_vector(out, "b", params.b);
  detail::write_vector(out, "c", params.c);
  for (Index i = 0; i < params.visible(); ++i) {
    detail::write_vector(out, "W", params.W.row(i).transpose());
  }
}

RbmParams read_rbm(std::istream& in) {
  detail::LineReader reader(in);
  return detail::read_rbm_block(reader);
}

RbmParams detail::read_rbm_block(detail::LineReader& reader) {
  const auto header = reader.next("RBMPARAMS header");
  if (header.size() != 3 || header[0] != "RBMPARAMS" || header[1] != "1" || header[2] != "hexfloat") {
    reader.fail("expected 'RBMPARAMS 1 hexfloat'");
  }
  const auto dims = reader.next("dimensions");
  if (dims.size() != 2) reader.fail("expected '<I> <J>'");
  const long visible = detail::parse_integer(dims[0], reader);
  const long hidden = detail::parse_integer(dims[1], reader);
  if (visible <= 0 || hidden <= 0) reader.fail("layer sizes must be positive");

  RbmParams params;
  params.b = detail::read_vector(reader, "b", visible);
  params.c = detail::read_vector(reader, "c", hidden);
  params.W.resize(visible, hidden);
  for (long i = 0; i < visible; ++i) params.W.row(i) = detail::read_vector(reader, "W", hidden).transpose();
  params.validate();
  return params;
}

void save_rbm(const std::string& path, const RbmParams& params) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  write_rbm(out, params);
  if (!out) throw FileError("write to '" + path + "' failed");
}

RbmParams load_rbm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  return read_rbm(in);
}

}  // namespace roaddbn
