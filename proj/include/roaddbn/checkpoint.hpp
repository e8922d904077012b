#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "roaddbn/rbm.hpp"

namespace roaddbn {

/// Plain-text RBM parameter dump.
///
///     RBMPARAMS 1 hexfloat
///     <I> <J>
///     b <I values>
///     c <J values>
///     W <J values>        (I lines, one per visible unit)
///
/// Values are C99 hex-float literals, so save/load is lossless for every
/// finite double.
void write_rbm(std::ostream& out, const RbmParams& params);
RbmParams read_rbm(std::istream& in);

void save_rbm(const std::string& path, const RbmParams& params);
RbmParams load_rbm(const std::string& path);

namespace detail {

/// Line-oriented tokenizer shared by the text checkpoint readers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-empty line, split on whitespace. Throws ParseError at EOF.
  std::vector<std::string> next(const char* expecting);
  bool at_end();
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::istream& in_;
  int line_ = 0;
};

std::string format_real(double value);
double parse_real(const std::string& token, const LineReader& reader);
long parse_integer(const std::string& token, const LineReader& reader);

void write_vector(std::ostream& out, const char* tag, const Vector& values);
RbmParams read_rbm_block(LineReader& reader);
Vector read_vector(LineReader& reader, const char* tag, Index expected);

}  // namespace detail

}  // namespace roaddbn
