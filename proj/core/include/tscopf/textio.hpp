#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tscopf {

/// Thrown on malformed input text; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Thrown when parsed data violates a model invariant.
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formats a double with 17 significant digits (lossless round trip).
std::string fmt17(double v);

/// Whitespace tokenizer over sectioned key/value text. `#` starts a comment
/// that runs to end of line. Braces are standalone tokens.
class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text);

  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const;
  std::string next();
  int line() const;  // line of the token about to be read
  double next_number();
  long next_integer();
  void expect(const std::string& tok);

 private:
  struct Tok {
    std::string text;
    int line;
  };
  std::vector<Tok> tokens_;
  size_t pos_ = 0;
};

/// Deterministic 64-bit mix used to derive per-sample seeds from
/// (master seed, iteration, sample index).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace tscopf
