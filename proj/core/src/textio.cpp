#include "tscopf/textio.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace tscopf {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Tokenizer::Tokenizer(std::string_view text) {
  int line = 1;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < n && text[i] != '\n') ++i;
    } else if (c == '{' || c == '}') {
      tokens_.push_back({std::string(1, c), line});
      ++i;
    } else {
      size_t j = i;
      while (j < n && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '{' &&
             text[j] != '}' && text[j] != '#')
        ++j;
      tokens_.push_back({std::string(text.substr(i, j - i)), line});
      i = j;
    }
  }
}

const std::string& Tokenizer::peek() const {
  static const std::string empty;
  if (done()) return empty;
  return tokens_[pos_].text;
}

std::string Tokenizer::next() {
  if (done()) throw ParseError(tokens_.empty() ? 1 : tokens_.back().line, "unexpected end of input");
  return tokens_[pos_++].text;
}

int Tokenizer::line() const {
  if (done()) return tokens_.empty() ? 1 : tokens_.back().line;
  return tokens_[pos_].line;
}

double Tokenizer::next_number() {
  int ln = line();
  std::string t = next();
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0') throw ParseError(ln, "expected number, got '" + t + "'");
  return v;
}

long Tokenizer::next_integer() {
  int ln = line();
  std::string t = next();
  char* end = nullptr;
  long v = std::strtol(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0') throw ParseError(ln, "expected integer, got '" + t + "'");
  return v;
}

void Tokenizer::expect(const std::string& tok) {
  int ln = line();
  std::string t = next();
  if (t != tok) throw ParseError(ln, "expected '" + tok + "', got '" + t + "'");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 finalizer applied to a combined word
  std::uint64_t z = a;
  z += 0x9e3779b97f4a7c15ULL * (b + 1);
  z += 0xbf58476d1ce4e5b9ULL * (c + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tscopf
