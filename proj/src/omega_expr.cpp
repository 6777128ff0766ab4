#include "samdde/omega_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "samdde/core.hpp"

namespace samdde {

namespace {

[[noreturn]] void bad(const std::string& text, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument, "bad frequency '" + text + "': " + why);
}

struct Cursor {
  const std::string& s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool eat_pi() {
    skip_ws();
    if (s.compare(i, 2, "pi") == 0) {
      i += 2;
      return true;
    }
    return false;
  }
  bool number(double& out) {
    skip_ws();
    if (i >= s.size() || !(std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) return false;
    const char* begin = s.c_str() + i;
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    i += static_cast<std::size_t>(end - begin);
    return true;
  }
  bool done() {
    skip_ws();
    return i == s.size();
  }
};

}  // namespace

double parse_omega(const std::string& text) {
  Cursor c{text};
  double pi_part = 0.0;
  double plain = 0.0;
  bool first = true;
  while (true) {
    double sign = 1.0;
    if (c.eat('+')) {
    } else if (c.eat('-')) {
      sign = -1.0;
    } else if (!first) {
      break;
    }
    double coef = 1.0;
    const bool has_num = c.number(coef);
    const bool has_pi = c.eat_pi();
    if (!has_num && !has_pi) bad(text, "expected a number or pi");
    double denom = 1.0;
    if (c.eat('/')) {
      if (!c.number(denom) || denom == 0.0) bad(text, "bad denominator");
    }
    (has_pi ? pi_part : plain) += sign * coef / denom;
    first = false;
    if (c.done()) break;
  }
  if (!c.done()) bad(text, "trailing characters");
  const double value = pi_part * std::numbers::pi + plain;
  if (!std::isfinite(value) || value <= 0.0) bad(text, "must be positive");
  return value;
}

bool is_builtin_omega_list(const std::string& name) {
  for (const auto& n : builtin_omega_list_names())
    if (n == name) return true;
  return false;
}

std::vector<std::string> builtin_omega_list_names() {
  return {"tab4", "tab2", "tab3", "gene", "h2", "noh2"};
}

std::vector<double> builtin_omega_list(const std::string& name) {
  std::vector<double> out;
  const double pi = std::numbers::pi;
  if (name == "tab4") {
    for (int j = 0; j < 8; ++j) out.push_back(25.0 * std::ldexp(1.0, j));
  } else if (name == "tab2" || name == "tab3" || name == "gene") {
    for (int j = 0; j < 8; ++j) out.push_back(std::ldexp(8.0, j) * pi);
  } else if (name == "h2") {
    for (int j = 0; j < 7; ++j) out.push_back(std::ldexp(8.0, j) * pi);
  } else if (name == "noh2") {
    // 8pi + pi/64, 16pi + pi/32, ..., 512pi + pi
    for (int j = 0; j < 7; ++j) out.push_back((std::ldexp(8.0, j) + std::ldexp(1.0, j - 6)) * pi);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown frequency list '" + name + "'");
  }
  return out;
}

std::vector<double> parse_omega_list(const std::string& text) {
  if (is_builtin_omega_list(text)) return builtin_omega_list(text);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_omega(item));
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty frequency list");
  return out;
}

}  // namespace samdde
