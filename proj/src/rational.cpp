#include "motint/rational.hpp"

#include <cctype>

namespace motint {

Rat parse_rat(const std::string& s) {
  size_t i = 0, n = s.size();
  while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  size_t j = n;
  while (j > i && std::isspace(static_cast<unsigned char>(s[j - 1]))) --j;
  std::string body = s.substr(i, j - i);
  if (body.empty()) throw std::invalid_argument("empty rational literal");
  for (size_t k = 0; k < body.size(); ++k) {
    char c = body[k];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' ||
          c == '-' || c == '+'))
      throw std::invalid_argument("bad rational literal: " + s);
  }
  Rat r(body);
  r.canonicalize();
  return r;
}

std::string rat_to_string(const Rat& r) { return r.get_str(); }

}  // namespace motint
