#include "aara/rational.hpp"

#include <cctype>

namespace aara {

std::string toString(const Rat& q) {
  Rat c = q;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

std::optional<Rat> parseRat(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool neg = false;
  if (text.front() == '-') {
    neg = true;
    text.remove_prefix(1);
  }
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char ch : s)
      if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    return true;
  };
  std::string_view num = text, den = "1";
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    num = text.substr(0, slash);
    den = text.substr(slash + 1);
  }
  if (!digits(num) || !digits(den)) return std::nullopt;
  mpz_class n{std::string(num)}, d{std::string(den)};
  if (d == 0) return std::nullopt;
  Rat q(n, d);
  q.canonicalize();
  if (neg) q = -q;
  return q;
}

}  // namespace aara
