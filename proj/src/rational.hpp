#pragma once

#include <gmpxx.h>
#include <stdexcept>
#include <string>
#include <vector>

namespace srgeo {

using Rat = mpq_class;

// mpq_class(num, den) does not canonicalize; every constructor from a pair
// must go through here.
inline Rat make_rat(long num, long den = 1) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat rat_from_strings(const std::string& num, const std::string& den) {
  mpz_class n(num), d(den);
  if (d == 0) throw std::domain_error("rational with zero denominator");
  Rat r(n, d);
  r.canonicalize();
  return r;
}

// Accepts "p", "p/q", and decimal floats; floats convert exactly (binary).
inline Rat rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos)
    return rat_from_strings(s.substr(0, slash), s.substr(slash + 1));
  if (s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
      s.find('E') != std::string::npos)
    return Rat(std::stod(s));
  return rat_from_strings(s, "1");
}

inline double to_double(const Rat& r) { return r.get_d(); }

inline std::vector<Rat> rat_point(const std::vector<std::string>& coords) {
  std::vector<Rat> p;
  p.reserve(coords.size());
  for (const auto& c : coords) p.push_back(rat_from_string(c));
  return p;
}

inline std::vector<double> to_double_vec(const std::vector<Rat>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
  return out;
}

inline std::vector<Rat> rat_vec_from_double(const std::vector<double>& v) {
  std::vector<Rat> out;
  out.reserve(v.size());
  for (double x : v) out.emplace_back(x);  // exact dyadic conversion
  return out;
}

}  // namespace srgeo
