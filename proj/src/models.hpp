// Bundled example frames with their documented formulas and expected
// behavior, plus the canonical text form used to pin them down.
#pragma once

#include <string>

#include "vectorfield.hpp"

namespace srgeo {

struct BundledExample {
  std::string name;
  Frame frame;
  std::vector<std::string> formulas;  // canonical text per frame field
  std::string facts;                  // one line of expected behavior
  std::vector<Rat> probe;             // a generic base point
};

const std::vector<std::string>& bundled_names();
bool is_bundled(const std::string& name);
// Throws std::invalid_argument for unknown names.
BundledExample bundled_example(const std::string& name);

// Canonical text form: components in coordinate order, monomials in graded
// lexicographic order, 1-indexed variables, e.g. "d2 + (x1^2) d5".
std::string field_formula(const PolyVectorField& v);

}  // namespace srgeo
