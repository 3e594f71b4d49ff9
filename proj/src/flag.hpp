// Bracket flag of a frame at a point: layer dimensions, adapted bracket
// words, weights, homogeneous dimension.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vectorfield.hpp"

namespace srgeo {

struct NotBracketGenerating : std::runtime_error {
  explicit NotBracketGenerating(const std::string& what)
      : std::runtime_error(what) {}
};

struct GrowthVector {
  // Layer dimensions n_1 <= ... <= n_s = ambient dim. Layers may stagnate
  // before the flag completes (Martinet at the origin: 2,2,3).
  std::vector<int> dims;

  int step() const { return (int)dims.size(); }
  int ambient_dim() const { return dims.back(); }
  bool operator==(const GrowthVector& o) const = default;
};

// Q = sum_i i*(n_i - n_{i-1}) with n_0 = 0.
int hausdorff_dimension(const GrowthVector& g);

// w_j = min{i : j <= n_i}.
std::vector<int> weights(const GrowthVector& g);

// Left-normed bracket word over frame indices: idx = (a_1,...,a_k) names
// [X_{a_1},[...,[X_{a_{k-1}}, X_{a_k}]...]]. Length-1 words are the frame
// fields themselves.
struct BracketWord {
  std::vector<int> idx;
  PolyVectorField field;
};

struct FlagBasis {
  std::vector<BracketWord> entries;  // n entries, non-decreasing word length
  std::vector<int> weights;          // weights[j] == entries[j].idx.size()
};

// Greedy layer-by-layer selection of bracket words whose values at p extend
// a basis of R^n. Deterministic: words enumerated in lexicographic order of
// their index sequences. Throws NotBracketGenerating when the generated
// algebra closes up (all next-layer fields vanish identically) or max_depth
// is exhausted before the span reaches R^n.
std::pair<GrowthVector, FlagBasis> bracket_flag(const Frame& frame,
                                                const std::vector<Rat>& p,
                                                int max_depth = 6);

struct EquiregularVerdict {
  bool equiregular;
  GrowthVector growth;  // the common growth vector when equiregular
  // Sample indices with differing growth vectors otherwise.
  int witness_a = -1;
  int witness_b = -1;
  GrowthVector growth_a, growth_b;
};

// Certifies a single growth vector over the sample set only; says nothing
// about unsampled points.
EquiregularVerdict equiregular_check(const Frame& frame,
                                     const std::vector<std::vector<Rat>>& samples,
                                     int max_depth = 6);

}  // namespace srgeo
