#include "flag.hpp"

#include "exactla.hpp"

namespace srgeo {

int hausdorff_dimension(const GrowthVector& g) {
  int q = 0, prev = 0;
  for (int i = 0; i < g.step(); ++i) {
    q += (i + 1) * (g.dims[i] - prev);
    prev = g.dims[i];
  }
  return q;
}

std::vector<int> weights(const GrowthVector& g) {
  std::vector<int> w;
  w.reserve(g.ambient_dim());
  int prev = 0;
  for (int i = 0; i < g.step(); ++i) {
    for (int j = prev; j < g.dims[i]; ++j) w.push_back(i + 1);
    prev = g.dims[i];
  }
  return w;
}

std::pair<GrowthVector, FlagBasis> bracket_flag(const Frame& frame,
                                                const std::vector<Rat>& p,
                                                int max_depth) {
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if ((int)p.size() != frame.nvars)
    throw std::invalid_argument("point dimension mismatch");
  int n = frame.nvars;
  int d = frame.rank();

  RatRowSpace span(n);
  GrowthVector growth;
  FlagBasis basis;

  // Nonzero fields of the previous layer, in lexicographic word order.
  // Identically-zero words are pruned: every extension of one is zero.
  std::vector<BracketWord> layer;

  for (int depth = 1; depth <= max_depth; ++depth) {
    std::vector<BracketWord> next;
    if (depth == 1) {
      for (int j = 0; j < d; ++j)
        if (!frame.fields[j].is_zero())
          next.push_back({{j}, frame.fields[j]});
    } else {
      for (int j = 0; j < d; ++j)
        for (const auto& w : layer) {
          auto f = lie_bracket(frame.fields[j], w.field);
          if (f.is_zero()) continue;
          std::vector<int> idx = {j};
          idx.insert(idx.end(), w.idx.begin(), w.idx.end());
          next.push_back({std::move(idx), std::move(f)});
        }
      if (next.empty())
        throw NotBracketGenerating("generated algebra closed at depth " +
                                   std::to_string(depth - 1) + " with rank " +
                                   std::to_string(span.rank()) + " < " +
                                   std::to_string(n));
    }
    for (const auto& w : next)
      if (span.add_if_independent(w.field.eval(p))) {
        basis.entries.push_back(w);
        basis.weights.push_back(depth);
      }
    growth.dims.push_back(span.rank());
    if (span.rank() == n) return {growth, basis};
    layer = std::move(next);
  }
  throw NotBracketGenerating("span rank " + std::to_string(span.rank()) +
                             " < " + std::to_string(n) + " at max depth " +
                             std::to_string(max_depth));
}

EquiregularVerdict equiregular_check(const Frame& frame,
                                     const std::vector<std::vector<Rat>>& samples,
                                     int max_depth) {
  if (samples.empty()) throw std::invalid_argument("empty sample list");
  EquiregularVerdict v;
  v.equiregular = true;
  v.growth = bracket_flag(frame, samples[0], max_depth).first;
  for (size_t i = 1; i < samples.size(); ++i) {
    auto g = bracket_flag(frame, samples[i], max_depth).first;
    if (!(g == v.growth)) {
      v.equiregular = false;
      v.witness_a = 0;
      v.witness_b = (int)i;
      v.growth_a = v.growth;
      v.growth_b = g;
      return v;
    }
  }
  return v;
}

}  // namespace srgeo
