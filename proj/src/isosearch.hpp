// Stratified isomorphism decision: invariant prescreen, damped least-squares
// search over graded basis changes, exact canonicalization for step-2
// algebras with a line center, and rational witness polishing.
#pragma once

#include <cstdint>
#include <optional>

#include "algebra.hpp"

namespace srgeo {

enum class IsoVerdict { True, CertifiedFalse, HeuristicFalse };

const char* iso_verdict_str(IsoVerdict v);

struct IsoResult {
  IsoVerdict verdict = IsoVerdict::HeuristicFalse;
  // Frobenius distance between unit-normalized constant tensors under the
  // best map found; 0 for exact witnesses, +inf when certified false.
  double residual = 0;
  std::vector<std::vector<double>> witness_float;
  std::optional<RatMat> witness;  // exact witness, verified by change_basis
  bool exact = false;
  Fingerprint fp1, fp2;
  int best_restart = -1;
};

// Columns of the returned map send g to the standard pairing form: paired
// first-stratum directions with unit bracket into the center, radical last.
// Only for strata (m, 1); empty otherwise.
std::optional<RatMat> step2_canonical_map(const GradedLieAlgebra& g);

IsoResult stratified_iso_search(const GradedLieAlgebra& g1,
                                const GradedLieAlgebra& g2, int restarts = 50,
                                double tol = 1e-8, std::uint64_t seed = 1,
                                int workers = 0);

}  // namespace srgeo
