#pragma once

#include <vector>

#include "qprism/homalg.hpp"
#include "qprism/report.hpp"

namespace qprism {

// Divided power de Rham complex M[X_1..X_d]_PD (x) Omega^* truncated to the box
// 0 <= n_i < depth, with coefficient module M = sum_j Z/p^{coeff_exps[j]} and
// band = PD degree + form degree.
ChainComplex pd_complex(int p, int d, const std::vector<int>& coeff_exps, int depth);

// H^0 = M in band 0, every interior band exact, and the truncation boundary
// contributes exactly one copy of M in degree |S| and band |S| depth for each
// nonempty set S of variables.
Report poincare_check(int p, int d, const std::vector<int>& coeff_exps, int depth, CohomologyReport* out = nullptr);
// the same comparison on a given complex with the box layout of pd_complex
Report poincare_check(const ChainComplex& C, int d, const std::vector<int>& coeff_exps, int depth, CohomologyReport* out = nullptr);

}  // namespace qprism
