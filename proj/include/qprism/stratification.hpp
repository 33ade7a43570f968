#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qprism/env_hom.hpp"
#include "qprism/homalg.hpp"
#include "qprism/qhiggs.hpp"
#include "qprism/report.hpp"

namespace qprism {

using RingPtr = std::shared_ptr<const EnvRing>;
using HomPtr = std::shared_ptr<const EnvHom>;

// Simplicial envelopes over a polynomial chart D = D(0) in the variables t_i.
// D(1) has variables t0_i (the p_0 coordinates) and tau_i with [p]_q tau_i = t1_i - t0_i.
// D(2) has variables t0_i, a_i = tau_{1,0;i} and b_i = tau_{2,0;i}; tau_{2,1;i} = b_i - a_i.
// All rings are graded with t and tau of weight one and truncated above weight W.
struct SimplicialEnvelope {
    int d = 1;
    int W = 4;
    RingPtr D0, D1, D2;
    HomPtr p0, p1;          // D -> D(1)
    HomPtr delta;           // D(1) -> D
    HomPtr p01, p12, p02;   // D(1) -> D(2)
    HomPtr q0, q1, q2;      // D -> D(2)
    HomPtr delta2;          // D(2) -> D
    HomPtr iota;            // D(1) -> D(1), swaps the two factors
    DerivList theta0;       // on D(1), along the p_0 coordinates
    DerivList theta1;       // on D(1), along the p_1 coordinates
    DerivList theta21;      // on D(2), along t1
    DerivList theta22;      // on D(2), along t2
    DerivList chart_thetas; // on D

    int t0(int i) const { return i; }
    int tau(int i) const { return d + i; }
    int a(int i) const { return d + i; }
    int b(int i) const { return 2 * d + i; }
};

std::shared_ptr<const SimplicialEnvelope> build_simplicial(const RingPtr& chart, int W);
// delta-homomorphism property of the face maps and cosimplicial identities on generators
Report simplicial_check(const SimplicialEnvelope& S, int samples, std::uint64_t seed);

// graded truncated arithmetic
EnvElt tmul(const EnvElt& x, const EnvElt& y, int W);
EnvMat tmatmul(const EnvMat& A, const EnvMat& B, int W);
EnvMat mat_map(const EnvHom& f, const EnvMat& A);
EnvMat mat_truncate(const EnvMat& A, int W);
EnvMat mat_identity(const EnvRing& R, int r);
bool mat_same(const EnvMat& A, const EnvMat& B);
EnvMat kron(const EnvMat& A, const EnvMat& B);
std::string mat_string(const EnvMat& A);
int mat_weight(const EnvMat& A);

// epsilon: p_1^* M -> p_0^* M on the bases 1 (x) e_j, as a matrix over D(1) truncated at W
struct Stratification {
    std::shared_ptr<const SimplicialEnvelope> S;
    EnvMat E;
    nlohmann::ordered_json to_json() const;
};

// flat sections: theta_{1;i}(E) = E p_1(Theta_i), Delta(E) = 1
Stratification strat_from_higgs(const QHiggsModule& M, std::shared_ptr<const SimplicialEnvelope> S, int N_max = 64);
// Theta_i = Delta(theta_{1;i}(E)); exact through weight W - 1
QHiggsModule higgs_from_strat(const Stratification& eps, const std::string& name = "M");

Report flatness_check(const QHiggsModule& M, const Stratification& eps);
// Delta(E) = 1, p01(E) p12(E) = p02(E) and E iota(E) = 1
Report cocycle_check(const Stratification& eps);
// E p_1(gamma_{M,i} x) = gamma_{1;i}(E p_1(x)); corrupt uses the p_0-direction gamma instead
Report gamma_compat_check(const QHiggsModule& M, const Stratification& eps, bool corrupt = false);
// strat(phi^* M) = phi_{D(1)}(E)
Report frobenius_strat_check(const QHiggsModule& M, const Stratification& eps);
// strat(M (x) N) = E_M (x) E_N
Report tensor_strat_check(const QHiggsModule& M, const QHiggsModule& N, const Stratification& eM, const Stratification& eN);
// Higgs -> Strat -> Higgs and Strat -> Higgs -> Strat
Report roundtrip_check(const QHiggsModule& M, const Stratification& eps);
// ker(theta_M) and ker(x -> E p_1(x) - p_0(x)) on M truncated at weight W0
Report ca_h0_compare(const QHiggsModule& M, const Stratification& eps, int W0, Subgroup* out = nullptr);

}  // namespace qprism
