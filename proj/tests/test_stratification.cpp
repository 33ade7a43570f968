#include <random>

#include "doctest.h"
#include "qprism/stratification.hpp"

using namespace qprism;

namespace {

RingPtr chart(int p, int d, int cap, int n, Mode m = Mode::Generic) { return EnvRing::build(chart_spec(p, m, d, cap), n); }

EnvMat scalars(const EnvRing& R, const std::vector<std::vector<i64>>& a) {
    EnvMat M;
    for (const auto& row : a) {
        MVec r;
        for (i64 x : row) r.push_back(R.scalar_int(x));
        M.push_back(r);
    }
    return M;
}

void all_checks(const QHiggsModule& M, const std::shared_ptr<const SimplicialEnvelope>& S) {
    auto eps = strat_from_higgs(M, S);
    CHECK(flatness_check(M, eps).pass);
    CHECK(cocycle_check(eps).pass);
    CHECK(gamma_compat_check(M, eps).pass);
    CHECK(roundtrip_check(M, eps).pass);
    CHECK(frobenius_strat_check(M, eps).pass);
}

}  // namespace

TEST_CASE("simplicial envelopes") {
    for (int p : {2, 3}) {
        auto S = build_simplicial(chart(p, 1, 3 * p, 1), 3);
        auto r = simplicial_check(*S, 3, 1);
        CHECK(r.pass);
        for (const auto& w : r.witnesses) MESSAGE(w);
    }
    auto S2 = build_simplicial(chart(2, 2, 6, 1), 2);
    CHECK(simplicial_check(*S2, 2, 2).pass);
    CHECK_THROWS_AS(build_simplicial(EnvRing::build(envelope_spec(2, Mode::Generic, {{0}}, 4), 1), 2), Error);
}

TEST_CASE("trivial field gives the identity stratification") {
    auto A = chart(2, 1, 8, 1);
    auto S = build_simplicial(A, 4);
    auto O = QHiggsModule::trivial(A, qhiggs_derivations(A), 2);
    auto eps = strat_from_higgs(O, S);
    CHECK(mat_same(eps.E, mat_identity(*S->D1, 2)));
    auto back = higgs_from_strat(eps);
    CHECK(mat_same(back.matrix(0), scalars(*A, {{0, 0}, {0, 0}})));
    all_checks(O, S);
}

TEST_CASE("rank one at q = 1 is the exponential series") {
    // theta is d/dtau at q = 1, so epsilon = sum_n u^n tau^n / n!
    const int p = 3, W = 5;
    auto A = chart(p, 1, 3 * W, 2, Mode::QOne);
    auto S = build_simplicial(A, W);
    const i64 u = 3;
    QHiggsModule M(A, qhiggs_derivations(A), {scalars(*A, {{u}})});
    auto eps = strat_from_higgs(M, S);
    const EnvElt tau = S->D1->tau(S->tau(0));
    EnvElt prev = S->D1->zero();
    i64 fact = 1;
    for (int n = 0; n <= W; ++n) {
        if (n) fact *= n;
        EnvElt part = truncate(eps.E[0][0], n) - truncate(eps.E[0][0], n - 1);
        CHECK(part.scaled(fact).same(tau.pow(n).scaled(ipow(u, n))));
    }
    all_checks(M, S);
}

TEST_CASE("rank two strictly upper triangular field at p = 2") {
    auto A = chart(2, 1, 10, 1);
    auto S = build_simplicial(A, 4);
    QHiggsModule M(A, qhiggs_derivations(A), {scalars(*A, {{0, 1}, {0, 0}})});
    auto eps = strat_from_higgs(M, S);
    // finite sum: E = 1 + N tau
    EnvMat expect = mat_identity(*S->D1, 2);
    expect[0][1] = S->D1->tau(S->tau(0));
    CHECK(mat_same(eps.E, expect));
    all_checks(M, S);
}

TEST_CASE("random quasi-nilpotent fields") {
    std::mt19937_64 g(5);
    for (int p : {2, 3})
        for (int d : {1, 2}) {
            const int W = d == 1 ? 4 : 3;
            auto A = chart(p, d, p * (W + 1), 1);
            auto S = build_simplicial(A, W);
            auto th = qhiggs_derivations(A);
            for (int rank : {1, 2}) {
                QHiggsModule M(A, th, random_commuting(*A, d, rank, g, true), "M");
                QHiggsModule N(A, th, random_commuting(*A, d, 1, g, true), "N");
                all_checks(M, S);
                auto eM = strat_from_higgs(M, S), eN = strat_from_higgs(N, S);
                CHECK(tensor_strat_check(M, N, eM, eN).pass);
                CHECK(ca_h0_compare(M, eM, 1).pass);
            }
        }
}

TEST_CASE("t-dependent field on the line") {
    auto A = chart(2, 1, 12, 1);
    auto S = build_simplicial(A, 5);
    auto th = qhiggs_derivations(A);
    const EnvElt t = A->t(0);
    QHiggsModule M(A, th, {{{A->scalar_int(2) * t, t + A->one()}, {A->zero(), A->mu()}}});
    all_checks(M, S);
    auto eps = strat_from_higgs(M, S);
    CHECK(ca_h0_compare(M, eps, 2).pass);
}

TEST_CASE("negative controls") {
    auto A = chart(2, 1, 10, 2);
    auto S = build_simplicial(A, 4);
    auto th = qhiggs_derivations(A);
    QHiggsModule M(A, th, {scalars(*A, {{0, 1}, {0, 0}})});
    auto eps = strat_from_higgs(M, S);
    CHECK_FALSE(gamma_compat_check(M, eps, true).pass);
    Stratification bad = eps;
    bad.E[1][0] += S->D1->tau(S->tau(0)).pow(2);
    CHECK_FALSE(cocycle_check(bad).pass);
    CHECK_FALSE(flatness_check(M, bad).pass);
    Stratification aug = eps;
    aug.E[0][0] += S->D1->t(0);
    CHECK_THROWS_AS(higgs_from_strat(aug), Error);
    QHiggsModule I(A, th, {scalars(*A, {{1}})});
    try {
        strat_from_higgs(I, S);
        FAIL("expected NotQuasiNilpotent");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotQuasiNilpotent);
    }
}

TEST_CASE("Cech-Alexander H0 examples") {
    auto A = chart(2, 1, 10, 1);
    auto S = build_simplicial(A, 4);
    auto th = qhiggs_derivations(A);
    auto O = QHiggsModule::trivial(A, th, 1);
    Subgroup K;
    CHECK(ca_h0_compare(O, strat_from_higgs(O, S), 2, &K).pass);
    // R_1 from the constants plus ann([2]_q) t = (Z/2)^2 and ann([4]_q) t^2 = R_1, since [4]_q = 0 in R_1
    std::vector<int> e = K.exponents;
    e.erase(std::remove(e.begin(), e.end(), 0), e.end());
    std::sort(e.rbegin(), e.rend());
    CHECK(e == std::vector<int>{2, 2, 1, 1, 1, 1});
    QHiggsModule U(A, th, {scalars(*A, {{2}})});
    CHECK(ca_h0_compare(U, strat_from_higgs(U, S), 2).pass);
}
