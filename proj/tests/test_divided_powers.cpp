#include "doctest.h"
#include "qprism/divided_powers.hpp"
#include "qprism/twisted.hpp"

using namespace qprism;

namespace {

std::shared_ptr<const EnvRing> q1env(int p, int n, std::vector<std::vector<i64>> centers, int W) {
    return EnvRing::build(envelope_spec(p, Mode::QOne, centers, W), n);
}

// t_l coordinates of a relative tower where variable v has center t_{v-1} (t_{-1} = a)
EnvSpec chain_spec(int p, Mode mode, int len, int W) {
    EnvSpec s = envelope_spec(p, mode, {{0}}, W);
    for (int v = 1; v < len; ++v) {
        VarSpec vs{VarSpec::Tau, {}, "tau" + std::to_string(v + 1)};
        vs.center.kind = CenterSpec::Lower;
        vs.center.lower = [v](const EnvRing& R) { return R.t(v - 1); };
        s.vars.push_back(vs);
    }
    return s;
}

}  // namespace

TEST_CASE("PD polynomial arithmetic") {
    auto R = PDRing::make(2, 1, 8, 3);
    auto X = [&](int n) { return PDElt::var(R, 3, 0, n); };
    CHECK(X(1) * X(1) == X(2).scaled(2));
    CHECK(X(2) * X(2) == X(4).scaled(6));
    CHECK(X(3).derive(0) == X(2));
    CHECK(X(1).derive(0) == PDElt::monomial(R, 3, Key{}));
    CHECK((X(1).pow(4)) == X(4).scaled(24));
    CHECK_THROWS_AS(X(5) * X(4), Error);
}

TEST_CASE("sigma at p = 2, a = 0 is delta(tau)") {
    auto E = q1env(2, 3, {{0}}, 4);
    PDSigmaData s = sigma_of(*E, 0);
    CHECK(s.verified);
    CHECK(s.sigma == E->delta_tau(0, 1).reduced(2));
    CHECK(E->tau(0) * E->tau(0) == E->delta_tau(0, 1).scaled(2));
}

TEST_CASE("sigma for other centers") {
    for (auto [p, a] : {std::pair{2, 5}, {3, 1}, {3, 10}, {2, 1}}) {
        auto E = q1env(p, 3, {{a}}, p * p);
        PDSigmaData s = sigma_of(*E, 0);
        CHECK(s.verified);
    }
    CHECK_THROWS_AS(sigma_of(*q1env(2, 2, {{2}}, 4), 0), Error);
    CHECK_THROWS_AS(sigma_of(*q1env(3, 2, {{2}}, 9), 0), Error);
    CHECK_THROWS_AS(sigma_of(*q1env(2, 2, {{5}}, 4), 0, 0), Error);
    CHECK_NOTHROW(sigma_of(*q1env(2, 2, {{5}}, 4), 0, -5));
}

TEST_CASE("PD dictionary examples at p = 2") {
    auto E = q1env(2, 2 + 2, {{0}}, 7);
    EnvToPD f(E, 2);
    auto pd = f.pd();
    int L = f.out_level();
    CHECK(f(E->tau(0)) == PDElt::var(pd, L, 0, 1));
    CHECK(f(E->delta_tau(0, 1)) == PDElt::var(pd, L, 0, 2));
    CHECK(f(E->tau(0) * E->delta_tau(0, 1)) == PDElt::var(pd, L, 0, 3).scaled(3));
    CHECK(f(E->tau(0) * E->delta_tau(0, 1)) == f(E->tau(0)) * f(E->delta_tau(0, 1)));
}

TEST_CASE("PD comparison is multiplicative and intertwines theta") {
    for (auto [p, K] : {std::pair{2, 1}, {2, 2}, {3, 1}}) {
        int N = 2, W = static_cast<int>(ipow(p, K + 1)) - 1;
        auto E = q1env(p, N + K, {{0}, {1}}, W);
        EnvToPD f(E, K);
        Derivation th(qhiggs_derivation(*E, 0), E);
        std::mt19937_64 g(p * 10 + K);
        for (int i = 0; i < 15; ++i) {
            EnvElt x = random_env(g, *E, W / 2), y = random_env(g, *E, W - W / 2);
            CHECK(f(x * y).same(f(x) * f(y)));
            EnvElt z = random_env(g, *E, W);
            CHECK(f(th(z)).same(f(z).derive(0)));
        }
    }
}

TEST_CASE("sigma identities on D(1) and D(2) at q = 1") {
    for (int p : {2, 3}) {
        auto D1 = EnvRing::build(chain_spec(p, Mode::QOne, 2, p * p), 3);
        // t_1 = t(0), t_0 = t(1) = t_1 + p tau'
        EnvElt tau12 = D1->tau(1);
        auto d12 = sigma_from(tau12, D1->t(0), D1->zero());
        auto d21 = sigma_from(-tau12, D1->t(1), D1->zero());
        CHECK(d12.verified);
        CHECK(d21.verified);
        CHECK(sigma_antisym_check(d12, d21).pass);
        auto bad = d12;
        bad.sigma = bad.sigma + D1->one();
        CHECK_FALSE(sigma_antisym_check(bad, d21).pass);

        auto D2 = EnvRing::build(chain_spec(p, Mode::QOne, 3, p * p), 3);
        // T2 = t(0), T1 = t(1) = T2 + p tau(1), T0 = t(2) = T1 + p tau(2)
        EnvElt a12 = D2->tau(1), a13 = D2->tau(1) + D2->tau(2), a23 = D2->tau(2);
        auto s12 = sigma_from(a12, D2->t(0), D2->zero());
        auto s13 = sigma_from(a13, D2->t(0), D2->zero());
        auto s23 = sigma_from(a23, D2->t(1), D2->zero());
        CHECK(s13.verified);
        CHECK(sigma_cocycle_check(s12, s13, s23).pass);
        auto bad12 = s12;
        bad12.sigma = bad12.sigma + D2->one();
        CHECK_FALSE(sigma_cocycle_check(bad12, s13, s23).pass);
        CHECK_THROWS_AS(sigma_cocycle_check(s12, s13, s13), Error);
    }
}
