#include "doctest.h"
#include "qprism/twisted.hpp"

using namespace qprism;

namespace {

std::shared_ptr<const EnvRing> env(int p, int n, std::vector<std::vector<i64>> centers, int W) {
    return EnvRing::build(envelope_spec(p, Mode::Generic, centers, W), n);
}

}  // namespace

TEST_CASE("twisted extension arithmetic") {
    auto R = env(2, 2, {{0}}, 4);
    EnvElt a = R->tau(0) * R->mu(), x = R->tau(0) + R->one(), y = R->scalar_int(3);
    auto u = ext_make(a, x, R->zero()), v = ext_make(a, y, R->zero());
    CHECK(ext_mul(u, v).x0 == x * y);
    CHECK(ext_mul(u, v).x1.is_zero());
    auto T = ext_make(a, R->zero(), R->one());
    auto T2 = ext_mul(T, T);
    CHECK(T2.x0.is_zero());
    CHECK(T2.x1 == a);
    auto w = ext_make(a, x, y);
    CHECK(ext_piAlpha(w) == x + a * y);
    CHECK(ext_pi0(w) == x);
    CHECK(ext_D(w) == y);
    auto other = ext_make(R->one(), x, y);
    CHECK_THROWS_AS(ext_mul(w, other), Error);
}

TEST_CASE("twisted delta-extension is a delta-ring") {
    auto R = env(3, 2, {{0}}, 9);
    Derivation th(qhiggs_derivation(*R, 0), R);
    std::mt19937_64 g(4);
    for (int i = 0; i < 10; ++i) {
        EnvElt x0 = random_env(g, *R, 1), x1 = random_env(g, *R, 1), y0 = random_env(g, *R, 1), y1 = random_env(g, *R, 1);
        auto x = ext_make(th.alpha(), x0, x1), y = ext_make(th.alpha(), y0, y1);
        auto dx = ext_delta(x, th.beta()), dy = ext_delta(y, th.beta());
        // W2 multiplicativity on the extension
        auto lhs = ext_delta(ext_mul(x, y), th.beta());
        auto xp = ext_mul(ext_mul(x, x), x), yp = ext_mul(ext_mul(y, y), y);
        auto dd = ext_mul(dx, dy);
        auto rhs = ext_add(ext_add(ext_mul(dx, yp), ext_mul(xp, dy)), ext_make(th.alpha(), dd.x0.scaled(3), dd.x1.scaled(3)));
        CHECK(ext_same(lhs, rhs));
    }
    auto T = ext_make(th.alpha(), R->zero(), R->one());
    auto dT = ext_delta(T, th.beta());
    CHECK(dT.x0.is_zero());
    CHECK(dT.x1.same(th.beta()));
}

TEST_CASE("q-Higgs derivation on the affine line chart") {
    auto A = EnvRing::build(chart_spec(2, Mode::Generic, 1, 6), 2);
    Derivation th(qhiggs_derivation(*A, 0), A);
    EnvElt t = A->t(0);
    CHECK(th(t) == A->xi());
    CHECK(th(t * t) == t.scaled(qint(A->base(), 2, 4)));
    for (int n = 1; n <= 5; ++n) CHECK(th(t.pow(n)) == t.pow(n - 1).scaled(qint(A->base(), 2, 2 * n)));
    CHECK(th(A->scalar_int(5)).is_zero());
    CHECK(th.gamma(t) == t.scaled(base_q(A->base(), 2).pow(2)));
}

TEST_CASE("q-Higgs derivation values on a two-variable envelope") {
    auto R = env(2, 2, {{0}, {1}}, 4);
    Derivation t1(qhiggs_derivation(*R, 0), R), t2(qhiggs_derivation(*R, 1), R);
    CHECK(t1(R->tau(0)) == R->one());
    CHECK(t1(R->tau(1)).is_zero());
    CHECK(t1(R->t(0)) == R->xi());
    CHECK(t1(R->t(1)).is_zero());
    CHECK(t1.gamma(R->t(0)) == R->t(0).scaled(base_q(R->base(), 2).pow(2)));
    CHECK(t1.gamma(R->tau(0)) == R->tau(0) + R->t(0) * R->mu());
    CHECK(t2.gamma(R->t(0)) == R->t(0));
    EnvElt c = R->scalar_int(7);
    CHECK(t2(c).is_zero());
    CHECK(t1.gamma(c) == c);
}

TEST_CASE("checks pass on q-Higgs derivations") {
    for (int p : {2, 3}) {
        auto R = env(p, 2, {{0}, {1}}, p * p);
        Derivation t1(qhiggs_derivation(*R, 0), R), t2(qhiggs_derivation(*R, 1), R);
        CHECK(section_check(t1, 20, 1, p).pass);
        CHECK(delta_compat_check(t1, 10, 2, 1).pass);
        CHECK(frobenius_relation_check(t1, 10, 3, 1).pass);
        CHECK(commute_check(t1, t2, 10, 4, p).pass);
    }
}

TEST_CASE("delta-compatible derivations kill delta of their kernel") {
    auto R = env(3, 2, {{0}, {2}}, 9);
    Derivation t1(qhiggs_derivation(*R, 0), R);
    EnvElt x = R->tau(1) * R->tau(1) + R->t(1);
    REQUIRE(t1(x).is_zero());
    CHECK(t1(R->delta(x)).is_zero());
}

TEST_CASE("negative controls fail") {
    auto R = env(2, 2, {{1}}, 4);
    auto bad = qhiggs_derivation(*R, 0);
    bad.leibniz = false;
    Derivation d(bad, R);
    Report r = section_check(d, 20, 1, 2);
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.witnesses.empty());
    auto badbeta = qhiggs_derivation(*R, 0);
    auto f = badbeta.data;
    badbeta.data = [f](const EnvRing& G) {
        auto dd = f(G);
        dd.beta = dd.beta + G.one();
        return dd;
    };
    CHECK_FALSE(delta_compat_check(Derivation(badbeta, R), 5, 1, 1).pass);
    auto Z = Derivation(zero_derivation([](const EnvRing& G) { return G.zero(); }, [](const EnvRing& G) { return G.zero(); }), R);
    CHECK(section_check(Z, 10, 1, 2).pass);
    // alpha depending on tau violates the commutation precondition
    auto R2 = env(2, 2, {{0}, {0}}, 4);
    auto s = qhiggs_derivation(*R2, 1);
    s.data = [](const EnvRing& G) {
        DerivationData dd;
        dd.alpha = G.tau(0);
        dd.beta = G.zero();
        dd.images = {G.zero(), G.one()};
        return dd;
    };
    s.delta_compatible = false;
    Derivation a(qhiggs_derivation(*R2, 0), R2), b(s, R2);
    CHECK_THROWS_AS(commute_check(a, b, 1, 1, 1), Error);
    auto nd = qhiggs_derivation(*R2, 0);
    nd.delta_compatible = false;
    CHECK_THROWS_AS(Derivation(nd, R2)(R2->delta_tau(0, 1)), Error);
}
