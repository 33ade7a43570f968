#include "doctest.h"
#include "oracle.hpp"
#include "qprism/base_ring.hpp"
#include "qprism/witt2.hpp"

using namespace qprism;

namespace {

BaseRing ring(int p, int n, Mode m = Mode::Generic) { return BaseRing{p, n, m}; }

bool eq_common(const BaseElt& a, const BaseElt& b) { return a.equal_at(b, std::min(a.level(), b.level())); }

}  // namespace

TEST_CASE("graded truncation arithmetic") {
    auto R = ring(2, 2);
    CHECK(base_mu(R, 2) * base_one(R, 2) == base_mu(R, 2));
    CHECK(base_q(R, 2) * base_q(R, 2) == BaseElt::from_poly(R, 2, {1, 2, 1}));
    auto R1 = ring(2, 1);
    CHECK((qint(R1, 1, 2) * base_mu(R1, 1)).is_zero());
    auto R3 = ring(3, 2);
    // mu^2 coefficient lives mod 3^{2}, mu^0 mod 3^3 at level 2
    CHECK(R3.modulus(2, 0) == 27);
    CHECK(R3.modulus(2, 2) == 9);
    CHECK(R3.modulus(2, 5) == 3);
    CHECK(R3.deg_bound(2) == 6);
}

TEST_CASE("delta and phi on constants") {
    for (int p : {2, 3, 5}) {
        auto R = ring(p, 3);
        CHECK(delta(base_q(R, 3)).is_zero());
        CHECK(delta(base_one(R, 3)).is_zero());
        CHECK(phi(base_q(R, 3)) == base_q(R, 3).pow(p));
        CHECK(phi(BaseElt::from_int(R, 3, 7)) == BaseElt::from_int(R, 3, 7));
        CHECK(phi(base_mu(R, 3)) == base_xi(R, 3) * base_mu(R, 3));
        CHECK(delta(base_mu(R, 3)) == (base_eta(R, 3) * base_mu(R, 3)).reduced(2));
    }
    auto R = ring(2, 2);
    CHECK(delta(base_mu(R, 2)) == base_mu(R, 1));
    CHECK(qint(R, 2, 2) == BaseElt::from_poly(R, 2, {2, 1}));
    CHECK(base_eta(R, 2).is_one());
    CHECK(qint(R, 2, 1).is_one());
}

TEST_CASE("delta(xi) is a unit congruent to 1 - p^(p-1) mod mu") {
    for (int p : {2, 3, 5}) {
        auto R = ring(p, 2);
        BaseElt d = delta(base_xi(R, 2));
        CHECK(d.is_unit());
        CHECK(mod_norm(d.coeff(0) - (1 - ipow(p, p - 1)), R.modulus(1, 0)) == 0);
    }
}

TEST_CASE("xi identity holds exactly at every level") {
    for (int p : {2, 3, 5})
        for (int L = 1; L <= 3; ++L) {
            auto R = ring(p, L);
            BaseElt mu = base_mu(R, L), eta = base_eta(R, L), xi = base_xi(R, L);
            BaseElt lhs = (mu.pow(p - 1) + eta.scaled(p)).reduced(L - 1) * delta(xi) + (eta * xi.pow(p)).reduced(L - 1);
            BaseElt corr(R, L - 1);
            for (int nu = 1; nu <= p - 1; ++nu) corr += (mu.pow(nu - 1) * xi.pow(nu)).scaled(binom(p, nu) / p).reduced(L - 1);
            CHECK((lhs - corr).is_zero());
        }
}

TEST_CASE("delta agrees with the untruncated oracle") {
    std::mt19937_64 g(11);
    for (auto [p, n] : {std::pair{2, 3}, {3, 2}, {5, 1}, {2, 5}})
        for (Mode m : {Mode::Generic, Mode::QOne}) {
            auto R = ring(p, n, m);
            for (int i = 0; i < 200; ++i) {
                BaseElt x = oracle::random_elt(g, R, n);
                CHECK(delta(x) == oracle::delta(x));
            }
        }
}

TEST_CASE("delta is well defined on precision classes") {
    std::mt19937_64 g(5);
    auto R = ring(3, 2);
    for (int i = 0; i < 50; ++i) {
        BaseElt x = oracle::random_elt(g, R, 2);
        // perturb the lift by an element of I^3 and reduce through the oracle
        oracle::IPoly l = oracle::lift(x);
        l.resize(8);
        l[0] += 27 * (i + 1);
        l[2] += 9 * 3;
        l[6] += 1;
        oracle::IPoly f = oracle::frob(l, 3);
        oracle::IPoly num = oracle::sub(f, oracle::pw(l, 3));
        for (auto& c : num) c /= 3;
        CHECK(oracle::reduce(R, 1, num) == delta(x));
    }
}

TEST_CASE("witt vectors of length two") {
    auto R = ring(3, 2);
    std::mt19937_64 g(3);
    BaseElt x0 = oracle::random_elt(g, R, 2), x1 = oracle::random_elt(g, R, 1);
    Witt2<BaseElt> one{base_one(R, 2), BaseElt(R, 1)};
    Witt2<BaseElt> x{x0, x1};
    auto r = witt2_mul(3, one, x);
    CHECK(r.x0 == x0);
    CHECK(r.x1 == x1);
    Witt2<BaseElt> e{BaseElt(R, 2), base_one(R, 1)};
    auto s = witt2_add(3, e, e);
    CHECK(s.x0.is_zero());
    CHECK(s.x1 == BaseElt::from_int(R, 1, 2));
}

TEST_CASE("delta axioms on random pairs") {
    std::mt19937_64 g(7);
    for (auto [p, n] : {std::pair{2, 3}, {3, 2}, {5, 1}}) {
        auto R = ring(p, n);
        for (int i = 0; i < 100; ++i) {
            BaseElt x = oracle::random_elt(g, R, n), y = oracle::random_elt(g, R, n);
            CHECK(witt2_hom_check(p, x, y, [](const BaseElt& z) { return delta(z); }, eq_common));
            CHECK(eq_common(phi(delta(x)), delta(phi(x))));
            CHECK(phi(x) == x.pow(p) + times_p(delta(x)));
        }
    }
}

TEST_CASE("units and inversion") {
    auto R = ring(2, 3);
    CHECK(invert(base_one(R, 3)).is_one());
    BaseElt q = base_q(R, 3);
    CHECK((q * invert(q)).is_one());
    CHECK_THROWS_AS(invert(base_mu(R, 3)), Error);
    auto R5 = ring(5, 2);
    BaseElt u = BaseElt::from_poly(R5, 2, {3, 7, 1, 4});
    CHECK((u * invert(u)).is_one());
}

TEST_CASE("q one mode") {
    auto R = ring(3, 2, Mode::QOne);
    CHECK(base_xi(R, 2) == BaseElt::from_int(R, 2, 3));
    CHECK(base_eta(R, 2).is_one());
    CHECK(base_mu(R, 2).is_zero());
    CHECK(delta(BaseElt::from_int(R, 2, 3)) == BaseElt::from_int(R, 1, 1 - 9));
}
