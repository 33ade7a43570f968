#include "doctest.h"
#include "env_util.hpp"
#include "qprism/witt2.hpp"

using namespace qprism;
using testutil::random_env;

TEST_CASE("p = 2 envelope relation at center zero") {
    auto R = EnvRing::build(envelope_spec(2, Mode::Generic, {{0}}, 4), 3);
    const BaseRing& B = R->base();
    BaseElt q = base_q(B, 3);
    BaseElt c = invert(q) * (base_one(B, 3) + q * q);
    CHECK(R->tau(0) * R->tau(0) == R->delta_tau(0, 1).scaled(c));
}

TEST_CASE("envelope relation defines t = a + xi tau with t - a divisible by xi") {
    for (auto [p, a] : {std::pair{2, 1}, {3, 0}, {3, 2}}) {
        auto R = EnvRing::build(envelope_spec(p, Mode::Generic, {{a}}, p * p), 2);
        // delta of (t - a)/xi recovers the stored delta-iterate
        EnvElt s = R->tau(0);
        CHECK(env_delta(s) == R->delta_tau(0, 1).reduced(1));
        // the relation delta(xi tau - t + a) = 0 holds since t = a + xi tau identically
        EnvElt t = R->t(0);
        CHECK((t - R->center(0) - R->xi() * s).is_zero());
    }
}

TEST_CASE("envelope ring axioms") {
    std::mt19937_64 g(23);
    for (auto [p, n, W] : {std::tuple{2, 3, 8}, {3, 2, 9}}) {
        auto R = EnvRing::build(envelope_spec(p, Mode::Generic, {{0}, {1}}, W), n);
        int wmax = W / (p * p);
        if (wmax < 1) wmax = 1;
        for (int i = 0; i < 10; ++i) {
            EnvElt x = random_env(g, *R, wmax), y = random_env(g, *R, wmax), z = random_env(g, *R, wmax);
            CHECK(x * y == y * x);
            CHECK((x * y) * z == x * (y * z));
            CHECK(x * (y + z) == x * y + x * z);
            CHECK(witt2_hom_check(p, x, y, [](const EnvElt& e) { return env_delta(e); },
                                  [](const EnvElt& a, const EnvElt& b) { return a.same(b); }));
            CHECK(env_phi(x).same(x.pow(p) + env_delta(x).scaled(p)));
        }
    }
}

TEST_CASE("delta and phi commute on the envelope") {
    std::mt19937_64 g(31);
    auto R = EnvRing::build(envelope_spec(2, Mode::Generic, {{0}}, 8), 3);
    for (int i = 0; i < 10; ++i) {
        EnvElt x = random_env(g, *R, 2);
        CHECK(env_delta(env_phi(x)).same(env_phi(env_delta(x))));
    }
}

TEST_CASE("polynomial chart is delta-constant") {
    auto R = EnvRing::build(chart_spec(3, Mode::Generic, 2, 6), 2);
    CHECK(env_delta(R->t(0)).is_zero());
    CHECK(env_phi(R->t(1)) == R->t(1).pow(3));
    CHECK(R->t(0) * R->t(1) * R->t(0) == R->t(1) * R->t(0).pow(2));
}

TEST_CASE("weight cap is enforced") {
    auto R = EnvRing::build(envelope_spec(2, Mode::Generic, {{0}}, 3), 2);
    CHECK_THROWS_AS(R->tau(0).pow(4), Error);
    CHECK_THROWS_AS(R->delta_tau(0, 2), Error);
}

TEST_CASE("relative center must be delta-constant") {
    EnvSpec s = envelope_spec(2, Mode::Generic, {{0}}, 4);
    VarSpec v{VarSpec::Tau, {}, "tau2"};
    v.center.kind = CenterSpec::Lower;
    v.center.lower = [](const EnvRing& R) { return R.tau(0); };
    s.vars.push_back(v);
    CHECK_THROWS_AS(EnvRing::build(s, 2), Error);
    s.vars[1].center.lower = [](const EnvRing& R) { return R.t(0); };
    CHECK_NOTHROW(EnvRing::build(s, 2));
}

TEST_CASE("q = 1 envelope is the pd-style envelope") {
    auto R = EnvRing::build(envelope_spec(2, Mode::QOne, {{0}}, 4), 3);
    // at q = 1, xi = 2 and t = 2 tau; t^2/2 = 2 tau^2 must lie in the envelope
    EnvElt t = R->t(0);
    CHECK(t * t == R->tau(0).pow(2).scaled(4));
}
