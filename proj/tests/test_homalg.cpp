#include <random>
#include <set>

#include "doctest.h"
#include "qprism/homalg.hpp"
#include "qprism/poincare.hpp"

using namespace qprism;

namespace {

// Brute-force cohomology: enumerate cocycles and coboundaries, read the
// invariant factors off the sizes of the p^j-torsion subgroups.
using Vec = std::vector<i64>;

std::vector<Vec> enumerate(int p, const std::vector<int>& e) {
    std::vector<Vec> out{Vec(e.size(), 0)};
    for (std::size_t i = 0; i < e.size(); ++i) {
        std::vector<Vec> nxt;
        for (const auto& v : out)
            for (i64 a = 0; a < ipow(p, e[i]); ++a) {
                auto w = v;
                w[i] = a;
                nxt.push_back(w);
            }
        out = std::move(nxt);
    }
    return out;
}

Vec apply(int p, const IMat& d, const std::vector<int>& tgt, const Vec& x) {
    Vec y(tgt.size(), 0);
    for (std::size_t i = 0; i < tgt.size(); ++i) {
        i64 m = ipow(p, tgt[i]), s = 0;
        for (std::size_t j = 0; j < x.size(); ++j) s = mod_norm(s + d[i][j] * x[j], m);
        y[i] = s;
    }
    return y;
}

std::vector<int> brute_cohomology(const ChainComplex& C, int q) {
    const int p = C.p;
    const auto& e = C.exps[q - C.lo];
    auto all = enumerate(p, e);
    std::vector<Vec> Z;
    for (const auto& x : all) {
        if (q < C.hi()) {
            auto y = apply(p, C.d[q - C.lo], C.exps[q + 1 - C.lo], x);
            if (!std::all_of(y.begin(), y.end(), [](i64 v) { return v == 0; })) continue;
        }
        Z.push_back(x);
    }
    std::set<Vec> B;
    if (q == C.lo)
        B.insert(Vec(e.size(), 0));
    else
        for (const auto& y : enumerate(p, C.exps[q - 1 - C.lo])) B.insert(apply(p, C.d[q - 1 - C.lo], e, y));
    auto logp = [&](std::size_t n) {
        int k = 0;
        while (n > 1) n /= p, ++k;
        return k;
    };
    std::vector<int> a{0};
    for (int j = 1;; ++j) {
        std::size_t cnt = 0;
        for (const auto& z : Z) {
            Vec w(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) w[i] = mod_norm(z[i] * ipow(p, j), ipow(p, e[i]));
            if (B.count(w)) ++cnt;
        }
        a.push_back(logp(cnt / B.size()));
        if (a[j] == logp(Z.size() / B.size())) break;
    }
    std::vector<int> out;
    for (std::size_t j = 1; j < a.size(); ++j) {
        int ge = a[j] - a[j - 1];
        int next = j + 1 < a.size() ? a[j + 1] - a[j] : 0;
        for (int c = 0; c < ge - next; ++c) out.push_back(static_cast<int>(j));
    }
    std::sort(out.rbegin(), out.rend());
    return out;
}

IMat random_map(std::mt19937_64& g, int p, const std::vector<int>& src, const std::vector<int>& tgt) {
    IMat d(tgt.size(), std::vector<i64>(src.size()));
    for (std::size_t i = 0; i < tgt.size(); ++i)
        for (std::size_t j = 0; j < src.size(); ++j) {
            i64 m = ipow(p, tgt[i]);
            i64 s = tgt[i] > src[j] ? ipow(p, tgt[i] - src[j]) : 1;
            d[i][j] = mod_norm(static_cast<i64>(g() % m) * s, m);
        }
    return d;
}

}  // namespace

TEST_CASE("integer Smith normal form") {
    BMat A{{2, 1}, {0, 2}};
    auto R = smith_normal_form(A);
    CHECK(R.S[0][0] == 1);
    CHECK(R.S[1][1] == 4);
    CHECK(R.S[0][1] == 0);
    CHECK(R.S[1][0] == 0);
    // U A V = S
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            BigInt s = 0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) s += R.U[i][a] * A[a][b] * R.V[b][j];
            CHECK(s == R.S[i][j]);
        }
    auto f = invariant_factors(BMat{{6, 0, 0}, {0, 10, 0}, {0, 0, 15}});
    CHECK(f == std::vector<BigInt>{1, 30, 30});
}

TEST_CASE("cokernel exponents over Z/p^E") {
    CHECK(cokernel_exponents(2, 3, IMat{{2, 0}, {0, 4}}) == std::vector<int>{2, 1});
    CHECK(cokernel_exponents(3, 2, IMat{{3}, {0}}) == std::vector<int>{2, 1});
    CHECK(cokernel_exponents(2, 2, IMat{{1, 0}, {0, 0}}) == std::vector<int>{2});
}

TEST_CASE("cohomology matches brute force on random complexes") {
    std::mt19937_64 g(23);
    for (int trial = 0; trial < 60; ++trial) {
        int p = trial % 3 == 0 ? 3 : 2;
        int emax = p == 2 ? 3 : 2;
        auto rand_exps = [&](int n) {
            std::vector<int> e(n);
            for (auto& x : e) x = 1 + static_cast<int>(g() % emax);
            return e;
        };
        ChainComplex C;
        C.p = p;
        C.lo = static_cast<int>(g() % 2);
        C.exps = {rand_exps(1 + g() % 2), rand_exps(1 + g() % 3), rand_exps(1 + g() % 2)};
        // d1 = random map into C^2; d0 = random cocycles of d1 as columns
        C.d.resize(2);
        C.d[1] = random_map(g, p, C.exps[1], C.exps[2]);
        std::vector<Vec> cyc;
        for (const auto& x : enumerate(p, C.exps[1])) {
            auto y = apply(p, C.d[1], C.exps[2], x);
            if (std::all_of(y.begin(), y.end(), [](i64 v) { return v == 0; })) cyc.push_back(x);
        }
        C.d[0].assign(C.exps[1].size(), std::vector<i64>(C.exps[0].size(), 0));
        for (std::size_t j = 0; j < C.exps[0].size(); ++j) {
            // well defined: p^{e_j} times the column must vanish
            std::vector<Vec> ok;
            for (const auto& z : cyc) {
                bool good = true;
                for (std::size_t i = 0; i < z.size(); ++i) good = good && mod_norm(z[i] * ipow(p, C.exps[0][j]), ipow(p, C.exps[1][i])) == 0;
                if (good) ok.push_back(z);
            }
            const auto& z = ok[g() % ok.size()];
            for (std::size_t i = 0; i < z.size(); ++i) C.d[0][i][j] = z[i];
        }
        auto rep = cohomology_all(C);
        for (int q = C.lo; q <= C.hi(); ++q) {
            INFO("trial " << trial << " degree " << q);
            CHECK(rep.groups[q - C.lo].exponents == brute_cohomology(C, q));
        }
    }
}

TEST_CASE("non-complexes are rejected") {
    ChainComplex C;
    C.p = 2;
    C.exps = {{2}, {2}, {2}};
    C.d = {IMat{{1}}, IMat{{1}}};
    CHECK_THROWS_AS(check_complex(C), Error);
    ChainComplex W;
    W.p = 2;
    W.exps = {{1}, {2}};
    W.d = {IMat{{1}}};
    CHECK_THROWS_AS(check_complex(W), Error);
    W.d = {IMat{{2}}};
    CHECK_NOTHROW(check_complex(W));
    CHECK(cohomology(W, 0).exponents == std::vector<int>{});
    CHECK(cohomology(W, 1).exponents == std::vector<int>{1});
}

TEST_CASE("kernel subgroup and bands") {
    std::vector<int> src{2, 2}, tgt{2};
    IMat d{{1, 1}};
    auto K = kernel_subgroup(2, src, tgt, d);
    CHECK(K.exponents == std::vector<int>{2});
    for (const auto& x : K.gens) CHECK(maps_to_zero(2, tgt, d, x));
    ChainComplex C;
    C.p = 2;
    C.exps = {{1, 1}, {1, 1}};
    C.bands = {{0, 1}, {0, 1}};
    C.d = {IMat{{1, 0}, {0, 0}}};
    auto b0 = C.band(0), b1 = C.band(1);
    CHECK(cohomology_all(b0).groups[0].is_zero());
    CHECK(cohomology_all(b1).groups[0].exponents == std::vector<int>{1});
    C.d = {IMat{{1, 1}, {0, 0}}};
    CHECK_THROWS_AS(C.band(1), Error);
}

TEST_CASE("multiplication by two on Z/4") {
    ChainComplex C;
    C.p = 2;
    C.exps = {{2}, {2}};
    C.d = {{{2}}};
    CHECK(cohomology(C, 0).exponents == std::vector<int>{1});
    CHECK(cohomology(C, 1).exponents == std::vector<int>{1});
    CHECK(brute_cohomology(C, 0) == std::vector<int>{1});
}

TEST_CASE("Poincare lemma at truncation") {
    CohomologyReport rep;
    auto r = poincare_check(2, 1, {1}, 4, &rep);
    CHECK(r.pass);
    CHECK(rep.groups[0].exponents == std::vector<int>{1});
    CHECK(rep.groups[1].exponents == std::vector<int>{1});
    CHECK(poincare_check(3, 1, {1}, 9).pass);
    CHECK(poincare_check(3, 1, {2, 1}, 9).pass);
    CHECK(poincare_check(2, 2, {1}, 4, &rep).pass);
    CHECK(rep.groups[1].exponents == std::vector<int>{1, 1});
    CHECK(rep.groups[2].exponents == std::vector<int>{1});
    CHECK(poincare_check(2, 1, {}, 4, &rep).pass);
    CHECK(rep.groups[0].is_zero());
    // the box complex agrees with brute-force enumeration
    ChainComplex C = pd_complex(2, 1, {2}, 4);
    CHECK(brute_cohomology(C, 0) == cohomology(C, 0).exponents);
    CHECK(brute_cohomology(C, 1) == cohomology(C, 1).exponents);
    try {
        pd_complex(2, 4, {1}, 40);
        FAIL("expected DepthExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DepthExceeded);
    }
}
