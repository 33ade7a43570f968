#include <random>
#include <set>

#include "doctest.h"
#include "oracle.hpp"
#include "qprism/env_hom.hpp"
#include "qprism/homalg.hpp"
#include "qprism/qhiggs.hpp"

using namespace qprism;

namespace {

using RingPtr = std::shared_ptr<const EnvRing>;

RingPtr chart(int p, int d, int cap, int n, Mode m = Mode::Generic) { return EnvRing::build(chart_spec(p, m, d, cap), n); }

EnvMat constant_matrix(const EnvRing& R, const std::vector<std::vector<i64>>& a) {
    EnvMat M;
    for (const auto& row : a) {
        MVec r;
        for (i64 x : row) r.push_back(R.scalar_int(x));
        M.push_back(r);
    }
    return M;
}

RingMap chart_map(const std::string& name, RingPtr src, RingPtr tgt, std::function<std::vector<EnvElt>(const EnvRing&)> images) {
    return RingMap::from_hom(std::make_shared<const EnvHom>(name, src, tgt, EnvHom::ImageFn(std::move(images))));
}

// log_p of the number of p^k-torsion elements of (+) Z/p^e
int torsion_log(const std::vector<int>& exps, int k) {
    int s = 0;
    for (int e : exps) s += std::min(e, k);
    return s;
}

std::vector<BaseElt> enumerate_ring(const BaseRing& R, int L) {
    std::vector<std::vector<i64>> polys{{}};
    for (int k = 0; k < R.deg_bound(L); ++k) {
        std::vector<std::vector<i64>> nxt;
        for (const auto& c : polys)
            for (i64 a = 0; a < R.modulus(L, k); ++a) {
                auto d = c;
                d.push_back(a);
                nxt.push_back(d);
            }
        polys = std::move(nxt);
    }
    std::vector<BaseElt> out;
    for (const auto& c : polys) out.push_back(BaseElt::from_poly(R, L, c));
    return out;
}

int logp(int p, std::size_t n) {
    int k = 0;
    while (n > 1) n /= p, ++k;
    return k;
}

std::string key_of(const BaseElt& x) {
    std::string s;
    for (auto c : x.coeffs()) s += std::to_string(c) + ",";
    return s;
}

// torsion profile of R/xR and of ann(x) by enumeration of R
std::pair<std::vector<int>, std::vector<int>> brute_profiles(const BaseRing& R, int L, const BaseElt& x, int kmax) {
    auto all = enumerate_ring(R, L);
    std::set<std::string> xR;
    for (const auto& y : all) xR.insert(key_of(x * y));
    std::vector<int> quo, ann;
    for (int k = 1; k <= kmax; ++k) {
        std::size_t nq = 0, na = 0;
        for (const auto& y : all) {
            BaseElt py = y.scaled(ipow(R.p, k));
            if (xR.count(key_of(py))) ++nq;
            if ((x * y).is_zero() && py.is_zero()) ++na;
        }
        quo.push_back(logp(R.p, nq / xR.size()));
        ann.push_back(logp(R.p, na));
    }
    return {quo, ann};
}

}  // namespace

TEST_CASE("q-Higgs derivation on the affine line: theta(t^n) = [pn]_q t^(n-1)") {
    for (int p : {2, 3}) {
        auto A = chart(p, 1, 7, 2);
        auto th = qhiggs_derivations(A);
        for (int n = 1; n <= 5; ++n) {
            EnvElt lhs = (*th[0])(A->t(0).pow(n));
            EnvElt rhs = A->scalar(qint(A->base(), 2, p * n)) * A->t(0).pow(n - 1);
            CHECK(lhs.same(rhs));
        }
    }
}

TEST_CASE("affine line cohomology matches the enumeration oracle") {
    const int W = 8;
    for (auto [p, n, mode] : {std::tuple{2, 1, Mode::Generic}, {2, 2, Mode::Generic}, {3, 1, Mode::Generic}, {3, 2, Mode::QOne}}) {
        auto A = chart(p, 1, W + 1, n, mode);
        auto O = QHiggsModule::trivial(A, qhiggs_derivations(A), 1);
        ChainComplex C = build_complex(O, W);
        const BaseRing& B = A->base();
        const int kmax = n + 2;
        std::vector<int> h0 = cohomology(C, 0).exponents, h1 = cohomology(C, 1).exponents;
        std::vector<int> q1(kmax, 0), a0(kmax, 0);
        for (int k = 1; k <= kmax; ++k) a0[k - 1] = torsion_log(std::vector<int>(B.deg_bound(n), 0), k);
        auto all = enumerate_ring(B, n);
        for (int k = 1; k <= kmax; ++k) {
            std::size_t cnt = 0;
            for (const auto& y : all)
                if (y.scaled(ipow(p, k)).is_zero()) ++cnt;
            a0[k - 1] = logp(p, cnt);  // the constants contribute all of R_n
        }
        for (int m = 1; m <= W; ++m) {
            auto [qu, an] = brute_profiles(B, n, qint(B, n, p * m), kmax);
            for (int k = 0; k < kmax; ++k) q1[k] += qu[k], a0[k] += an[k];
        }
        for (int k = 1; k <= kmax; ++k) {
            CAPTURE(p);
            CAPTURE(n);
            CAPTURE(k);
            CHECK(torsion_log(h1, k) == q1[k - 1]);
            CHECK(torsion_log(h0, k) == a0[k - 1]);
        }
        if (mode == Mode::QOne) {
            std::vector<int> expect;
            for (int m = 1; m <= W; ++m) {
                int v = 0;
                for (int x = p * m; x % p == 0; x /= p) ++v;
                expect.push_back(std::min(v, n + 1));
            }
            std::sort(expect.rbegin(), expect.rend());
            std::vector<int> got = h1;
            got.erase(std::remove(got.begin(), got.end(), 0), got.end());
            std::sort(got.rbegin(), got.rend());
            CHECK(got == expect);
        }
    }
}

TEST_CASE("integrability and nabla squared") {
    auto A = chart(2, 2, 5, 1);
    auto th = qhiggs_derivations(A);
    std::mt19937_64 g(3);
    QHiggsModule M(A, th, random_commuting(*A, 2, 2, g, false));
    CHECK(check_integrability(M).pass);
    CHECK(nabla_squared_check(M, 3).pass);
    CHECK_NOTHROW(build_complex(M, 3));

    QHiggsModule bad(A, th, {constant_matrix(*A, {{0, 1}, {0, 0}}), constant_matrix(*A, {{0, 0}, {1, 0}})});
    CHECK_FALSE(check_integrability(bad).pass);
    CHECK_FALSE(nabla_squared_check(bad, 2).pass);
    CHECK_THROWS_AS(build_complex(bad, 2), Error);
}

TEST_CASE("quasi-nilpotence") {
    auto A = chart(3, 1, 6, 1);
    auto th = qhiggs_derivations(A);
    QHiggsModule N(A, th, {constant_matrix(*A, {{0, 1, 2}, {0, 0, 1}, {0, 0, 0}})});
    auto r = check_quasi_nilpotent(N, 8);
    CHECK(r.pass);
    QHiggsModule I(A, th, {constant_matrix(*A, {{1, 0}, {0, 1}})});
    CHECK_FALSE(check_quasi_nilpotent(I, 6).pass);
    auto Z = QHiggsModule::trivial(A, th, 0);
    CHECK(check_quasi_nilpotent(Z, 1).pass);
    // the trivial rank-one module: theta(e) = 0 immediately
    CHECK(check_quasi_nilpotent(QHiggsModule::trivial(A, th, 1), 1).pass);
}

TEST_CASE("tensor products") {
    auto A = chart(2, 2, 5, 1);
    auto th = qhiggs_derivations(A);
    std::mt19937_64 g(9);
    QHiggsModule M(A, th, random_commuting(*A, 2, 2, g, false), "M");
    QHiggsModule N(A, th, random_commuting(*A, 2, 1, g, false), "N");
    auto O = QHiggsModule::trivial(A, th, 1);
    CHECK(same_module(tensor(O, M), M));
    CHECK(same_module(tensor(M, O), M));
    auto MN = tensor(M, N), NM = tensor(N, M);
    CHECK(check_integrability(MN).pass);
    FormMap sw = [&](const Form& x) {
        Form r;
        for (const auto& [I, m] : x.parts) r = form_add(r, form_term(I, swap_vec(M, N, m)));
        return r;
    };
    CHECK(chain_map_check("braiding", MN, NM, sw, 2, 2).pass);

    // rank one: u + v + alpha u v
    const EnvElt u = A->t(0) + A->scalar_int(1), v = A->t(1) * A->mu();
    QHiggsModule U(A, th, {{{u}}, {{A->zero()}}}), V(A, th, {{{v}}, {{A->zero()}}});
    auto UV = tensor(U, V);
    CHECK(UV.matrix(0)[0][0].same(u + v + th[0]->alpha() * u * v));
    CHECK_THROWS_AS(tensor(U, QHiggsModule::trivial(chart(2, 2, 5, 1), qhiggs_derivations(chart(2, 2, 5, 1)), 1)), Error);
}

TEST_CASE("Frobenius pullback") {
    for (int p : {2, 3}) {
        auto A = chart(p, 1, 6 * p, 1);
        auto th = qhiggs_derivations(A);
        const EnvElt u = A->t(0) + A->scalar_int(2);
        QHiggsModule U(A, th, {{{u}}});
        auto F = frobenius_pullback(U);
        CHECK(F.matrix(0)[0][0].same(A->phi(u) * A->xi() * A->t(0).pow(p - 1)));
        CHECK(same_module(F, scalar_extension(U, frobenius_spec(A, th))));
        CHECK(chain_map_check("frobenius", U, F, frobenius_chain_map(U), 3, 1).pass);
    }
    auto A = chart(2, 2, 8, 1);
    auto th = qhiggs_derivations(A);
    std::mt19937_64 g(4);
    QHiggsModule M(A, th, random_commuting(*A, 2, 2, g, true));
    auto F = frobenius_pullback(M);
    CHECK(check_integrability(F).pass);
    CHECK(same_module(F, scalar_extension(M, frobenius_spec(A, th))));
    CHECK(chain_map_check("frobenius", M, F, frobenius_chain_map(M), 2, 2).pass);
    CHECK(chain_map_check("frobenius_spec", M, F, pullback_chain_map(M, frobenius_spec(A, th)), 2, 2).pass);
}

TEST_CASE("fold of two indices onto one") {
    auto A2 = chart(2, 2, 6, 1), A1 = chart(2, 1, 6, 1);
    auto th2 = qhiggs_derivations(A2), th1 = qhiggs_derivations(A1);
    PullbackSpec S;
    S.name = "fold";
    S.g = chart_map("fold", A2, A1, [](const EnvRing& T) { return std::vector<EnvElt>{T.t(0), T.t(0)}; });
    S.psi = {0, 0};
    S.c = {A1->one(), A1->one()};
    S.target_thetas = th1;
    CHECK(validate_pullback(S, th2, 6, 1, 3).pass);
    const EnvElt u1 = A2->scalar_int(1) + A2->mu(), u2 = A2->scalar_int(3);
    QHiggsModule M(A2, th2, {{{u1}}, {{u2}}});
    auto E = scalar_extension(M, S);
    EnvElt gu1 = S.g(u1), gu2 = S.g(u2);
    CHECK(E.matrix(0)[0][0].same(gu1 + gu2 + th1[0]->alpha() * gu1 * gu2));
    CHECK(chain_map_check("fold", M, E, pullback_chain_map(M, S), 3, 2).pass);

    // fold followed by Frobenius is the composite pullback
    CHECK(pullback_cocycle_check(M, S, frobenius_spec(A1, th1), 3).pass);

    // a wrong twist constant is rejected
    PullbackSpec bad = S;
    bad.c = {A1->one(), A1->t(0)};
    CHECK_FALSE(validate_pullback(bad, th2, 4, 1, 2).pass);
    CHECK_THROWS_AS(scalar_extension(M, bad), Error);
}

TEST_CASE("non-monotone index maps are refused") {
    auto A = chart(2, 2, 5, 1);
    auto th = qhiggs_derivations(A);
    PullbackSpec S;
    S.name = "swap";
    S.g = chart_map("swap", A, A, [](const EnvRing& T) { return std::vector<EnvElt>{T.t(1), T.t(0)}; });
    S.psi = {1, 0};
    S.c = {A->one(), A->one()};
    S.target_thetas = th;
    auto M = QHiggsModule::trivial(A, th, 1);
    try {
        pullback_chain_map(M, S);
        FAIL("expected OrderViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OrderViolation);
    }
    CHECK_THROWS_AS(compose_pullbacks(S, S), Error);
}

TEST_CASE("products of forms") {
    auto A = chart(2, 2, 6, 1);
    auto th = qhiggs_derivations(A);
    std::mt19937_64 g(21);
    QHiggsModule M(A, th, random_commuting(*A, 2, 1, g, false), "M");
    QHiggsModule N(A, th, random_commuting(*A, 2, 2, g, false), "N");
    QHiggsModule P(A, th, random_commuting(*A, 2, 1, g, false), "P");
    CHECK(leibniz_check(M, N, 2).pass);

    auto O = QHiggsModule::trivial(A, th, 1);
    Form w1 = form_term(1u, O.basis(0)), w2 = form_term(2u, O.basis(0));
    CHECK(form_is_zero(product(O, O, w1, w1)));
    CHECK(form_same(product(O, O, w1, w2), form_scale(-1, product(O, O, w2, w1))));

    auto xs = basis_forms(M, 1, 2), ys = basis_forms(N, 1, 2), zs = basis_forms(P, 1, 2);
    auto MN = tensor(M, N), NP = tensor(N, P);
    for (std::size_t a = 0; a < xs.size(); a += 2)
        for (std::size_t b = 0; b < ys.size(); b += 3)
            for (std::size_t c = 0; c < zs.size(); c += 2)
                CHECK(form_same(product(MN, P, product(M, N, xs[a], ys[b]), zs[c]), product(M, NP, xs[a], product(N, P, ys[b], zs[c]))));
}

TEST_CASE("pullback along an inclusion respects products") {
    auto A1 = chart(2, 1, 6, 1), A2 = chart(2, 2, 6, 1);
    auto th1 = qhiggs_derivations(A1), th2 = qhiggs_derivations(A2);
    PullbackSpec S;
    S.name = "incl";
    S.g = chart_map("incl", A1, A2, [](const EnvRing& T) { return std::vector<EnvElt>{T.t(0)}; });
    S.psi = {0};
    S.c = {A2->one()};
    S.target_thetas = th2;
    CHECK(validate_pullback(S, th1, 4, 2, 3).pass);
    std::mt19937_64 g(8);
    QHiggsModule M(A1, th1, random_commuting(*A1, 1, 1, g, false), "M");
    QHiggsModule N(A1, th1, random_commuting(*A1, 1, 2, g, false), "N");
    auto MN = tensor(M, N);
    auto EM = scalar_extension(M, S), EN = scalar_extension(N, S), EMN = scalar_extension(MN, S);
    CHECK(same_module(EMN, tensor(EM, EN)));
    auto FM = pullback_chain_map(M, S), FN = pullback_chain_map(N, S), FMN = pullback_chain_map(MN, S);
    CHECK(chain_map_check("incl", M, EM, FM, 3, 1).pass);
    for (const auto& x : basis_forms(M, 2, 1))
        for (const auto& y : basis_forms(N, 2, 1)) CHECK(form_same(FMN(product(M, N, x, y)), product(EM, EN, FM(x), FN(y))));
}
