#include "qprism/suites.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "qprism/divided_powers.hpp"
#include "qprism/envelope.hpp"
#include "qprism/homalg.hpp"
#include "qprism/poincare.hpp"
#include "qprism/qhiggs.hpp"
#include "qprism/stratification.hpp"
#include "qprism/twisted.hpp"
#include "qprism/witt2.hpp"

namespace qprism {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

bool pick(int want, int v) { return want < 0 || want == v; }
int samples_or(const SuiteConfig& c, int def) { return c.samples >= 0 ? c.samples : def; }
std::string S(i64 v) { return std::to_string(v); }

std::vector<int> normalized(std::vector<int> e) {
    e.erase(std::remove(e.begin(), e.end(), 0), e.end());
    std::sort(e.rbegin(), e.rend());
    return e;
}

std::string exps_string(const std::vector<int>& e) {
    std::string s = "[";
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
    return s + "]";
}

// Runs fn(0..count-1) on the configured number of workers and merges in index order.
// Invariant violations become failed reports; input and budget errors are rethrown.
void run_instances(Report& rep, int count, int threads, const std::function<Report(int)>& fn) {
    std::vector<Report> out(count);
    std::atomic<int> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto worker = [&]() {
        for (int i; (i = next++) < count;) {
            try {
                out[i] = fn(i);
            } catch (const Error& e) {
                if (exit_code(e.kind()) != 1) {
                    std::lock_guard<std::mutex> g(mu);
                    if (!first) first = std::current_exception();
                    continue;
                }
                out[i] = Report("instance " + S(i), "");
                out[i].fail(e.what());
            }
        }
    };
    const int nt = std::max(1, std::min(threads, count));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
    for (const auto& r : out) rep.merge(r);
}

RingPtr chart(int p, int d, int cap, int n, Mode m = Mode::Generic) { return EnvRing::build(chart_spec(p, m, d, cap), n); }

RingMap chart_map(const std::string& name, RingPtr src, RingPtr tgt, std::function<std::vector<EnvElt>(const EnvRing&)> images) {
    return RingMap::from_hom(std::make_shared<const EnvHom>(name, src, tgt, EnvHom::ImageFn(std::move(images))));
}

// ---------------------------------------------------------------- delta axioms

Report suite_delta_axioms(const SuiteConfig& cfg) {
    Report rep("delta-axioms", "W2 ring homomorphism, delta of powers, phi delta = delta phi", cfg.seed);
    const int N = samples_or(cfg, 1000);
    for (auto [p, n] : {std::pair{2, 3}, {3, 2}, {5, 1}}) {
        if (!pick(cfg.p, p) || !pick(cfg.n, n)) continue;
        const BaseRing R{p, n, Mode::Generic};
        std::mt19937_64 g(derive_seed(cfg.seed, 100 * p + n));
        auto dl = [&](const BaseElt& x) {
            BaseElt d = delta(x);
            return cfg.corrupt ? d + base_one(R, d.level()) : d;
        };
        auto eq = [](const BaseElt& a, const BaseElt& b) { return a.equal_at(b, std::min(a.level(), b.level())); };
        const std::string at = "p=" + S(p) + ",n=" + S(n);
        rep.expect(dl(BaseElt(R, n)).is_zero() && dl(base_one(R, n)).is_zero(), at + ": delta(0) or delta(1) nonzero");
        for (int i = 0; i < N; ++i) {
            BaseElt x = random_base(g, R, n), y = random_base(g, R, n);
            const std::string w = at + ",x=" + x.to_string() + ",y=" + y.to_string();
            rep.expect(witt2_hom_check(p, x, y, dl, eq), w + ": (x, delta x) is not additive and multiplicative");
            const unsigned m = 1 + static_cast<unsigned>(g() % 5);
            BaseElt dx = dl(x), rhs(R, n - 1);
            for (unsigned j = 1; j <= m; ++j)
                rhs += (x.pow(p * (m - j)).reduced(n - 1) * dx.pow(j)).scaled(binom(m, j) * ipow(p, j - 1));
            rep.expect(eq(dl(x.pow(m)), rhs), w + ",m=" + S(m) + ": delta(x^m) power formula");
            rep.expect(eq(phi(dl(x)), dl(phi(x))), w + ": phi delta != delta phi");
        }
    }
    return rep;
}

// ------------------------------------------------------------- base identities

Report suite_base_identities(const SuiteConfig& cfg) {
    Report rep("base-identities", "delta(mu) = eta mu, phi(mu) = [p]_q mu and the xi identity", cfg.seed);
    for (int p : {2, 3, 5})
        for (int L = 1; L <= 3; ++L) {
            if (!pick(cfg.p, p) || !pick(cfg.n, L)) continue;
            const BaseRing R{p, L, Mode::Generic};
            BaseElt mu = base_mu(R, L), xi = base_xi(R, L), eta = base_eta(R, L);
            if (cfg.corrupt) eta += base_one(R, L);
            const std::string at = "p=" + S(p) + ",level=" + S(L);
            rep.expect(delta(mu) == (eta * mu).reduced(L - 1), at + ": delta(mu) != eta mu");
            rep.expect(phi(mu) == xi * mu, at + ": phi(mu) != [p]_q mu");
            rep.expect(xi == qint(R, L, p), at + ": xi != 1 + q + ... + q^(p-1)");
            BaseElt lhs = (mu.pow(p - 1) + eta.scaled(p)).reduced(L - 1) * delta(xi) + (eta * xi.pow(p)).reduced(L - 1);
            BaseElt corr(R, L - 1);
            for (int nu = 1; nu <= p - 1; ++nu) corr += (mu.pow(nu - 1) * xi.pow(nu)).scaled(binom(p, nu) / p).reduced(L - 1);
            rep.expect((lhs - corr).is_zero(), at + ": xi identity residual " + (lhs - corr).to_string());
        }
    return rep;
}

// -------------------------------------------------------------------- envelope

int envelope_weight(int p) { return std::max(8, p * p); }

RingPtr golden_envelope(int p, int n, int d) {
    std::vector<std::vector<i64>> centers{{0}};
    if (d == 2) centers.push_back({1});
    return EnvRing::build(envelope_spec(p, Mode::Generic, centers, envelope_weight(p)), n);
}

// compares rendered golden content against a file; a missing directory skips the check
void golden_compare(Report& rep, const SuiteConfig& cfg, const std::string& name, const std::string& content) {
    if (cfg.golden_dir.empty()) return;
    std::ifstream in(cfg.golden_dir + "/" + name);
    if (!in) {
        rep.fail("missing golden file " + name);
        return;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json want, got = nlohmann::json::parse(content);
    try {
        want = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception&) {
        rep.fail("unparsable golden file " + name);
        return;
    }
    rep.expect(want == got, "rewrite tables differ from golden file " + name);
}

Report suite_envelope(const SuiteConfig& cfg) {
    Report rep("envelope", "normal-form ring axioms, delta(t_i) = 0, golden rewrite tables", cfg.seed);
    const int N = samples_or(cfg, 200);
    for (int p : {2, 3})
        for (int n : {1, 2, 3})
            for (int d : {1, 2}) {
                if (!pick(cfg.p, p) || !pick(cfg.n, n) || !pick(cfg.d, d)) continue;
                RingPtr R = golden_envelope(p, n, d);
                const std::string at = "p=" + S(p) + ",n=" + S(n) + ",d=" + S(d);
                std::mt19937_64 g(derive_seed(cfg.seed, 1000 * p + 10 * n + d));
                const int wmax = R->weight_cap() / 3;
                for (int i = 0; i < N; ++i) {
                    EnvElt x = random_env(g, *R, wmax), y = random_env(g, *R, wmax), z = random_env(g, *R, wmax);
                    const std::string w = at + ",x=" + x.to_string() + ",y=" + y.to_string() + ",z=" + z.to_string();
                    rep.expect(x * y == y * x, w + ": xy != yx");
                    rep.expect((x * y) * z == x * (y * z), w + ": (xy)z != x(yz)");
                    rep.expect(x * (y + z) == x * y + x * z, w + ": x(y+z) != xy + xz");
                }
                for (int i = 0; i < d; ++i) {
                    EnvElt t = cfg.corrupt ? R->t(i) + R->one() : R->t(i);
                    EnvElt dt = env_delta(t);
                    rep.expect(dt.is_zero(), at + ": delta(t_" + S(i + 1) + ") = " + dt.to_string());
                }
                golden_compare(rep, cfg, envelope_golden_name(p, n, d), R->rules_json());
            }
    return rep;
}

// ----------------------------------------------------------- q-Higgs derivations

Report suite_qhiggs_derivations(const SuiteConfig& cfg) {
    Report rep("qhiggs-derivations", "commuting, delta-compatible q-Higgs derivations with the Frobenius relation", cfg.seed);
    const int N = samples_or(cfg, 100);
    const int n = cfg.n < 0 ? 2 : cfg.n;
    for (int p : {2, 3}) {
        if (!pick(cfg.p, p)) continue;
        RingPtr R = EnvRing::build(envelope_spec(p, Mode::Generic, {{0}, {1}}, p * p), n);
        std::vector<DerivationSpec> specs{qhiggs_derivation(*R, 0), qhiggs_derivation(*R, 1)};
        if (cfg.corrupt)
            for (auto& s : specs) {
                auto f = s.data;
                s.data = [f](const EnvRing& G) {
                    auto dd = f(G);
                    dd.beta = dd.beta + G.one();
                    return dd;
                };
            }
        Derivation t1(specs[0], R), t2(specs[1], R);
        const std::string at = "p=" + S(p) + ",n=" + S(n);
        const std::uint64_t s = derive_seed(cfg.seed, p);
        rep.merge(commute_check(t1, t2, N, s, p));
        for (const Derivation* t : {&t1, &t2}) {
            rep.merge(delta_compat_check(*t, N, s + 1, 1));
            rep.merge(frobenius_relation_check(*t, N, s + 2, 1));
        }
        const EnvElt qp = R->scalar(base_q(R->base(), n).pow(p));
        for (int i = 0; i < 2; ++i) {
            const Derivation& t = i ? t2 : t1;
            rep.expect(t.gamma(R->t(i)) == qp * R->t(i), at + ": gamma_" + S(i + 1) + "(t_" + S(i + 1) + ") != q^p t");
            rep.expect(t.gamma(R->t(1 - i)) == R->t(1 - i), at + ": gamma_" + S(i + 1) + " moves the other coordinate");
        }
        std::mt19937_64 g(s + 3);
        for (int k = 0; k < N; ++k) {
            EnvElt x = random_env(g, *R, p), y = random_env(g, *R, p);
            rep.expect(t1.gamma(x * y).same(t1.gamma(x) * t1.gamma(y)), at + ": gamma_1 not multiplicative at " + x.to_string());
        }
    }
    return rep;
}

// ---------------------------------------------------------------- PD comparison

RingPtr q1env(int p, int n, std::vector<std::vector<i64>> centers, int W) {
    return EnvRing::build(envelope_spec(p, Mode::QOne, centers, W), n);
}

Report suite_pd_comparison(const SuiteConfig& cfg) {
    Report rep("pd-comparison", "tau^p = p sigma; the PD dictionary is multiplicative and intertwines theta with d/dX", cfg.seed);
    const int N = samples_or(cfg, 20);
    for (auto [p, K] : {std::pair{2, 1}, {2, 2}, {3, 1}, {3, 2}}) {
        if (!pick(cfg.p, p) || !pick(cfg.depth, K)) continue;
        const int n = 2, W = static_cast<int>(ipow(p, K + 1)) - 1;
        const std::vector<std::vector<i64>> centers{{0}, {1}};
        RingPtr E = q1env(p, n + K, centers, W);
        const std::string at = "p=" + S(p) + ",K=" + S(K);
        for (int i = 0; i < E->nvars(); ++i) {
            PDSigmaData s = sigma_of(*E, i);
            if (cfg.corrupt) s.sigma = s.sigma + E->one();
            rep.expect(s.tau.pow(p).same(s.sigma.scaled(p)), at + ": tau_" + S(i + 1) + "^p != p sigma with sigma = " + s.sigma.to_string());
        }
        EnvToPD f(E, K);
        Derivation th(qhiggs_derivation(*E, 0), E);
        std::mt19937_64 g(derive_seed(cfg.seed, 10 * p + K));
        for (int i = 0; i < N; ++i) {
            EnvElt x = random_env(g, *E, W / 2), y = random_env(g, *E, W - W / 2), z = random_env(g, *E, W);
            rep.expect(f(x * y).same(f(x) * f(y)), at + ": not multiplicative at x=" + x.to_string() + ",y=" + y.to_string());
            rep.expect(f(th(z)).same(f(z).derive(0)), at + ": theta does not match d/dX at " + z.to_string());
        }
        golden_compare(rep, cfg, pd_golden_name(p, K), f.dictionary().dump());
    }
    return rep;
}

// ------------------------------------------------------------------------ sigma

// tower whose variable v has center t_{v-1}
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

Report suite_sigma(const SuiteConfig& cfg) {
    Report rep("sigma", "sigma antisymmetry and the cocycle identity on D(2) mod mu", cfg.seed);
    const int n = cfg.n < 0 ? 3 : cfg.n;
    for (int p : {2, 3}) {
        if (!pick(cfg.p, p)) continue;
        const std::string at = "p=" + S(p);
        auto D1 = EnvRing::build(chain_spec(p, Mode::QOne, 2, p * p), n);
        EnvElt tau = D1->tau(1);
        auto d12 = sigma_from(tau, D1->t(0), D1->zero());
        auto d21 = sigma_from(-tau, D1->t(1), D1->zero());
        if (cfg.corrupt) d12.sigma = d12.sigma + D1->one();
        rep.expect(d12.verified && d21.verified, at + ": tau^p = p sigma fails on D(1)");
        rep.merge(sigma_antisym_check(d12, d21));

        auto D2 = EnvRing::build(chain_spec(p, Mode::QOne, 3, p * p), n);
        EnvElt a12 = D2->tau(1), a13 = D2->tau(1) + D2->tau(2), a23 = D2->tau(2);
        auto s12 = sigma_from(a12, D2->t(0), D2->zero());
        auto s13 = sigma_from(a13, D2->t(0), D2->zero());
        auto s23 = sigma_from(a23, D2->t(1), D2->zero());
        if (cfg.corrupt) s12.sigma = s12.sigma + D2->one();
        rep.expect(s12.verified && s13.verified && s23.verified, at + ": tau^p = p sigma fails on D(2)");
        rep.merge(sigma_cocycle_check(s12, s13, s23));
    }
    return rep;
}

// -------------------------------------------------------------------- complexes

struct ComplexCase {
    int p, d;
    RingPtr A, other;  // the chart and the chart of the other dimension
};

Report complex_instance(const ComplexCase& c, int idx, int rank, bool nilpotent, std::uint64_t seed, bool corrupt) {
    Report rep("instance " + S(idx) + " (p=" + S(c.p) + ",d=" + S(c.d) + ",rank=" + S(rank) + ")", "");
    std::mt19937_64 g(seed);
    auto th = qhiggs_derivations(c.A);
    QHiggsModule M(c.A, th, random_commuting(*c.A, c.d, rank, g, nilpotent), "M");
    QHiggsModule N(c.A, th, random_commuting(*c.A, c.d, 1, g, nilpotent), "N");
    const int W = c.d == 1 ? 4 : 3;
    rep.merge(check_integrability(M));
    rep.merge(nabla_squared_check(M, W));
    ChainComplex C = build_complex(M, W);
    rep.samples += C.exps.size();

    // Frobenius, with the untwisted pullback as the corrupted target
    QHiggsModule F = frobenius_pullback(M);
    if (corrupt) {
        RingMap phi = RingMap::frobenius(c.A);
        std::vector<EnvMat> T;
        for (const auto& A : M.matrices()) {
            EnvMat B = A;
            for (auto& row : B)
                for (auto& e : row) e = phi(e);
            T.push_back(B);
        }
        F = QHiggsModule(c.A, th, T, "phi*M untwisted");
    }
    rep.merge(chain_map_check("frobenius", M, F, frobenius_chain_map(M), 2, c.d));

    // scalar extension: the fold 2 -> 1, or the inclusion 1 -> 2
    auto tho = qhiggs_derivations(c.other);
    PullbackSpec S;
    if (c.d == 2) {
        S.name = "fold";
        S.g = chart_map("fold", c.A, c.other, [](const EnvRing& T) { return std::vector<EnvElt>{T.t(0), T.t(0)}; });
        S.psi = {0, 0};
        S.c = {c.other->one(), c.other->one()};
    } else {
        S.name = "inclusion";
        S.g = chart_map("inclusion", c.A, c.other, [](const EnvRing& T) { return std::vector<EnvElt>{T.t(0)}; });
        S.psi = {0};
        S.c = {c.other->one()};
    }
    S.target_thetas = tho;
    rep.merge(validate_pullback(S, th, 3, seed + 1, 2));
    QHiggsModule E = scalar_extension(M, S);
    rep.merge(chain_map_check(S.name, M, E, pullback_chain_map(M, S), 2, c.d));

    // products and the cocycle composite
    rep.merge(leibniz_check(M, N, c.d == 1 ? 2 : 1));
    rep.merge(pullback_cocycle_check(M, S, frobenius_spec(c.other, tho), 2));
    return rep;
}

Report suite_complexes(const SuiteConfig& cfg) {
    Report rep("complexes", "d^2 = 0; Frobenius, scalar-extension and product chain maps; pullback cocycle", cfg.seed);
    const int N = samples_or(cfg, 50);
    const int n = cfg.n < 0 ? 1 : cfg.n;
    std::vector<ComplexCase> cases;
    for (int p : {2, 3})
        for (int d : {1, 2})
            if (pick(cfg.p, p) && pick(cfg.d, d)) cases.push_back({p, d, chart(p, d, 6 * p, n), chart(p, 3 - d, 6 * p, n)});
    if (cases.empty()) fail(ErrorKind::BadInput, "complexes: p must be 2 or 3 and d must be 1 or 2");
    run_instances(rep, N, cfg.threads, [&](int i) {
        const ComplexCase& c = cases[i % cases.size()];
        const int rank = 1 + (i / static_cast<int>(cases.size())) % 3;
        return complex_instance(c, i, rank, i % 2 == 1, derive_seed(cfg.seed, i), cfg.corrupt);
    });
    return rep;
}

// --------------------------------------------------------------- stratification

// t-dependent Higgs field on the line: strictly upper part linear in t, diagonal in (p, mu)
std::vector<EnvMat> random_line_field(const EnvRing& A, int rank, std::mt19937_64& g) {
    const BaseRing& B = A.base();
    auto rnd = [&]() { return A.scalar(random_base(g, B, A.precision())); };
    EnvMat T(rank, MVec(rank, A.zero()));
    for (int r = 0; r < rank; ++r)
        for (int c = r; c < rank; ++c) {
            if (c > r) {
                T[r][c] = rnd() + rnd() * A.t(0);
            } else {
                T[r][c] = rnd().scaled(B.p);
                if (!B.q_one()) T[r][c] += rnd() * A.mu();
            }
        }
    return {T};
}

struct StratCase {
    int p, d, W;
    RingPtr A;
    std::shared_ptr<const SimplicialEnvelope> S;
};

std::vector<StratCase> strat_cases(const SuiteConfig& cfg) {
    const int n = cfg.n < 0 ? 2 : cfg.n;
    std::vector<StratCase> out;
    for (int p : {2, 3})
        for (int d : {1, 2}) {
            if (!pick(cfg.p, p) || !pick(cfg.d, d)) continue;
            const int W = cfg.W > 0 ? cfg.W : (d == 1 ? 4 : 3);
            RingPtr A = chart(p, d, p * (W + 2), n);
            out.push_back({p, d, W, A, build_simplicial(A, W)});
        }
    if (out.empty()) fail(ErrorKind::BadInput, "stratification: p must be 2 or 3 and d must be 1 or 2");
    return out;
}

struct StratInstance {
    const StratCase* c;
    int rank;
    std::shared_ptr<QHiggsModule> M, N;
    std::string tag;
};

StratInstance strat_instance(const std::vector<StratCase>& cases, int i, std::uint64_t seed) {
    StratInstance I;
    I.c = &cases[i % cases.size()];
    const int round = i / static_cast<int>(cases.size());
    I.rank = 1 + round % 3;
    std::mt19937_64 g(seed);
    auto th = qhiggs_derivations(I.c->A);
    const bool line = I.c->d == 1 && round % 2 == 0;
    auto field = [&](int r) { return line ? random_line_field(*I.c->A, r, g) : random_commuting(*I.c->A, I.c->d, r, g, true); };
    I.M = std::make_shared<QHiggsModule>(I.c->A, th, field(I.rank), "M");
    I.N = std::make_shared<QHiggsModule>(I.c->A, th, field(1), "N");
    I.tag = "instance " + S(i) + " (p=" + S(I.c->p) + ",d=" + S(I.c->d) + ",rank=" + S(I.rank) + (line ? ",t-dependent" : "") + ")";
    return I;
}

Report suite_stratification(const SuiteConfig& cfg) {
    Report rep("stratification", "q-Higgs fields and stratifications: cocycle, round trip, tensor, gamma and Frobenius compatibility", cfg.seed);
    auto cases = strat_cases(cfg);
    run_instances(rep, samples_or(cfg, 50), cfg.threads, [&](int i) {
        StratInstance I = strat_instance(cases, i, derive_seed(cfg.seed, i));
        Report r(I.tag, "");
        Stratification eps = strat_from_higgs(*I.M, I.c->S);
        Stratification eN = strat_from_higgs(*I.N, I.c->S);
        if (cfg.corrupt) eps.E[0][0] += I.c->S->D1->tau(I.c->S->tau(0)).pow(2);
        r.merge(flatness_check(*I.M, eps));
        r.merge(cocycle_check(eps));
        r.merge(roundtrip_check(*I.M, eps));
        r.merge(tensor_strat_check(*I.M, *I.N, eps, eN));
        r.merge(gamma_compat_check(*I.M, eps));
        r.merge(frobenius_strat_check(*I.M, eps));
        return r;
    });
    return rep;
}

Report suite_ca_h0(const SuiteConfig& cfg) {
    Report rep("ca-h0", "ker(theta_M) equals the kernel of the epsilon-twisted difference", cfg.seed);
    auto cases = strat_cases(cfg);
    run_instances(rep, samples_or(cfg, 50), cfg.threads, [&](int i) {
        StratInstance I = strat_instance(cases, i, derive_seed(cfg.seed, i));
        Report r(I.tag, "");
        Stratification eps = strat_from_higgs(*I.M, I.c->S);
        if (cfg.corrupt) eps.E[0][0] += I.c->S->D1->tau(I.c->S->tau(0));
        int degT = 0;
        for (const auto& T : I.M->matrices()) degT = std::max(degT, mat_weight(T));
        const int W0 = std::max(0, I.c->W - degT - 1);
        r.merge(ca_h0_compare(*I.M, eps, W0));
        return r;
    });
    return rep;
}

// --------------------------------------------------------------------- Poincare

Report suite_poincare(const SuiteConfig& cfg) {
    Report rep("poincare", "the truncated PD de Rham complex resolves its coefficient module", cfg.seed);
    const std::vector<int> coeff{2, 1};
    const std::vector<int> ds = cfg.d > 0 ? std::vector<int>{cfg.d} : std::vector<int>{1, 2};
    for (auto [p, depth0] : {std::pair{2, 4}, {3, 9}}) {
        if (!pick(cfg.p, p)) continue;
        const int depth = cfg.depth > 0 ? cfg.depth : depth0;
        for (int d : ds) {
            ChainComplex C = pd_complex(p, d, coeff, depth);
            if (cfg.corrupt)
                for (auto& m : C.d)
                    for (auto& row : m)
                        for (auto& e : row) e *= p;
            rep.merge(poincare_check(C, d, coeff, depth));
        }
    }
    return rep;
}

// ------------------------------------------------------------------ affine line

Report suite_affine_line(const SuiteConfig& cfg) {
    Report rep("affine-line", "q-de Rham cohomology of the affine line against the diagonal cokernel oracle", cfg.seed);
    const int p = cfg.p < 0 ? 2 : cfg.p;
    const int W = cfg.W > 0 ? cfg.W : 8;
    const std::vector<int> ns = cfg.n > 0 ? std::vector<int>{cfg.n} : std::vector<int>{1, 2};
    for (int nn : ns) {
        for (Mode mode : {Mode::Generic, Mode::QOne}) {
            RingPtr A = chart(p, 1, W + 1, nn, mode);
            auto O = QHiggsModule::trivial(A, qhiggs_derivations(A), 1);
            ChainComplex C = build_complex(O, W);
            std::vector<int> h0 = normalized(cohomology(C, 0).exponents), h1 = normalized(cohomology(C, 1).exponents);
            const BaseRing& B = A->base();
            std::vector<int> q, a;
            for (int k = 0; k < B.deg_bound(nn); ++k) a.push_back(B.exponent(nn, k));
            for (int m = 1; m <= W; ++m) {
                BaseElt x = qint(B, nn, cfg.corrupt ? m : p * m);
                for (int e : quotient_exponents(x)) q.push_back(e);
                for (int e : annihilator_exponents(x)) a.push_back(e);
            }
            q = normalized(q);
            a = normalized(a);
            const std::string at = "p=" + S(p) + ",n=" + S(nn) + (mode == Mode::QOne ? ",q=1" : "") + ",W=" + S(W);
            rep.expect(h0 == a, at + ": H^0 " + exps_string(h0) + " vs oracle " + exps_string(a));
            rep.expect(h1 == q, at + ": H^1 " + exps_string(h1) + " vs oracle " + exps_string(q));
            if (mode == Mode::QOne) {
                std::vector<int> classical;
                for (int m = 1; m <= W; ++m) classical.push_back(std::min(vp(p * m, p), nn + 1));
                classical = normalized(classical);
                rep.expect(h1 == classical, at + ": H^1 " + exps_string(h1) + " vs classical " + exps_string(classical));
            }
        }
    }
    return rep;
}

using SuiteFn = Report (*)(const SuiteConfig&);

struct SuiteEntry {
    SuiteInfo info;
    SuiteFn fn;
};

const std::vector<SuiteEntry>& registry() {
    static const std::vector<SuiteEntry> r{
        {{"delta-axioms", "W2 homomorphism, delta of powers and phi delta = delta phi on the base"}, suite_delta_axioms},
        {{"base-identities", "delta(mu), phi(mu) and the xi identity"}, suite_base_identities},
        {{"envelope", "envelope ring axioms, delta(t_i) = 0 and golden rewrite tables"}, suite_envelope},
        {{"qhiggs-derivations", "commutation, delta-compatibility, gamma and the Frobenius relation"}, suite_qhiggs_derivations},
        {{"pd-comparison", "tau^p = p sigma and the PD dictionary at q = 1"}, suite_pd_comparison},
        {{"sigma", "sigma antisymmetry and cocycle identity"}, suite_sigma},
        {{"complexes", "differentials and chain maps on random integrable modules"}, suite_complexes},
        {{"stratification", "the q-Higgs / stratification dictionary on random quasi-nilpotent modules"}, suite_stratification},
        {{"poincare", "Poincare lemma for the truncated PD de Rham complex"}, suite_poincare},
        {{"affine-line", "q-de Rham cohomology of the affine line"}, suite_affine_line},
        {{"ca-h0", "Cech-Alexander comparison in degree zero"}, suite_ca_h0},
    };
    return r;
}

}  // namespace

const std::vector<SuiteInfo>& suite_list() {
    static const std::vector<SuiteInfo> l = [] {
        std::vector<SuiteInfo> v;
        for (const auto& e : registry()) v.push_back(e.info);
        return v;
    }();
    return l;
}

Report run_suite(const std::string& name, const SuiteConfig& cfg) {
    for (const auto& e : registry())
        if (e.info.name == name) {
            Report r;
            try {
                r = e.fn(cfg);
            } catch (const Error& err) {
                // an invariant violation raised mid-suite is a failure with its message as witness
                if (exit_code(err.kind()) != 1) throw;
                r = Report(name, e.info.description);
                r.fail(err.what());
            }
            r.check = name + (cfg.corrupt ? " (corrupted input)" : "");
            r.seed = cfg.seed;
            return r;
        }
    fail(ErrorKind::BadInput, "unknown suite '" + name + "'");
}

// the Z-module R_n with basis mu^k, and multiplication by x on it
namespace {
IMat mult_matrix(const BaseElt& x, std::vector<int>& exps) {
    const BaseRing& B = x.ring();
    const int L = x.level(), nb = B.deg_bound(L);
    exps.clear();
    for (int k = 0; k < nb; ++k) exps.push_back(B.exponent(L, k));
    IMat M(nb, std::vector<i64>(nb, 0));
    BaseElt mk = base_one(B, L), mu = base_mu(B, L);
    for (int j = 0; j < nb; ++j, mk *= mu) {
        BaseElt y = x * mk;
        for (int k = 0; k < nb; ++k) M[k][j] = y.coeff(k);
    }
    return M;
}
}  // namespace

std::vector<int> quotient_exponents(const BaseElt& x) {
    std::vector<int> exps;
    IMat M = mult_matrix(x, exps);
    const int nb = static_cast<int>(exps.size());
    for (int k = 0; k < nb; ++k) {
        std::vector<i64> col(nb, 0);
        col[k] = ipow(x.ring().p, exps[k]);
        for (int r = 0; r < nb; ++r) M[r].push_back(col[r]);
    }
    return normalized(cokernel_exponents(x.ring().p, x.level() + 1, M));
}

std::vector<int> annihilator_exponents(const BaseElt& x) {
    std::vector<int> exps;
    IMat M = mult_matrix(x, exps);
    return normalized(kernel_subgroup(x.ring().p, exps, exps, M).exponents);
}

std::string envelope_golden_name(int p, int n, int d) {
    return "envelope_p" + S(p) + "_n" + S(n) + "_d" + S(d) + ".json";
}

std::string envelope_golden(int p, int n, int d) {
    return nlohmann::json::parse(golden_envelope(p, n, d)->rules_json()).dump(1) + "\n";
}

std::string pd_golden_name(int p, int K) { return "pd_p" + S(p) + "_K" + S(K) + ".json"; }

std::string pd_golden(int p, int K) {
    const std::vector<std::vector<i64>> centers{{0}, {1}};
    EnvToPD f(q1env(p, 2 + K, centers, static_cast<int>(ipow(p, K + 1)) - 1), K);
    return nlohmann::json::parse(f.dictionary().dump()).dump(1) + "\n";
}

}  // namespace qprism
