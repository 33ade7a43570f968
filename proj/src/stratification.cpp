#include "qprism/stratification.hpp"

#include <algorithm>
#include <sstream>

namespace qprism {

namespace {

Key single(int v, int m) {
    Key k{};
    k[v] = static_cast<std::uint16_t>(m);
    return k;
}

HomPtr hom(const std::string& name, const RingPtr& s, const RingPtr& t, EnvHom::ImageFn f) {
    return std::make_shared<const EnvHom>(name, s, t, std::move(f));
}

DerivList derivs(const RingPtr& R, const std::string& prefix, int d, std::function<DerivationData(const EnvRing&, int)> f) {
    DerivList out;
    for (int i = 0; i < d; ++i) {
        DerivationSpec s;
        s.name = prefix + std::to_string(i + 1);
        s.data = [f, i](const EnvRing& G) { return f(G, i); };
        out.push_back(std::make_shared<const Derivation>(s, R));
    }
    return out;
}

// phi on the terms whose image stays at weight <= W
EnvElt phi_trunc(const EnvElt& x, int W) {
    const EnvRing& R = x.ring();
    const int p = R.p();
    EnvElt r = R.zero(x.level());
    for (const auto& [k, c] : x.terms()) {
        if (EnvRing::key_weight(k, R.nvars()) * p > W) continue;
        EnvElt m = R.zero(x.level());
        m.add_term(k, c);
        r += R.phi(m);
    }
    return truncate(r, W);
}

int elt_weight(const EnvElt& x) {
    int w = 0;
    for (const auto& [k, c] : x.terms()) w = std::max(w, EnvRing::key_weight(k, x.ring().nvars()));
    return w;
}

// Inverse of theta_{1;i} on D(1): the solution g of theta(g) = f with no tau_i-free part.
class Integrator {
public:
    Integrator(const SimplicialEnvelope& S, int i) : S_(S), i_(i) {
        const EnvRing& R = *S.D1;
        th_.resize(S.W + 1);
        uinv_.resize(S.W + 1);
        for (int m = 1; m <= S.W; ++m) {
            th_[m] = (*S.theta1[i])(R.basis(single(S.tau(i), m)));
            BaseElt u = th_[m].coeff(single(S.tau(i), m - 1));
            require(u.is_unit(), ErrorKind::AugmentationFailed, "leading coefficient of theta(tau^{m}) is not a unit");
            uinv_[m] = invert(u);
        }
    }

    EnvElt operator()(const EnvElt& f) const {
        const EnvRing& R = *S_.D1;
        const int v = S_.tau(i_);
        EnvElt work = truncate(f, S_.W - 1), g = R.zero();
        int last = S_.W + 1;
        while (!work.is_zero()) {
            int m = 0;
            for (const auto& [k, c] : work.terms()) m = std::max<int>(m, k[v]);
            require(m < last, ErrorKind::AugmentationFailed, "back-substitution did not lower the tau index");
            last = m;
            EnvElt h = R.zero();
            for (const auto& [k, c] : work.terms()) {
                if (k[v] != m) continue;
                Key k2 = k;
                k2[v] = static_cast<std::uint16_t>(m + 1);
                h.add_term(k2, c * uinv_[m + 1].reduced(c.level()));
            }
            work = truncate(work - (*S_.theta1[i_])(h), S_.W - 1);
            g += h;
        }
        return g;
    }

private:
    const SimplicialEnvelope& S_;
    int i_;
    std::vector<EnvElt> th_;
    std::vector<BaseElt> uinv_;
};

// drop terms involving tau_j for j < i
EnvElt project_below(const SimplicialEnvelope& S, const EnvElt& x, int i) {
    EnvElt r = x.ring().zero(x.level());
    for (const auto& [k, c] : x.terms()) {
        bool keep = true;
        for (int j = 0; j < i; ++j) keep = keep && k[S.tau(j)] == 0;
        if (keep) r.add_term(k, c);
    }
    return r;
}

EnvMat solve_flat(const SimplicialEnvelope& S, const std::vector<EnvMat>& P, int r) {
    const EnvRing& R = *S.D1;
    std::vector<Integrator> J;
    for (int i = 0; i < S.d; ++i) J.emplace_back(S, i);
    EnvMat I = mat_identity(R, r), E = I;
    for (int it = 0; it <= S.W + 2; ++it) {
        EnvMat N = I;
        for (int i = 0; i < S.d; ++i) {
            EnvMat F = tmatmul(E, P[i], S.W - 1);
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b) N[a][b] += J[i](project_below(S, F[a][b], i));
        }
        if (mat_same(N, E)) return E;
        E = std::move(N);
    }
    fail(ErrorKind::WeightCapTooSmall, "flat-section iteration did not stabilize under the weight cap");
}

std::vector<EnvMat> pulled_back_fields(const SimplicialEnvelope& S, const std::vector<EnvMat>& Theta) {
    std::vector<EnvMat> P;
    for (const auto& T : Theta) P.push_back(mat_truncate(mat_map(*S.p1, mat_truncate(T, S.W - 1)), S.W - 1));
    return P;
}

void require_host(const QHiggsModule& M, const SimplicialEnvelope& S) {
    require(M.host_ptr() == S.D0 && M.thetas() == S.chart_thetas, ErrorKind::HostMismatch, "module does not live on the simplicial base chart");
}

// integer matrix of a map from M_{<= W0} (basis key * mu^e * e_j) to components keyed by (c, key)
struct Linearized {
    std::vector<int> src, tgt;
    IMat D;
};

Linearized linearize(const EnvRing& R, int W0, int rank, const std::function<std::vector<EnvElt>(const MVec&)>& f) {
    const int L = R.precision();
    const int nb = R.base().deg_bound(L);
    std::vector<BaseElt> mupow{base_one(R.base(), L)};
    for (int e = 1; e < nb; ++e) mupow.push_back(mupow.back() * base_mu(R.base(), L));
    std::vector<Key> keys;
    {
        std::vector<Key> ks{Key{}};
        for (int v = 0; v < R.nvars(); ++v) {
            std::vector<Key> nxt;
            for (const Key& k : ks)
                for (int m = 0; EnvRing::key_weight(k, R.nvars()) + m <= W0; ++m) {
                    Key k2 = k;
                    k2[v] = static_cast<std::uint16_t>(m);
                    nxt.push_back(k2);
                }
            ks = std::move(nxt);
        }
        keys = std::move(ks);
    }
    Linearized out;
    std::map<std::pair<std::size_t, Key>, std::size_t> rows;
    std::vector<std::tuple<std::size_t, std::size_t, i64>> entries;
    std::size_t col = 0;
    for (const Key& k : keys)
        for (int j = 0; j < rank; ++j) {
            MVec x(rank, R.zero());
            x[j] = R.basis(k);
            std::vector<EnvElt> img = f(x);
            for (int e = 0; e < nb; ++e) {
                out.src.push_back(R.base().exponent(L, e));
                for (std::size_t c = 0; c < img.size(); ++c)
                    for (const auto& [kk, coef] : img[c].terms()) {
                        require(coef.level() >= L, ErrorKind::PrecisionExhausted, "kernel map lost precision");
                        auto it = rows.find({c, kk});
                        if (it == rows.end()) {
                            it = rows.emplace(std::pair{c, kk}, out.tgt.size()).first;
                            const int Lt = coef.level();
                            for (int g = 0; g < nb; ++g) out.tgt.push_back(img[c].ring().base().exponent(Lt, g));
                        }
                        BaseElt ce = coef.reduced(L) * mupow[e];
                        for (int g = 0; g < nb; ++g)
                            if (ce.coeff(g)) entries.emplace_back(it->second + g, col, ce.coeff(g));
                    }
                ++col;
            }
        }
    out.D.assign(out.tgt.size(), std::vector<i64>(col, 0));
    for (auto [r, c, v] : entries) out.D[r][c] = v;
    return out;
}

}  // namespace

// ---------------------------------------------------------------- truncated matrices

EnvElt tmul(const EnvElt& x, const EnvElt& y, int W) {
    const EnvRing& R = x.ring();
    EnvElt r = R.zero(std::min(x.level(), y.level()));
    if (x.is_zero() || y.is_zero()) return r;
    std::map<int, EnvElt> ytr;
    for (const auto& [k, c] : x.terms()) {
        int w = EnvRing::key_weight(k, R.nvars());
        if (w > W) continue;
        auto it = ytr.find(W - w);
        if (it == ytr.end()) it = ytr.emplace(W - w, truncate(y, W - w)).first;
        if (it->second.is_zero()) continue;
        EnvElt m = R.zero(x.level());
        m.add_term(k, c);
        r += m * it->second;
    }
    return truncate(r, W);
}

EnvMat tmatmul(const EnvMat& A, const EnvMat& B, int W) {
    const std::size_t n = A.size(), k = B.size(), m = B.empty() ? 0 : B[0].size();
    require(n == 0 || A[0].size() == k, ErrorKind::BadInput, "matrix shapes do not match");
    EnvMat C(n, MVec(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            EnvElt s = k ? A[i][0].ring().zero() : EnvElt();
            for (std::size_t l = 0; l < k; ++l) s += tmul(A[i][l], B[l][j], W);
            C[i][j] = s;
        }
    return C;
}

EnvMat mat_map(const EnvHom& f, const EnvMat& A) {
    EnvMat B;
    for (const auto& row : A) {
        MVec r;
        for (const auto& x : row) r.push_back(f(x));
        B.push_back(std::move(r));
    }
    return B;
}

EnvMat mat_truncate(const EnvMat& A, int W) {
    EnvMat B = A;
    for (auto& row : B)
        for (auto& x : row) x = truncate(x, W);
    return B;
}

EnvMat mat_identity(const EnvRing& R, int r) {
    EnvMat I(r, MVec(r, R.zero()));
    for (int i = 0; i < r; ++i) I[i][i] = R.one();
    return I;
}

bool mat_same(const EnvMat& A, const EnvMat& B) {
    if (A.size() != B.size()) return false;
    for (std::size_t i = 0; i < A.size(); ++i)
        if (!mvec_same(A[i], B[i])) return false;
    return true;
}

EnvMat kron(const EnvMat& A, const EnvMat& B) {
    const std::size_t a = A.size(), b = B.size();
    EnvMat C(a * b, MVec(a * b));
    for (std::size_t r = 0; r < a; ++r)
        for (std::size_t s = 0; s < b; ++s)
            for (std::size_t j = 0; j < a; ++j)
                for (std::size_t k = 0; k < b; ++k) C[r * b + s][j * b + k] = A[r][j] * B[s][k];
    return C;
}

std::string mat_string(const EnvMat& A) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < A.size(); ++i) os << (i ? ", " : "") << mvec_string(A[i]);
    os << "]";
    return os.str();
}

int mat_weight(const EnvMat& A) {
    int w = 0;
    for (const auto& row : A)
        for (const auto& x : row) w = std::max(w, elt_weight(x));
    return w;
}

// ---------------------------------------------------------------- simplicial envelopes

std::shared_ptr<const SimplicialEnvelope> build_simplicial(const RingPtr& chart, int W) {
    const int d = chart->nvars();
    require(d >= 1 && d <= 3, ErrorKind::BadInput, "simplicial envelopes need 1 to 3 chart variables");
    for (int v = 0; v < d; ++v) require(chart->is_const(v), ErrorKind::BadInput, "the base must be a polynomial chart");
    require(W >= 1, ErrorKind::BadInput, "weight cap must be positive");
    require(chart->weight_cap() >= W, ErrorKind::WeightCapTooSmall, "chart weight cap below the simplicial cap");
    auto S = std::make_shared<SimplicialEnvelope>();
    S->d = d;
    S->W = W;
    S->D0 = chart;
    const int p = chart->p();
    const Mode mode = chart->spec().mode;
    auto lower = [](int i) { return [i](const EnvRing& R) { return R.t(i); }; };
    EnvSpec s1;
    s1.p = p;
    s1.mode = mode;
    s1.weight_cap = std::max(W + 1, p + 1);
    for (int i = 0; i < d; ++i) s1.vars.push_back(VarSpec{VarSpec::Const, {}, "t0_" + std::to_string(i + 1)});
    EnvSpec s2 = s1;
    for (int i = 0; i < d; ++i) {
        VarSpec v{VarSpec::Tau, {}, "tau_" + std::to_string(i + 1)};
        v.center.kind = CenterSpec::Lower;
        v.center.lower = lower(i);
        s1.vars.push_back(v);
        v.name = "a_" + std::to_string(i + 1);
        s2.vars.push_back(v);
    }
    for (int i = 0; i < d; ++i) {
        VarSpec v{VarSpec::Tau, {}, "b_" + std::to_string(i + 1)};
        v.center.kind = CenterSpec::Lower;
        v.center.lower = lower(i);
        s2.vars.push_back(v);
    }
    const int n = chart->precision();
    S->D1 = EnvRing::build(s1, n);
    S->D2 = EnvRing::build(s2, n);
    auto each = [d](std::function<EnvElt(const EnvRing&, int)> f) {
        return [d, f](const EnvRing& G) {
            std::vector<EnvElt> out;
            for (int i = 0; i < d; ++i) out.push_back(f(G, i));
            return out;
        };
    };
    auto pair = [d](std::function<EnvElt(const EnvRing&, int)> f0, std::function<EnvElt(const EnvRing&, int)> f1) {
        return [d, f0, f1](const EnvRing& G) {
            std::vector<EnvElt> out;
            for (int i = 0; i < d; ++i) out.push_back(f0(G, i));
            for (int i = 0; i < d; ++i) out.push_back(f1(G, i));
            return out;
        };
    };
    auto T0 = [](const EnvRing& G, int i) { return G.t(i); };
    auto Zero = [](const EnvRing& G, int) { return G.zero(); };
    S->p0 = hom("p0", S->D0, S->D1, each(T0));
    S->p1 = hom("p1", S->D0, S->D1, each([d](const EnvRing& G, int i) { return G.t(d + i); }));
    S->delta = hom("Delta", S->D1, S->D0, pair(T0, Zero));
    S->iota = hom("iota", S->D1, S->D1,
                  pair([d](const EnvRing& G, int i) { return G.t(d + i); }, [d](const EnvRing& G, int i) { return -G.tau(d + i); }));
    S->p01 = hom("p01", S->D1, S->D2, pair(T0, [d](const EnvRing& G, int i) { return G.tau(d + i); }));
    S->p12 = hom("p12", S->D1, S->D2,
                 pair([d](const EnvRing& G, int i) { return G.t(d + i); },
                      [d](const EnvRing& G, int i) { return G.tau(2 * d + i) - G.tau(d + i); }));
    S->p02 = hom("p02", S->D1, S->D2, pair(T0, [d](const EnvRing& G, int i) { return G.tau(2 * d + i); }));
    S->q0 = hom("q0", S->D0, S->D2, each(T0));
    S->q1 = hom("q1", S->D0, S->D2, each([d](const EnvRing& G, int i) { return G.t(d + i); }));
    S->q2 = hom("q2", S->D0, S->D2, each([d](const EnvRing& G, int i) { return G.t(2 * d + i); }));
    S->delta2 = hom("Delta2", S->D2, S->D0, [d](const EnvRing& G) {
        std::vector<EnvElt> out;
        for (int i = 0; i < d; ++i) out.push_back(G.t(i));
        for (int i = 0; i < 2 * d; ++i) out.push_back(G.zero());
        return out;
    });
    auto unit_at = [](int nv, int where, EnvElt one, const EnvRing& G) {
        std::vector<EnvElt> out(nv, G.zero());
        out[where] = std::move(one);
        return out;
    };
    S->theta1 = derivs(S->D1, "theta_1;", d, [d, unit_at](const EnvRing& G, int i) {
        DerivationData D;
        D.alpha = G.t(d + i) * G.mu();
        D.beta = G.t(d + i).pow(G.p() - 1) * G.eta();
        D.images = unit_at(G.nvars(), d + i, G.one(), G);
        return D;
    });
    S->theta0 = derivs(S->D1, "theta_0;", d, [d, unit_at](const EnvRing& G, int i) {
        DerivationData D;
        D.alpha = G.t(i) * G.mu();
        D.beta = G.t(i).pow(G.p() - 1) * G.eta();
        D.images = unit_at(G.nvars(), i, G.xi(), G);
        D.images[d + i] = -G.one();
        return D;
    });
    S->theta21 = derivs(S->D2, "theta_(2)1;", d, [d, unit_at](const EnvRing& G, int i) {
        DerivationData D;
        D.alpha = G.t(d + i) * G.mu();
        D.beta = G.t(d + i).pow(G.p() - 1) * G.eta();
        D.images = unit_at(G.nvars(), d + i, G.one(), G);
        return D;
    });
    S->theta22 = derivs(S->D2, "theta_(2)2;", d, [d, unit_at](const EnvRing& G, int i) {
        DerivationData D;
        D.alpha = G.t(2 * d + i) * G.mu();
        D.beta = G.t(2 * d + i).pow(G.p() - 1) * G.eta();
        D.images = unit_at(G.nvars(), 2 * d + i, G.one(), G);
        return D;
    });
    S->chart_thetas = qhiggs_derivations(chart);
    return S;
}

Report simplicial_check(const SimplicialEnvelope& S, int samples, std::uint64_t seed) {
    Report rep("simplicial", "face maps are delta-homomorphisms satisfying the cosimplicial identities", seed);
    for (const auto& h : {S.p0, S.p1, S.delta, S.iota, S.p01, S.p12, S.p02, S.delta2}) rep.merge(hom_check(*h, samples, seed, 1));
    auto eq = [&](const EnvElt& x, const EnvElt& y, const std::string& what) { rep.expect(x.same(y), what + ": " + x.to_string() + " != " + y.to_string()); };
    const EnvRing &D0 = *S.D0, &D1 = *S.D1, &D2 = *S.D2;
    for (int i = 0; i < S.d; ++i) {
        const EnvElt t = D0.t(i);
        const std::string I = std::to_string(i + 1);
        eq((*S.delta)((*S.p0)(t)), t, "Delta p0 = id on t_" + I);
        eq((*S.delta)((*S.p1)(t)), t, "Delta p1 = id on t_" + I);
        eq((*S.p01)((*S.p0)(t)), (*S.q0)(t), "p01 p0 = q0 on t_" + I);
        eq((*S.p02)((*S.p0)(t)), (*S.q0)(t), "p02 p0 = q0 on t_" + I);
        eq((*S.p01)((*S.p1)(t)), (*S.q1)(t), "p01 p1 = q1 on t_" + I);
        eq((*S.p12)((*S.p0)(t)), (*S.q1)(t), "p12 p0 = q1 on t_" + I);
        eq((*S.p12)((*S.p1)(t)), (*S.q2)(t), "p12 p1 = q2 on t_" + I);
        eq((*S.p02)((*S.p1)(t)), (*S.q2)(t), "p02 p1 = q2 on t_" + I);
        eq((*S.iota)((*S.p0)(t)), (*S.p1)(t), "iota p0 = p1 on t_" + I);
        const EnvElt tau = D1.tau(S.tau(i));
        eq((*S.iota)((*S.iota)(tau)), tau, "iota^2 = id on tau_" + I);
        eq((*S.iota)((*S.iota)(D1.t(i))), D1.t(i), "iota^2 = id on t0_" + I);
        const EnvElt a = D2.tau(S.a(i)), b = D2.tau(S.b(i));
        eq((*S.delta2)(a), D0.zero(), "Delta2 kills tau_(1,0)");
        eq((*S.delta2)(b), D0.zero(), "Delta2 kills tau_(2,0)");
        eq((*S.delta2)(b - a), D0.zero(), "Delta2 kills tau_(2,1)");
        eq((*S.theta21[i])(a), D2.one(), "theta_(2)1 tau_(1,0) = 1");
        eq((*S.theta22[i])(a), D2.zero(), "theta_(2)2 tau_(1,0) = 0");
        eq((*S.theta21[i])(b - a), -D2.one(), "theta_(2)1 tau_(2,1) = -1");
        eq((*S.theta22[i])(b - a), D2.one(), "theta_(2)2 tau_(2,1) = 1");
        eq((*S.theta1[i])(D1.t(S.tau(i))), D1.xi(), "theta_1 t1 = [p]_q");
        eq((*S.theta0[i])(D1.t(S.tau(i))), D1.zero(), "theta_0 t1 = 0");
        // theta along t1 on D(2) is the pullback of theta_1 along p01
        const EnvElt x = D1.tau(S.tau(i)).pow(2) + D1.t(i) * D1.tau(S.tau(i));
        eq((*S.p01)((*S.theta1[i])(x)), (*S.theta21[i])((*S.p01)(x)), "p01 intertwines theta_1 and theta_(2)1");
        eq((*S.p02)((*S.theta1[i])(x)), (*S.theta22[i])((*S.p02)(x)), "p02 intertwines theta_1 and theta_(2)2");
    }
    return rep;
}

// ---------------------------------------------------------------- the dictionary

nlohmann::ordered_json Stratification::to_json() const {
    nlohmann::ordered_json j;
    j["weight_cap"] = S->W;
    j["rank"] = E.size();
    auto m = nlohmann::ordered_json::array();
    for (const auto& row : E) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& x : row) r.push_back(x.to_string());
        m.push_back(r);
    }
    j["epsilon"] = m;
    return j;
}

Stratification strat_from_higgs(const QHiggsModule& M, std::shared_ptr<const SimplicialEnvelope> S, int N_max) {
    require_host(M, *S);
    auto integ = check_integrability(M);
    require(integ.pass, ErrorKind::PreconditionViolated, "q-Higgs field is not integrable: " + (integ.witnesses.empty() ? "" : integ.witnesses[0]));
    auto qn = check_quasi_nilpotent(M, N_max);
    if (!qn.pass) fail(ErrorKind::NotQuasiNilpotent, qn.witnesses.empty() ? "q-Higgs field is not quasi-nilpotent" : qn.witnesses[0]);
    Stratification eps;
    eps.S = S;
    eps.E = solve_flat(*S, pulled_back_fields(*S, M.matrices()), M.rank());
    return eps;
}

QHiggsModule higgs_from_strat(const Stratification& eps, const std::string& name) {
    const SimplicialEnvelope& S = *eps.S;
    const int r = static_cast<int>(eps.E.size());
    require(mat_same(mat_map(*S.delta, eps.E), mat_identity(*S.D0, r)), ErrorKind::AugmentationFailed, "Delta^*(epsilon) is not the identity");
    std::vector<EnvMat> T;
    for (int i = 0; i < S.d; ++i) {
        EnvMat A(r, MVec(r));
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) A[a][b] = truncate((*S.delta)((*S.theta1[i])(eps.E[a][b])), S.W - 1);
        T.push_back(std::move(A));
    }
    return QHiggsModule(S.D0, S.chart_thetas, std::move(T), name);
}

Report flatness_check(const QHiggsModule& M, const Stratification& eps) {
    const SimplicialEnvelope& S = *eps.S;
    require_host(M, S);
    Report rep("flatness:" + M.name(), "theta_{1;i}(epsilon) = epsilon p_1^*(Theta_i) and Delta^*(epsilon) = 1");
    const int r = M.rank();
    rep.expect(mat_same(mat_map(*S.delta, eps.E), mat_identity(*S.D0, r)), "Delta^*(epsilon) != 1");
    auto P = pulled_back_fields(S, M.matrices());
    for (int i = 0; i < S.d; ++i) {
        EnvMat lhs(r, MVec(r));
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) lhs[a][b] = truncate((*S.theta1[i])(eps.E[a][b]), S.W - 1);
        rep.expect(mat_same(lhs, tmatmul(eps.E, P[i], S.W - 1)), "flatness fails along index " + std::to_string(i + 1));
    }
    return rep;
}

Report cocycle_check(const Stratification& eps) {
    const SimplicialEnvelope& S = *eps.S;
    Report rep("stratification_cocycle", "p01^*(epsilon) p12^*(epsilon) = p02^*(epsilon), Delta^*(epsilon) = 1, epsilon iota^*(epsilon) = 1");
    const int r = static_cast<int>(eps.E.size());
    rep.expect(mat_same(mat_map(*S.delta, eps.E), mat_identity(*S.D0, r)), "Delta^*(epsilon) != 1");
    EnvMat lhs = tmatmul(mat_map(*S.p01, eps.E), mat_map(*S.p12, eps.E), S.W);
    EnvMat rhs = mat_truncate(mat_map(*S.p02, eps.E), S.W);
    rep.expect(mat_same(lhs, rhs), "cocycle fails over D(2)");
    rep.expect(mat_same(tmatmul(eps.E, mat_map(*S.iota, eps.E), S.W), mat_identity(*S.D1, r)), "epsilon iota^*(epsilon) != 1");
    return rep;
}

Report gamma_compat_check(const QHiggsModule& M, const Stratification& eps, bool corrupt) {
    const SimplicialEnvelope& S = *eps.S;
    require_host(M, S);
    Report rep(std::string("gamma_compat") + (corrupt ? "_corrupted:" : ":") + M.name(),
               "epsilon intertwines gamma_{M,i} with the gamma of D(1) along the p_1 coordinate");
    const int W = S.W;
    auto F = [&](const MVec& x) {
        MVec px;
        for (const auto& a : x) px.push_back(truncate((*S.p1)(truncate(a, W)), W));
        MVec out;
        for (const auto& row : eps.E) {
            EnvElt s = S.D1->zero();
            for (std::size_t j = 0; j < row.size(); ++j) s += tmul(row[j], px[j], W);
            out.push_back(s);
        }
        return out;
    };
    for (int i = 0; i < S.d; ++i) {
        const Derivation& G = corrupt ? *S.theta0[i] : *S.theta1[i];
        for (const auto& form : basis_forms(M, std::min(W, 2), 0)) {
            const MVec& x = form.parts.begin()->second;
            MVec lhs = F(M.gamma(i, x));
            MVec rhs;
            for (const auto& y : F(x)) rhs.push_back(truncate(G.gamma(y), W));
            rep.expect(mvec_same(lhs, rhs), "gamma_" + std::to_string(i + 1) + " not intertwined at x = " + mvec_string(x));
        }
    }
    return rep;
}

Report frobenius_strat_check(const QHiggsModule& M, const Stratification& eps) {
    const SimplicialEnvelope& S = *eps.S;
    require_host(M, S);
    Report rep("frobenius_strat:" + M.name(), "the stratification of phi^*M is phi_{D(1)}(epsilon)");
    QHiggsModule F = frobenius_pullback(M);
    EnvMat lhs = solve_flat(S, pulled_back_fields(S, F.matrices()), M.rank());
    EnvMat rhs = eps.E;
    for (auto& row : rhs)
        for (auto& x : row) x = phi_trunc(x, S.W);
    rep.expect(mat_same(lhs, rhs), "strat(phi^* M) != phi(epsilon)");
    Stratification ph{eps.S, rhs};
    QHiggsModule back = higgs_from_strat(ph);
    for (int i = 0; i < S.d; ++i)
        rep.expect(mat_same(back.matrix(i), mat_truncate(F.matrix(i), S.W - 1)), "Higgs field of phi(epsilon) differs from phi^* M");
    return rep;
}

Report tensor_strat_check(const QHiggsModule& M, const QHiggsModule& N, const Stratification& eM, const Stratification& eN) {
    const SimplicialEnvelope& S = *eM.S;
    Report rep("tensor_strat:" + M.name() + "," + N.name(), "epsilon_{M (x) N} = epsilon_M (x) epsilon_N");
    auto eMN = strat_from_higgs(tensor(M, N), eM.S);
    const std::size_t a = eM.E.size(), b = eN.E.size();
    EnvMat K(a * b, MVec(a * b));
    for (std::size_t r = 0; r < a; ++r)
        for (std::size_t s = 0; s < b; ++s)
            for (std::size_t j = 0; j < a; ++j)
                for (std::size_t k = 0; k < b; ++k) K[r * b + s][j * b + k] = tmul(eM.E[r][j], eN.E[s][k], S.W);
    rep.expect(mat_same(eMN.E, K), "tensor stratification mismatch");
    return rep;
}

Report roundtrip_check(const QHiggsModule& M, const Stratification& eps) {
    const SimplicialEnvelope& S = *eps.S;
    require_host(M, S);
    Report rep("roundtrip:" + M.name(), "Higgs -> stratification -> Higgs and back are identities");
    QHiggsModule back = higgs_from_strat(eps);
    for (int i = 0; i < S.d; ++i)
        rep.expect(mat_same(back.matrix(i), mat_truncate(M.matrix(i), S.W - 1)), "Theta_" + std::to_string(i + 1) + " not recovered");
    EnvMat E2 = solve_flat(S, pulled_back_fields(S, back.matrices()), back.rank());
    rep.expect(mat_same(E2, eps.E), "epsilon not recovered from its Higgs field");
    return rep;
}

Report ca_h0_compare(const QHiggsModule& M, const Stratification& eps, int W0, Subgroup* out) {
    const SimplicialEnvelope& S = *eps.S;
    require_host(M, S);
    Report rep("ca_h0:" + M.name(), "ker(theta_M) = ker(p_1-twisted difference) on the truncated module");
    int deg = 0;
    for (const auto& T : M.matrices()) deg = std::max(deg, mat_weight(T));
    const int WE = W0 + deg + 1;
    require(WE <= S.W, ErrorKind::WeightCapTooSmall, "stratification cap " + std::to_string(S.W) + " below " + std::to_string(WE));
    const int r = M.rank();
    auto twisted = [&](const MVec& x) {
        std::vector<EnvElt> img;
        for (int k = 0; k < r; ++k) {
            EnvElt s = -(*S.p0)(x[k]);
            for (int j = 0; j < r; ++j) s += tmul(eps.E[k][j], (*S.p1)(x[j]), WE);
            img.push_back(truncate(s, WE));
        }
        return img;
    };
    auto higgs = [&](const MVec& x) {
        std::vector<EnvElt> img;
        for (int i = 0; i < M.nindex(); ++i)
            for (const auto& y : M.theta(i, x)) img.push_back(y);
        return img;
    };
    Linearized A = linearize(*S.D0, W0, r, twisted), B = linearize(*S.D0, W0, r, higgs);
    Subgroup KA = kernel_subgroup(S.D0->p(), A.src, A.tgt, A.D), KB = kernel_subgroup(S.D0->p(), B.src, B.tgt, B.D);
    auto ea = KA.exponents, eb = KB.exponents;
    std::sort(ea.rbegin(), ea.rend());
    std::sort(eb.rbegin(), eb.rend());
    rep.expect(ea == eb, "invariant factors of the two kernels differ");
    for (const auto& g : KA.gens) rep.expect(maps_to_zero(S.D0->p(), B.tgt, B.D, g), "a flat section is not killed by theta_M");
    for (const auto& g : KB.gens) rep.expect(maps_to_zero(S.D0->p(), A.tgt, A.D, g), "a horizontal section is not epsilon-invariant");
    eb.erase(std::remove(eb.begin(), eb.end(), 0), eb.end());
    CohomologyGroup h{0, eb};
    rep.notes.push_back("H^0 = " + h.to_string(S.D0->p()));
    if (out) *out = KB;
    return rep;
}

}  // namespace qprism
