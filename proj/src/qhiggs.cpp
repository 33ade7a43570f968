#include "qprism/qhiggs.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <sstream>

namespace qprism {

namespace {

int popcount(unsigned x) { return std::popcount(x); }

bool monotone(const std::vector<int>& psi) {
    for (std::size_t i = 1; i < psi.size(); ++i)
        if (psi[i] < psi[i - 1]) return false;
    return true;
}

// all keys of weight <= maxw (exactly w if exact >= 0)
void keys_rec(const EnvRing& R, int v, int left, Key& k, std::vector<Key>& out, bool exact) {
    if (v == R.nvars()) {
        if (!exact || left == 0) out.push_back(k);
        return;
    }
    for (int m = 0; m <= left && m <= R.weight_cap(); ++m) {
        k[v] = static_cast<std::uint16_t>(m);
        keys_rec(R, v + 1, left - m, k, out, exact);
    }
    k[v] = 0;
}

std::vector<Key> keys_upto(const EnvRing& R, int maxw, bool exact = false) {
    std::vector<Key> out;
    if (maxw < 0) return out;
    Key k{};
    keys_rec(R, 0, maxw, k, out, exact);
    return out;
}

std::string mask_string(unsigned I) {
    std::ostringstream os;
    os << "w{";
    bool first = true;
    for (int i = 0; i < 32; ++i)
        if (I >> i & 1u) {
            os << (first ? "" : ",") << i + 1;
            first = false;
        }
    os << "}";
    return os.str();
}


}  // namespace

EnvElt truncate(const EnvElt& x, int W) {
    EnvElt r = x.ring().zero(x.level());
    for (const auto& [k, c] : x.terms())
        if (EnvRing::key_weight(k, x.ring().nvars()) <= W) r.add_term(k, c);
    return r;
}

// ---------------------------------------------------------------- ring maps

RingMap RingMap::from_hom(std::shared_ptr<const EnvHom> h) {
    RingMap g;
    g.name = h->name();
    g.src = h->source_ptr();
    g.tgt = h->target_ptr();
    g.fn = [h](const EnvElt& x) { return (*h)(x); };
    return g;
}

RingMap RingMap::frobenius(std::shared_ptr<const EnvRing> R) {
    RingMap g;
    g.name = "phi";
    g.src = g.tgt = R;
    g.fn = [](const EnvElt& x) { return x.ring().phi(x); };
    return g;
}

RingMap RingMap::identity(std::shared_ptr<const EnvRing> R) {
    RingMap g;
    g.name = "id";
    g.src = g.tgt = R;
    g.fn = [](const EnvElt& x) { return x; };
    return g;
}

RingMap compose(const RingMap& g, const RingMap& f) {
    require(f.tgt == g.src, ErrorKind::RingMismatch, "composite of non-composable ring maps");
    RingMap h;
    h.name = g.name + "*" + f.name;
    h.src = f.src;
    h.tgt = g.tgt;
    auto gf = g.fn, ff = f.fn;
    h.fn = [gf, ff](const EnvElt& x) { return gf(ff(x)); };
    return h;
}

DerivList qhiggs_derivations(const std::shared_ptr<const EnvRing>& R) {
    static std::mutex mu;
    static std::map<const EnvRing*, std::pair<std::weak_ptr<const EnvRing>, DerivList>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(R.get());
    if (it != cache.end() && it->second.first.lock() == R) return it->second.second;
    DerivList out;
    for (int i = 0; i < R->nvars(); ++i) out.push_back(std::make_shared<const Derivation>(qhiggs_derivation(*R, i), R));
    cache[R.get()] = {R, out};
    return out;
}

// ---------------------------------------------------------------- vectors

MVec mvec_zero(const EnvRing& R, int r) { return MVec(r, R.zero()); }

MVec mvec_add(const MVec& a, const MVec& b) {
    require(a.size() == b.size(), ErrorKind::RingMismatch, "module vectors of different ranks");
    MVec r(a);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += b[i];
    return r;
}

MVec mvec_sub(const MVec& a, const MVec& b) {
    require(a.size() == b.size(), ErrorKind::RingMismatch, "module vectors of different ranks");
    MVec r(a);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] -= b[i];
    return r;
}

MVec mvec_scale(const EnvElt& c, const MVec& a) {
    MVec r;
    r.reserve(a.size());
    for (const auto& x : a) r.push_back(c * x);
    return r;
}

bool mvec_same(const MVec& a, const MVec& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].same(b[i])) return false;
    return true;
}

bool mvec_is_zero(const MVec& a) {
    return std::all_of(a.begin(), a.end(), [](const EnvElt& x) { return x.is_zero(); });
}

MVec mvec_map(const RingMap& g, const MVec& a) {
    MVec r;
    r.reserve(a.size());
    for (const auto& x : a) r.push_back(g(x));
    return r;
}

MVec mat_apply(const EnvMat& A, const MVec& x) {
    MVec r;
    for (const auto& row : A) {
        EnvElt s = x.empty() ? EnvElt() : x[0].ring().zero();
        for (std::size_t j = 0; j < row.size(); ++j)
            if (!row[j].is_zero() && !x[j].is_zero()) s += row[j] * x[j];
        r.push_back(s);
    }
    return r;
}

std::string mvec_string(const MVec& a) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a[i].to_string();
    os << ")";
    return os.str();
}

// ---------------------------------------------------------------- modules

QHiggsModule::QHiggsModule(std::shared_ptr<const EnvRing> host, DerivList thetas, std::vector<EnvMat> Theta, std::string name)
    : host_(std::move(host)), thetas_(std::move(thetas)), Theta_(std::move(Theta)), name_(std::move(name)) {
    require(Theta_.size() == thetas_.size(), ErrorKind::BadInput, "one matrix per derivation");
    require(thetas_.size() <= 16, ErrorKind::BadInput, "too many derivations");
    for (const auto& D : thetas_) require(D->ring_ptr() == host_, ErrorKind::HostMismatch, "derivation on a different host");
    rank_ = Theta_.empty() ? 0 : static_cast<int>(Theta_[0].size());
    for (const auto& T : Theta_) {
        require(static_cast<int>(T.size()) == rank_, ErrorKind::BadInput, "connection matrices must be square of equal size");
        for (const auto& row : T) {
            require(static_cast<int>(row.size()) == rank_, ErrorKind::BadInput, "connection matrices must be square");
            for (const auto& x : row) require(x.ring_ptr() == host_.get(), ErrorKind::HostMismatch, "matrix entry outside the host");
        }
    }
}

QHiggsModule QHiggsModule::trivial(std::shared_ptr<const EnvRing> host, DerivList thetas, int rank, std::string name) {
    std::vector<EnvMat> T(thetas.size(), EnvMat(rank, MVec(rank, host->zero())));
    return QHiggsModule(host, std::move(thetas), std::move(T), std::move(name));
}

MVec QHiggsModule::basis(int j) const {
    MVec r = zero();
    r[j] = host_->one();
    return r;
}

MVec QHiggsModule::theta(int i, const MVec& m) const {
    require(static_cast<int>(m.size()) == rank_, ErrorKind::RingMismatch, "vector of the wrong rank");
    const Derivation& D = *thetas_[i];
    const EnvMat& T = Theta_[i];
    MVec r = zero();
    for (int j = 0; j < rank_; ++j) {
        const EnvElt& a = m[j];
        if (a.is_zero()) continue;
        EnvElt ga;
        bool have = false;
        for (int k = 0; k < rank_; ++k) {
            if (T[k][j].is_zero()) continue;
            if (!have) ga = D.gamma(a), have = true;
            r[k] += ga * T[k][j];
        }
        r[j] += D(a);
    }
    return r;
}

MVec QHiggsModule::gamma(int i, const MVec& m) const { return mvec_add(m, mvec_scale(thetas_[i]->alpha(), theta(i, m))); }

MVec QHiggsModule::theta_set(unsigned S, const MVec& m) const {
    MVec r = m;
    for (int i = 0; i < nindex(); ++i)
        if (S >> i & 1u) r = theta(i, r);
    return r;
}

MVec QHiggsModule::gamma_set(unsigned S, const MVec& m) const {
    MVec r = m;
    for (int i = 0; i < nindex(); ++i)
        if (S >> i & 1u) r = gamma(i, r);
    return r;
}

nlohmann::ordered_json QHiggsModule::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name_;
    j["host"] = {{"p", host_->p()}, {"precision", host_->precision()}, {"mode", host_->base().q_one() ? "q1" : "q"},
                 {"weight_cap", host_->weight_cap()}};
    std::vector<std::string> order;
    for (const auto& D : thetas_) order.push_back(D->spec().name);
    j["order"] = order;
    j["rank"] = rank_;
    nlohmann::ordered_json th;
    for (int i = 0; i < nindex(); ++i) {
        auto m = nlohmann::ordered_json::array();
        for (const auto& row : Theta_[i]) {
            auto r = nlohmann::ordered_json::array();
            for (const auto& x : row) r.push_back(x.to_string());
            m.push_back(r);
        }
        th[order[i]] = m;
    }
    j["theta"] = th;
    return j;
}

// ---------------------------------------------------------------- forms

Form form_term(unsigned mask, MVec m) {
    Form f;
    f.parts.emplace(mask, std::move(m));
    return f;
}

Form form_add(const Form& a, const Form& b) {
    Form r = a;
    for (const auto& [I, m] : b.parts) {
        auto it = r.parts.find(I);
        if (it == r.parts.end())
            r.parts.emplace(I, m);
        else
            it->second = mvec_add(it->second, m);
    }
    return r;
}

Form form_scale(int s, const Form& a) {
    Form r;
    for (const auto& [I, m] : a.parts) {
        MVec v;
        for (const auto& x : m) v.push_back(x.scaled(s));
        r.parts.emplace(I, std::move(v));
    }
    return r;
}

Form form_sub(const Form& a, const Form& b) { return form_add(a, form_scale(-1, b)); }

bool form_is_zero(const Form& a) {
    return std::all_of(a.parts.begin(), a.parts.end(), [](const auto& kv) { return mvec_is_zero(kv.second); });
}

bool form_same(const Form& a, const Form& b) {
    for (const auto& [I, m] : a.parts) {
        auto it = b.parts.find(I);
        if (it == b.parts.end() ? !mvec_is_zero(m) : !mvec_same(m, it->second)) return false;
    }
    for (const auto& [I, m] : b.parts)
        if (!a.parts.count(I) && !mvec_is_zero(m)) return false;
    return true;
}

int form_degree(const Form& a) {
    int d = -1;
    for (const auto& [I, m] : a.parts)
        if (!mvec_is_zero(m)) d = std::max(d, popcount(I));
    return d;
}

Form truncate(const Form& a, int W) {
    Form r;
    for (const auto& [I, m] : a.parts) {
        MVec v;
        for (const auto& x : m) v.push_back(truncate(x, W - popcount(I)));
        r.parts.emplace(I, std::move(v));
    }
    return r;
}

std::string form_string(const Form& a) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [I, m] : a.parts) {
        if (mvec_is_zero(m)) continue;
        os << (first ? "" : " + ") << mvec_string(m) << " " << mask_string(I);
        first = false;
    }
    return first ? "0" : os.str();
}

int wedge_sign(unsigned I, unsigned J) {
    if (I & J) return 0;
    int inv = 0;
    for (int b = 0; b < 32; ++b)
        if (J >> b & 1u) inv += popcount(I >> (b + 1));
    return inv % 2 ? -1 : 1;
}

Form nabla(const QHiggsModule& M, const Form& x) {
    Form r;
    for (const auto& [I, m] : x.parts) {
        if (mvec_is_zero(m)) continue;
        for (int i = 0; i < M.nindex(); ++i) {
            if (I >> i & 1u) continue;
            MVec y = M.theta(i, m);
            if (mvec_is_zero(y)) continue;
            int s = popcount(I & ((1u << i) - 1)) % 2 ? -1 : 1;
            r = form_add(r, form_scale(s, form_term(I | 1u << i, y)));
        }
    }
    return r;
}

// ---------------------------------------------------------------- checks

Report check_integrability(const QHiggsModule& M) {
    Report rep("integrability:" + M.name(), "theta_{M,i} theta_{M,j} = theta_{M,j} theta_{M,i} on a basis");
    for (int i = 0; i < M.nindex(); ++i)
        for (int j = i + 1; j < M.nindex(); ++j)
            for (int k = 0; k < M.rank(); ++k) {
                MVec e = M.basis(k);
                rep.expect(mvec_same(M.theta(i, M.theta(j, e)), M.theta(j, M.theta(i, e))),
                           "theta_" + std::to_string(i + 1) + " and theta_" + std::to_string(j + 1) + " do not commute on e_" + std::to_string(k + 1));
            }
    return rep;
}

Report check_quasi_nilpotent(const QHiggsModule& M, int N_max) {
    Report rep("quasi_nilpotence:" + M.name(), "(theta_{M,i})^N(x) = 0 for some N");
    if (M.rank() == 0) {
        rep.notes.push_back("zero module: N = 1");
        return rep;
    }
    for (int i = 0; i < M.nindex(); ++i)
        for (int j = 0; j < M.rank(); ++j) {
            MVec x = M.basis(j);
            int found = 0;
            try {
                for (int N = 1; N <= N_max && !found; ++N) {
                    x = M.theta(i, x);
                    if (mvec_is_zero(x)) found = N;
                }
            } catch (const Error& e) {
                rep.fail("theta_" + std::to_string(i + 1) + " on e_" + std::to_string(j + 1) + ": " + e.what());
                continue;
            }
            rep.expect(found > 0, "theta_" + std::to_string(i + 1) + "^N(e_" + std::to_string(j + 1) + ") != 0 for N <= " + std::to_string(N_max));
            if (found) rep.notes.push_back("theta_" + std::to_string(i + 1) + " e_" + std::to_string(j + 1) + ": N = " + std::to_string(found));
        }
    return rep;
}

std::vector<Form> basis_forms(const QHiggsModule& M, int W, int max_degree) {
    std::vector<Form> out;
    const EnvRing& R = M.host();
    const int d = M.nindex();
    for (unsigned I = 0; I < (1u << d); ++I) {
        int q = popcount(I);
        if (q > max_degree) continue;
        for (const Key& k : keys_upto(R, W - q))
            for (int j = 0; j < M.rank(); ++j) {
                MVec m = M.zero();
                m[j] = R.basis(k);
                out.push_back(form_term(I, std::move(m)));
            }
    }
    return out;
}

Report nabla_squared_check(const QHiggsModule& M, int W) {
    Report rep("nabla_squared:" + M.name(), "nabla^{q+1} nabla^q = 0");
    for (const auto& x : basis_forms(M, W, M.nindex() - 2))
        rep.expect(form_is_zero(nabla(M, nabla(M, x))), "nabla^2 != 0 on " + form_string(x));
    return rep;
}

ChainComplex build_complex(const QHiggsModule& M, int W, int max_degree) {
    const EnvRing& R = M.host();
    const int d = M.nindex();
    const int top = max_degree < 0 ? d : std::min(d, max_degree);
    const int L = R.precision();
    const int nb = R.base().deg_bound(L);
    require(W >= 0, ErrorKind::BadInput, "weight cap must be nonnegative");
    require(R.weight_cap() >= W + 1, ErrorKind::WeightCapTooSmall,
            "host weight cap " + std::to_string(R.weight_cap()) + " must exceed the complex cap " + std::to_string(W));

    struct Gen {
        unsigned mask;
        int j;
        Key key;
    };
    std::vector<std::vector<Gen>> gens(top + 1);
    std::vector<std::map<std::tuple<unsigned, int, Key>, std::size_t>> index(top + 1);
    ChainComplex C;
    C.p = R.p();
    C.lo = 0;
    C.exps.resize(top + 1);
    C.bands.resize(top + 1);
    C.labels.resize(top + 1);
    for (unsigned I = 0; I < (1u << d); ++I) {
        int q = popcount(I);
        if (q > top) continue;
        for (const Key& k : keys_upto(R, W - q))
            for (int j = 0; j < M.rank(); ++j) {
                index[q][{I, j, k}] = gens[q].size() * nb;
                gens[q].push_back({I, j, k});
                for (int e = 0; e < nb; ++e) {
                    C.exps[q].push_back(R.base().exponent(L, e));
                    C.bands[q].push_back(EnvRing::key_weight(k, R.nvars()) + q);
                    std::string lab = R.key_string(k);
                    C.labels[q].push_back((lab.empty() ? "1" : lab) + (e ? "*mu^" + std::to_string(e) : "") + "*e" + std::to_string(j + 1) + "*" + mask_string(I));
                }
            }
    }
    auto image = [&](unsigned I, int j, const Key& k) {
        MVec m = M.zero();
        m[j] = R.basis(k);
        try {
            return nabla(M, form_term(I, std::move(m)));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::BudgetExceeded)
                fail(ErrorKind::WeightCapTooSmall, "differential of " + R.key_string(k) + " leaves the host cap: " + e.what());
            throw;
        }
    };
    std::vector<BaseElt> mupow{base_one(R.base(), L)};
    for (int e = 1; e < nb; ++e) mupow.push_back(mupow.back() * base_mu(R.base(), L));
    for (int q = 0; q < top; ++q) {
        IMat D(C.exps[q + 1].size(), std::vector<i64>(C.exps[q].size(), 0));
        for (std::size_t g = 0; g < gens[q].size(); ++g) {
            const auto& G = gens[q][g];
            Form y = image(G.mask, G.j, G.key);
            for (const auto& [J, v] : y.parts)
                for (int jj = 0; jj < M.rank(); ++jj)
                    for (const auto& [kk, c] : v[jj].terms()) {
                        if (EnvRing::key_weight(kk, R.nvars()) + q + 1 > W) continue;
                        require(c.level() >= L, ErrorKind::PrecisionExhausted, "differential lost precision");
                        std::size_t row0 = index[q + 1].at({J, jj, kk});
                        for (int e = 0; e < nb; ++e) {
                            BaseElt ce = c * mupow[e];
                            for (int f = 0; f < nb; ++f)
                                if (ce.coeff(f)) D[row0 + f][g * nb + e] = ce.coeff(f);
                        }
                    }
        }
        C.d.push_back(std::move(D));
        // the forms above the cap must map above the cap
        for (unsigned I = 0; I < (1u << d); ++I) {
            if (popcount(I) != q) continue;
            for (const Key& k : keys_upto(R, W - q + 1, true))
                for (int j = 0; j < M.rank(); ++j) {
                    Form y = image(I, j, k);
                    for (const auto& [J, v] : y.parts)
                        for (const auto& x : v)
                            for (const auto& [kk, c] : x.terms())
                                if (EnvRing::key_weight(kk, R.nvars()) + q + 1 <= W && !c.is_zero())
                                    fail(ErrorKind::WeightCapTooSmall, "weight filtration not stable at " + R.key_string(k) + "*e" +
                                                                           std::to_string(j + 1) + "*" + mask_string(I));
                }
        }
    }
    check_complex(C);
    return C;
}

// ---------------------------------------------------------------- tensor products

QHiggsModule tensor(const QHiggsModule& M, const QHiggsModule& N) {
    require(M.host_ptr() == N.host_ptr() && M.thetas() == N.thetas(), ErrorKind::HostMismatch, "tensor product over different hosts");
    const int a = M.rank(), b = N.rank();
    const EnvRing& R = M.host();
    std::vector<EnvMat> T;
    for (int i = 0; i < M.nindex(); ++i) {
        const EnvMat& A = M.matrix(i);
        const EnvMat& B = N.matrix(i);
        const EnvElt& al = M.derivation(i).alpha();
        EnvMat C(a * b, MVec(a * b, R.zero()));
        for (int r = 0; r < a; ++r)
            for (int s = 0; s < b; ++s)
                for (int j = 0; j < a; ++j)
                    for (int k = 0; k < b; ++k) {
                        EnvElt x = R.zero();
                        if (s == k) x += A[r][j];
                        if (r == j) x += B[s][k];
                        if (!A[r][j].is_zero() && !B[s][k].is_zero()) x += al * A[r][j] * B[s][k];
                        C[r * b + s][j * b + k] = x;
                    }
        T.push_back(std::move(C));
    }
    return QHiggsModule(M.host_ptr(), M.thetas(), std::move(T), M.name() + "(x)" + N.name());
}

MVec tensor_vec(const QHiggsModule& M, const QHiggsModule& N, const MVec& m, const MVec& n) {
    MVec r(M.rank() * N.rank(), M.host().zero());
    for (int j = 0; j < M.rank(); ++j) {
        if (m[j].is_zero()) continue;
        for (int k = 0; k < N.rank(); ++k)
            if (!n[k].is_zero()) r[j * N.rank() + k] = m[j] * n[k];
    }
    return r;
}

MVec swap_vec(const QHiggsModule& M, const QHiggsModule& N, const MVec& x) {
    MVec r(x.size(), M.host().zero());
    for (int j = 0; j < M.rank(); ++j)
        for (int k = 0; k < N.rank(); ++k) r[k * M.rank() + j] = x[j * N.rank() + k];
    return r;
}

// ---------------------------------------------------------------- Frobenius

namespace {

EnvElt frob_twist(const EnvRing& R, int i) { return R.xi() * R.t(i).pow(R.p() - 1); }

void require_frobenius_relation(const QHiggsModule& M) {
    const EnvRing& R = M.host();
    require(M.nindex() <= R.nvars(), ErrorKind::BadInput, "Frobenius pullback needs one derivation per variable");
    for (int i = 0; i < M.nindex(); ++i) {
        const Derivation& D = M.derivation(i);
        EnvElt lead = frob_twist(R, i);
        for (int v = 0; v < R.nvars(); ++v) {
            std::vector<EnvElt> gens{R.t(v)};
            if (!R.is_const(v)) gens.push_back(R.tau(v));
            for (const auto& x : gens)
                if (!D(R.phi(x)).same(lead * R.phi(D(x))))
                    fail(ErrorKind::FrobeniusRelationFailed, D.spec().name + " does not satisfy d(phi x) = [p]_q t^{p-1} phi(d x) at " + x.to_string());
        }
    }
}

}  // namespace

QHiggsModule frobenius_pullback(const QHiggsModule& M) {
    require_frobenius_relation(M);
    const EnvRing& R = M.host();
    std::vector<EnvMat> T;
    for (int i = 0; i < M.nindex(); ++i) {
        EnvElt c = frob_twist(R, i);
        EnvMat A = M.matrix(i);
        for (auto& row : A)
            for (auto& x : row) x = x.is_zero() ? x : R.phi(x) * c;
        T.push_back(std::move(A));
    }
    return QHiggsModule(M.host_ptr(), M.thetas(), std::move(T), "phi*" + M.name());
}

FormMap frobenius_chain_map(const QHiggsModule& M) {
    require_frobenius_relation(M);
    auto host = M.host_ptr();
    const int d = M.nindex();
    return [host, d](const Form& x) {
        Form r;
        for (const auto& [I, m] : x.parts) {
            EnvElt c = host->one();
            for (int i = 0; i < d; ++i)
                if (I >> i & 1u) c = c * frob_twist(*host, i);
            MVec v;
            for (const auto& a : m) v.push_back(a.is_zero() ? a : host->phi(a) * c);
            r = form_add(r, form_term(I, std::move(v)));
        }
        return r;
    };
}

// ---------------------------------------------------------------- pullbacks

namespace {

EnvElt theta_elt_set(const DerivList& th, unsigned S, EnvElt a) {
    for (std::size_t i = 0; i < th.size(); ++i)
        if (S >> i & 1u) a = (*th[i])(a);
    return a;
}

EnvElt gamma_elt_set(const DerivList& th, unsigned S, EnvElt a) {
    for (std::size_t i = 0; i < th.size(); ++i)
        if (S >> i & 1u) a = th[i]->gamma(a);
    return a;
}

unsigned fibre(const std::vector<int>& psi, int ip) {
    unsigned S = 0;
    for (std::size_t i = 0; i < psi.size(); ++i)
        if (psi[i] == ip) S |= 1u << i;
    return S;
}

// sum over nonempty S in the fibre of ip of g(f(S)) prod_{i in S} c_i alpha'^{|S|-1}
template <class F, class T>
T fibre_sum(const PullbackSpec& S, int ip, F f, T zero, std::function<T(const EnvElt&, const T&)> scale, std::function<T(const T&, const T&)> add) {
    const unsigned fib = fibre(S.psi, ip);
    const EnvElt& alpha = S.target_thetas[ip]->alpha();
    T acc = zero;
    for (unsigned sub = fib; sub; sub = (sub - 1) & fib) {
        EnvElt c = S.g.tgt->one();
        for (std::size_t i = 0; i < S.psi.size(); ++i)
            if (sub >> i & 1u) c = c * S.c[i];
        c = c * alpha.pow(popcount(sub) - 1);
        acc = add(acc, scale(c, f(sub)));
    }
    return acc;
}

}  // namespace

Report validate_pullback(const PullbackSpec& S, const DerivList& src, int samples, std::uint64_t seed, int wmax) {
    Report rep("pullback_spec:" + S.name, "E^{psi,c}(g) is a bialgebra map (alpha, c and twisted-coproduct conditions)", seed);
    require(S.psi.size() == src.size() && S.c.size() == src.size(), ErrorKind::BadInput, "psi and c need one entry per source index");
    for (int ip : S.psi) require(ip >= 0 && ip < static_cast<int>(S.target_thetas.size()), ErrorKind::BadInput, "psi value out of range");
    for (const auto& c : S.c) require(c.ring_ptr() == S.g.tgt.get(), ErrorKind::HostMismatch, "twist constant outside the target host");
    const EnvRing& R = *S.g.src;
    const EnvRing& T = *S.g.tgt;
    for (std::size_t i = 0; i < src.size(); ++i) {
        rep.expect(S.g(src[i]->alpha()).same(S.c[i] * S.target_thetas[S.psi[i]]->alpha()),
                   "g(alpha_" + std::to_string(i + 1) + ") != c_i alpha'_psi(i)");
        for (std::size_t ip = 0; ip < S.target_thetas.size(); ++ip)
            if (static_cast<int>(ip) != S.psi[i])
                rep.expect((*S.target_thetas[ip])(S.c[i]).is_zero(), "theta'_" + std::to_string(ip + 1) + "(c_" + std::to_string(i + 1) + ") != 0");
    }
    std::vector<EnvElt> elts;
    for (int v = 0; v < R.nvars(); ++v) {
        elts.push_back(R.t(v));
        if (!R.is_const(v)) elts.push_back(R.tau(v));
    }
    std::mt19937_64 g(seed);
    for (int s = 0; s < samples; ++s) elts.push_back(random_env(g, R, wmax));
    std::function<EnvElt(const EnvElt&, const EnvElt&)> sc = [](const EnvElt& c, const EnvElt& x) { return c * x; };
    std::function<EnvElt(const EnvElt&, const EnvElt&)> ad = [](const EnvElt& a, const EnvElt& b) { return a + b; };
    for (const auto& a : elts) {
        EnvElt ga = S.g(a);
        for (std::size_t ip = 0; ip < S.target_thetas.size(); ++ip) {
            EnvElt lhs = (*S.target_thetas[ip])(ga);
            EnvElt rhs = fibre_sum(S, static_cast<int>(ip), [&](unsigned sub) { return S.g(theta_elt_set(src, sub, a)); }, T.zero(), sc, ad);
            rep.expect(lhs.same(rhs), "theta'_" + std::to_string(ip + 1) + "(g(a)) != sum_S g(theta_S a) c_S alpha'^{|S|-1} at a=" + a.to_string());
            EnvElt glhs = S.target_thetas[ip]->gamma(ga);
            EnvElt grhs = S.g(gamma_elt_set(src, fibre(S.psi, static_cast<int>(ip)), a));
            rep.expect(glhs.same(grhs), "gamma'_" + std::to_string(ip + 1) + "(g(a)) != g(prod gamma_i(a)) at a=" + a.to_string());
        }
    }
    return rep;
}

PullbackSpec frobenius_spec(const std::shared_ptr<const EnvRing>& R, const DerivList& thetas) {
    PullbackSpec S;
    S.name = "frobenius";
    S.g = RingMap::frobenius(R);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        S.psi.push_back(static_cast<int>(i));
        S.c.push_back(frob_twist(*R, static_cast<int>(i)));
    }
    S.target_thetas = thetas;
    return S;
}

PullbackSpec compose_pullbacks(const PullbackSpec& S, const PullbackSpec& S2) {
    require(monotone(S.psi) && monotone(S2.psi), ErrorKind::OrderViolation, "composite of pullbacks needs order-preserving index maps");
    PullbackSpec R;
    R.name = S2.name + "*" + S.name;
    R.g = compose(S2.g, S.g);
    for (std::size_t i = 0; i < S.psi.size(); ++i) {
        R.psi.push_back(S2.psi.at(S.psi[i]));
        R.c.push_back(S2.c.at(S.psi[i]) * S2.g(S.c[i]));
    }
    R.target_thetas = S2.target_thetas;
    return R;
}

QHiggsModule scalar_extension(const QHiggsModule& M, const PullbackSpec& S) {
    require(S.g.src == M.host_ptr(), ErrorKind::HostMismatch, "pullback spec does not start at the module host");
    auto rep = validate_pullback(S, M.thetas(), 2, 0, 2);
    if (!rep.pass) fail(ErrorKind::InvalidPullbackSpec, S.name + ": " + rep.witnesses.front());
    const EnvRing& T = *S.g.tgt;
    const int r = M.rank();
    std::vector<EnvMat> Th;
    std::function<MVec(const EnvElt&, const MVec&)> sc = [](const EnvElt& c, const MVec& x) { return mvec_scale(c, x); };
    std::function<MVec(const MVec&, const MVec&)> ad = [](const MVec& a, const MVec& b) { return mvec_add(a, b); };
    for (std::size_t ip = 0; ip < S.target_thetas.size(); ++ip) {
        EnvMat A(r, MVec(r, T.zero()));
        for (int j = 0; j < r; ++j) {
            MVec col = fibre_sum(S, static_cast<int>(ip), [&](unsigned sub) { return mvec_map(S.g, M.theta_set(sub, M.basis(j))); },
                                 mvec_zero(T, r), sc, ad);
            for (int k = 0; k < r; ++k) A[k][j] = col[k];
        }
        Th.push_back(std::move(A));
    }
    return QHiggsModule(S.g.tgt, S.target_thetas, std::move(Th), S.name + "^*" + M.name());
}

FormMap pullback_chain_map(const QHiggsModule& M, const PullbackSpec& S) {
    require(monotone(S.psi), ErrorKind::OrderViolation, "pullback chain map needs an order-preserving index map");
    require(S.g.src == M.host_ptr(), ErrorKind::HostMismatch, "pullback spec does not start at the module host");
    return [M, S](const Form& x) {
        Form r;
        const int d = M.nindex();
        for (const auto& [I, m] : x.parts) {
            unsigned J = 0;
            bool zero = false;
            MVec v = m;
            EnvElt c = S.g.tgt->one();
            for (int i = 0; i < d && !zero; ++i) {
                if (!(I >> i & 1u)) continue;
                unsigned bit = 1u << S.psi[i];
                if (J & bit) zero = true;
                J |= bit;
                unsigned before = 0;
                for (int j = 0; j < i; ++j)
                    if (S.psi[j] == S.psi[i]) before |= 1u << j;
                v = M.gamma_set(before, v);
                c = c * S.c[i];
            }
            if (zero) continue;
            r = form_add(r, form_term(J, mvec_scale(c, mvec_map(S.g, v))));
        }
        return r;
    };
}

Form product(const QHiggsModule& M, const QHiggsModule& N, const Form& x, const Form& y) {
    require(M.host_ptr() == N.host_ptr(), ErrorKind::HostMismatch, "product of complexes over different hosts");
    Form r;
    for (const auto& [I, m] : x.parts) {
        if (mvec_is_zero(m)) continue;
        for (const auto& [J, n] : y.parts) {
            int s = wedge_sign(I, J);
            if (!s || mvec_is_zero(n)) continue;
            r = form_add(r, form_scale(s, form_term(I | J, tensor_vec(M, N, m, N.gamma_set(I, n)))));
        }
    }
    return r;
}

// ---------------------------------------------------------------- identity checks

Report chain_map_check(const std::string& name, const QHiggsModule& src, const QHiggsModule& tgt, const FormMap& F, int W, int max_degree) {
    Report rep("chain_map:" + name, "F o nabla = nabla o F");
    for (const auto& x : basis_forms(src, W, max_degree)) {
        Form lhs = F(nabla(src, x));
        Form rhs = nabla(tgt, F(x));
        rep.expect(form_same(lhs, rhs), "F(nabla x) != nabla(F x) at x = " + form_string(x));
    }
    return rep;
}

Report leibniz_check(const QHiggsModule& M, const QHiggsModule& N, int W) {
    Report rep("product_leibniz:" + M.name() + "," + N.name(), "nabla(xy) = nabla(x) y + (-1)^|x| x nabla(y)");
    QHiggsModule T = tensor(M, N);
    auto xs = basis_forms(M, W, M.nindex());
    auto ys = basis_forms(N, W, N.nindex());
    for (const auto& x : xs)
        for (const auto& y : ys) {
            Form lhs = nabla(T, product(M, N, x, y));
            int s = form_degree(x) % 2 ? -1 : 1;
            Form rhs = form_add(product(M, N, nabla(M, x), y), form_scale(s, product(M, N, x, nabla(N, y))));
            rep.expect(form_same(lhs, rhs), "Leibniz fails at x = " + form_string(x) + ", y = " + form_string(y));
        }
    return rep;
}

bool same_module(const QHiggsModule& A, const QHiggsModule& B) {
    if (A.host_ptr() != B.host_ptr() || A.rank() != B.rank() || A.nindex() != B.nindex()) return false;
    for (int i = 0; i < A.nindex(); ++i)
        for (int r = 0; r < A.rank(); ++r)
            if (!mvec_same(A.matrix(i)[r], B.matrix(i)[r])) return false;
    return true;
}

Report pullback_cocycle_check(const QHiggsModule& M, const PullbackSpec& S, const PullbackSpec& S2, int W) {
    Report rep("pullback_cocycle:" + S2.name + "*" + S.name, "pullback(S2) o pullback(S) = pullback(S2 o S) with c''_i = c'_psi(i) g'(c_i)");
    PullbackSpec S3 = compose_pullbacks(S, S2);
    QHiggsModule M1 = scalar_extension(M, S);
    QHiggsModule M2 = scalar_extension(M1, S2);
    QHiggsModule M3 = scalar_extension(M, S3);
    rep.expect(same_module(M2, M3), "iterated scalar extension differs from the composite");
    auto F1 = pullback_chain_map(M, S), F2 = pullback_chain_map(M1, S2), F3 = pullback_chain_map(M, S3);
    for (const auto& x : basis_forms(M, W, std::min(M.nindex(), 2)))
        rep.expect(form_same(F2(F1(x)), F3(x)), "composite chain maps differ at x = " + form_string(x));
    return rep;
}

std::vector<EnvMat> random_commuting(const EnvRing& host, int d, int rank, std::mt19937_64& g, bool nilpotent) {
    const BaseRing& B = host.base();
    const int L = host.precision();
    auto rnd = [&]() { return host.scalar(random_base(g, B, L)); };
    auto small = [&]() {
        EnvElt x = rnd().scaled(B.p);
        if (!B.q_one()) x += rnd() * host.mu();
        return x;
    };
    EnvMat A(rank, MVec(rank, host.zero()));
    for (int r = 0; r < rank; ++r)
        for (int c = 0; c < rank; ++c) A[r][c] = nilpotent ? (c > r ? rnd() : host.zero()) + small() : rnd();
    auto matmul = [&](const EnvMat& X, const EnvMat& Y) {
        EnvMat Z(rank, MVec(rank, host.zero()));
        for (int r = 0; r < rank; ++r)
            for (int c = 0; c < rank; ++c)
                for (int k = 0; k < rank; ++k) Z[r][c] += X[r][k] * Y[k][c];
        return Z;
    };
    EnvMat A2 = matmul(A, A);
    std::vector<EnvMat> out;
    for (int i = 0; i < d; ++i) {
        EnvElt c0 = nilpotent ? small() : rnd(), c1 = rnd(), c2 = rnd();
        if (i == 0) c1 = host.one();
        EnvMat T(rank, MVec(rank, host.zero()));
        for (int r = 0; r < rank; ++r)
            for (int c = 0; c < rank; ++c) T[r][c] = c1 * A[r][c] + c2 * A2[r][c] + (r == c ? c0 : host.zero());
        out.push_back(std::move(T));
    }
    return out;
}

}  // namespace qprism
