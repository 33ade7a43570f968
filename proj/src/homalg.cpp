#include "qprism/homalg.hpp"

#include <algorithm>
#include <sstream>

#include "qprism/budget.hpp"

namespace qprism {

namespace {


// Smith form over Z/p^E; records pivot valuations and optionally the column
// transform W (A W = U S) together with V = W^{-1}.
struct ModSNF {
    std::vector<int> vals;
    IMat W, V;
};

ModSNF snf_mod(int p, int E, IMat A, std::size_t ncols, bool track) {
    const i64 M = ipow(p, E);
    const std::size_t m = A.size(), n = ncols;
    for (auto& r : A)
        for (auto& x : r) x = mod_norm(x, M);
    ModSNF res;
    if (track) {
        res.W.assign(n, std::vector<i64>(n, 0));
        res.V.assign(n, std::vector<i64>(n, 0));
        for (std::size_t i = 0; i < n; ++i) res.W[i][i] = res.V[i][i] = 1;
    }
    std::vector<std::size_t> nz;
    for (std::size_t t = 0; t < std::min(m, n); ++t) {
        int best = E;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = t; i < m && best > 0; ++i)
            for (std::size_t j = t; j < n; ++j) {
                if (A[i][j] == 0) continue;
                int v = vp(A[i][j], p);
                if (v < best) {
                    best = v, bi = i, bj = j;
                    if (v == 0) break;
                }
            }
        if (best == E) break;
        std::swap(A[t], A[bi]);
        if (bj != t) {
            for (auto& r : A) std::swap(r[t], r[bj]);
            if (track) {
                for (auto& r : res.W) std::swap(r[t], r[bj]);
                std::swap(res.V[t], res.V[bj]);
            }
        }
        const i64 pv = ipow(p, best);
        const i64 u = A[t][t] / pv;
        const i64 ui = mod_inverse(mod_norm(u, M), M);
        for (std::size_t j = t; j < n; ++j) A[t][j] = mul_mod(A[t][j], ui, M);
        nz.clear();
        for (std::size_t j = t + 1; j < n; ++j)
            if (A[t][j]) nz.push_back(j);
        for (std::size_t i = t + 1; i < m; ++i) {
            if (A[i][t] == 0) continue;
            const i64 f = A[i][t] / pv;
            A[i][t] = 0;
            for (std::size_t j : nz) A[i][j] = mod_norm(A[i][j] - mul_mod(f, A[t][j], M), M);
        }
        for (std::size_t j : nz) {
            const i64 f = A[t][j] / pv;
            A[t][j] = 0;
            if (track) {
                for (std::size_t r = 0; r < n; ++r)
                    if (res.W[r][t]) res.W[r][j] = mod_norm(res.W[r][j] - mul_mod(f, res.W[r][t], M), M);
                for (std::size_t c = 0; c < n; ++c)
                    if (res.V[j][c]) res.V[t][c] = mod_norm(res.V[t][c] + mul_mod(f, res.V[j][c], M), M);
            }
        }
        res.vals.push_back(best);
    }
    return res;
}

std::vector<i64> apply_mod(const IMat& d, const std::vector<i64>& x, i64 M) {
    std::vector<i64> y(d.size(), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        i128 s = 0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (d[i][j] && x[j]) s = (s + static_cast<i128>(d[i][j]) * x[j]) % M;
        y[i] = mod_norm(static_cast<i64>(s), M);
    }
    return y;
}

int max_exp(const std::vector<int>& e, int acc) {
    for (int x : e) acc = std::max(acc, x);
    return acc;
}

// kernel of d: C(src) -> C(tgt) as the lattice W * diag(p^{E-k_t}) modulo p^E
struct KernelData {
    int E;
    std::vector<int> k;
    IMat W, V;
};

KernelData kernel_data(int p, const std::vector<int>& src, const std::vector<int>& tgt, const IMat* d, int E) {
    KernelData K;
    K.E = E;
    const std::size_t n = src.size();
    IMat D;
    if (d) {
        D.resize(tgt.size());
        for (std::size_t i = 0; i < tgt.size(); ++i) {
            const i64 s = ipow(p, E - tgt[i]);
            D[i].resize(n);
            for (std::size_t j = 0; j < n; ++j) D[i][j] = (*d)[i][j] * s;
        }
    }
    auto snf = snf_mod(p, E, D, n, true);
    K.k.assign(n, E);
    for (std::size_t t = 0; t < snf.vals.size(); ++t) K.k[t] = snf.vals[t];
    K.W = std::move(snf.W);
    K.V = std::move(snf.V);
    return K;
}

// quotient of the kernel lattice by the given generators (integer lifts in source coordinates)
std::vector<int> quotient_exponents(int p, const KernelData& K, const std::vector<std::vector<i64>>& gens) {
    const i64 M = ipow(p, K.E);
    std::vector<std::size_t> rows;
    for (std::size_t t = 0; t < K.k.size(); ++t)
        if (K.k[t] > 0) rows.push_back(t);
    if (rows.empty()) return {};
    IMat P(rows.size());
    for (const auto& b : gens) {
        auto y = apply_mod(K.V, b, M);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::size_t t = rows[r];
            i64 s = ipow(p, K.E - K.k[t]);
            require(y[t] % s == 0, ErrorKind::NotAComplex, "boundary outside the kernel");
            P[r].push_back(y[t] / s);
        }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows.size(); ++c) P[c].push_back(c == r ? ipow(p, K.k[rows[r]]) % M : 0);
    }
    return cokernel_exponents(p, K.E, P);
}

}  // namespace

int ChainComplex::max_exponent() const {
    int E = 1;
    for (const auto& e : exps) E = max_exp(e, E);
    return E;
}

std::vector<int> ChainComplex::band_values() const {
    std::vector<int> out;
    for (const auto& b : bands)
        for (int x : b) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ChainComplex ChainComplex::band(int b) const {
    require(bands.size() == exps.size(), ErrorKind::BadInput, "complex has no band data");
    ChainComplex out;
    out.p = p;
    out.lo = lo;
    std::vector<std::vector<std::size_t>> idx(exps.size());
    for (std::size_t q = 0; q < exps.size(); ++q) {
        std::vector<int> e, bb;
        std::vector<std::string> lab;
        for (std::size_t j = 0; j < exps[q].size(); ++j)
            if (bands[q][j] == b) {
                idx[q].push_back(j);
                e.push_back(exps[q][j]);
                bb.push_back(b);
                if (!labels.empty()) lab.push_back(labels[q][j]);
            }
        out.exps.push_back(e);
        out.bands.push_back(bb);
        if (!labels.empty()) out.labels.push_back(lab);
    }
    for (std::size_t q = 0; q + 1 < exps.size(); ++q) {
        const auto& D = d[q];
        for (std::size_t j : idx[q])
            for (std::size_t i = 0; i < exps[q + 1].size(); ++i)
                if (bands[q + 1][i] != b && mod_norm(D[i][j], ipow(p, exps[q + 1][i])) != 0)
                    fail(ErrorKind::NotAComplex, "differential does not respect the band decomposition");
        IMat S(idx[q + 1].size(), std::vector<i64>(idx[q].size(), 0));
        for (std::size_t r = 0; r < idx[q + 1].size(); ++r)
            for (std::size_t c = 0; c < idx[q].size(); ++c) S[r][c] = D[idx[q + 1][r]][idx[q][c]];
        out.d.push_back(std::move(S));
    }
    return out;
}

nlohmann::ordered_json ChainComplex::to_json() const {
    nlohmann::ordered_json j;
    j["p"] = p;
    j["lo"] = lo;
    j["exps"] = exps;
    j["d"] = d;
    if (!bands.empty()) j["bands"] = bands;
    return j;
}

ChainComplex ChainComplex::from_json(const nlohmann::json& j) {
    ChainComplex C;
    try {
        C.p = j.at("p").get<int>();
        C.lo = j.value("lo", 0);
        C.exps = j.at("exps").get<std::vector<std::vector<int>>>();
        C.d = j.at("d").get<std::vector<IMat>>();
        if (j.contains("bands")) C.bands = j.at("bands").get<std::vector<std::vector<int>>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadInput, std::string("complex json: ") + e.what());
    }
    require(C.p >= 2, ErrorKind::BadInput, "p must be prime");
    for (int f = 2; f * f <= C.p; ++f) require(C.p % f != 0, ErrorKind::BadInput, "p must be prime");
    require(C.d.size() + 1 == C.exps.size() || (C.exps.empty() && C.d.empty()), ErrorKind::BadInput, "need one differential between consecutive degrees");
    for (std::size_t q = 0; q < C.d.size(); ++q) {
        require(C.d[q].size() == C.exps[q + 1].size(), ErrorKind::BadInput, "differential row count");
        for (const auto& r : C.d[q]) require(r.size() == C.exps[q].size(), ErrorKind::BadInput, "differential column count");
    }
    for (const auto& e : C.exps)
        for (int x : e) require(x >= 0 && x <= 30, ErrorKind::BadInput, "exponents must lie in [0, 30]");
    return C;
}

std::string CohomologyGroup::to_string(int p) const {
    if (exponents.empty()) return "0";
    std::ostringstream os;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (i) os << " + ";
        os << "Z/" << p;
        if (exponents[i] > 1) os << "^" << exponents[i];
    }
    return os.str();
}

nlohmann::ordered_json CohomologyReport::to_json() const {
    nlohmann::ordered_json j;
    j["p"] = p;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json e;
        e["degree"] = g.degree;
        e["exponents"] = g.exponents;
        e["group"] = g.to_string(p);
        arr.push_back(e);
    }
    j["groups"] = arr;
    return j;
}

std::string CohomologyReport::table() const {
    std::ostringstream os;
    os << "degree  group\n";
    for (const auto& g : groups) os << "H^" << g.degree << "     " << g.to_string(p) << "\n";
    return os.str();
}

void check_complex(const ChainComplex& C) {
    require(C.d.size() + 1 == C.exps.size() || C.exps.empty(), ErrorKind::NotAComplex, "differential count");
    const int E = C.max_exponent();
    const i64 M = ipow(C.p, E);
    for (std::size_t q = 0; q < C.d.size(); ++q) {
        const auto& D = C.d[q];
        const auto& src = C.exps[q];
        const auto& tgt = C.exps[q + 1];
        require(D.size() == tgt.size(), ErrorKind::NotAComplex, "differential shape");
        for (std::size_t i = 0; i < tgt.size(); ++i) {
            require(D[i].size() == src.size(), ErrorKind::NotAComplex, "differential shape");
            for (std::size_t j = 0; j < src.size(); ++j)
                if (tgt[i] > src[j] && mod_norm(D[i][j], ipow(C.p, tgt[i] - src[j])) != 0)
                    fail(ErrorKind::NotAComplex, "d^" + std::to_string(C.lo + q) + " is not well defined on generator " +
                                                     std::to_string(j) + " (row " + std::to_string(i) + ")");
        }
        if (q + 1 < C.d.size()) {
            const auto& D2 = C.d[q + 1];
            const auto& tt = C.exps[q + 2];
            for (std::size_t j = 0; j < src.size(); ++j) {
                std::vector<i64> col(tgt.size());
                for (std::size_t i = 0; i < tgt.size(); ++i) col[i] = mod_norm(D[i][j], M);
                auto y = apply_mod(D2, col, M);
                for (std::size_t i = 0; i < tt.size(); ++i)
                    if (mod_norm(y[i], ipow(C.p, tt[i])) != 0)
                        fail(ErrorKind::NotAComplex, "d^" + std::to_string(C.lo + q + 1) + " d^" + std::to_string(C.lo + q) +
                                                         " != 0 at column " + std::to_string(j) + ", row " + std::to_string(i));
            }
        }
    }
}

CohomologyGroup cohomology(const ChainComplex& C, int q) {
    CohomologyGroup G;
    G.degree = q;
    if (C.dim(q) == 0) return G;
    const int E = C.max_exponent();
    const auto& src = C.exps[q - C.lo];
    static const std::vector<int> none;
    const bool has_next = q < C.hi();
    auto K = kernel_data(C.p, src, has_next ? C.exps[q + 1 - C.lo] : none, has_next ? &C.d[q - C.lo] : nullptr, E);
    std::vector<std::vector<i64>> gens;
    const i64 M = ipow(C.p, E);
    if (q > C.lo) {
        const auto& D = C.d[q - 1 - C.lo];
        const std::size_t prev = C.exps[q - 1 - C.lo].size();
        for (std::size_t j = 0; j < prev; ++j) {
            std::vector<i64> b(src.size());
            bool nz = false;
            for (std::size_t i = 0; i < src.size(); ++i) {
                b[i] = mod_norm(D[i][j], M);
                nz = nz || b[i];
            }
            if (nz) gens.push_back(std::move(b));
        }
    }
    for (std::size_t j = 0; j < src.size(); ++j) {
        std::vector<i64> b(src.size(), 0);
        b[j] = ipow(C.p, src[j]) % M;
        if (b[j]) gens.push_back(std::move(b));
    }
    G.exponents = quotient_exponents(C.p, K, gens);
    return G;
}

CohomologyReport cohomology_all(const ChainComplex& C) {
    check_complex(C);
    CohomologyReport R;
    R.p = C.p;
    for (int q = C.lo; q <= C.hi(); ++q) R.groups.push_back(cohomology(C, q));
    return R;
}

Subgroup kernel_subgroup(int p, const std::vector<int>& src, const std::vector<int>& tgt, const IMat& d) {
    const int E = max_exp(tgt, max_exp(src, 1));
    auto K = kernel_data(p, src, tgt, &d, E);
    const i64 M = ipow(p, E);
    Subgroup S;
    for (std::size_t t = 0; t < K.k.size(); ++t) {
        if (K.k[t] == 0) continue;
        const i64 s = ipow(p, E - K.k[t]);
        std::vector<i64> g(src.size());
        bool nz = false;
        for (std::size_t r = 0; r < src.size(); ++r) {
            g[r] = mul_mod(K.W[r][t], s, M);
            if (mod_norm(g[r], ipow(p, src[r]))) nz = true;
        }
        if (nz) S.gens.push_back(std::move(g));
    }
    std::vector<std::vector<i64>> rel;
    for (std::size_t j = 0; j < src.size(); ++j) {
        std::vector<i64> b(src.size(), 0);
        b[j] = ipow(p, src[j]) % M;
        if (b[j]) rel.push_back(std::move(b));
    }
    S.exponents = quotient_exponents(p, K, rel);
    return S;
}

bool maps_to_zero(int p, const std::vector<int>& tgt, const IMat& d, const std::vector<i64>& x) {
    const i64 M = ipow(p, max_exp(tgt, 1));
    auto y = apply_mod(d, x, M);
    for (std::size_t i = 0; i < tgt.size(); ++i)
        if (mod_norm(y[i], ipow(p, tgt[i]))) return false;
    return true;
}

std::vector<int> cokernel_exponents(int p, int E, IMat M) {
    const std::size_t rows = M.size();
    if (rows == 0) return {};
    const std::size_t cols = M[0].size();
    check_budget(rows * cols / 64, "cokernel");
    auto snf = snf_mod(p, E, std::move(M), cols, false);
    std::vector<int> out;
    for (int v : snf.vals)
        if (v > 0) out.push_back(v);
    for (std::size_t r = snf.vals.size(); r < rows; ++r) out.push_back(E);
    std::sort(out.rbegin(), out.rend());
    return out;
}

SNFResult smith_normal_form(const BMat& A) {
    const std::size_t m = A.size(), n = m ? A[0].size() : 0;
    SNFResult R;
    R.S = A;
    R.U.assign(m, std::vector<BigInt>(m, 0));
    R.V.assign(n, std::vector<BigInt>(n, 0));
    for (std::size_t i = 0; i < m; ++i) R.U[i][i] = 1;
    for (std::size_t i = 0; i < n; ++i) R.V[i][i] = 1;
    auto& S = R.S;
    auto row_sub = [&](std::size_t i, std::size_t t, const BigInt& f) {
        for (std::size_t j = 0; j < n; ++j) S[i][j] -= f * S[t][j];
        for (std::size_t j = 0; j < m; ++j) R.U[i][j] -= f * R.U[t][j];
    };
    auto col_sub = [&](std::size_t j, std::size_t t, const BigInt& f) {
        for (std::size_t i = 0; i < m; ++i) S[i][j] -= f * S[i][t];
        for (std::size_t i = 0; i < n; ++i) R.V[i][j] -= f * R.V[i][t];
    };
    for (std::size_t t = 0; t < std::min(m, n); ++t) {
        for (;;) {
            bool found = false;
            std::size_t bi = t, bj = t;
            BigInt best = 0;
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < n; ++j)
                    if (S[i][j] != 0 && (!found || abs(S[i][j]) < best)) {
                        found = true;
                        best = abs(S[i][j]);
                        bi = i, bj = j;
                    }
            if (!found) return R;
            std::swap(S[t], S[bi]);
            std::swap(R.U[t], R.U[bi]);
            for (auto& r : S) std::swap(r[t], r[bj]);
            for (auto& r : R.V) std::swap(r[t], r[bj]);
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (S[i][t] == 0) continue;
                row_sub(i, t, S[i][t] / S[t][t]);
                if (S[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (S[t][j] == 0) continue;
                col_sub(j, t, S[t][j] / S[t][t]);
                if (S[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            bool divides = true;
            for (std::size_t i = t + 1; i < m && divides; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (S[i][j] % S[t][t] != 0) {
                        for (std::size_t c = 0; c < n; ++c) S[t][c] += S[i][c];
                        for (std::size_t c = 0; c < m; ++c) R.U[t][c] += R.U[i][c];
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
        if (S[t][t] < 0) {
            for (std::size_t c = 0; c < n; ++c) S[t][c] = -S[t][c];
            for (std::size_t c = 0; c < m; ++c) R.U[t][c] = -R.U[t][c];
        }
    }
    return R;
}

std::vector<BigInt> invariant_factors(const BMat& A) {
    auto R = smith_normal_form(A);
    std::vector<BigInt> out;
    for (std::size_t t = 0; t < std::min(R.S.size(), R.S.empty() ? 0 : R.S[0].size()); ++t)
        if (R.S[t][t] != 0) out.push_back(R.S[t][t]);
    return out;
}

}  // namespace qprism
