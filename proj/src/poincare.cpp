#include "qprism/poincare.hpp"

#include <bit>
#include <map>

#include "qprism/divided_powers.hpp"
#include "qprism/error.hpp"

namespace qprism {

namespace {

constexpr std::size_t kMaxGenerators = 60000;

std::vector<Key> box(int d, int depth) {
    std::vector<Key> out{Key{}};
    for (int v = 0; v < d; ++v) {
        std::vector<Key> nxt;
        for (const Key& k : out)
            for (int n = 0; n < depth; ++n) {
                Key m = k;
                m[v] = static_cast<std::uint16_t>(n);
                nxt.push_back(m);
            }
        out = std::move(nxt);
    }
    return out;
}

}  // namespace

ChainComplex pd_complex(int p, int d, const std::vector<int>& coeff_exps, int depth) {
    require(d >= 1 && d <= 4, ErrorKind::BadInput, "PD complex needs 1 to 4 variables");
    require(depth >= 1, ErrorKind::BadInput, "depth must be positive");
    for (int e : coeff_exps) require(e >= 1 && e <= 30, ErrorKind::BadInput, "coefficient exponents must lie in 1..30");
    const auto cube = box(d, depth);
    const std::size_t r = coeff_exps.size();
    require(cube.size() * (std::size_t{1} << d) * std::max<std::size_t>(r, 1) <= kMaxGenerators, ErrorKind::DepthExceeded,
            "PD truncation depth too large for the box complex");
    const int top = coeff_exps.empty() ? 0 : *std::max_element(coeff_exps.begin(), coeff_exps.end()) - 1;
    auto R = PDRing::make(p, d, d * (depth - 1), top);

    ChainComplex C;
    C.p = p;
    C.exps.resize(d + 1);
    C.bands.resize(d + 1);
    C.labels.resize(d + 1);
    std::vector<std::map<std::pair<unsigned, Key>, std::size_t>> index(d + 1);
    for (unsigned I = 0; I < (1u << d); ++I) {
        int q = std::popcount(I);
        for (const Key& k : cube) {
            index[q][{I, k}] = C.exps[q].size();
            int deg = 0;
            for (int v = 0; v < d; ++v) deg += k[v];
            for (std::size_t j = 0; j < r; ++j) {
                C.exps[q].push_back(coeff_exps[j]);
                C.bands[q].push_back(deg + q);
                C.labels[q].push_back(PDElt::monomial(R, top, k).to_string() + "*e" + std::to_string(j + 1) + "*w" + std::to_string(I));
            }
        }
    }
    for (int q = 0; q < d; ++q) {
        IMat D(C.exps[q + 1].size(), std::vector<i64>(C.exps[q].size(), 0));
        for (const auto& [src, col0] : index[q]) {
            const auto& [I, k] = src;
            for (int v = 0; v < d; ++v) {
                if (I >> v & 1u) continue;
                PDElt y = PDElt::monomial(R, top, k).derive(v);
                int sign = std::popcount(I & ((1u << v) - 1)) % 2 ? -1 : 1;
                for (const auto& [kk, c] : y.terms()) {
                    std::size_t row0 = index[q + 1].at({I | 1u << v, kk});
                    for (std::size_t j = 0; j < r; ++j) D[row0 + j][col0 + j] = sign * c;
                }
            }
        }
        C.d.push_back(std::move(D));
    }
    check_complex(C);
    return C;
}

Report poincare_check(int p, int d, const std::vector<int>& coeff_exps, int depth, CohomologyReport* out) {
    return poincare_check(pd_complex(p, d, coeff_exps, depth), d, coeff_exps, depth, out);
}

Report poincare_check(const ChainComplex& C, int d, const std::vector<int>& coeff_exps, int depth, CohomologyReport* out) {
    const int p = C.p;
    Report rep("poincare:p=" + std::to_string(p) + ",d=" + std::to_string(d) + ",depth=" + std::to_string(depth),
               "the PD de Rham complex resolves its coefficient module; truncation defects are boundary classes");
    std::vector<int> M = coeff_exps;
    M.erase(std::remove(M.begin(), M.end(), 0), M.end());
    std::sort(M.rbegin(), M.rend());
    CohomologyReport total;
    total.p = p;
    std::vector<std::vector<int>> sum(d + 1);
    for (int b : C.band_values()) {
        ChainComplex B = C.band(b);
        for (int q = 0; q <= d; ++q) {
            std::vector<int> got = B.dim(q) ? cohomology(B, q).exponents : std::vector<int>{};
            std::vector<int> want;
            if (q == 0 && b == 0) want = M;
            if (q > 0 && b == q * depth) {
                // binomial(d, q) boundary copies of M
                int copies = 0;
                for (unsigned S = 0; S < (1u << d); ++S) copies += std::popcount(S) == q;
                for (int c = 0; c < copies; ++c) want.insert(want.end(), M.begin(), M.end());
                std::sort(want.rbegin(), want.rend());
            }
            std::string where = "H^" + std::to_string(q) + " in band " + std::to_string(b);
            rep.expect(got == want, where + " has " + std::to_string(got.size()) + " factors, expected " + std::to_string(want.size()));
            if (!got.empty()) {
                CohomologyGroup g{q, got};
                rep.notes.push_back(where + (q > 0 && b == q * depth ? " (boundary)" : "") + ": " + g.to_string(p));
            }
            sum[q].insert(sum[q].end(), got.begin(), got.end());
        }
    }
    for (int q = 0; q <= d; ++q) {
        std::sort(sum[q].rbegin(), sum[q].rend());
        total.groups.push_back({q, sum[q]});
    }
    if (out) *out = total;
    return rep;
}

}  // namespace qprism
