#pragma once

// Independent reference arithmetic: untruncated integer polynomials in mu with
// arbitrary precision coefficients, reduced to the monomial ideal only at the end.

#include <boost/multiprecision/cpp_int.hpp>
#include <random>
#include <vector>

#include "qprism/base_ring.hpp"

namespace oracle {

using Int = boost::multiprecision::cpp_int;
using IPoly = std::vector<Int>;

inline IPoly trim(IPoly a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

inline IPoly add(const IPoly& a, const IPoly& b) {
    IPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return trim(r);
}

inline IPoly sub(const IPoly& a, const IPoly& b) {
    IPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return trim(r);
}

inline IPoly mul(const IPoly& a, const IPoly& b) {
    if (a.empty() || b.empty()) return {};
    IPoly r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return trim(r);
}

inline IPoly pw(const IPoly& a, int e) {
    IPoly r{1};
    for (int i = 0; i < e; ++i) r = mul(r, a);
    return r;
}

// substitute mu -> (1+mu)^p - 1
inline IPoly frob(const IPoly& a, int p) {
    IPoly pm(p + 1);
    for (int j = 1; j <= p; ++j) pm[j] = Int(qprism::binom(p, j));
    IPoly acc;
    for (int k = static_cast<int>(a.size()) - 1; k >= 0; --k) acc = add(mul(acc, pm), IPoly{a[k]});
    return acc;
}

inline IPoly lift(const qprism::BaseElt& x) {
    IPoly r;
    for (auto c : x.coeffs()) r.push_back(Int(c));
    return trim(r);
}

inline qprism::BaseElt reduce(const qprism::BaseRing& R, int level, const IPoly& a) {
    std::vector<qprism::i64> c(R.deg_bound(level), 0);
    for (size_t k = 0; k < a.size() && k < c.size(); ++k) {
        Int m = Int(R.modulus(level, static_cast<int>(k)));
        Int v = a[k] % m;
        if (v < 0) v += m;
        c[k] = static_cast<qprism::i64>(v);
    }
    return qprism::BaseElt::from_poly(R, level, c);
}

// delta of the canonical lift, computed without truncation
inline qprism::BaseElt delta(const qprism::BaseElt& x) {
    const auto& R = x.ring();
    IPoly l = lift(x);
    IPoly f = R.q_one() ? l : frob(l, R.p);
    IPoly num = sub(f, pw(l, R.p));
    for (auto& c : num) c /= R.p;
    return reduce(R, x.level() - 1, num);
}

inline qprism::BaseElt random_elt(std::mt19937_64& g, const qprism::BaseRing& R, int level) {
    std::vector<qprism::i64> c(R.deg_bound(level));
    for (size_t k = 0; k < c.size(); ++k) c[k] = static_cast<qprism::i64>(g() % static_cast<std::uint64_t>(R.modulus(level, static_cast<int>(k))));
    return qprism::BaseElt::from_poly(R, level, c);
}

}  // namespace oracle
