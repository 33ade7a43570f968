#pragma once

#include <boost/container/small_vector.hpp>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qprism/error.hpp"

namespace qprism {

using i64 = std::int64_t;
using i128 = __int128;

enum class Mode { Generic, QOne };

// Z[q]/I^{n+1} with I = (p, mu^{p-1}), mu = q - 1; in QOne mode Z/p^{n+1}.
struct BaseRing {
    int p = 2;
    int n = 1;
    Mode mode = Mode::Generic;

    bool q_one() const { return mode == Mode::QOne; }
    // number of mu-degrees stored at level L
    int deg_bound(int L) const { return q_one() ? 1 : (p - 1) * (L + 1); }
    // p-adic exponent of the modulus of the mu^k coefficient at level L
    int exponent(int L, int k) const { return q_one() ? L + 1 : L + 1 - k / (p - 1); }
    i64 modulus(int L, int k) const;
    BaseRing at_precision(int m) const { return BaseRing{p, m, mode}; }

    bool operator==(const BaseRing& o) const { return p == o.p && n == o.n && mode == o.mode; }
    bool operator!=(const BaseRing& o) const { return !(*this == o); }
    std::string describe() const;
};

i64 ipow(i64 b, int e);
i64 binom(int n, int k);
i64 mod_inverse(i64 a, i64 m);
inline i64 mod_norm(i64 a, i64 m) {
    a %= m;
    return a < 0 ? a + m : a;
}
inline i64 mul_mod(i64 a, i64 b, i64 m) { return static_cast<i64>((static_cast<i128>(a) * b) % m); }
// p-adic valuation of a nonzero integer
int vp(i64 a, int p);

using Coeffs = boost::container::small_vector<i64, 12>;

class BaseElt {
public:
    BaseElt() = default;
    BaseElt(const BaseRing& R, int level);  // zero at level

    static BaseElt from_int(const BaseRing& R, int level, i64 v);
    // exact integer polynomial in mu, reduced at level
    static BaseElt from_poly(const BaseRing& R, int level, const std::vector<i64>& mu_coeffs);

    const BaseRing& ring() const { return R_; }
    int level() const { return level_; }
    const Coeffs& coeffs() const { return c_; }
    i64 coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0; }

    bool is_zero() const;
    bool is_unit() const;
    bool is_one() const;
    // reduce to a lower level
    BaseElt reduced(int L) const;

    BaseElt operator+(const BaseElt& o) const;
    BaseElt operator-(const BaseElt& o) const;
    BaseElt operator-() const;
    BaseElt operator*(const BaseElt& o) const;
    BaseElt& operator+=(const BaseElt& o);
    BaseElt& operator-=(const BaseElt& o);
    BaseElt& operator*=(const BaseElt& o) { return *this = *this * o; }
    BaseElt scaled(i64 s) const;
    BaseElt pow(unsigned e) const;

    // exact equality (same level, same residues)
    bool operator==(const BaseElt& o) const;
    bool operator!=(const BaseElt& o) const { return !(*this == o); }
    // equality after reducing both to level L
    bool equal_at(const BaseElt& o, int L) const;

    std::string to_string() const;

private:
    friend BaseElt delta(const BaseElt&);
    friend BaseElt phi(const BaseElt&);
    friend BaseElt times_p(const BaseElt&);
    void normalize();
    BaseRing R_;
    int level_ = 0;
    Coeffs c_;
};

void check_same_ring(const BaseRing& a, const BaseRing& b);

BaseElt delta(const BaseElt& x);
BaseElt phi(const BaseElt& x);
// lift y at level L-1 to p*y at level L (well defined since p*I^L is in I^{L+1})
BaseElt times_p(const BaseElt& y);
BaseElt invert(const BaseElt& u);

BaseElt base_one(const BaseRing& R, int level);
BaseElt base_mu(const BaseRing& R, int level);
BaseElt base_q(const BaseRing& R, int level);
BaseElt qint(const BaseRing& R, int level, i64 m);
BaseElt base_xi(const BaseRing& R, int level);
BaseElt base_eta(const BaseRing& R, int level);

// exact integer mu-polynomials of the named constants
std::vector<i64> qint_poly(int p, i64 m);

// uniformly random element at a level
BaseElt random_base(std::mt19937_64& g, const BaseRing& R, int level);
std::vector<i64> eta_poly(int p);

}  // namespace qprism
