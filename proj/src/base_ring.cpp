#include "qprism/base_ring.hpp"

#include <algorithm>
#include <sstream>

namespace qprism {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::RingMismatch: return "RingMismatch";
        case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
        case ErrorKind::NotAUnit: return "NotAUnit";
        case ErrorKind::NotInvertible: return "NotInvertible";
        case ErrorKind::BudgetExceeded: return "BudgetExceeded";
        case ErrorKind::DeltaIncoherent: return "DeltaIncoherent";
        case ErrorKind::NotDeltaCompatible: return "NotDeltaCompatible";
        case ErrorKind::BadBeta: return "BadBeta";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::BadCenter: return "BadCenter";
        case ErrorKind::DepthExceeded: return "DepthExceeded";
        case ErrorKind::WeightCapTooSmall: return "WeightCapTooSmall";
        case ErrorKind::HostMismatch: return "HostMismatch";
        case ErrorKind::FrobeniusRelationFailed: return "FrobeniusRelationFailed";
        case ErrorKind::InvalidPullbackSpec: return "InvalidPullbackSpec";
        case ErrorKind::OrderViolation: return "OrderViolation";
        case ErrorKind::NotQuasiNilpotent: return "NotQuasiNilpotent";
        case ErrorKind::AugmentationFailed: return "AugmentationFailed";
        case ErrorKind::NotAComplex: return "NotAComplex";
        case ErrorKind::BadInput: return "BadInput";
    }
    return "Unknown";
}

i64 ipow(i64 b, int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) {
        require(r <= (i64(1) << 62) / (b == 0 ? 1 : b), ErrorKind::BudgetExceeded, "integer power overflow");
        r *= b;
    }
    return r;
}

i64 binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<i64>(r);
}

i64 mod_inverse(i64 a, i64 m) {
    i64 g = m, x = 0, x1 = 1, a1 = mod_norm(a, m);
    while (a1 != 0) {
        i64 q = g / a1;
        std::swap(g, a1);
        a1 -= q * g;
        std::swap(x, x1);
        x1 -= q * x;
    }
    require(g == 1, ErrorKind::NotAUnit, "residue not invertible");
    return mod_norm(x, m);
}

int vp(i64 a, int p) {
    int v = 0;
    while (a != 0 && a % p == 0) {
        a /= p;
        ++v;
    }
    return v;
}

i64 BaseRing::modulus(int L, int k) const { return ipow(p, exponent(L, k)); }

std::string BaseRing::describe() const {
    std::ostringstream os;
    os << "p=" << p << " n=" << n << " mode=" << (q_one() ? "q1" : "q");
    return os.str();
}

void check_same_ring(const BaseRing& a, const BaseRing& b) {
    if (a.p != b.p || a.mode != b.mode) fail(ErrorKind::RingMismatch, a.describe() + " vs " + b.describe());
}

BaseElt::BaseElt(const BaseRing& R, int level) : R_(R), level_(level), c_(R.deg_bound(level), 0) {
    require(level >= 0, ErrorKind::PrecisionExhausted, "negative level");
}

void BaseElt::normalize() {
    for (int k = 0; k < static_cast<int>(c_.size()); ++k) c_[k] = mod_norm(c_[k], R_.modulus(level_, k));
}

BaseElt BaseElt::from_int(const BaseRing& R, int level, i64 v) {
    BaseElt x(R, level);
    x.c_[0] = mod_norm(v, R.modulus(level, 0));
    return x;
}

BaseElt BaseElt::from_poly(const BaseRing& R, int level, const std::vector<i64>& mu) {
    BaseElt x(R, level);
    for (int k = 0; k < static_cast<int>(x.c_.size()) && k < static_cast<int>(mu.size()); ++k)
        x.c_[k] = mod_norm(mu[k], R.modulus(level, k));
    return x;
}

bool BaseElt::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](i64 v) { return v == 0; });
}

bool BaseElt::is_unit() const { return c_[0] % R_.p != 0; }

bool BaseElt::is_one() const {
    if (c_[0] != 1 % R_.modulus(level_, 0)) return false;
    for (size_t k = 1; k < c_.size(); ++k)
        if (c_[k] != 0) return false;
    return true;
}

BaseElt BaseElt::reduced(int L) const {
    if (L == level_) return *this;
    require(L <= level_, ErrorKind::PrecisionExhausted, "cannot raise level by reduction");
    BaseElt r(R_, L);
    for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = c_[k] % R_.modulus(L, static_cast<int>(k));
    return r;
}

BaseElt BaseElt::operator+(const BaseElt& o) const {
    BaseElt r = *this;
    r += o;
    return r;
}

BaseElt& BaseElt::operator+=(const BaseElt& o) {
    check_same_ring(R_, o.R_);
    if (o.level_ < level_) *this = reduced(o.level_);
    for (size_t k = 0; k < c_.size(); ++k) {
        i64 m = R_.modulus(level_, static_cast<int>(k));
        c_[k] = mod_norm(c_[k] + o.c_[k] % m, m);
    }
    return *this;
}

BaseElt BaseElt::operator-(const BaseElt& o) const {
    BaseElt r = *this;
    r -= o;
    return r;
}

BaseElt& BaseElt::operator-=(const BaseElt& o) {
    check_same_ring(R_, o.R_);
    if (o.level_ < level_) *this = reduced(o.level_);
    for (size_t k = 0; k < c_.size(); ++k) {
        i64 m = R_.modulus(level_, static_cast<int>(k));
        c_[k] = mod_norm(c_[k] - o.c_[k] % m, m);
    }
    return *this;
}

BaseElt BaseElt::operator-() const {
    BaseElt r = *this;
    for (size_t k = 0; k < c_.size(); ++k) {
        i64 m = R_.modulus(level_, static_cast<int>(k));
        r.c_[k] = r.c_[k] == 0 ? 0 : m - r.c_[k];
    }
    return r;
}

BaseElt BaseElt::operator*(const BaseElt& o) const {
    check_same_ring(R_, o.R_);
    int L = std::min(level_, o.level_);
    BaseElt r(R_, L);
    const int D = static_cast<int>(r.c_.size());
    const i64 M = ipow(R_.p, L + 1);
    for (int k = 0; k < D; ++k) {
        i128 acc = 0;
        for (int i = 0; i <= k; ++i) {
            i64 a = c_[i], b = o.c_[k - i];
            if (a && b) acc += static_cast<i128>(a % M) * (b % M);
        }
        r.c_[k] = static_cast<i64>(acc % R_.modulus(L, k));
    }
    return r;
}

BaseElt BaseElt::scaled(i64 s) const {
    BaseElt r = *this;
    for (size_t k = 0; k < c_.size(); ++k) {
        i64 m = R_.modulus(level_, static_cast<int>(k));
        r.c_[k] = mul_mod(c_[k], mod_norm(s, m), m);
    }
    return r;
}

BaseElt BaseElt::pow(unsigned e) const {
    BaseElt r = base_one(R_, level_), b = *this;
    while (e) {
        if (e & 1) r *= b;
        e >>= 1;
        if (e) b *= b;
    }
    return r;
}

bool BaseElt::operator==(const BaseElt& o) const {
    return R_.p == o.R_.p && R_.mode == o.R_.mode && level_ == o.level_ && c_ == o.c_;
}

bool BaseElt::equal_at(const BaseElt& o, int L) const { return reduced(L) == o.reduced(L); }

std::string BaseElt::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (size_t k = 0; k < c_.size(); ++k) {
        if (c_[k] == 0) continue;
        if (!first) os << " + ";
        first = false;
        if (k == 0) {
            os << c_[k];
        } else {
            if (c_[k] != 1) os << c_[k] << "*";
            os << "mu";
            if (k > 1) os << "^" << k;
        }
    }
    if (first) os << "0";
    return os.str();
}

namespace {

using Poly = std::vector<i64>;

// product in Z/M[mu]/(mu^D)
Poly trunc_mul(const Poly& a, const Poly& b, int D, i64 M) {
    Poly r(D, 0);
    for (int i = 0; i < D && i < static_cast<int>(a.size()); ++i) {
        if (!a[i]) continue;
        for (int j = 0; i + j < D && j < static_cast<int>(b.size()); ++j)
            if (b[j]) r[i + j] = static_cast<i64>((r[i + j] + static_cast<i128>(a[i]) * b[j]) % M);
    }
    return r;
}

// (1+mu)^p - 1 truncated
Poly phi_mu(int p, int D, i64 M) {
    Poly r(D, 0);
    for (int j = 1; j <= p && j < D; ++j) r[j] = binom(p, j) % M;
    return r;
}

// phi of the canonical lift, computed in Z/M[mu]/(mu^D)
Poly phi_lift(const Coeffs& c, int p, int D, i64 M) {
    Poly fm = phi_mu(p, D, M);
    Poly acc(D, 0);
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
        acc = trunc_mul(acc, fm, D, M);
        acc[0] = (acc[0] + c[k]) % M;
    }
    return acc;
}

}  // namespace

BaseElt phi(const BaseElt& x) {
    const BaseRing& R = x.ring();
    if (R.q_one()) return x;
    int L = x.level();
    const int D = R.deg_bound(L);
    const i64 M = ipow(R.p, L + 1);
    Poly f = phi_lift(x.c_, R.p, D, M);
    BaseElt r(R, L);
    for (int k = 0; k < D; ++k) r.c_[k] = f[k] % R.modulus(L, k);
    return r;
}

BaseElt delta(const BaseElt& x) {
    const BaseRing& R = x.ring();
    int L = x.level();
    require(L >= 1, ErrorKind::PrecisionExhausted, "delta of a level-0 element");
    const int D = R.deg_bound(L - 1);
    const i64 M = ipow(R.p, L + 1);
    Poly lift(D, 0);
    for (int k = 0; k < D && k < static_cast<int>(x.c_.size()); ++k) lift[k] = x.c_[k] % M;
    Poly f = R.q_one() ? lift : phi_lift(x.c_, R.p, D, M);
    Poly xp(D, 0);
    xp[0] = 1;
    for (int i = 0; i < R.p; ++i) xp = trunc_mul(xp, lift, D, M);
    BaseElt r(R, L - 1);
    for (int k = 0; k < D; ++k) {
        i64 v = mod_norm(f[k] - xp[k], M);
        if (v % R.p != 0) fail(ErrorKind::PrecisionExhausted, "internal: non-divisible delta numerator");
        r.c_[k] = (v / R.p) % R.modulus(L - 1, k);
    }
    return r;
}

BaseElt times_p(const BaseElt& y) {
    const BaseRing& R = y.ring();
    BaseElt r(R, y.level() + 1);
    for (size_t k = 0; k < y.c_.size(); ++k) r.c_[k] = (y.c_[k] * R.p) % R.modulus(y.level() + 1, static_cast<int>(k));
    return r;
}

BaseElt invert(const BaseElt& u) {
    require(u.is_unit(), ErrorKind::NotAUnit, u.to_string() + " is not a unit");
    const BaseRing& R = u.ring();
    int L = u.level();
    BaseElt v = BaseElt::from_int(R, L, mod_inverse(u.coeff(0), ipow(R.p, L + 1)));
    BaseElt two = BaseElt::from_int(R, L, 2);
    for (int it = 0; it < 64; ++it) {
        BaseElt uv = u * v;
        if (uv.is_one()) return v;
        v = v * (two - uv);
    }
    fail(ErrorKind::NotInvertible, "Newton iteration did not converge");
}

BaseElt base_one(const BaseRing& R, int level) { return BaseElt::from_int(R, level, 1); }

BaseElt base_mu(const BaseRing& R, int level) { return BaseElt::from_poly(R, level, {0, 1}); }

BaseElt base_q(const BaseRing& R, int level) { return BaseElt::from_poly(R, level, {1, 1}); }

std::vector<i64> qint_poly(int p, i64 m) {
    (void)p;
    require(m >= 0 && m <= 60, ErrorKind::BadInput, "q-integer index out of exact range");
    std::vector<i64> r(static_cast<size_t>(std::max<i64>(m, 1)), 0);
    for (i64 j = 0; j < m; ++j) r[j] = binom(static_cast<int>(m), static_cast<int>(j + 1));
    return r;
}

BaseElt qint(const BaseRing& R, int level, i64 m) {
    if (m <= 60) return BaseElt::from_poly(R, level, qint_poly(R.p, m));
    BaseElt q = base_q(R, level), acc(R, level), pw = base_one(R, level);
    for (i64 k = 0; k < m; ++k) {
        acc += pw;
        pw *= q;
    }
    return acc;
}

BaseElt base_xi(const BaseRing& R, int level) { return qint(R, level, R.p); }

std::vector<i64> eta_poly(int p) {
    std::vector<i64> r(static_cast<size_t>(p - 1), 0);
    for (int nu = 1; nu <= p - 1; ++nu) r[nu - 1] = binom(p, nu) / p;
    return r;
}

BaseElt base_eta(const BaseRing& R, int level) { return BaseElt::from_poly(R, level, eta_poly(R.p)); }

BaseElt random_base(std::mt19937_64& g, const BaseRing& R, int level) {
    std::vector<i64> c(R.deg_bound(level));
    for (size_t k = 0; k < c.size(); ++k) c[k] = static_cast<i64>(g() % static_cast<std::uint64_t>(R.modulus(level, static_cast<int>(k))));
    return BaseElt::from_poly(R, level, c);
}

}  // namespace qprism
