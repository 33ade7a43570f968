#include "qprism/delta_poly.hpp"

#include <algorithm>
#include <sstream>

#include "qprism/budget.hpp"

namespace qprism {

std::string DVar::name() const {
    std::ostringstream os;
    if (kind == V)
        os << "V" << index << "_" << k;
    else
        os << "t" << index;
    return os.str();
}

DMono mono_mul(const DMono& a, const DMono& b) {
    DMono r;
    r.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            r.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            r.push_back(b[j++]);
        } else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

DMono mono_pow(const DMono& a, unsigned e) {
    if (e == 0) return {};
    DMono r = a;
    for (auto& [v, x] : r) x *= e;
    return r;
}

unsigned mono_exponent(const DMono& m, DVar v) {
    for (const auto& [c, e] : m)
        if (c == v.code()) return e;
    return 0;
}

DeltaPoly DeltaPoly::constant(const BaseElt& c) {
    DeltaPoly P(c.ring(), c.level());
    P.add_term({}, c);
    return P;
}

DeltaPoly DeltaPoly::variable(const BaseRing& R, int level, DVar v, unsigned e) {
    DeltaPoly P(R, level);
    DMono m;
    if (e > 0) m.emplace_back(v.code(), e);
    P.add_term(m, base_one(R, level));
    return P;
}

BaseElt DeltaPoly::coeff(const DMono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? BaseElt(R_, level_) : it->second;
}

void DeltaPoly::add_term(const DMono& m, const BaseElt& c) {
    BaseElt cc = c.level() > level_ ? c.reduced(level_) : c;
    require(cc.level() == level_, ErrorKind::PrecisionExhausted, "term below polynomial level");
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        if (!cc.is_zero()) terms_.emplace(m, cc);
    } else {
        it->second += cc;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

DeltaPoly DeltaPoly::reduced(int L) const {
    if (L == level_) return *this;
    require(L <= level_, ErrorKind::PrecisionExhausted, "cannot raise level");
    DeltaPoly r(R_, L);
    for (const auto& [m, c] : terms_) r.add_term(m, c.reduced(L));
    return r;
}

DeltaPoly DeltaPoly::operator+(const DeltaPoly& o) const {
    check_same_ring(R_, o.R_);
    DeltaPoly r = reduced(std::min(level_, o.level_));
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

DeltaPoly DeltaPoly::operator-(const DeltaPoly& o) const { return *this + (-o); }

DeltaPoly DeltaPoly::operator-() const {
    DeltaPoly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

DeltaPoly DeltaPoly::operator*(const DeltaPoly& o) const {
    check_same_ring(R_, o.R_);
    DeltaPoly r(R_, std::min(level_, o.level_));
    for (const auto& [m1, c1] : terms_)
        for (const auto& [m2, c2] : o.terms_) r.add_term(mono_mul(m1, m2), c1 * c2);
    check_budget(r.size(), "DeltaPoly product");
    return r;
}

DeltaPoly DeltaPoly::scaled(i64 s) const {
    DeltaPoly r(R_, level_);
    for (const auto& [m, c] : terms_) r.add_term(m, c.scaled(s));
    return r;
}

DeltaPoly DeltaPoly::scaled(const BaseElt& s) const {
    DeltaPoly r(R_, std::min(level_, s.level()));
    for (const auto& [m, c] : terms_) r.add_term(m, c * s);
    return r;
}

DeltaPoly DeltaPoly::pow(unsigned e) const {
    DeltaPoly r = constant(base_one(R_, level_)), b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

bool DeltaPoly::operator==(const DeltaPoly& o) const { return level_ == o.level_ && terms_ == o.terms_; }

bool DeltaPoly::equal_at(const DeltaPoly& o, int L) const { return reduced(L) == o.reduced(L); }

unsigned DeltaPoly::degree_in(DVar v) const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, mono_exponent(m, v));
    return d;
}

DeltaPoly DeltaPoly::coefficient_of(DVar v, unsigned e) const {
    DeltaPoly r(R_, level_);
    for (const auto& [m, c] : terms_) {
        if (mono_exponent(m, v) != e) continue;
        DMono rest;
        for (const auto& f : m)
            if (f.first != v.code()) rest.push_back(f);
        r.add_term(rest, c);
    }
    return r;
}

namespace {

std::string mono_str(const DMono& m) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [code, e] : m) {
        if (!first) os << " ";
        first = false;
        os << DVar::from_code(code).name();
        if (e != 1) os << "^" << e;
    }
    return os.str();
}

std::string coeff_list(const BaseElt& x) {
    std::ostringstream os;
    os << "[";
    bool first = true;
    for (size_t k = 0; k < x.coeffs().size(); ++k) {
        if (x.coeffs()[k] == 0) continue;
        if (!first) os << ",";
        first = false;
        os << "[" << k << ",\"" << x.coeffs()[k] << "\"]";
    }
    os << "]";
    return os.str();
}

}  // namespace

std::string base_to_json(const BaseElt& x) {
    return "{\"level\":" + std::to_string(x.level()) + ",\"coeffs\":" + coeff_list(x) + "}";
}

std::string DeltaPoly::to_sexpr() const {
    std::ostringstream os;
    os << "(+";
    for (const auto& [m, c] : terms_) {
        os << " (* (" << c.to_string() << ")";
        if (!m.empty()) os << " " << mono_str(m);
        os << ")";
    }
    os << ")";
    return os.str();
}

std::string DeltaPoly::to_json() const {
    std::ostringstream os;
    os << "{\"level\":" << level_ << ",\"terms\":[";
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << ",";
        first = false;
        os << "{\"mono\":[";
        for (size_t i = 0; i < m.size(); ++i) {
            DVar v = DVar::from_code(m[i].first);
            if (i) os << ",";
            os << "[\"" << (v.kind == DVar::V ? "V" : "t") << "\"," << v.index << "," << v.k << "," << m[i].second << "]";
        }
        os << "],\"coeffs\":" << coeff_list(c) << "}";
    }
    os << "]}";
    return os.str();
}

namespace {

struct DeltaEngine {
    BaseRing R;
    int L;  // input level; outputs at L-1
    std::map<DMono, DeltaPoly> mono_cache;

    DeltaPoly one(int lvl) const { return DeltaPoly::constant(base_one(R, lvl)); }

    DeltaPoly mono_poly(const DMono& m, int lvl) const {
        DeltaPoly P(R, lvl);
        P.add_term(m, base_one(R, lvl));
        return P;
    }

    // delta of a single factor v^e, exact (computed at level L-1)
    DeltaPoly delta_power(DVar v, unsigned e) {
        DeltaPoly r(R, L - 1);
        if (v.kind == DVar::Const) return r;
        DMono base{{v.code(), 1}};
        DVar dv = DVar::var(v.index, v.k + 1);
        DMono dbase{{dv.code(), 1}};
        for (unsigned j = 1; j <= e; ++j) {
            i64 coef = binom(static_cast<int>(e), static_cast<int>(j)) * ipow(R.p, static_cast<int>(j) - 1);
            DMono m = mono_mul(mono_pow(base, R.p * (e - j)), mono_pow(dbase, j));
            r.add_term(m, BaseElt::from_int(R, L - 1, coef));
        }
        return r;
    }

    DeltaPoly delta_mono(const DMono& m) {
        auto it = mono_cache.find(m);
        if (it != mono_cache.end()) return it->second;
        DeltaPoly res(R, L - 1);
        if (!m.empty()) {
            DMono x{m[0]};
            DeltaPoly dx = delta_power(DVar::from_code(m[0].first), m[0].second);
            for (size_t i = 1; i < m.size(); ++i) {
                DMono y{m[i]};
                DeltaPoly dy = delta_power(DVar::from_code(m[i].first), m[i].second);
                // delta(xy) = dx y^p + x^p dy + p dx dy
                DeltaPoly nd = dx * mono_poly(mono_pow(y, R.p), L - 1) + mono_poly(mono_pow(x, R.p), L - 1) * dy +
                               (dx * dy).scaled(R.p);
                dx = nd;
                x = mono_mul(x, y);
            }
            res = dx;
        }
        mono_cache.emplace(m, res);
        return res;
    }

    DeltaPoly delta_term(const DMono& m, const BaseElt& c) {
        BaseElt dc = delta(c);
        DeltaPoly dm = delta_mono(m);
        DMono mp = mono_pow(m, R.p);
        DeltaPoly r(R, L - 1);
        r.add_term(mp, dc);
        r = r + dm.scaled(c.pow(R.p).reduced(L - 1)) + dm.scaled(dc.scaled(R.p));
        return r;
    }

    // returns delta of the sum of terms[lo,hi)
    DeltaPoly delta_range(const std::vector<std::pair<DMono, BaseElt>>& t, size_t lo, size_t hi, DeltaPoly& sum_out) {
        if (hi - lo == 1) {
            sum_out = DeltaPoly(R, L);
            sum_out.add_term(t[lo].first, t[lo].second);
            return delta_term(t[lo].first, t[lo].second);
        }
        size_t mid = lo + (hi - lo) / 2;
        DeltaPoly x, y;
        DeltaPoly dx = delta_range(t, lo, mid, x);
        DeltaPoly dy = delta_range(t, mid, hi, y);
        sum_out = x + y;
        DeltaPoly xr = x.reduced(L - 1), yr = y.reduced(L - 1);
        DeltaPoly corr(R, L - 1);
        std::vector<DeltaPoly> xp{one(L - 1)}, yp{one(L - 1)};
        for (int i = 1; i < R.p; ++i) {
            xp.push_back(xp.back() * xr);
            yp.push_back(yp.back() * yr);
        }
        for (int i = 1; i < R.p; ++i) corr = corr + (xp[i] * yp[R.p - i]).scaled(binom(R.p, i) / R.p);
        return dx + dy - corr;
    }
};

}  // namespace

DeltaPoly dp_delta(const DeltaPoly& P) {
    require(P.level() >= 1, ErrorKind::PrecisionExhausted, "delta of a level-0 polynomial");
    if (P.is_zero()) return DeltaPoly(P.ring(), P.level() - 1);
    DeltaEngine eng{P.ring(), P.level(), {}};
    std::vector<std::pair<DMono, BaseElt>> t(P.terms().begin(), P.terms().end());
    DeltaPoly sum;
    return eng.delta_range(t, 0, t.size(), sum);
}

DeltaPoly dp_phi(const DeltaPoly& P) {
    const BaseRing& R = P.ring();
    int L = P.level();
    std::map<std::uint32_t, DeltaPoly> img;
    DeltaPoly r(R, L);
    for (const auto& [m, c] : P.terms()) {
        DeltaPoly t = DeltaPoly::constant(phi(c));
        for (const auto& [code, e] : m) {
            auto it = img.find(code);
            if (it == img.end()) {
                DVar v = DVar::from_code(code);
                DeltaPoly im = DeltaPoly::variable(R, L, v, R.p);
                if (v.kind == DVar::V) {
                    DeltaPoly dv = DeltaPoly::variable(R, L, DVar::var(v.index, v.k + 1));
                    im = im + dv.scaled(R.p);
                }
                it = img.emplace(code, im).first;
            }
            t = t * it->second.pow(e);
        }
        r = r + t;
    }
    return r;
}

DeltaPoly dp_substitute(const DeltaPoly& P, const std::map<std::uint32_t, DeltaPoly>& assign, bool coherent) {
    const BaseRing& R = P.ring();
    if (coherent) {
        for (const auto& [code, im] : assign) {
            DVar v = DVar::from_code(code);
            if (v.kind != DVar::V) continue;
            auto nxt = assign.find(DVar::var(v.index, v.k + 1).code());
            if (nxt == assign.end()) continue;
            int lv = std::min(im.level() - 1, nxt->second.level());
            if (lv < 0 || !dp_delta(im).equal_at(nxt->second, lv))
                fail(ErrorKind::DeltaIncoherent, "image of " + DVar::var(v.index, v.k + 1).name() + " is not delta of the image of " + v.name());
        }
    }
    int L = P.level();
    for (const auto& [c, im] : assign) L = std::min(L, im.level());
    DeltaPoly zero(R, L);
    return dp_evaluate<DeltaPoly>(
        P, zero, [&](const BaseElt& c) { return DeltaPoly::constant(c.reduced(std::min(L, c.level()))); },
        [&](DVar v) {
            auto it = assign.find(v.code());
            return it == assign.end() ? DeltaPoly::variable(R, L, v) : it->second;
        });
}

}  // namespace qprism
