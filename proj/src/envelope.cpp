#include "qprism/envelope.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "qprism/budget.hpp"

namespace qprism {

namespace {

bool key_is_zero(const Key& k) {
    for (auto v : k)
        if (v) return false;
    return true;
}

// Rewrite right-hand side of delta^k(S)^p, as a polynomial in V(0,0..k+1) and the
// center symbol Const(1), computed from delta^{k+1}(xi S - t + c) with t = c + xi S.
struct RuleKey {
    int p;
    Mode mode;
    int prec;
    int k;
    int kind;
    std::vector<i64> poly;
    bool operator<(const RuleKey& o) const {
        return std::tie(p, mode, prec, k, kind, poly) < std::tie(o.p, o.mode, o.prec, o.k, o.kind, o.poly);
    }
};

DeltaPoly compute_rule(const RuleKey& key) {
    DeltaPoly Q = envelope_relation(key.p, key.mode, key.prec + key.k + 1, key.k,
                                    key.kind == CenterSpec::Base ? std::optional<std::vector<i64>>(key.poly) : std::nullopt);
    int lv = Q.level();
    BaseRing R{key.p, key.prec + key.k + 1, key.mode};
    DVar Vk = DVar::var(0, key.k);
    if (Q.degree_in(Vk) != static_cast<unsigned>(key.p)) fail(ErrorKind::NotInvertible, "relation is not of degree p");
    DeltaPoly cp = Q.coefficient_of(Vk, key.p);
    if (cp.size() != 1 || !cp.terms().begin()->first.empty()) fail(ErrorKind::NotInvertible, "non-constant p-th power coefficient");
    BaseElt cpv = cp.terms().begin()->second;
    if (!cpv.is_unit()) fail(ErrorKind::NotInvertible, "p-th power coefficient is not a unit");
    DeltaPoly rest = Q - DeltaPoly::variable(R, lv, Vk, key.p).scaled(cpv);
    return rest.scaled(-invert(cpv));
}

DeltaPoly cached_rule(const RuleKey& key) {
    static std::mutex m;
    static std::map<RuleKey, DeltaPoly> cache;
    {
        std::lock_guard<std::mutex> g(m);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    DeltaPoly r = compute_rule(key);
    std::lock_guard<std::mutex> g(m);
    cache.emplace(key, r);
    return r;
}

}  // namespace

DeltaPoly envelope_relation(int p, Mode mode, int base_precision, int k, const std::optional<std::vector<i64>>& center) {
    BaseRing R{p, base_precision, mode};
    int L = R.n;
    require(L >= k + 1, ErrorKind::PrecisionExhausted, "envelope relation needs more base precision");
    BaseElt xi = base_xi(R, L);
    DVar S = DVar::var(0, 0), T = DVar::constant(0), C = DVar::constant(1);
    DeltaPoly c = center ? DeltaPoly::constant(BaseElt::from_poly(R, L, *center)) : DeltaPoly::variable(R, L, C);
    DeltaPoly P = DeltaPoly::variable(R, L, S).scaled(xi) - DeltaPoly::variable(R, L, T) + c;
    for (int i = 0; i <= k; ++i) P = dp_delta(P);
    int lv = P.level();
    std::map<std::uint32_t, DeltaPoly> sub{{T.code(), (c + DeltaPoly::variable(R, L, S).scaled(xi)).reduced(lv)}};
    DeltaPoly Q = dp_substitute(P, sub);
    DVar top = DVar::var(0, k + 1);
    if (Q.degree_in(top) != 1) fail(ErrorKind::NotInvertible, "unexpected envelope relation shape");
    BaseElt phixi = xi;
    for (int i = 0; i <= k; ++i) phixi = phi(phixi);
    if (Q.coefficient_of(top, 1) != DeltaPoly::constant(phixi.reduced(lv))) fail(ErrorKind::NotInvertible, "unexpected leading coefficient");
    return Q;
}

// ---------------------------------------------------------------- EnvElt

int EnvElt::weight() const {
    int w = 0;
    for (const auto& [k, c] : terms_) w = std::max(w, EnvRing::key_weight(k, R_->nvars()));
    return w;
}

BaseElt EnvElt::coeff(const Key& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? BaseElt(R_->base(), level_) : it->second;
}

void EnvElt::add_term(const Key& k, const BaseElt& c) {
    BaseElt cc = c.level() > level_ ? c.reduced(level_) : c;
    require(cc.level() == level_, ErrorKind::PrecisionExhausted, "term below element level");
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        if (!cc.is_zero()) terms_.emplace(k, cc);
    } else {
        it->second += cc;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

EnvElt EnvElt::reduced(int L) const {
    if (L == level_) return *this;
    require(L <= level_ && L >= 0, ErrorKind::PrecisionExhausted, "cannot raise level");
    EnvElt r(R_, L);
    for (const auto& [k, c] : terms_) r.add_term(k, c.reduced(L));
    return r;
}

EnvElt& EnvElt::operator+=(const EnvElt& o) {
    require(R_ == o.R_, ErrorKind::RingMismatch, "envelope elements of different rings");
    if (o.level_ < level_) *this = reduced(o.level_);
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

EnvElt& EnvElt::operator-=(const EnvElt& o) { return *this += -o; }

EnvElt EnvElt::operator+(const EnvElt& o) const {
    EnvElt r = *this;
    r += o;
    return r;
}

EnvElt EnvElt::operator-(const EnvElt& o) const {
    EnvElt r = *this;
    r -= o;
    return r;
}

EnvElt EnvElt::operator-() const {
    EnvElt r = *this;
    for (auto& [k, c] : r.terms_) c = -c;
    return r;
}

EnvElt EnvElt::operator*(const EnvElt& o) const { return R_->mul(*this, o); }

EnvElt EnvElt::scaled(i64 s) const {
    EnvElt r(R_, level_);
    for (const auto& [k, c] : terms_) r.add_term(k, c.scaled(s));
    return r;
}

EnvElt EnvElt::scaled(const BaseElt& s) const {
    EnvElt r(R_, std::min(level_, s.level()));
    for (const auto& [k, c] : terms_) r.add_term(k, c * s);
    return r;
}

EnvElt EnvElt::pow(unsigned e) const {
    EnvElt r = R_->one(level_), b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

bool EnvElt::operator==(const EnvElt& o) const { return R_ == o.R_ && level_ == o.level_ && terms_ == o.terms_; }

bool EnvElt::equal_at(const EnvElt& o, int L) const { return reduced(L) == o.reduced(L); }

bool EnvElt::same(const EnvElt& o) const { return equal_at(o, std::min(level_, o.level_)); }

std::string EnvElt::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.to_string() << ")";
        if (!key_is_zero(k)) os << "*" << R_->key_string(k);
    }
    return os.str();
}

std::string EnvElt::to_json() const {
    std::ostringstream os;
    os << "{\"level\":" << level_ << ",\"terms\":[";
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << ",";
        first = false;
        os << "{\"index\":[";
        for (int v = 0; v < R_->nvars(); ++v) os << (v ? "," : "") << k[v];
        os << "],\"coeff\":" << base_to_json(c) << "}";
    }
    os << "]}";
    return os.str();
}

// ---------------------------------------------------------------- EnvRing

int EnvRing::key_weight(const Key& k, int nvars) {
    int w = 0;
    for (int v = 0; v < nvars; ++v) w += k[v];
    return w;
}

std::vector<int> EnvRing::digits(int m) const {
    std::vector<int> d(K_ + 1, 0);
    for (int k = 0; k <= K_ && m; ++k) {
        d[k] = m % p();
        m /= p();
    }
    return d;
}

std::string EnvRing::key_string(const Key& k) const {
    std::ostringstream os;
    bool first = true;
    for (int v = 0; v < nvars(); ++v) {
        if (!k[v]) continue;
        const std::string& nm = spec_.vars[v].name;
        if (is_const(v)) {
            os << (first ? "" : "*") << nm;
            if (k[v] > 1) os << "^" << k[v];
            first = false;
            continue;
        }
        auto d = digits(k[v]);
        for (int i = 0; i <= K_; ++i) {
            if (!d[i]) continue;
            os << (first ? "" : "*");
            first = false;
            if (i == 0)
                os << nm;
            else if (i == 1)
                os << "d(" << nm << ")";
            else
                os << "d" << i << "(" << nm << ")";
            if (d[i] > 1) os << "^" << d[i];
        }
    }
    return os.str();
}

EnvRing::EnvRing(const EnvSpec& spec, int precision) : spec_(spec), base_{spec.p, precision, spec.mode} {
    require(spec.p >= 2, ErrorKind::BadInput, "p must be at least 2");
    require(nvars() <= kMaxVars, ErrorKind::BadInput, "too many envelope variables");
    require(spec.weight_cap >= 1 && spec.weight_cap < 60000, ErrorKind::BadInput, "weight cap out of range");
    for (int w = 1; w * p() <= spec.weight_cap; w *= p()) ++K_;
}

std::shared_ptr<const EnvRing> EnvRing::build(const EnvSpec& spec, int precision) {
    require(precision >= 0, ErrorKind::BadInput, "negative precision");
    std::shared_ptr<EnvRing> R(new EnvRing(spec, precision));
    R->self_ = R;
    R->rules_.resize(R->nvars());
    R->tables_.resize(R->nvars());
    R->centers_.resize(R->nvars());
    for (int v = 0; v < R->nvars(); ++v) R->build_var(v);
    return R;
}

std::shared_ptr<const EnvRing> EnvRing::at_precision(int n) const {
    if (n == precision()) return self_.lock();
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = precisions_.find(n);
        if (it != precisions_.end()) return it->second;
    }
    auto R = build(spec_, n);
    std::lock_guard<std::mutex> g(mu_);
    precisions_.emplace(n, R);
    return R;
}

EnvElt EnvRing::import(const EnvElt& x) const {
    require(x.ring().spec_.p == p() && x.ring().nvars() == nvars(), ErrorKind::RingMismatch, "import between different towers");
    int L = std::min(x.level(), precision());
    EnvElt r(this, L);
    for (const auto& [k, c] : x.terms()) r.add_term(k, c.reduced(std::min(L, c.level())));
    return r;
}

EnvElt EnvRing::zero(int level) const { return EnvElt(this, level < 0 ? precision() : level); }

EnvElt EnvRing::one(int level) const { return scalar(base_one(base_, level < 0 ? precision() : level)); }

EnvElt EnvRing::scalar(const BaseElt& c) const {
    EnvElt r(this, c.level());
    r.add_term(Key{}, c);
    return r;
}

EnvElt EnvRing::basis(const Key& k) const {
    require(key_weight(k, nvars()) <= weight_cap(), ErrorKind::BudgetExceeded, "basis monomial beyond the weight cap");
    EnvElt r(this, precision());
    r.add_term(k, base_one(base_, precision()));
    return r;
}

EnvElt EnvRing::delta_tau(int v, int k) const {
    require(!is_const(v), ErrorKind::BadInput, "delta-constant variable has no delta-iterates");
    require(k <= K_, ErrorKind::BudgetExceeded, "delta level beyond the weight cap");
    Key key{};
    key[v] = static_cast<std::uint16_t>(ipow(p(), k));
    return basis(key);
}

EnvElt EnvRing::tau(int v) const {
    Key key{};
    key[v] = 1;
    return basis(key);
}

EnvElt EnvRing::center(int v) const { return centers_[v]; }

EnvElt EnvRing::t(int v) const {
    if (is_const(v)) return tau(v);
    return centers_[v] + tau(v) * xi();
}

EnvElt EnvRing::from_var_index(int v, int m, const EnvElt& lower) const {
    EnvElt r(this, lower.level());
    for (const auto& [k, c] : lower.terms()) {
        Key kk = k;
        kk[v] = static_cast<std::uint16_t>(m);
        r.terms_.emplace(kk, c);
    }
    return r;
}

void EnvRing::build_var(int v) {
    const VarSpec& vs = spec_.vars[v];
    const int W = weight_cap();
    const int N = precision();
    tables_[v].assign(W + 1, std::vector<EnvElt>());
    if (vs.kind == VarSpec::Const) {
        centers_[v] = zero();
        for (int i = 0; i <= W; ++i) {
            tables_[v][i].resize(W + 1 - i);
            for (int j = 0; i + j <= W; ++j) {
                Key k{};
                k[v] = static_cast<std::uint16_t>(i + j);
                tables_[v][i][j] = basis(k);
            }
        }
        return;
    }
    // center
    if (vs.center.kind == CenterSpec::Base) {
        centers_[v] = scalar(BaseElt::from_poly(base_, N, vs.center.base_poly));
    } else {
        EnvElt c = import(vs.center.lower(*this));
        for (const auto& [k, coef] : c.terms())
            for (int u = v; u < nvars(); ++u)
                require(k[u] == 0, ErrorKind::BadCenter, "relative center must lie in the lower tower");
        if (N >= 1) require(delta(c).is_zero(), ErrorKind::BadCenter, "relative center is not a delta-constant");
        centers_[v] = c;
    }
    // rewrite rules delta^k(tau)^p -> ...
    rules_[v].resize(K_);
    for (int k = 0; k < K_; ++k) {
        RuleKey key{p(), spec_.mode, N, k, vs.center.kind, vs.center.kind == CenterSpec::Base ? vs.center.base_poly : std::vector<i64>{}};
        DeltaPoly rhs = cached_rule(key);
        std::map<std::vector<std::uint16_t>, EnvElt> merged;
        for (const auto& [m, c] : rhs.terms()) {
            std::vector<std::uint16_t> e(K_ + 1, 0);
            EnvElt coef = scalar(c);
            for (const auto& [code, ex] : m) {
                DVar dv = DVar::from_code(code);
                if (dv.kind == DVar::Const) {
                    coef = coef * centers_[v].pow(ex);
                } else {
                    require(dv.k <= K_, ErrorKind::BudgetExceeded, "rewrite rule beyond the weight cap");
                    e[dv.k] = static_cast<std::uint16_t>(ex);
                }
            }
            auto it = merged.find(e);
            if (it == merged.end())
                merged.emplace(e, coef);
            else
                it->second += coef;
        }
        for (auto& [e, c] : merged)
            if (!c.is_zero()) rules_[v][k].push_back(RawTerm{e, c});
    }
    // product table
    for (int i = 0; i <= W; ++i) {
        tables_[v][i].resize(W + 1 - i);
        for (int j = 0; i + j <= W; ++j) {
            if (j < i) {
                tables_[v][i][j] = tables_[v][j][i];
                continue;
            }
            auto di = digits(i), dj = digits(j);
            std::vector<std::uint16_t> e(K_ + 1);
            for (int k = 0; k <= K_; ++k) e[k] = static_cast<std::uint16_t>(di[k] + dj[k]);
            std::map<std::vector<std::uint16_t>, EnvElt> raw;
            raw.emplace(e, one());
            tables_[v][i][j] = normalize_raw(v, std::move(raw));
        }
    }
}

EnvElt EnvRing::normalize_raw(int v, std::map<std::vector<std::uint16_t>, EnvElt> raw) const {
    const int P = p();
    EnvElt result = zero();
    std::size_t steps = 0;
    while (!raw.empty()) {
        auto it = raw.begin();
        std::vector<std::uint16_t> e = it->first;
        EnvElt coef = it->second;
        raw.erase(it);
        if (coef.is_zero()) continue;
        int k = -1;
        for (int i = 0; i <= K_; ++i)
            if (e[i] >= P) {
                k = i;
                break;
            }
        if (k < 0) {
            int m = 0;
            for (int i = K_; i >= 0; --i) m = m * P + e[i];
            result += from_var_index(v, m, coef);
            continue;
        }
        require(k < K_, ErrorKind::BudgetExceeded, "normal form needs a delta level beyond the weight cap");
        check_budget(++steps, "envelope normalization");
        e[k] = static_cast<std::uint16_t>(e[k] - P);
        for (const auto& rt : rules_[v][k]) {
            std::vector<std::uint16_t> ne = e;
            for (int i = 0; i <= K_; ++i) ne[i] = static_cast<std::uint16_t>(ne[i] + rt.exps[i]);
            EnvElt nc = coef * rt.coeff;
            auto f = raw.find(ne);
            if (f == raw.end())
                raw.emplace(ne, nc);
            else
                f->second += nc;
        }
    }
    return result;
}

const EnvElt& EnvRing::table(int v, int i, int j) const {
    require(i + j <= weight_cap(), ErrorKind::BudgetExceeded, "product beyond the weight cap");
    return tables_[v][i][j];
}

EnvElt EnvRing::mul(const EnvElt& x, const EnvElt& y) const {
    require(x.ring_ptr() == this && y.ring_ptr() == this, ErrorKind::RingMismatch, "envelope elements of different rings");
    int top = -1;
    for (const EnvElt* e : {&x, &y})
        for (const auto& [k, c] : e->terms())
            for (int v = nvars() - 1; v > top; --v)
                if (k[v]) top = v;
    EnvElt r = mul_rec(x, y, top);
    check_budget(r.size(), "envelope product");
    return r;
}

EnvElt EnvRing::mul_rec(const EnvElt& x, const EnvElt& y, int v) const {
    const int L = std::min(x.level(), y.level());
    EnvElt r(this, L);
    if (x.is_zero() || y.is_zero()) return r;
    // scalar shortcut
    if (y.size() == 1 && key_is_zero(y.terms().begin()->first)) return x.scaled(y.terms().begin()->second).reduced(L);
    if (x.size() == 1 && key_is_zero(x.terms().begin()->first)) return y.scaled(x.terms().begin()->second).reduced(L);
    if (v < 0) {
        r.add_term(Key{}, x.coeff(Key{}) * y.coeff(Key{}));
        return r;
    }
    std::map<int, EnvElt> gx, gy;
    for (const auto& [k, c] : x.terms()) {
        Key kk = k;
        kk[v] = 0;
        auto it = gx.try_emplace(k[v], this, x.level()).first;
        it->second.terms_.emplace(kk, c);
    }
    for (const auto& [k, c] : y.terms()) {
        Key kk = k;
        kk[v] = 0;
        auto it = gy.try_emplace(k[v], this, y.level()).first;
        it->second.terms_.emplace(kk, c);
    }
    std::map<int, EnvElt> acc;
    for (const auto& [i, xi] : gx)
        for (const auto& [j, yj] : gy) {
            EnvElt low = mul_rec(xi, yj, v - 1);
            if (low.is_zero()) continue;
            const EnvElt& T = table(v, std::min(i, j), std::max(i, j));
            if (T.size() == 1 && key_is_zero(T.terms().begin()->first)) {
                auto it = acc.try_emplace(0, this, L).first;
                it->second += low.scaled(T.terms().begin()->second);
                continue;
            }
            std::map<int, EnvElt> gt;
            for (const auto& [k, c] : T.terms()) {
                Key kk = k;
                kk[v] = 0;
                auto it = gt.try_emplace(k[v], this, T.level()).first;
                it->second.terms_.emplace(kk, c);
            }
            for (const auto& [l, tl] : gt) {
                auto it = acc.try_emplace(l, this, L).first;
                it->second += mul_rec(low, tl, v - 1);
            }
        }
    for (const auto& [l, low] : acc) {
        if (low.is_zero()) continue;
        for (const auto& [k, c] : low.terms()) {
            Key kk = k;
            kk[v] = static_cast<std::uint16_t>(l);
            r.add_term(kk, c);
        }
    }
    return r;
}

EnvElt EnvRing::delta_basis(const Key& key) const {
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = delta_cache_.find(key);
        if (it != delta_cache_.end()) return it->second;
    }
    const int P = p();
    EnvElt acc_x = one(), acc_d = zero();
    bool started = false;
    for (int v = 0; v < nvars(); ++v) {
        if (!key[v]) continue;
        std::vector<std::pair<EnvElt, EnvElt>> factors;  // (y^a, delta(y^a))
        if (is_const(v)) {
            Key k{};
            k[v] = key[v];
            factors.emplace_back(basis(k), zero());
        } else {
            auto d = digits(key[v]);
            for (int k = 0; k <= K_; ++k) {
                if (!d[k]) continue;
                require(k + 1 <= K_, ErrorKind::BudgetExceeded, "delta of a monomial beyond the weight cap");
                EnvElt y = delta_tau(v, k), dy = delta_tau(v, k + 1);
                EnvElt s = zero();
                for (int j = 1; j <= d[k]; ++j)
                    s += (y.pow(P * (d[k] - j)) * dy.pow(j)).scaled(binom(d[k], j) * ipow(P, j - 1));
                factors.emplace_back(y.pow(d[k]), s);
            }
        }
        for (auto& [y, dy] : factors) {
            if (!started) {
                acc_x = y;
                acc_d = dy;
                started = true;
                continue;
            }
            EnvElt nd = acc_d * y.pow(P) + acc_x.pow(P) * dy + (acc_d * dy).scaled(P);
            acc_x = acc_x * y;
            acc_d = nd;
        }
    }
    std::lock_guard<std::mutex> g(mu_);
    delta_cache_.emplace(key, acc_d);
    return acc_d;
}

EnvElt EnvRing::delta(const EnvElt& x) const {
    require(x.level() >= 1, ErrorKind::PrecisionExhausted, "delta of a level-0 envelope element");
    const int L = x.level();
    const int P = p();
    std::vector<std::pair<Key, BaseElt>> t(x.terms().begin(), x.terms().end());
    if (t.empty()) return zero(L - 1);
    // delta of one term c*m
    auto delta_term = [&](const Key& k, const BaseElt& c) {
        BaseElt dc = qprism::delta(c);
        EnvElt dm = delta_basis(k).reduced(L - 1);
        EnvElt m = basis(k).reduced(L - 1);
        return m.pow(P).scaled(dc) + dm.scaled(c.pow(P).reduced(L - 1)) + dm.scaled(dc.scaled(P));
    };
    // binary splitting: returns (sum at level L-1, delta)
    std::function<std::pair<EnvElt, EnvElt>(size_t, size_t)> rec = [&](size_t lo, size_t hi) -> std::pair<EnvElt, EnvElt> {
        if (hi - lo == 1) {
            EnvElt s = zero(L - 1);
            s.add_term(t[lo].first, t[lo].second);
            return {s, delta_term(t[lo].first, t[lo].second)};
        }
        size_t mid = lo + (hi - lo) / 2;
        auto [xs, xd] = rec(lo, mid);
        auto [ys, yd] = rec(mid, hi);
        EnvElt d = xd + yd;
        std::vector<EnvElt> xp{one(L - 1)}, yp{one(L - 1)};
        for (int i = 1; i < P; ++i) {
            xp.push_back(xp.back() * xs);
            yp.push_back(yp.back() * ys);
        }
        for (int i = 1; i < P; ++i) d -= (xp[i] * yp[P - i]).scaled(binom(P, i) / P);
        return {xs + ys, d};
    };
    return rec(0, t.size()).second;
}

EnvElt EnvRing::phi_basis(const Key& key) const {
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = phi_cache_.find(key);
        if (it != phi_cache_.end()) return it->second;
    }
    const int P = p();
    EnvElt acc = one();
    for (int v = 0; v < nvars(); ++v) {
        if (!key[v]) continue;
        if (is_const(v)) {
            Key k{};
            k[v] = key[v];
            acc = acc * basis(k).pow(P);
            continue;
        }
        auto d = digits(key[v]);
        for (int k = 0; k <= K_; ++k) {
            if (!d[k]) continue;
            require(k + 1 <= K_, ErrorKind::BudgetExceeded, "Frobenius of a monomial beyond the weight cap");
            EnvElt y = delta_tau(v, k);
            EnvElt fy = y.pow(P) + delta_tau(v, k + 1).scaled(P);
            acc = acc * fy.pow(d[k]);
        }
    }
    std::lock_guard<std::mutex> g(mu_);
    phi_cache_.emplace(key, acc);
    return acc;
}

EnvElt EnvRing::phi(const EnvElt& x) const {
    EnvElt r = zero(x.level());
    for (const auto& [k, c] : x.terms()) r += phi_basis(k).scaled(qprism::phi(c));
    return r;
}

std::string EnvRing::rules_json() const {
    std::ostringstream os;
    os << "{\"p\":" << p() << ",\"precision\":" << precision() << ",\"mode\":\"" << (base_.q_one() ? "q1" : "q")
       << "\",\"weight_cap\":" << weight_cap() << ",\"variables\":[";
    for (int v = 0; v < nvars(); ++v) {
        if (v) os << ",";
        os << "{\"name\":\"" << spec_.vars[v].name << "\",\"kind\":\"" << (is_const(v) ? "const" : "tau") << "\"";
        if (!is_const(v)) {
            os << ",\"center\":" << centers_[v].to_json() << ",\"rules\":[";
            for (int k = 0; k < static_cast<int>(rules_[v].size()); ++k) {
                if (k) os << ",";
                os << "{\"level\":" << k << ",\"rhs\":[";
                for (size_t i = 0; i < rules_[v][k].size(); ++i) {
                    const auto& rt = rules_[v][k][i];
                    if (i) os << ",";
                    os << "{\"exps\":[";
                    for (size_t j = 0; j < rt.exps.size(); ++j) os << (j ? "," : "") << rt.exps[j];
                    os << "],\"coeff\":" << rt.coeff.to_json() << "}";
                }
                os << "]}";
            }
            os << "]";
        }
        os << "}";
    }
    os << "]}";
    return os.str();
}

EnvElt env_delta(const EnvElt& x) { return x.ring().delta(x); }

EnvElt env_phi(const EnvElt& x) { return x.ring().phi(x); }

EnvElt random_env(std::mt19937_64& g, const EnvRing& R, int wmax, int nterms) {
    EnvElt x = R.zero();
    for (int i = 0; i < nterms; ++i) {
        Key k{};
        int budget = std::min(wmax, R.weight_cap());
        for (int v = 0; v < R.nvars() && budget > 0; ++v) {
            int m = static_cast<int>(g() % static_cast<std::uint64_t>(budget + 1));
            k[v] = static_cast<std::uint16_t>(m);
            budget -= m;
        }
        x.add_term(k, random_base(g, R.base(), R.precision()));
    }
    return x;
}

EnvSpec envelope_spec(int p, Mode mode, const std::vector<std::vector<i64>>& centers, int weight_cap) {
    EnvSpec s;
    s.p = p;
    s.mode = mode;
    s.weight_cap = weight_cap;
    for (size_t i = 0; i < centers.size(); ++i)
        s.vars.push_back(VarSpec{VarSpec::Tau, CenterSpec::base(centers[i]), "tau" + std::to_string(i + 1)});
    return s;
}

EnvSpec chart_spec(int p, Mode mode, int d, int degree_cap) {
    EnvSpec s;
    s.p = p;
    s.mode = mode;
    s.weight_cap = degree_cap;
    for (int i = 0; i < d; ++i) s.vars.push_back(VarSpec{VarSpec::Const, {}, "t" + std::to_string(i + 1)});
    return s;
}

}  // namespace qprism
