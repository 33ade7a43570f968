#include "qprism/divided_powers.hpp"

#include <sstream>

namespace qprism {

// ---------------------------------------------------------------- PDRing

std::shared_ptr<const PDRing> PDRing::make(int p, int d, int maxdeg, int top_level) {
    require(d >= 0 && d <= kMaxVars && maxdeg >= 0 && top_level >= 0, ErrorKind::BadInput, "bad PD ring parameters");
    auto R = std::make_shared<PDRing>();
    R->p_ = p;
    R->d_ = d;
    R->maxdeg_ = maxdeg;
    R->top_ = top_level;
    i64 M = ipow(p, top_level + 1);
    R->pascal_.assign(2 * maxdeg + 1, {});
    for (int n = 0; n <= 2 * maxdeg; ++n) {
        R->pascal_[n].assign(n + 1, 1);
        for (int k = 1; k < n; ++k) R->pascal_[n][k] = (R->pascal_[n - 1][k - 1] + R->pascal_[n - 1][k]) % M;
    }
    return R;
}

i64 PDRing::binom_mod(int n, int k) const {
    if (k < 0 || k > n) return 0;
    return pascal_.at(n).at(k);
}

// ---------------------------------------------------------------- PDElt

PDElt::PDElt(std::shared_ptr<const PDRing> R, int level) : R_(std::move(R)), level_(level) {
    require(level >= 0 && level <= R_->top_level(), ErrorKind::PrecisionExhausted, "PD level out of range");
}

PDElt PDElt::monomial(std::shared_ptr<const PDRing> R, int level, const Key& k, i64 c) {
    PDElt r(std::move(R), level);
    r.add_term(k, c);
    return r;
}

PDElt PDElt::var(std::shared_ptr<const PDRing> R, int level, int v, int n) {
    Key k{};
    k[v] = static_cast<std::uint16_t>(n);
    return monomial(std::move(R), level, k);
}

i64 PDElt::coeff(const Key& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? 0 : it->second;
}

void PDElt::add_term(const Key& k, i64 c) {
    int deg = 0;
    for (int v = 0; v < R_->nvars(); ++v) deg += k[v];
    require(deg <= R_->maxdeg(), ErrorKind::BudgetExceeded, "PD monomial beyond the degree cap");
    i64 M = modulus();
    c = mod_norm(c, M);
    if (!c) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(k, c);
    } else {
        it->second = (it->second + c) % M;
        if (!it->second) terms_.erase(it);
    }
}

PDElt PDElt::reduced(int L) const {
    require(L <= level_, ErrorKind::PrecisionExhausted, "cannot raise PD level");
    PDElt r(R_, L);
    for (const auto& [k, c] : terms_) r.add_term(k, c);
    return r;
}

PDElt PDElt::operator+(const PDElt& o) const {
    PDElt r = reduced(std::min(level_, o.level_));
    for (const auto& [k, c] : o.terms_) r.add_term(k, c);
    return r;
}

PDElt PDElt::operator-() const {
    PDElt r(R_, level_);
    for (const auto& [k, c] : terms_) r.add_term(k, -c);
    return r;
}

PDElt PDElt::operator-(const PDElt& o) const { return *this + (-o); }

PDElt PDElt::operator*(const PDElt& o) const {
    require(R_ == o.R_, ErrorKind::RingMismatch, "PD elements of different rings");
    PDElt r(R_, std::min(level_, o.level_));
    i64 M = r.modulus();
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : o.terms_) {
            Key k{};
            i64 c = mul_mod(ca, cb, M);
            for (int v = 0; v < R_->nvars() && c; ++v) {
                k[v] = static_cast<std::uint16_t>(a[v] + b[v]);
                c = mul_mod(c, R_->binom_mod(a[v] + b[v], a[v]) % M, M);
            }
            if (c) r.add_term(k, c);
        }
    return r;
}

PDElt PDElt::scaled(i64 s) const {
    PDElt r(R_, level_);
    i64 M = modulus();
    for (const auto& [k, c] : terms_) r.add_term(k, mul_mod(c, mod_norm(s, M), M));
    return r;
}

PDElt PDElt::pow(unsigned e) const {
    PDElt r = monomial(R_, level_, Key{}), b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

PDElt PDElt::divided_by_p() const {
    require(level_ >= 1, ErrorKind::PrecisionExhausted, "division by p at level 0");
    PDElt r(R_, level_ - 1);
    for (const auto& [k, c] : terms_) {
        require(c % R_->p() == 0, ErrorKind::PrecisionExhausted, "PD element not divisible by p");
        r.add_term(k, c / R_->p());
    }
    return r;
}

PDElt PDElt::derive(int v) const {
    PDElt r(R_, level_);
    for (const auto& [k, c] : terms_) {
        if (!k[v]) continue;
        Key kk = k;
        --kk[v];
        r.add_term(kk, c);
    }
    return r;
}

bool PDElt::same(const PDElt& o) const {
    int L = std::min(level_, o.level_);
    return reduced(L) == o.reduced(L);
}

std::string PDElt::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        os << (first ? "" : " + ") << c;
        first = false;
        for (int v = 0; v < R_->nvars(); ++v)
            if (k[v]) os << "*X" << (v + 1) << "^[" << k[v] << "]";
    }
    return os.str();
}

nlohmann::ordered_json PDElt::to_json() const {
    nlohmann::ordered_json j;
    j["level"] = level_;
    j["modulus"] = std::to_string(modulus());
    auto terms = nlohmann::ordered_json::array();
    for (const auto& [k, c] : terms_) {
        std::vector<int> idx(k.begin(), k.begin() + R_->nvars());
        terms.push_back({{"divided_powers", idx}, {"coeff", std::to_string(c)}});
    }
    j["terms"] = terms;
    return j;
}

// ---------------------------------------------------------------- sigma

PDSigmaData sigma_from(const EnvElt& tau, const EnvElt& t, const EnvElt& b) {
    const EnvRing& R = tau.ring();
    require(R.base().q_one(), ErrorKind::PreconditionViolated, "sigma data needs the q = 1 specialization");
    const int p = R.p();
    EnvElt s = -b - R.delta(tau);
    for (int nu = 1; nu < p; ++nu) s += (t.pow(p - nu) * tau.pow(nu)).scaled(binom(p, nu) / p * ipow(p, nu - 1));
    BaseElt u = invert(BaseElt::from_int(R.base(), s.level(), 1 - ipow(p, p - 1)));
    PDSigmaData d{tau, t, b, s.scaled(u)};
    d.verified = tau.pow(p).same(d.sigma.scaled(p));
    return d;
}

PDSigmaData sigma_of(const EnvRing& E, int i, std::optional<i64> b) {
    require(E.base().q_one(), ErrorKind::PreconditionViolated, "sigma_of needs the q = 1 specialization");
    require(i >= 0 && i < E.nvars() && !E.is_const(i), ErrorKind::BadInput, "variable index out of range");
    const auto& cs = E.spec().vars[i].center;
    require(cs.kind == CenterSpec::Base, ErrorKind::BadInput, "sigma_of needs a constant center");
    i64 a = cs.base_poly.empty() ? 0 : cs.base_poly[0];
    const int p = E.p();
    // delta(a) = (a - a^p)/p over the integers
    i128 ap = 1;
    for (int j = 0; j < p; ++j) ap *= a;
    i128 da = (static_cast<i128>(a) - ap) / p;
    i64 bb;
    if (b) {
        bb = *b;
        i64 M = ipow(p, E.precision());
        require(mod_norm(static_cast<i64>(da % M) - mul_mod(p, mod_norm(bb, M), M), M) == 0, ErrorKind::BadCenter, "delta(a) != p b");
    } else {
        require(da % p == 0, ErrorKind::BadCenter, "delta(a) is not divisible by p");
        bb = static_cast<i64>(da / p);
    }
    return sigma_from(E.tau(i), E.center(i), E.scalar_int(bb));
}

// ---------------------------------------------------------------- EnvToPD

EnvToPD::EnvToPD(std::shared_ptr<const EnvRing> E, int K) : E_(std::move(E)), K_(K) {
    require(E_->base().q_one(), ErrorKind::PreconditionViolated, "PD comparison needs the q = 1 specialization");
    require(K >= 0, ErrorKind::BadInput, "negative depth");
    out_ = E_->precision() - K;
    require(out_ >= 0, ErrorKind::PrecisionExhausted, "input precision must be at least the depth");
    require(K <= E_->max_level(), ErrorKind::DepthExceeded, "depth exceeds the envelope weight cap");
    const int p = E_->p();
    const int top = E_->precision();
    pd_ = PDRing::make(p, E_->nvars(), E_->weight_cap(), top);
    for (int v = 0; v < E_->nvars(); ++v) {
        require(!E_->is_const(v) && E_->spec().vars[v].center.kind == CenterSpec::Base, ErrorKind::BadInput,
                "PD comparison needs a flat envelope with constant centers");
        const auto& center = E_->spec().vars[v].center.base_poly;
        std::vector<PDElt> imgs{PDElt::var(pd_, top, v, 1)};
        for (int k = 0; k < K; ++k) {
            int L = top - k;
            DeltaPoly Q = envelope_relation(p, Mode::QOne, L + k + 1, k, center);
            DeltaPoly rest = Q - DeltaPoly::variable(Q.ring(), Q.level(), DVar::var(0, k + 1)).scaled(p);
            PDElt num = dp_evaluate(
                rest, PDElt(pd_, L), [&](const BaseElt& c) { return PDElt::monomial(pd_, L, Key{}, c.coeff(0)); },
                [&](DVar dv) { return imgs.at(dv.k).reduced(L); });
            imgs.push_back((-num).divided_by_p());
        }
        images_.push_back(std::move(imgs));
    }
}

PDElt EnvToPD::operator()(const EnvElt& x) const {
    require(x.ring_ptr() == E_.get(), ErrorKind::RingMismatch, "element outside the compared envelope");
    int L = std::min(out_, x.level() - K_);
    require(L >= 0, ErrorKind::PrecisionExhausted, "element precision below the depth");
    PDElt r(pd_, L);
    for (const auto& [key, c] : x.terms()) {
        PDElt m = PDElt::monomial(pd_, L, Key{}, c.coeff(0));
        for (int v = 0; v < E_->nvars(); ++v) {
            if (!key[v]) continue;
            auto d = E_->digits(key[v]);
            for (int k = 0; k < static_cast<int>(d.size()); ++k) {
                if (!d[k]) continue;
                require(k <= K_, ErrorKind::DepthExceeded, "monomial needs delta-depth beyond K");
                m = m * images_[v][k].reduced(L).pow(d[k]);
            }
        }
        r = r + m;
    }
    return r;
}

nlohmann::ordered_json EnvToPD::dictionary() const {
    nlohmann::ordered_json j;
    j["p"] = E_->p();
    j["input_precision"] = E_->precision();
    j["output_level"] = out_;
    j["depth"] = K_;
    j["normalization"] = kPdNormalization;
    auto vars = nlohmann::ordered_json::array();
    for (int v = 0; v < E_->nvars(); ++v) {
        nlohmann::ordered_json jv;
        jv["variable"] = E_->spec().vars[v].name;
        jv["center"] = E_->spec().vars[v].center.base_poly;
        auto entries = nlohmann::ordered_json::array();
        for (int k = 0; k <= K_; ++k) {
            nlohmann::ordered_json e;
            e["delta_power"] = k;
            e["image"] = images_[v][k].reduced(out_).to_json();
            e["text"] = images_[v][k].reduced(out_).to_string();
            entries.push_back(e);
        }
        jv["entries"] = entries;
        vars.push_back(jv);
    }
    j["variables"] = vars;
    return j;
}

// ---------------------------------------------------------------- sigma identities

Report sigma_antisym_check(const PDSigmaData& d12, const PDSigmaData& d21) {
    require(d21.tau.same(-d12.tau), ErrorKind::PreconditionViolated, "sigma antisymmetry needs tau21 = -tau12");
    Report rep("sigma_antisym_check", "sigma21 = (-1)^p sigma12");
    const int p = d12.tau.ring().p();
    EnvElt rhs = p % 2 ? -d12.sigma : d12.sigma;
    rep.expect(d21.sigma.same(rhs), "sigma21 = " + d21.sigma.to_string() + " but (-1)^p sigma12 = " + rhs.to_string());
    return rep;
}

Report sigma_cocycle_check(const PDSigmaData& d12, const PDSigmaData& d13, const PDSigmaData& d23) {
    require(d23.tau.same(d13.tau - d12.tau), ErrorKind::PreconditionViolated, "sigma cocycle needs tau23 = tau13 - tau12");
    Report rep("sigma_cocycle_check", "sigma23 = sigma13 + (-1)^p sigma12 + sum C(p,nu)/p tau13^nu (-tau12)^(p-nu)");
    const EnvRing& R = d12.tau.ring();
    const int p = R.p();
    EnvElt rhs = d13.sigma + (p % 2 ? -d12.sigma : d12.sigma);
    for (int nu = 1; nu < p; ++nu) rhs += (d13.tau.pow(nu) * (-d12.tau).pow(p - nu)).scaled(binom(p, nu) / p);
    rep.expect(d23.sigma.same(rhs), "sigma23 = " + d23.sigma.to_string() + " but right side = " + rhs.to_string());
    return rep;
}

}  // namespace qprism
