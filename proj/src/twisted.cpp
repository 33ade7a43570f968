#include "qprism/twisted.hpp"

namespace qprism {

namespace {

void check_host(const TwistedExtElt& a, const TwistedExtElt& b) {
    require(a.alpha.ring_ptr() == b.alpha.ring_ptr() && a.alpha.same(b.alpha), ErrorKind::HostMismatch,
            "twisted extensions over different (host, alpha)");
}

// sum_{nu=1}^{p-1} C(p,nu)/p x0^{p-nu} alpha^{nu-1} x1^nu
EnvElt cross_sum(int p, const EnvElt& x0, const EnvElt& alpha, const EnvElt& x1) {
    const EnvRing& R = x0.ring();
    EnvElt s = R.zero(std::min({x0.level(), x1.level(), alpha.level()}));
    for (int nu = 1; nu < p; ++nu) s += (x0.pow(p - nu) * alpha.pow(nu - 1) * x1.pow(nu)).scaled(binom(p, nu) / p);
    return s;
}

}  // namespace

TwistedExtElt ext_make(const EnvElt& alpha, const EnvElt& x0, const EnvElt& x1) { return TwistedExtElt{alpha, x0, x1}; }

TwistedExtElt ext_add(const TwistedExtElt& a, const TwistedExtElt& b) {
    check_host(a, b);
    return TwistedExtElt{a.alpha, a.x0 + b.x0, a.x1 + b.x1};
}

TwistedExtElt ext_mul(const TwistedExtElt& a, const TwistedExtElt& b) {
    check_host(a, b);
    return TwistedExtElt{a.alpha, a.x0 * b.x0, a.x0 * b.x1 + a.x1 * b.x0 + a.alpha * a.x1 * b.x1};
}

EnvElt ext_pi0(const TwistedExtElt& a) { return a.x0; }

EnvElt ext_piAlpha(const TwistedExtElt& a) { return a.x0 + a.alpha * a.x1; }

EnvElt ext_D(const TwistedExtElt& a) { return a.x1; }

TwistedExtElt ext_delta(const TwistedExtElt& a, const EnvElt& beta) {
    const EnvRing& R = a.x0.ring();
    const int p = R.p();
    EnvElt d0 = R.delta(a.x0);
    EnvElt d1 = (a.alpha.pow(p - 1) + beta.scaled(p)) * R.delta(a.x1) + beta * a.x1.pow(p) - cross_sum(p, a.x0, a.alpha, a.x1);
    return TwistedExtElt{a.alpha, d0, d1};
}

bool ext_same(const TwistedExtElt& a, const TwistedExtElt& b) { return a.x0.same(b.x0) && a.x1.same(b.x1); }

// ---------------------------------------------------------------- Derivation

Derivation::Derivation(DerivationSpec spec, std::shared_ptr<const EnvRing> ring) : spec_(std::move(spec)), ring_(std::move(ring)) {
    data_ = spec_.data(*ring_);
    require(static_cast<int>(data_.images.size()) == ring_->nvars(), ErrorKind::BadInput, "derivation needs one image per variable");
    data_.alpha = ring_->import(data_.alpha);
    data_.beta = ring_->import(data_.beta);
    for (auto& e : data_.images) e = ring_->import(e);
}

EnvElt Derivation::leibniz(const EnvElt& x, const EnvElt& dx, const EnvElt& y, const EnvElt& dy) const {
    EnvElt r = dx * y + x * dy;
    if (spec_.leibniz) r += data_.alpha * dx * dy;
    return r;
}

EnvElt Derivation::on_generator(int v, int k) const {
    if (k == 0) return data_.images[v];
    if (ring_->is_const(v)) return ring_->zero();
    require(spec_.delta_compatible, ErrorKind::NotDeltaCompatible, "derivation of a delta-iterate needs delta-compatibility");
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = gen_cache_.find({v, k});
        if (it != gen_cache_.end()) return it->second;
    }
    const int p = ring_->p();
    auto G = ring_->at_precision(ring_->precision() + k);
    DerivationData d = spec_.data(*G);
    EnvElt a = G->import(d.alpha), b = G->import(d.beta);
    EnvElt lead = a.pow(p - 1) + b.scaled(p);
    EnvElt th = G->import(d.images.at(v));
    for (int j = 0; j < k; ++j) {
        EnvElt y = G->delta_tau(v, j);
        th = lead * G->delta(th) + b * th.pow(p) - cross_sum(p, y, a, th);
    }
    EnvElt r = ring_->import(th);
    std::lock_guard<std::mutex> g(mu_);
    gen_cache_.emplace(std::pair{v, k}, r);
    return r;
}

EnvElt Derivation::on_basis(const Key& key) const {
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = basis_cache_.find(key);
        if (it != basis_cache_.end()) return it->second;
    }
    const EnvRing& R = *ring_;
    EnvElt X = R.one(), dX = R.zero();
    for (int v = 0; v < R.nvars(); ++v) {
        if (!key[v]) continue;
        std::vector<std::pair<EnvElt, int>> factors;  // (y, exponent), with level k recorded below
        std::vector<int> levels;
        if (R.is_const(v)) {
            Key k1{};
            k1[v] = 1;
            factors.emplace_back(R.basis(k1), key[v]);
            levels.push_back(0);
        } else {
            auto d = R.digits(key[v]);
            for (int k = 0; k < static_cast<int>(d.size()); ++k)
                if (d[k]) {
                    factors.emplace_back(R.delta_tau(v, k), d[k]);
                    levels.push_back(k);
                }
        }
        for (size_t f = 0; f < factors.size(); ++f) {
            const auto& [y, a] = factors[f];
            EnvElt dy = on_generator(v, levels[f]);
            // power formula sum_m C(a,m) y^{a-m} alpha^{m-1} (dy)^m
            EnvElt ya = y.pow(a), dya = R.zero();
            int mmax = spec_.leibniz ? a : 1;
            for (int m = 1; m <= mmax; ++m) dya += (y.pow(a - m) * alpha().pow(m - 1) * dy.pow(m)).scaled(binom(a, m));
            dX = leibniz(X, dX, ya, dya);
            X = X * ya;
        }
    }
    std::lock_guard<std::mutex> g(mu_);
    basis_cache_.emplace(key, dX);
    return dX;
}

EnvElt Derivation::apply(const EnvElt& x) const {
    require(x.ring_ptr() == ring_.get(), ErrorKind::RingMismatch, "derivation applied outside its host");
    EnvElt r = ring_->zero(x.level());
    for (const auto& [k, c] : x.terms()) r += on_basis(k).scaled(c);
    return r;
}

EnvElt Derivation::gamma(const EnvElt& x) const { return x + alpha() * apply(x); }

DerivationSpec qhiggs_derivation(const EnvRing& R, int i) {
    require(i >= 0 && i < R.nvars(), ErrorKind::BadInput, "derivation index out of range");
    DerivationSpec s;
    s.name = "theta_" + R.spec().vars[i].name;
    s.data = [i](const EnvRing& G) {
        DerivationData d;
        d.alpha = G.t(i) * G.mu();
        d.beta = G.t(i).pow(G.p() - 1) * G.eta();
        for (int v = 0; v < G.nvars(); ++v) {
            if (v != i)
                d.images.push_back(G.zero());
            else
                d.images.push_back(G.is_const(v) ? G.xi() : G.one());
        }
        return d;
    };
    return s;
}

DerivationSpec zero_derivation(std::function<EnvElt(const EnvRing&)> alpha, std::function<EnvElt(const EnvRing&)> beta) {
    DerivationSpec s;
    s.name = "zero";
    s.data = [alpha, beta](const EnvRing& G) {
        DerivationData d{alpha(G), beta(G), std::vector<EnvElt>(G.nvars(), G.zero())};
        return d;
    };
    return s;
}

// ---------------------------------------------------------------- checks

Report section_check(const Derivation& D, int samples, std::uint64_t seed, int wmax) {
    Report rep("section_check:" + D.spec().name, "s(x) = (x, dx) is a ring map into the twisted extension", seed);
    std::mt19937_64 g(seed);
    const EnvRing& R = D.ring();
    for (int i = 0; i < samples; ++i) {
        EnvElt x = random_env(g, R, wmax), y = random_env(g, R, wmax);
        auto sx = ext_make(D.alpha(), x, D(x)), sy = ext_make(D.alpha(), y, D(y));
        auto prod = ext_mul(sx, sy);
        rep.expect(D(x * y).same(ext_D(prod)), "d(xy) != dx y + x dy + alpha dx dy at x=" + x.to_string() + ", y=" + y.to_string());
        rep.expect(D(x + y).same(D(x) + D(y)), "d(x+y) != dx + dy");
    }
    return rep;
}

Report delta_compat_check(const Derivation& D, int samples, std::uint64_t seed, int wmax) {
    Report rep("delta_compat_check:" + D.spec().name, "delta(s(x)) = s(delta(x)) in the twisted delta-extension", seed);
    const EnvRing& R = D.ring();
    if (R.precision() < 1) {
        rep.notes.push_back("precision 0: nothing to check");
        return rep;
    }
    rep.expect(R.delta(D.alpha()).same(D.alpha() * D.beta()), "BadBeta: delta(alpha) != alpha beta");
    auto one_case = [&](const EnvElt& x, const std::string& label) {
        auto sx = ext_make(D.alpha(), x, D(x));
        auto lhs = ext_delta(sx, D.beta());
        rep.expect(lhs.x0.same(R.delta(x)) && lhs.x1.same(D(R.delta(x))), "delta-compatibility fails at " + label);
    };
    for (int v = 0; v < R.nvars(); ++v) {
        one_case(R.t(v), "generator t_" + std::to_string(v + 1));
        if (!R.is_const(v)) one_case(R.tau(v), "generator tau_" + std::to_string(v + 1));
    }
    std::mt19937_64 g(seed);
    for (int i = 0; i < samples; ++i) {
        EnvElt x = random_env(g, R, wmax);
        one_case(x, x.to_string());
    }
    return rep;
}

Report frobenius_relation_check(const Derivation& D, int samples, std::uint64_t seed, int wmax) {
    Report rep("frobenius_relation_check:" + D.spec().name, "d o phi = (alpha^{p-1} + p beta) phi o d", seed);
    const EnvRing& R = D.ring();
    const int p = R.p();
    EnvElt lead = D.alpha().pow(p - 1) + D.beta().scaled(p);
    std::mt19937_64 g(seed);
    for (int v = 0; v < R.nvars(); ++v) {
        EnvElt x = R.t(v);
        rep.expect(D(R.phi(x)).same(lead * R.phi(D(x))), "Frobenius relation fails at t_" + std::to_string(v + 1));
    }
    for (int i = 0; i < samples; ++i) {
        EnvElt x = random_env(g, R, wmax);
        rep.expect(D(R.phi(x)).same(lead * R.phi(D(x))), "Frobenius relation fails at " + x.to_string());
    }
    return rep;
}

Report commute_check(const Derivation& D1, const Derivation& D2, int samples, std::uint64_t seed, int wmax) {
    require(D1.ring_ptr() == D2.ring_ptr(), ErrorKind::HostMismatch, "derivations on different hosts");
    require(D1(D2.alpha()).is_zero() && D2(D1.alpha()).is_zero(), ErrorKind::PreconditionViolated,
            "commutation criterion needs d1(alpha2) = d2(alpha1) = 0");
    if (D1.spec().delta_compatible && D2.spec().delta_compatible)
        require(D1(D2.beta()).is_zero() && D2(D1.beta()).is_zero(), ErrorKind::PreconditionViolated,
                "commutation criterion needs d1(beta2) = d2(beta1) = 0");
    Report rep("commute_check:" + D1.spec().name + "," + D2.spec().name, "d1 d2 = d2 d1", seed);
    const EnvRing& R = D1.ring();
    for (int v = 0; v < R.nvars(); ++v) {
        std::vector<EnvElt> gens{R.t(v)};
        if (!R.is_const(v)) {
            gens.push_back(R.tau(v));
            if (R.max_level() >= 1) gens.push_back(R.delta_tau(v, 1));
        }
        for (const auto& x : gens) rep.expect(D1(D2(x)) == D2(D1(x)), "generators do not commute at " + x.to_string());
    }
    std::mt19937_64 g(seed);
    for (int i = 0; i < samples; ++i) {
        EnvElt x = random_env(g, R, wmax);
        rep.expect(D1(D2(x)) == D2(D1(x)), "d1 d2 x != d2 d1 x at x=" + x.to_string());
    }
    return rep;
}

}  // namespace qprism
