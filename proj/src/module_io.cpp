#include "qprism/module_io.hpp"

#include <algorithm>
#include <cctype>

namespace qprism {

namespace {

class Parser {
public:
    Parser(const EnvRing& R, const std::string& s) : R_(R), s_(s) {}

    EnvElt parse() {
        EnvElt x = sum();
        skip();
        if (i_ != s_.size()) error("unexpected '" + std::string(1, s_[i_]) + "'");
        return x;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::BadInput, "expression '" + s_ + "' at offset " + std::to_string(i_) + ": " + what);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    EnvElt sum() {
        EnvElt x = eat('-') ? -product() : product();
        for (;;) {
            if (eat('+')) x += product();
            else if (eat('-')) x -= product();
            else return x;
        }
    }
    EnvElt product() {
        EnvElt x = power();
        while (eat('*')) x = x * power();
        return x;
    }
    EnvElt power() {
        EnvElt x = atom();
        if (eat('^')) {
            skip();
            std::size_t start = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (start == i_) error("exponent must be a nonnegative integer");
            const std::string e = s_.substr(start, i_ - start);
            if (e.size() > 4) error("exponent too large");
            x = x.pow(static_cast<unsigned>(std::stoul(e)));
        }
        return x;
    }
    EnvElt atom() {
        skip();
        if (eat('(')) {
            EnvElt x = sum();
            if (!eat(')')) error("missing ')'");
            return x;
        }
        if (eat('-')) return -atom();
        if (i_ >= s_.size()) error("unexpected end");
        if (std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            std::size_t start = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            const std::string num = s_.substr(start, i_ - start);
            if (num.size() > 15) error("integer literal too large");
            return R_.scalar_int(static_cast<i64>(std::stoll(num)));
        }
        std::size_t start = i_;
        while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
        const std::string name = s_.substr(start, i_ - start);
        if (name == "mu") return R_.mu();
        if (name == "xi") return R_.xi();
        if (name == "eta") return R_.eta();
        if (name == "q") return R_.scalar(base_q(R_.base(), R_.precision()));
        const int d = R_.nvars();
        if (name == "t" && d == 1) return R_.t(0);
        if (name.size() > 1 && name[0] == 't') {
            const std::string idx = name.substr(1);
            if (idx.size() <= 2 && std::all_of(idx.begin(), idx.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                int v = std::stoi(idx);
                if (v >= 1 && v <= d) return R_.t(v - 1);
            }
        }
        i_ = start;
        error(name.empty() ? "unexpected character" : "unknown name '" + name + "'");
    }

    const EnvRing& R_;
    const std::string& s_;
    std::size_t i_ = 0;
};

bool is_prime(int p) {
    if (p < 2) return false;
    for (int k = 2; k * k <= p; ++k)
        if (p % k == 0) return false;
    return true;
}

int get_int(const nlohmann::json& j, const char* key, int def, int lo, int hi) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number_integer()) fail(ErrorKind::BadInput, std::string("'") + key + "' must be an integer");
    const auto v = j[key].get<long long>();
    if (v < lo || v > hi) fail(ErrorKind::BadInput, std::string("'") + key + "' out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

}  // namespace

EnvElt parse_element(const EnvRing& R, const std::string& text) { return Parser(R, text).parse(); }

namespace {

struct ChartHeader {
    int p, n, d, cap;
    Mode mode;
};

ChartHeader chart_header(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::BadInput, "description must be a JSON object");
    ChartHeader h{};
    h.p = get_int(j, "p", 2, 2, 7);
    if (!is_prime(h.p)) fail(ErrorKind::BadInput, "p must be prime");
    h.n = get_int(j, "precision", 1, 1, 6);
    h.mode = Mode::Generic;
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) fail(ErrorKind::BadInput, "'mode' must be \"q\" or \"q1\"");
        const std::string m = j["mode"].get<std::string>();
        if (m == "q1") h.mode = Mode::QOne;
        else if (m != "q") fail(ErrorKind::BadInput, "'mode' must be \"q\" or \"q1\"");
    }
    h.d = get_int(j, "d", 1, 1, 4);
    h.cap = get_int(j, "cap", 16, 1, 64);
    return h;
}

EnvElt parse_value(const EnvRing& R, const nlohmann::json& v, const std::string& what) {
    if (v.is_number_integer()) return R.scalar_int(v.get<i64>());
    if (v.is_string()) return parse_element(R, v.get<std::string>());
    fail(ErrorKind::BadInput, what + " must be a string expression or an integer");
}

}  // namespace

DerivationInput derivation_from_json(const nlohmann::json& j) {
    const ChartHeader h = chart_header(j);
    DerivationInput out;
    out.chart = EnvRing::build(chart_spec(h.p, h.mode, h.d, h.cap), h.n);
    for (const char* key : {"alpha", "beta"})
        if (!j.contains(key)) fail(ErrorKind::BadInput, std::string("missing '") + key + "'");
    if (j.contains("images") && !j["images"].is_object()) fail(ErrorKind::BadInput, "'images' must be an object");
    // validate eagerly so that errors surface as bad input
    const nlohmann::json spec = j;
    auto data = [spec](const EnvRing& R) {
        DerivationData dd;
        dd.alpha = parse_value(R, spec["alpha"], "alpha");
        dd.beta = parse_value(R, spec["beta"], "beta");
        dd.images.assign(R.nvars(), R.zero());
        if (spec.contains("images"))
            for (const auto& [name, v] : spec["images"].items()) {
                int idx = -1;
                if (name == "t" && R.nvars() == 1) idx = 0;
                else if (name.size() > 1 && name[0] == 't' && std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                    idx = std::stoi(name.substr(1)) - 1;
                if (idx < 0 || idx >= R.nvars()) fail(ErrorKind::BadInput, "unknown generator '" + name + "'");
                dd.images[idx] = parse_value(R, v, "image of " + name);
            }
        return dd;
    };
    data(*out.chart);
    DerivationSpec ds;
    ds.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "D";
    ds.data = data;
    ds.delta_compatible = !j.contains("delta_compatible") || j["delta_compatible"].get<bool>();
    out.derivation = std::make_shared<const Derivation>(ds, out.chart);
    return out;
}

ModuleInput module_from_json(const nlohmann::json& j) {
    const ChartHeader h = chart_header(j);
    const int p = h.p;
    const int n = h.n, d = h.d, cap = h.cap;
    const Mode mode = h.mode;
    if (!j.contains("theta") || !j["theta"].is_array()) fail(ErrorKind::BadInput, "'theta' must be an array of matrices");
    const auto& th = j["theta"];
    if (static_cast<int>(th.size()) != d) fail(ErrorKind::BadInput, "'theta' needs one matrix per coordinate (d = " + std::to_string(d) + ")");

    ModuleInput out;
    out.chart = EnvRing::build(chart_spec(p, mode, d, cap), n);
    std::vector<EnvMat> mats;
    int rank = -1;
    for (const auto& m : th) {
        if (!m.is_array()) fail(ErrorKind::BadInput, "each theta matrix must be an array of rows");
        if (rank < 0) rank = static_cast<int>(m.size());
        if (static_cast<int>(m.size()) != rank) fail(ErrorKind::BadInput, "theta matrices must have equal size");
        EnvMat A;
        for (const auto& row : m) {
            if (!row.is_array() || static_cast<int>(row.size()) != rank) fail(ErrorKind::BadInput, "theta matrices must be square");
            MVec r;
            for (const auto& e : row) {
                if (e.is_number_integer()) r.push_back(out.chart->scalar_int(e.get<i64>()));
                else if (e.is_string()) r.push_back(parse_element(*out.chart, e.get<std::string>()));
                else fail(ErrorKind::BadInput, "matrix entries must be strings or integers");
            }
            A.push_back(std::move(r));
        }
        mats.push_back(std::move(A));
    }
    std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "M";
    out.module = std::make_shared<QHiggsModule>(out.chart, qhiggs_derivations(out.chart), mats, name);
    return out;
}

}  // namespace qprism
