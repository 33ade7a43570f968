#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <string>

#include "qprism/qhiggs.hpp"

namespace qprism {

// Parses an element of a polynomial chart. Names: t1..td (t when d = 1), mu, q, xi, eta;
// integers; + - * ^ and parentheses. Throws BadInput.
EnvElt parse_element(const EnvRing& R, const std::string& text);

// A q-Higgs module on a chart, read from JSON:
// {"p": 2, "precision": 2, "mode": "q" | "q1", "d": 1, "cap": 12, "name": "M",
//  "theta": [ [["t", "1"], ["0", "mu"]] ]}   one square matrix (rows) per index
struct ModuleInput {
    std::shared_ptr<const EnvRing> chart;
    std::shared_ptr<QHiggsModule> module;
};
ModuleInput module_from_json(const nlohmann::json& j);

// An alpha-derivation on a chart, read from JSON:
// {"p": 2, "precision": 2, "mode": "q", "d": 1, "cap": 12,
//  "alpha": "t*mu", "beta": "t*eta", "images": {"t": "xi"}, "delta_compatible": true}
// Generators without an image map to zero.
struct DerivationInput {
    std::shared_ptr<const EnvRing> chart;
    std::shared_ptr<const Derivation> derivation;
};
DerivationInput derivation_from_json(const nlohmann::json& j);

}  // namespace qprism
