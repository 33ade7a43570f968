#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace qprism {

// Outcome of a property check: pass/fail with replayable witnesses.
struct Report {
    std::string check;
    std::string property;  // descriptive tag of the identity under test
    bool pass = true;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> witnesses;
    std::vector<std::string> notes;

    Report() = default;
    Report(std::string c, std::string prop, std::uint64_t s = 0) : check(std::move(c)), property(std::move(prop)), seed(s) {}

    void fail(const std::string& witness) {
        pass = false;
        if (witnesses.size() < 8) witnesses.push_back(witness);
    }
    void expect(bool ok, const std::string& witness) {
        ++samples;
        if (!ok) fail(witness);
    }
    void merge(const Report& o) {
        pass = pass && o.pass;
        samples += o.samples;
        for (const auto& w : o.witnesses)
            if (witnesses.size() < 8) witnesses.push_back(o.check + ": " + w);
        for (const auto& n : o.notes) notes.push_back(n);
    }
    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["check"] = check;
        j["property"] = property;
        j["pass"] = pass;
        j["samples"] = samples;
        j["seed"] = std::to_string(seed);
        j["witnesses"] = witnesses;
        if (!notes.empty()) j["notes"] = notes;
        return j;
    }
};

}  // namespace qprism
