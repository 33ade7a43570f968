#include "qprism/budget.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "qprism/error.hpp"

namespace qprism {

namespace {

std::size_t initial_budget() {
    if (const char* env = std::getenv("QPRISM_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 4'000'000;
}

std::atomic<std::size_t>& budget_slot() {
    static std::atomic<std::size_t> slot{initial_budget()};
    return slot;
}

}  // namespace

std::size_t monomial_budget() { return budget_slot().load(); }

void set_monomial_budget(std::size_t cap) { budget_slot().store(cap); }

void check_budget(std::size_t terms, const char* where) {
    if (terms > monomial_budget())
        fail(ErrorKind::BudgetExceeded, std::string(where) + ": " + std::to_string(terms) + " terms exceed the monomial budget");
}

}  // namespace qprism
