#pragma once

#include <chrono>
#include <cstddef>
#include <optional>

#include "selfsim/errors.hpp"

namespace selfsim {

// Resource guards for the enumeration-heavy operations.  A default-constructed
// Limits enforces only the word budget; the CLI installs a wall-clock deadline.
struct Limits {
    std::size_t word_budget = 20'000'000;
    int c_max = 12;
    double time_budget_seconds = 300.0;
    std::optional<std::chrono::steady_clock::time_point> deadline;

    Limits with_deadline() const {
        Limits l = *this;
        l.deadline = std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(time_budget_seconds));
        return l;
    }

    void check_deadline(const char* where) const {
        if (deadline && std::chrono::steady_clock::now() > *deadline)
            fail(ErrorCode::ResourceLimit, std::string("time budget exceeded in ") + where);
    }

    void check_words(std::size_t n, const char* where) const {
        if (n > word_budget)
            fail(ErrorCode::ResourceLimit, std::string("word budget exceeded in ") + where);
    }
};

} // namespace selfsim
