#pragma once

// Canonical input spec files shipped under data/.  The generator tool writes
// them; a test regenerates and compares byte-for-byte so the checked-in files
// can never drift from the construction.

#include <string>
#include <utility>
#include <vector>

#include "selfsim/ifs.hpp"

namespace selfsim::datafiles {

inline std::vector<std::pair<std::string, std::string>> all() {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&](const std::string& name, const std::vector<Rational>& ratios,
                   const std::string& label) {
        out.emplace_back(name, ifs_to_json(make_equal_gap_line_ifs(ratios, label)));
    };

    add("example61_K.json",
        {Rational(1, 3), Rational(1, 3), Rational(1, 9), Rational(1, 9)}, "example61-K");

    std::vector<Rational> f_ratios(20, Rational(1, 27));
    f_ratios.insert(f_ratios.end(), 8, Rational(1, 729));
    add("example61_F.json", f_ratios, "example61-F");

    add("cantor.json", {Rational(1, 3), Rational(1, 3)}, "cantor-middle-third");
    add("quarter.json", {Rational(1, 4), Rational(1, 4)}, "quarter-pair");
    add("homog_3x9.json", {Rational(1, 9), Rational(1, 9), Rational(1, 9)}, "homogeneous-3x9");
    add("f_5map_9_81.json",
        {Rational(1, 9), Rational(1, 9), Rational(1, 81), Rational(1, 81), Rational(1, 81)},
        "five-map-9-81");
    add("incommensurable.json", {Rational(1, 2), Rational(1, 3)}, "incommensurable-pair");
    return out;
}

} // namespace selfsim::datafiles
