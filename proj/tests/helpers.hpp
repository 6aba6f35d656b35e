#pragma once

// Shared fixtures: the worked example pair and a few small line systems.

#include <string>
#include <vector>

#include "selfsim/ifs.hpp"

namespace selfsim::testing {

inline IfsSpec example61_K() {
    return make_equal_gap_line_ifs(
        {Rational(1, 3), Rational(1, 3), Rational(1, 9), Rational(1, 9)}, "example61-K");
}

inline IfsSpec example61_F() {
    std::vector<Rational> r(20, Rational(1, 27));
    r.insert(r.end(), 8, Rational(1, 729));
    return make_equal_gap_line_ifs(r, "example61-F");
}

inline IfsSpec cantor() {
    return make_equal_gap_line_ifs({Rational(1, 3), Rational(1, 3)}, "cantor-middle-third");
}

inline IfsSpec quarter() {
    return make_equal_gap_line_ifs({Rational(1, 4), Rational(1, 4)}, "quarter-pair");
}

inline IfsSpec homog_3x9() {
    return make_equal_gap_line_ifs({Rational(1, 9), Rational(1, 9), Rational(1, 9)},
                                   "homogeneous-3x9");
}

inline IfsSpec f_5map_9_81() {
    return make_equal_gap_line_ifs({Rational(1, 9), Rational(1, 9), Rational(1, 81),
                                    Rational(1, 81), Rational(1, 81)},
                                   "five-map-9-81");
}

// Word from 1-based letters, e.g. w({1,2}) is the address "1.2".
inline Word w(std::initializer_list<int> letters) {
    Word out;
    for (int l : letters) out.push_back(static_cast<char>(l - 1));
    return out;
}

} // namespace selfsim::testing
