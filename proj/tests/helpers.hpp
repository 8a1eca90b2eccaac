#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "contagion/game.hpp"

namespace contagion::testing {

// The m = 3 technical-analysis strategy used throughout: histories in natural
// binary order 000..111 map to [1,-1,1,1,-1,-1,1,1].
inline StrategyTable example_strategy() {
    return StrategyTable(3, {1, -1, 1, 1, -1, -1, 1, 1});
}

inline HistoryWindow hist(std::initializer_list<int> bits) {
    return HistoryWindow::from_bits(std::vector<int>(bits));
}

// Synthetic strictly increasing ISO dates for building return series.
inline std::string synth_date(long long day) {
    const long long year = 2000 + day / 372;
    const long long month = 1 + (day % 372) / 31;
    const long long dom = 1 + day % 31;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lld", year, month, dom);
    return buf;
}

}  // namespace contagion::testing
