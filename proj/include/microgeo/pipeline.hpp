#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "microgeo/corpus.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/tokenmatch.hpp"
#include "microgeo/unicode.hpp"

namespace microgeo {

/// Target and reference count grids built in one pass over a corpus.
struct PairGrids {
    CountGrid target;
    CountGrid reference;
    std::size_t outside = 0;  ///< matched records that fell outside the grid extent
};

/// Selects and bins both token sets together. Each text is normalized at most
/// once per casefold setting; a record matching both sets counts in both grids.
inline PairGrids bin_pair(std::span<const Tweet> tweets, const GridSpec& spec, const TokenSet& target,
                          const TokenSet& reference, const MatchConfig& config = {}) {
    const TokenMatcher mt(target, config);
    const TokenMatcher mr(reference, config);
    PairGrids out{CountGrid(spec), CountGrid(spec), 0};
    for (const auto& t : tweets) {
        std::optional<std::string> cache[2];
        const auto norm = [&](bool casefold) -> const std::string& {
            auto& slot = cache[casefold ? 1 : 0];
            if (!slot) slot = unicode::normalize(t.text, casefold);
            return *slot;
        };
        const bool in_t = mt.matches_normalized(norm(mt.casefold()));
        const bool in_r = mr.matches_normalized(norm(mr.casefold()));
        if (!in_t && !in_r) continue;
        const auto b = bin_index(spec, t.lon, t.lat);
        if (!b) {
            ++out.outside;
            continue;
        }
        if (in_t) out.target.add(*b);
        if (in_r) out.reference.add(*b);
    }
    return out;
}

}  // namespace microgeo
