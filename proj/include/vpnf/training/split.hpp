#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "vpnf/errors.hpp"
#include "vpnf/random.hpp"
#include "vpnf/roomsim/dataset.hpp"

namespace vpnf::training {

enum class SplitMode { RandomVolume, Surface };

inline const char* split_mode_name(SplitMode m) { return m == SplitMode::Surface ? "surface" : "random-volume"; }

inline SplitMode split_mode_from_name(const std::string& s) {
    if (s == "random-volume" || s == "volume") return SplitMode::RandomVolume;
    if (s == "surface") return SplitMode::Surface;
    throw ConfigurationError("unknown split mode '" + s + "'");
}

// Train / validation / evaluation position indices into a FoaDataset.
struct Split {
    SplitMode mode = SplitMode::RandomVolume;
    std::uint64_t seed = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> evaluation;
    bool operator==(const Split&) const = default;
};

inline constexpr std::size_t kValidationCount = 50;

// Draws D train and `validation` validation indices from the pool (every grid point, or
// only the surface of the cube) and leaves every remaining grid point for evaluation.
inline Split make_split(const roomsim::GridSpec& grid, SplitMode mode, std::size_t measurements, std::uint64_t seed,
                        std::size_t validation = kValidationCount) {
    if (measurements == 0) throw ConfigurationError("make_split: need at least one measurement");
    std::vector<std::size_t> pool;
    if (mode == SplitMode::Surface) {
        pool = roomsim::surface_indices(grid);
    } else {
        pool.resize(grid.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    }
    if (measurements + validation > pool.size())
        throw ConfigurationError("make_split: pool of " + std::to_string(pool.size()) + " positions is too small for " +
                                 std::to_string(measurements) + " + " + std::to_string(validation));
    Rng rng(seed);
    const auto picks = rng.choose(pool.size(), measurements + validation);
    Split s;
    s.mode = mode;
    s.seed = seed;
    std::vector<char> used(grid.size(), 0);
    for (std::size_t k = 0; k < picks.size(); ++k) {
        const std::size_t idx = pool[picks[k]];
        (k < measurements ? s.train : s.validation).push_back(idx);
        used[idx] = 1;
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!used[i]) s.evaluation.push_back(i);
    return s;
}

}  // namespace vpnf::training
