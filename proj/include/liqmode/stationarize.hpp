#pragma once

#include "liqmode/market_data.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace liqmode {

// Cross-day statistics of log values for one (stock, variable, bin).
struct ProfileEntry {
    double location = 0.0;  // mean of log values over usable days
    double scale = 0.0;     // IQR of log values
    double stddev = 0.0;    // sample std of log values, used when scale degenerates
    int days = 0;
};

// Per-stock intraday seasonal profile of log liquidity.
struct StockProfile {
    // Smallest positive raw value per variable; raw values <= 0 are floored to it.
    std::array<double, kFeatureDim> floor{1.0, 1.0, 1.0, 1.0};
    // entries[variable][t - 1]; absent when fewer than 2 usable days.
    std::array<std::vector<std::optional<ProfileEntry>>, kFeatureDim> entries;
};

struct SeasonalProfile {
    int bins_per_day = 0;
    std::map<std::string, StockProfile, std::less<>> stocks;

    const ProfileEntry* find(std::string_view ticker, std::size_t variable, int t) const;
};

inline constexpr double kDegenerateScale = 1e-8;

SeasonalProfile fit_profile(const Panel& raw);

// (log o - location) / scale per (stock, variable, bin). Missing bins and bins
// without a profile entry become 0; the missing flag is carried over.
Panel apply_profile(const Panel& raw, const SeasonalProfile& profile);

}  // namespace liqmode
