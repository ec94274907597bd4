#include "liqmode/stationarize.hpp"

#include "liqmode/errors.hpp"
#include "liqmode/stats.hpp"

#include <cmath>
#include <limits>

namespace liqmode {

const ProfileEntry* SeasonalProfile::find(std::string_view ticker, std::size_t variable, int t) const {
    auto it = stocks.find(ticker);
    if (it == stocks.end() || variable >= kFeatureDim || t < 1) {
        return nullptr;
    }
    const auto& col = it->second.entries[variable];
    if (static_cast<std::size_t>(t) > col.size() || !col[static_cast<std::size_t>(t - 1)]) {
        return nullptr;
    }
    return &*col[static_cast<std::size_t>(t - 1)];
}

namespace {

double floored_log(double value, double floor) { return std::log(value > 0.0 ? value : floor); }

}  // namespace

SeasonalProfile fit_profile(const Panel& raw) {
    SeasonalProfile profile;
    profile.bins_per_day = raw.bins_per_day;
    const auto T = static_cast<std::size_t>(raw.bins_per_day);

    std::map<std::string, std::vector<const StockDay*>, std::less<>> by_stock;
    for (const auto& row : raw.rows) {
        if (row.bins.size() != T) {
            throw ValidationError("panel row " + row.ticker + " has the wrong bin count");
        }
        by_stock[row.ticker].push_back(&row);
    }

    std::vector<double> logs;
    for (const auto& [ticker, rows] : by_stock) {
        StockProfile sp;
        for (std::size_t v = 0; v < kFeatureDim; ++v) {
            double smallest = std::numeric_limits<double>::infinity();
            for (const StockDay* r : rows) {
                for (const auto& b : r->bins) {
                    const double x = b.value(v);
                    if (!b.missing && x > 0.0 && x < smallest) {
                        smallest = x;
                    }
                }
            }
            sp.floor[v] = std::isfinite(smallest) ? smallest : 1.0;

            sp.entries[v].resize(T);
            for (std::size_t t = 0; t < T; ++t) {
                logs.clear();
                for (const StockDay* r : rows) {
                    const auto& b = r->bins[t];
                    if (!b.missing) {
                        logs.push_back(floored_log(b.value(v), sp.floor[v]));
                    }
                }
                if (logs.size() < 2) {
                    continue;
                }
                ProfileEntry e;
                e.days = static_cast<int>(logs.size());
                e.location = mean(logs);
                e.scale = interquartile_range(logs);
                e.stddev = sample_stddev(logs);
                sp.entries[v][t] = e;
            }
        }
        profile.stocks.emplace(ticker, std::move(sp));
    }
    return profile;
}

Panel apply_profile(const Panel& raw, const SeasonalProfile& profile) {
    Panel out;
    out.bins_per_day = raw.bins_per_day;
    out.rows.reserve(raw.rows.size());
    for (const auto& row : raw.rows) {
        StockDay sd{row.day, row.ticker, std::vector<LiquidityVector>(row.bins.size())};
        auto stock = profile.stocks.find(row.ticker);
        for (std::size_t t = 0; t < row.bins.size(); ++t) {
            const auto& in = row.bins[t];
            auto& o = sd.bins[t];
            o.missing = in.missing;
            for (std::size_t v = 0; v < kFeatureDim; ++v) {
                double value = 0.0;
                if (!in.missing && stock != profile.stocks.end()) {
                    const auto& col = stock->second.entries[v];
                    if (t < col.size() && col[t]) {
                        const ProfileEntry& e = *col[t];
                        const double centred = floored_log(in.value(v), stock->second.floor[v]) - e.location;
                        if (e.scale >= kDegenerateScale) {
                            value = centred / e.scale;
                        } else if (e.stddev >= kDegenerateScale) {
                            value = centred / e.stddev;
                        }
                    }
                }
                o.set(v, value);
            }
        }
        out.rows.push_back(std::move(sd));
    }
    return out;
}

}  // namespace liqmode
