#pragma once

#include "liqmode/market_data.hpp"
#include "liqmode/screening.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace liqmode {

// Fewer stocks valued at both ends than this flags the market average as thin.
inline constexpr int kMinUniverse = 10;

// Post-publication return of the article's stock minus the equal-weight
// average return of every stock priced at both t* and t* + h. Prices are the
// last trade at or before each time; t* + h is capped at the session close.
struct DetrendedReturn {
    std::size_t article = 0;  // index into the news collection
    int horizon_minutes = 0;
    double value = 0.0;
    double raw = 0.0;
    int universe_size = 0;
    bool small_universe = false;
};

std::optional<DetrendedReturn> post_news_return(const NewsArticle& article, const PriceBook& prices,
                                                int horizon_minutes, const BinGrid& grid);

struct ReturnBatch {
    std::vector<DetrendedReturn> returns;
    std::vector<std::size_t> dropped;  // articles without a price for their stock
};

ReturnBatch compute_returns(std::span<const NewsArticle> news, const PriceBook& prices, int horizon_minutes,
                            const BinGrid& grid);

// Bullish/bearish sets from return percentiles (Z) and their intersection with
// the screened articles (N). All sets hold article indices, ascending.
struct LabelSets {
    std::vector<std::size_t> z_plus;
    std::vector<std::size_t> z_minus;
    std::vector<std::size_t> n_plus;
    std::vector<std::size_t> n_minus;
    double lower_threshold = 0.0;  // k-th percentile
    double upper_threshold = 0.0;  // (100 - k)-th percentile
    double k = 0.0;
};

inline constexpr std::size_t kMinLabelSample = 100;

// Z- = {r <= P_k}, Z+ = {r >= P_{100-k}} over all `returns`; an article that
// qualifies for both (only possible at k = 50) goes to Z+. Requires
// 0 < k <= 50; fewer than 100 returns throw DegenerateError.
LabelSets build_label_sets(std::span<const DetrendedReturn> returns, std::span<const std::size_t> impactful,
                           double k);

// One row per (article, set) membership: news columns + set,detrended_return_h.
void write_labels_csv(const std::filesystem::path& path, std::span<const NewsArticle> news,
                      std::span<const DetrendedReturn> returns, const LabelSets& sets);

struct LabelRecord {
    NewsArticle article;
    std::string set;  // Zp, Zm, Np, Nm
    double detrended_return = 0.0;
};
std::vector<LabelRecord> read_labels_csv(const std::filesystem::path& path);

}  // namespace liqmode
