#pragma once

#include "liqmode/jump_model.hpp"
#include "liqmode/market_data.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liqmode {

struct NewsArticle {
    Millis timestamp = 0;
    std::string ticker;
    std::string headline;
    std::optional<int> vendor_score;          // -1, 0, 1
    std::optional<double> vendor_confidence;  // [0, 100]

    // score x confidence, when both are present.
    std::optional<double> composed_score() const;

    // Identity used to join artifacts across stages.
    std::string key() const;
};

// News CSV: timestamp,ticker,score,confidence,headline (headline quoted).
// score and confidence may be empty.
std::vector<NewsArticle> read_news_csv(const std::filesystem::path& path);
void write_news_csv(const std::filesystem::path& path, std::span<const NewsArticle> news);

// Drops re-publications: same ticker and headline within `window_ms` of the
// last kept copy. Keeps the earliest; output is sorted by (timestamp, ticker,
// headline) and does not depend on input order.
std::vector<NewsArticle> deduplicate_news(std::span<const NewsArticle> news,
                                          Millis window_ms = 60 * kMillisPerSecond);

// Empirical K x K transition counts pooled over sequences.
struct TransitionMatrix {
    std::vector<std::vector<std::uint64_t>> counts;
    // Row i is absent when mode i was never followed by another bin.
    std::vector<std::optional<std::vector<double>>> probabilities;
};

struct ModeStats {
    std::vector<double> occupancy;     // fraction of bins per mode
    std::vector<std::uint64_t> bins;   // bin count per mode
    TransitionMatrix transitions;
    std::uint64_t calm_to_active_jumps = 0;
    std::size_t stock_days = 0;
    // Mode 1 -> Mode 2 jumps per stock-day, pooled and per ticker.
    double mean_daily_jumps_per_stock = 0.0;
    std::map<std::string, double> daily_jumps_by_stock;
};

ModeStats mode_stats(std::span<const DayFit> fits);

enum class SelectionReason { JumpAtStart, JumpAtEnd, Both };
std::string_view to_string(SelectionReason reason);
std::optional<SelectionReason> parse_selection_reason(std::string_view text);

// Impactful-news criterion for an article in bin t (1-based) of a T-bin mode
// sequence: a Mode 1 -> Mode 2 jump at the start of its bin (t >= 2,
// m_{t-1} = 1, m_t = 2) or at its end (t <= T - 1, m_t = 1, m_{t+1} = 2).
std::optional<SelectionReason> impactful_reason(const ModeSequence& modes, int t);

struct SelectedArticle {
    std::size_t index = 0;  // into the screened collection
    SelectionReason reason = SelectionReason::JumpAtStart;
};

struct ExcludedArticle {
    std::size_t index = 0;
    std::string reason;  // "outside_session", "unfitted", "no_jump"
};

struct ScreeningResult {
    std::vector<SelectedArticle> selected;
    std::vector<ExcludedArticle> excluded;
};

ScreeningResult select_impactful(std::span<const NewsArticle> news, std::span<const DayFit> fits,
                                 const BinGrid& grid);

// |selected| / |intraday articles|. Throws DataError when no article falls in
// the trimmed session.
double selection_ratio(std::span<const NewsArticle> news, std::size_t selected_count, const BinGrid& grid);

// Selected subset: news columns plus selected_reason.
void write_selected_csv(const std::filesystem::path& path, std::span<const NewsArticle> news,
                        std::span<const SelectedArticle> selected);
struct SelectedRecord {
    NewsArticle article;
    SelectionReason reason;
};
std::vector<SelectedRecord> read_selected_csv(const std::filesystem::path& path);

void write_mode_stats_csv(const std::filesystem::path& path, const ModeStats& stats);

}  // namespace liqmode
