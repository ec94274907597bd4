#pragma once

#include "liqmode/errors.hpp"
#include "liqmode/jump_model.hpp"
#include "liqmode/market_data.hpp"
#include "liqmode/screening.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <utility>
#include <string>
#include <vector>

namespace liqmode {

class InfeasibleSpecError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Per-bin medians of the generated liquidity variables for one mode.
struct ModeParams {
    double phi = 2.0;      // spread in ticks
    double turnover = 2e5;  // V, currency units
    double sigma = 1e-3;   // per-bin log-return volatility
    double book = 800.0;   // shares at the best level, two-sided average
    double trades_per_bin = 8.0;
};

// Forces a calm bin before `bin` and `active_bins` active bins from `bin` on.
struct PlantedSwitch {
    int day_index = 0;
    int stock_index = 0;
    int bin = 1;  // 1-based, trimmed-session index
};

struct SynthSpec {
    int n_stocks = 50;
    int n_days = 60;
    std::uint64_t seed = 0;
    DayNumber start_day = 19724;  // 2024-01-02
    BinGrid grid;
    double tick = 0.01;

    std::array<ModeParams, 2> modes{ModeParams{2.0, 2e5, 1e-3, 800.0, 8.0},
                                     ModeParams{4.0, 6e5, 3e-3, 400.0, 20.0}};
    double quotes_per_bin = 6.0;  // updates after the one at each bin start
    double dispersion = 0.25;  // log-sd of each variable around its mode median
    double stay_calm = 0.98;
    double stay_active = 0.85;
    int active_bins = 4;
    std::vector<PlantedSwitch> planted_switches;
    double market_vol = 5e-4;  // per 5 minutes, common to all stocks

    double news_rate = 4.0;  // articles per stock-day
    double sentiment_fraction = 0.2;
    double outside_session_fraction = 0.05;
    double duplicate_prob = 0.02;
    double drift = 0.01;  // planted |return| after impactful news
    int drift_minutes = 15;
    double neutral_drift_sd = 8e-3;  // per-stock drift after any other article
    int drift_epoch_days = 20;       // neutral drifts are redrawn per epoch
    double vendor_accuracy = 0.6;

    std::vector<std::string> bullish_words;
    std::vector<std::string> bearish_words;
    std::vector<std::string> neutral_words;

    // Fills empty lexicons with the built-in word lists.
    void complete_lexicons();
    void validate() const;
    std::string ticker(int stock_index) const;
};

struct TruthArticle {
    Millis timestamp = 0;
    std::string ticker;
    int sentiment = 0;  // +1 bullish, -1 bearish, 0 neutral
    bool planted_impactful = false;
};

struct SynthDay {
    DayNumber day = 0;
    std::vector<TradeRecord> trades;  // grouped by ticker, time-ordered within
    std::vector<QuoteRecord> quotes;
    std::vector<NewsArticle> news;
    std::vector<TruthArticle> truth_news;  // parallel to news
    std::vector<std::string> tickers;
    std::vector<ModeSequence> truth_modes;  // per ticker, trimmed session, 0-based
};

// Streams the generated days in date order. Deterministic in spec.seed.
void generate(const SynthSpec& spec, const std::function<void(SynthDay&&)>& sink);

struct SynthSummary {
    std::size_t days = 0;
    std::size_t trades = 0;
    std::size_t quotes = 0;
    std::size_t news = 0;
    std::size_t planted_impactful = 0;
};

// Writes <root>/<date>/{trades,quotes}.csv, <root>/news.csv and the manifests
// <root>/truth_modes.csv (date,ticker,bin,true_mode) and <root>/truth_news.csv
// (timestamp,ticker,true_sentiment,planted_impactful).
SynthSummary generate_to_directory(const SynthSpec& spec, const std::filesystem::path& root);

// Generated data loaded in memory, as load_universe would from the written files.
struct SynthDataset {
    UniverseLoad universe;  // prices collected
    std::vector<NewsArticle> news;
    std::vector<TruthArticle> truth_news;  // parallel to news
    std::map<std::pair<DayNumber, std::string>, ModeSequence> truth_modes;
};

SynthDataset generate_dataset(const SynthSpec& spec, const MarketDataConfig& market);

// "S001", "S002", ...; zero-padded to the width of n_stocks, at least 3.
std::string synth_ticker(int stock_index, int n_stocks);

// Liquidity panel drawn directly per bin, without trades or quotes: log sigma
// is N(mu_m, s^2) with mu_2 - mu_1 = separation * s; the other variables do
// not depend on the mode. Modes follow a symmetric Markov chain.
struct RegimePanelSpec {
    int n_stocks = 50;
    int n_days = 30;
    int bins = 72;
    std::uint64_t seed = 0;
    double separation = 2.0;  // in pooled standard deviations of log sigma
    double persistence = 0.95;
    double log_sd = 0.4;

    void validate() const;
};

struct RegimePanel {
    Panel raw;
    std::vector<ModeSequence> truth;  // parallel to raw.rows
};

RegimePanel generate_regime_panel(const RegimePanelSpec& spec);

}  // namespace liqmode
