#pragma once

#include "liqmode/timeutil.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liqmode {

struct TradeRecord {
    Millis timestamp = 0;
    std::string ticker;
    double price = 0.0;
    double size = 0.0;
};

struct QuoteRecord {
    Millis timestamp = 0;
    std::string ticker;
    double bid_price = 0.0;
    double ask_price = 0.0;
    double bid_size = 0.0;
    double ask_size = 0.0;
};

// Equal-width bins over the core session after trimming both ends.
//
// Times are wall-clock minutes after local midnight; a timestamp is mapped to
// local time by adding utc_offset_minutes. Bin t (1-based) covers
// [open + trim + (t - 1) * width, open + trim + t * width).
struct BinGrid {
    int session_open_minutes = 9 * 60 + 30;
    int session_close_minutes = 16 * 60;
    int trim_minutes = 15;
    int bin_width_minutes = 5;
    int utc_offset_minutes = 0;

    // Throws ValidationError unless the trimmed session splits into whole bins.
    void validate() const;

    int bin_count() const noexcept {
        return (session_close_minutes - session_open_minutes - 2 * trim_minutes) / bin_width_minutes;
    }
    Millis bin_width_ms() const noexcept { return bin_width_minutes * kMillisPerMinute; }

    // Local calendar day of a UTC timestamp.
    DayNumber local_day(Millis timestamp) const noexcept;

    // UTC timestamp of a local wall-clock minute on `day`.
    Millis at(DayNumber day, int minutes_after_midnight) const noexcept;

    Millis bin_start(DayNumber day, int t) const noexcept;
    Millis session_open(DayNumber day) const noexcept { return at(day, session_open_minutes); }
    Millis session_close(DayNumber day) const noexcept { return at(day, session_close_minutes); }
};

// Bin index in 1..T, or nullopt outside the trimmed session.
std::optional<int> assign_bin(Millis timestamp, const BinGrid& grid);

inline constexpr std::size_t kFeatureDim = 4;
inline constexpr std::array<std::string_view, kFeatureDim> kFeatureNames{"phi", "V", "sigma", "B"};
inline constexpr std::size_t kPhi = 0;
inline constexpr std::size_t kTurnover = 1;
inline constexpr std::size_t kSigma = 2;
inline constexpr std::size_t kBookSize = 3;

// Liquidity observation for one (stock, day, bin).
struct LiquidityVector {
    double phi = 0.0;    // mean spread in ticks
    double V = 0.0;      // traded value
    double sigma = 0.0;  // per-bin volatility
    double B = 0.0;      // mean best-level size, (bid + ask) / 2
    bool missing = true;

    std::array<double, kFeatureDim> values() const noexcept { return {phi, V, sigma, B}; }
    double value(std::size_t variable) const noexcept { return values()[variable]; }
    void set(std::size_t variable, double v) noexcept;
};

// Volatility from the last traded price sampled once per second within a bin.
class VolatilityEstimator {
public:
    virtual ~VolatilityEstimator() = default;
    virtual std::string_view name() const noexcept = 0;
    // `second_prices` holds the sampled prices in time order (all > 0).
    virtual double estimate(std::span<const double> second_prices) const = 0;
};

// sqrt(sum of squared log-returns)
class RealizedVolatility final : public VolatilityEstimator {
public:
    std::string_view name() const noexcept override { return "realized"; }
    double estimate(std::span<const double> second_prices) const override;
};

// sqrt(pi/2 * sum |r_i| |r_{i-1}|), robust to isolated jumps.
class BipowerVolatility final : public VolatilityEstimator {
public:
    std::string_view name() const noexcept override { return "bipower"; }
    double estimate(std::span<const double> second_prices) const override;
};

// "realized" or "bipower"; throws ValidationError otherwise.
std::unique_ptr<VolatilityEstimator> make_volatility_estimator(std::string_view name);

// Features for one ticker on one day. Both streams must be sorted by time and
// belong to the same ticker; records before the first bin seed the
// carried-forward quote and price state. Crossed quotes are ignored.
std::vector<LiquidityVector> compute_bin_features(std::span<const TradeRecord> trades,
                                                  std::span<const QuoteRecord> quotes, DayNumber day,
                                                  const BinGrid& grid, double tick_size,
                                                  const VolatilityEstimator& estimator);

struct MarketDataConfig {
    BinGrid grid;
    double default_tick = 0.01;
    std::map<std::string, double, std::less<>> tick_sizes;
    std::string vol_estimator = "realized";
    double max_missing_fraction = 0.2;

    double tick_for(std::string_view ticker) const;
    void validate() const;
};

// Features for every ticker in a day's streams, keyed by ticker.
std::map<std::string, std::vector<LiquidityVector>> compute_day_features(
    std::span<const TradeRecord> trades, std::span<const QuoteRecord> quotes, DayNumber day,
    const MarketDataConfig& config);

struct StockDay {
    DayNumber day = 0;
    std::string ticker;
    std::vector<LiquidityVector> bins;
};

// Liquidity panel, rows sorted by (day, ticker).
struct Panel {
    int bins_per_day = 0;
    std::vector<StockDay> rows;

    std::vector<DayNumber> days() const;
    void sort();
};

// Last traded price per (day, ticker), queried as "last trade at or before t".
class PriceBook {
public:
    void add(DayNumber day, std::string_view ticker, Millis timestamp, double price);
    // Sorts every series by time; call once after the last add().
    void finalize();

    std::optional<double> last_at_or_before(DayNumber day, std::string_view ticker, Millis t) const;
    std::vector<std::string> tickers(DayNumber day) const;
    bool has_day(DayNumber day) const { return series_.count(day) != 0; }
    std::size_t size() const noexcept;

private:
    using Series = std::vector<std::pair<Millis, double>>;
    std::map<DayNumber, std::map<std::string, Series, std::less<>>> series_;
};

struct DateRange {
    std::optional<DayNumber> first;
    std::optional<DayNumber> last;

    bool contains(DayNumber d) const noexcept {
        return (!first || d >= *first) && (!last || d <= *last);
    }
};

struct DropRecord {
    DayNumber day = 0;
    std::string ticker;
    int missing_bins = 0;
    int total_bins = 0;
};

struct ParseStats {
    std::size_t trades = 0;
    std::size_t quotes = 0;
    std::size_t crossed_quotes = 0;
};

struct UniverseLoad {
    Panel panel;
    std::vector<DropRecord> dropped;
    ParseStats stats;
    PriceBook prices;  // filled only when requested
};

// Throws ParseError (with row number) on malformed rows. Crossed quotes are
// skipped and counted in `stats`.
std::vector<TradeRecord> read_trades_csv(const std::filesystem::path& path, ParseStats& stats);
std::vector<QuoteRecord> read_quotes_csv(const std::filesystem::path& path, ParseStats& stats);

void write_trades_csv(const std::filesystem::path& path, std::span<const TradeRecord> trades);
void write_quotes_csv(const std::filesystem::path& path, std::span<const QuoteRecord> quotes);

// Date directories `<root>/<YYYY-MM-DD>/` inside the range, ascending.
std::vector<DayNumber> list_days(const std::filesystem::path& root, const DateRange& range);

// Reads `<root>/<YYYY-MM-DD>/{trades,quotes}.csv` for every date in range and
// builds the panel. Stock-days with more than max_missing_fraction missing bins
// are dropped and listed in `dropped`.
UniverseLoad load_universe(const std::filesystem::path& root, const DateRange& range,
                           const MarketDataConfig& config, bool collect_prices = false);

// Building blocks of load_universe for records already in memory: features
// of one day with the drop rule applied, then price finalisation, the
// empty-universe check and row sorting.
void add_universe_day(UniverseLoad& result, DayNumber day, std::vector<TradeRecord> trades,
                      std::vector<QuoteRecord> quotes, const MarketDataConfig& config, bool collect_prices);
void finish_universe(UniverseLoad& result, bool collect_prices);

// Trade prices only, for the return computations.
PriceBook load_prices(const std::filesystem::path& root, const DateRange& range);

// Panel CSV: date,ticker,bin,phi,V,sigma,B,missing[,stationarized]
void write_panel_csv(const std::filesystem::path& path, const Panel& panel, bool stationarized);
Panel read_panel_csv(const std::filesystem::path& path);

void write_drop_log(const std::filesystem::path& path, std::span<const DropRecord> dropped);

}  // namespace liqmode
