#include "liqmode/market_data.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace liqmode {

// --- BinGrid ----------------------------------------------------------------

void BinGrid::validate() const {
    if (bin_width_minutes <= 0) {
        throw ValidationError("market_data.bin_width_minutes must be positive");
    }
    if (trim_minutes < 0) {
        throw ValidationError("market_data.trim_minutes must be non-negative");
    }
    if (session_open_minutes < 0 || session_close_minutes > 24 * 60 ||
        session_close_minutes <= session_open_minutes) {
        throw ValidationError("market_data.session_close must be after session_open");
    }
    const int core = session_close_minutes - session_open_minutes - 2 * trim_minutes;
    if (core <= 0) {
        throw ValidationError("market_data.trim_minutes leaves no core session");
    }
    if (core % bin_width_minutes != 0) {
        throw ValidationError("market_data.bin_width_minutes must divide the trimmed session length");
    }
}

DayNumber BinGrid::local_day(Millis timestamp) const noexcept {
    return floor_div(timestamp + utc_offset_minutes * kMillisPerMinute, kMillisPerDay);
}

Millis BinGrid::at(DayNumber day, int minutes_after_midnight) const noexcept {
    return day * kMillisPerDay + (minutes_after_midnight - utc_offset_minutes) * kMillisPerMinute;
}

Millis BinGrid::bin_start(DayNumber day, int t) const noexcept {
    return at(day, session_open_minutes + trim_minutes) + (t - 1) * bin_width_ms();
}

std::optional<int> assign_bin(Millis timestamp, const BinGrid& grid) {
    const DayNumber day = grid.local_day(timestamp);
    const Millis core_start = grid.bin_start(day, 1);
    if (timestamp < core_start) {
        return std::nullopt;
    }
    const Millis offset = timestamp - core_start;
    const auto t = static_cast<int>(offset / grid.bin_width_ms()) + 1;
    if (t > grid.bin_count()) {
        return std::nullopt;
    }
    return t;
}

// --- LiquidityVector --------------------------------------------------------

void LiquidityVector::set(std::size_t variable, double v) noexcept {
    switch (variable) {
        case kPhi: phi = v; break;
        case kTurnover: V = v; break;
        case kSigma: sigma = v; break;
        case kBookSize: B = v; break;
        default: break;
    }
}

// --- volatility estimators --------------------------------------------------

double RealizedVolatility::estimate(std::span<const double> second_prices) const {
    double sum = 0.0;
    for (std::size_t i = 1; i < second_prices.size(); ++i) {
        const double r = std::log(second_prices[i] / second_prices[i - 1]);
        sum += r * r;
    }
    return std::sqrt(sum);
}

double BipowerVolatility::estimate(std::span<const double> second_prices) const {
    double sum = 0.0;
    double prev = 0.0;
    for (std::size_t i = 1; i < second_prices.size(); ++i) {
        const double r = std::abs(std::log(second_prices[i] / second_prices[i - 1]));
        if (i >= 2) {
            sum += r * prev;
        }
        prev = r;
    }
    return std::sqrt(std::numbers::pi / 2.0 * sum);
}

std::unique_ptr<VolatilityEstimator> make_volatility_estimator(std::string_view name) {
    if (name == "realized") {
        return std::make_unique<RealizedVolatility>();
    }
    if (name == "bipower") {
        return std::make_unique<BipowerVolatility>();
    }
    throw ValidationError("market_data.vol_estimator: unknown estimator '" + std::string(name) + "'");
}

// --- features ---------------------------------------------------------------

std::vector<LiquidityVector> compute_bin_features(std::span<const TradeRecord> trades,
                                                  std::span<const QuoteRecord> quotes, DayNumber day,
                                                  const BinGrid& grid, double tick_size,
                                                  const VolatilityEstimator& estimator) {
    if (!(tick_size > 0.0)) {
        throw ValidationError("tick_size must be positive");
    }
    const int T = grid.bin_count();
    const int seconds = grid.bin_width_minutes * 60;
    std::vector<LiquidityVector> out(static_cast<std::size_t>(T));

    std::size_t qi = 0;
    std::size_t ti = 0;
    bool have_quote = false;
    double spread = 0.0;
    double book = 0.0;
    bool have_price = false;
    double last_price = 0.0;
    std::vector<double> sampled;
    sampled.reserve(static_cast<std::size_t>(seconds));

    for (int t = 1; t <= T; ++t) {
        const Millis start = grid.bin_start(day, t);
        double turnover = 0.0;
        std::size_t n_trades = 0;
        bool gap = false;
        double spread_sum = 0.0;
        double book_sum = 0.0;
        sampled.clear();

        for (int s = 0; s < seconds; ++s) {
            const Millis end = start + (s + 1) * kMillisPerSecond;
            for (; qi < quotes.size() && quotes[qi].timestamp < end; ++qi) {
                const QuoteRecord& q = quotes[qi];
                if (q.ask_price < q.bid_price) {
                    continue;
                }
                spread = q.ask_price - q.bid_price;
                book = 0.5 * (q.bid_size + q.ask_size);
                have_quote = true;
            }
            for (; ti < trades.size() && trades[ti].timestamp < end; ++ti) {
                const TradeRecord& tr = trades[ti];
                if (tr.timestamp >= start) {
                    turnover += tr.price * tr.size;
                    ++n_trades;
                }
                last_price = tr.price;
                have_price = true;
            }
            if (have_quote) {
                spread_sum += spread;
                book_sum += book;
            } else {
                gap = true;
            }
            if (have_price) {
                sampled.push_back(last_price);
            }
        }

        LiquidityVector& lv = out[static_cast<std::size_t>(t - 1)];
        lv.V = turnover;
        if (!gap) {
            lv.phi = std::max(0.0, spread_sum / seconds / tick_size);
            lv.B = book_sum / seconds;
        }
        lv.sigma = sampled.size() >= 2 ? estimator.estimate(sampled) : 0.0;
        lv.missing = gap || n_trades == 0;
    }
    return out;
}

double MarketDataConfig::tick_for(std::string_view ticker) const {
    auto it = tick_sizes.find(ticker);
    return it == tick_sizes.end() ? default_tick : it->second;
}

void MarketDataConfig::validate() const {
    grid.validate();
    if (!(default_tick > 0.0)) {
        throw ValidationError("market_data.default_tick must be positive");
    }
    for (const auto& [ticker, tick] : tick_sizes) {
        if (!(tick > 0.0)) {
            throw ValidationError("market_data.tick." + ticker + " must be positive");
        }
    }
    if (!(max_missing_fraction >= 0.0 && max_missing_fraction <= 1.0)) {
        throw ValidationError("market_data.max_missing_fraction must lie in [0, 1]");
    }
    make_volatility_estimator(vol_estimator);
}

namespace {

template <typename Record>
std::map<std::string, std::vector<Record>> group_by_ticker(std::vector<Record>&& records) {
    std::map<std::string, std::vector<Record>> out;
    for (auto& r : records) {
        out[r.ticker].push_back(std::move(r));
    }
    for (auto& [ticker, rows] : out) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Record& a, const Record& b) { return a.timestamp < b.timestamp; });
    }
    return out;
}

std::map<std::string, std::vector<LiquidityVector>> features_from_groups(
    const std::map<std::string, std::vector<TradeRecord>>& trades,
    const std::map<std::string, std::vector<QuoteRecord>>& quotes, DayNumber day,
    const MarketDataConfig& config) {
    const auto estimator = make_volatility_estimator(config.vol_estimator);
    std::map<std::string, std::vector<LiquidityVector>> out;
    const std::vector<TradeRecord> no_trades;
    const std::vector<QuoteRecord> no_quotes;
    auto emit = [&](const std::string& ticker) {
        if (out.count(ticker)) {
            return;
        }
        auto t = trades.find(ticker);
        auto q = quotes.find(ticker);
        out[ticker] = compute_bin_features(t == trades.end() ? no_trades : t->second,
                                           q == quotes.end() ? no_quotes : q->second, day,
                                           config.grid, config.tick_for(ticker), *estimator);
    };
    for (const auto& kv : trades) {
        emit(kv.first);
    }
    for (const auto& kv : quotes) {
        emit(kv.first);
    }
    return out;
}

}  // namespace

std::map<std::string, std::vector<LiquidityVector>> compute_day_features(
    std::span<const TradeRecord> trades, std::span<const QuoteRecord> quotes, DayNumber day,
    const MarketDataConfig& config) {
    return features_from_groups(group_by_ticker(std::vector<TradeRecord>(trades.begin(), trades.end())),
                                group_by_ticker(std::vector<QuoteRecord>(quotes.begin(), quotes.end())),
                                day, config);
}

// --- Panel ------------------------------------------------------------------

std::vector<DayNumber> Panel::days() const {
    std::vector<DayNumber> out;
    for (const auto& r : rows) {
        if (out.empty() || out.back() != r.day) {
            out.push_back(r.day);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void Panel::sort() {
    std::stable_sort(rows.begin(), rows.end(), [](const StockDay& a, const StockDay& b) {
        return a.day != b.day ? a.day < b.day : a.ticker < b.ticker;
    });
}

// --- PriceBook --------------------------------------------------------------

void PriceBook::add(DayNumber day, std::string_view ticker, Millis timestamp, double price) {
    auto& by_ticker = series_[day];
    auto it = by_ticker.find(ticker);
    if (it == by_ticker.end()) {
        it = by_ticker.emplace(std::string(ticker), Series{}).first;
    }
    it->second.emplace_back(timestamp, price);
}

void PriceBook::finalize() {
    for (auto& [day, by_ticker] : series_) {
        for (auto& [ticker, s] : by_ticker) {
            std::stable_sort(s.begin(), s.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
        }
    }
}

std::optional<double> PriceBook::last_at_or_before(DayNumber day, std::string_view ticker,
                                                   Millis t) const {
    auto d = series_.find(day);
    if (d == series_.end()) {
        return std::nullopt;
    }
    auto it = d->second.find(ticker);
    if (it == d->second.end()) {
        return std::nullopt;
    }
    const Series& s = it->second;
    auto pos = std::upper_bound(s.begin(), s.end(), t,
                                [](Millis value, const auto& p) { return value < p.first; });
    if (pos == s.begin()) {
        return std::nullopt;
    }
    return std::prev(pos)->second;
}

std::vector<std::string> PriceBook::tickers(DayNumber day) const {
    std::vector<std::string> out;
    auto d = series_.find(day);
    if (d != series_.end()) {
        for (const auto& kv : d->second) {
            out.push_back(kv.first);
        }
    }
    return out;
}

std::size_t PriceBook::size() const noexcept {
    std::size_t n = 0;
    for (const auto& [day, by_ticker] : series_) {
        for (const auto& [ticker, s] : by_ticker) {
            n += s.size();
        }
    }
    return n;
}

// --- CSV I/O ----------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 4> kTradeHeader{"timestamp", "ticker", "price", "size"};
constexpr std::array<std::string_view, 6> kQuoteHeader{"timestamp", "ticker",   "bid_price",
                                                       "ask_price", "bid_size", "ask_size"};

// Per-ticker last timestamp, for the non-decreasing check.
class OrderCheck {
public:
    void check(const CsvReader& in, const std::string& ticker, Millis ts) {
        auto [it, inserted] = last_.try_emplace(ticker, ts);
        if (!inserted) {
            if (ts < it->second) {
                in.fail("timestamps must be non-decreasing per ticker");
            }
            it->second = ts;
        }
    }

private:
    std::unordered_map<std::string, Millis> last_;
};

}  // namespace

std::vector<TradeRecord> read_trades_csv(const std::filesystem::path& path, ParseStats& stats) {
    CsvReader in(path);
    in.expect_header(kTradeHeader);
    std::vector<TradeRecord> out;
    OrderCheck order;
    while (in.next()) {
        TradeRecord r;
        r.timestamp = in.get_int(0);
        r.ticker = std::string(in.get(1));
        r.price = in.get_double(2);
        r.size = in.get_double(3);
        if (r.ticker.empty()) {
            in.fail("empty ticker");
        }
        if (!(r.price > 0.0) || !std::isfinite(r.price)) {
            in.fail("price must be positive");
        }
        if (!(r.size > 0.0) || !std::isfinite(r.size)) {
            in.fail("size must be positive");
        }
        order.check(in, r.ticker, r.timestamp);
        out.push_back(std::move(r));
    }
    stats.trades += out.size();
    return out;
}

std::vector<QuoteRecord> read_quotes_csv(const std::filesystem::path& path, ParseStats& stats) {
    CsvReader in(path);
    in.expect_header(kQuoteHeader);
    std::vector<QuoteRecord> out;
    OrderCheck order;
    while (in.next()) {
        QuoteRecord r;
        r.timestamp = in.get_int(0);
        r.ticker = std::string(in.get(1));
        r.bid_price = in.get_double(2);
        r.ask_price = in.get_double(3);
        r.bid_size = in.get_double(4);
        r.ask_size = in.get_double(5);
        if (r.ticker.empty()) {
            in.fail("empty ticker");
        }
        if (!(r.bid_price > 0.0) || !std::isfinite(r.bid_price) || !std::isfinite(r.ask_price)) {
            in.fail("bid_price must be positive");
        }
        if (!(r.bid_size >= 0.0) || !(r.ask_size >= 0.0)) {
            in.fail("quote sizes must be non-negative");
        }
        order.check(in, r.ticker, r.timestamp);
        if (r.ask_price < r.bid_price) {
            ++stats.crossed_quotes;
            continue;
        }
        out.push_back(std::move(r));
    }
    stats.quotes += out.size();
    return out;
}

void write_trades_csv(const std::filesystem::path& path, std::span<const TradeRecord> trades) {
    CsvWriter out(path);
    out.header(kTradeHeader);
    for (const auto& r : trades) {
        out.field(r.timestamp).field(r.ticker).field(r.price).field(r.size).end_row();
    }
    out.close();
}

void write_quotes_csv(const std::filesystem::path& path, std::span<const QuoteRecord> quotes) {
    CsvWriter out(path);
    out.header(kQuoteHeader);
    for (const auto& r : quotes) {
        out.field(r.timestamp)
            .field(r.ticker)
            .field(r.bid_price)
            .field(r.ask_price)
            .field(r.bid_size)
            .field(r.ask_size)
            .end_row();
    }
    out.close();
}

std::vector<DayNumber> list_days(const std::filesystem::path& root, const DateRange& range) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw DataError("missing data directory: " + root.string());
    }
    std::vector<DayNumber> days;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) {
            continue;
        }
        auto day = parse_date(entry.path().filename().string());
        if (day && range.contains(*day)) {
            days.push_back(*day);
        }
    }
    std::sort(days.begin(), days.end());
    if (days.empty()) {
        throw DataError("no input files in " + root.string());
    }
    return days;
}

void add_universe_day(UniverseLoad& result, DayNumber day, std::vector<TradeRecord> trades,
                      std::vector<QuoteRecord> quotes, const MarketDataConfig& config, bool collect_prices) {
    result.panel.bins_per_day = config.grid.bin_count();
    const auto T = static_cast<std::size_t>(config.grid.bin_count());
    if (collect_prices) {
        for (const auto& tr : trades) {
            result.prices.add(day, tr.ticker, tr.timestamp, tr.price);
        }
    }
    auto features =
        features_from_groups(group_by_ticker(std::move(trades)), group_by_ticker(std::move(quotes)), day, config);
    for (auto& [ticker, bins] : features) {
        const auto missing =
            static_cast<int>(std::count_if(bins.begin(), bins.end(), [](const auto& b) { return b.missing; }));
        if (static_cast<double>(missing) > config.max_missing_fraction * static_cast<double>(T)) {
            result.dropped.push_back({day, ticker, missing, static_cast<int>(T)});
            continue;
        }
        result.panel.rows.push_back({day, ticker, std::move(bins)});
    }
}

void finish_universe(UniverseLoad& result, bool collect_prices) {
    if (collect_prices) {
        result.prices.finalize();
    }
    if (result.panel.rows.empty()) {
        throw DataError("empty universe: every stock-day was dropped or no tickers were found");
    }
    result.panel.sort();
}

UniverseLoad load_universe(const std::filesystem::path& root, const DateRange& range,
                           const MarketDataConfig& config, bool collect_prices) {
    config.validate();
    UniverseLoad result;
    result.panel.bins_per_day = config.grid.bin_count();
    for (DayNumber day : list_days(root, range)) {
        const auto dir = root / format_date(day);
        auto trades = read_trades_csv(dir / "trades.csv", result.stats);
        auto quotes = read_quotes_csv(dir / "quotes.csv", result.stats);
        add_universe_day(result, day, std::move(trades), std::move(quotes), config, collect_prices);
    }
    finish_universe(result, collect_prices);
    return result;
}

PriceBook load_prices(const std::filesystem::path& root, const DateRange& range) {
    PriceBook book;
    ParseStats stats;
    for (DayNumber day : list_days(root, range)) {
        for (const auto& tr : read_trades_csv(root / format_date(day) / "trades.csv", stats)) {
            book.add(day, tr.ticker, tr.timestamp, tr.price);
        }
    }
    book.finalize();
    return book;
}

void write_panel_csv(const std::filesystem::path& path, const Panel& panel, bool stationarized) {
    CsvWriter out(path);
    out.field("date").field("ticker").field("bin");
    for (auto name : kFeatureNames) {
        out.field(name);
    }
    out.field("missing");
    if (stationarized) {
        out.field("stationarized");
    }
    out.end_row();
    for (const auto& row : panel.rows) {
        const std::string date = format_date(row.day);
        for (std::size_t t = 0; t < row.bins.size(); ++t) {
            const auto& b = row.bins[t];
            out.field(date).field(row.ticker).field(t + 1);
            out.field(b.phi).field(b.V).field(b.sigma).field(b.B);
            out.field(b.missing ? 1 : 0);
            if (stationarized) {
                out.field(1);
            }
            out.end_row();
        }
    }
    out.close();
}

Panel read_panel_csv(const std::filesystem::path& path) {
    CsvReader in(path);
    const std::size_t c_date = in.column("date");
    const std::size_t c_ticker = in.column("ticker");
    const std::size_t c_bin = in.column("bin");
    std::array<std::size_t, kFeatureDim> c_var{};
    for (std::size_t v = 0; v < kFeatureDim; ++v) {
        c_var[v] = in.column(kFeatureNames[v]);
    }
    const std::size_t c_missing = in.column("missing");

    Panel panel;
    while (in.next()) {
        auto day = parse_date(in.get(c_date));
        if (!day) {
            in.fail("bad date '" + std::string(in.get(c_date)) + "'");
        }
        const std::string_view ticker = in.get(c_ticker);
        const auto bin = in.get_int(c_bin);
        if (panel.rows.empty() || panel.rows.back().day != *day || panel.rows.back().ticker != ticker) {
            panel.rows.push_back({*day, std::string(ticker), {}});
        }
        auto& row = panel.rows.back();
        if (bin != static_cast<std::int64_t>(row.bins.size()) + 1) {
            in.fail("bins must run 1..T consecutively per (date, ticker)");
        }
        LiquidityVector lv;
        for (std::size_t v = 0; v < kFeatureDim; ++v) {
            lv.set(v, in.get_double(c_var[v]));
        }
        lv.missing = in.get_bool(c_missing);
        row.bins.push_back(lv);
    }
    for (const auto& row : panel.rows) {
        if (panel.bins_per_day == 0) {
            panel.bins_per_day = static_cast<int>(row.bins.size());
        } else if (static_cast<int>(row.bins.size()) != panel.bins_per_day) {
            throw ParseError(path.string(), 0, "inconsistent bin count for " + row.ticker);
        }
    }
    panel.sort();
    return panel;
}

void write_drop_log(const std::filesystem::path& path, std::span<const DropRecord> dropped) {
    CsvWriter out(path);
    constexpr std::array<std::string_view, 4> header{"date", "ticker", "missing_bins", "total_bins"};
    out.header(header);
    for (const auto& d : dropped) {
        out.field(format_date(d.day)).field(d.ticker).field(d.missing_bins).field(d.total_bins).end_row();
    }
    out.close();
}

}  // namespace liqmode
