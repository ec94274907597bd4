#include "liqmode/errors.hpp"
#include "liqmode/market_data.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace liqmode;
using liqmode::testing::clock_ms;
using liqmode::testing::kDay;

namespace {

const RealizedVolatility kRealized;

QuoteRecord quote(Millis ts, double bid, double ask, double bid_size = 100, double ask_size = 300) {
    return {ts, "AAA", bid, ask, bid_size, ask_size};
}

// A quote before the session and one trade in the middle of every bin,
// except the bins listed in `no_trade` (1-based).
void complete_day(std::vector<TradeRecord>& trades, std::vector<QuoteRecord>& quotes, const std::string& ticker,
                  DayNumber day, const std::vector<int>& no_trade = {}) {
    const BinGrid grid;
    quotes.push_back({clock_ms(day, 9, 30), ticker, 99.99, 100.01, 100, 300});
    for (int t = 1; t <= grid.bin_count(); ++t) {
        if (std::find(no_trade.begin(), no_trade.end(), t) != no_trade.end()) {
            continue;
        }
        trades.push_back({grid.bin_start(day, t) + 150 * kMillisPerSecond, ticker, 100.0, 10.0});
    }
}

}  // namespace

TEST_SUITE("market_data") {

TEST_CASE("bin assignment at the trimmed boundaries") {
    const BinGrid grid;
    CHECK(grid.bin_count() == 72);
    CHECK_FALSE(assign_bin(clock_ms(kDay, 9, 44, 59, 999), grid).has_value());
    CHECK(assign_bin(clock_ms(kDay, 9, 45), grid) == 1);
    CHECK(assign_bin(clock_ms(kDay, 12, 0), grid) == 28);
    CHECK(assign_bin(clock_ms(kDay, 15, 44, 59, 999), grid) == 72);
    CHECK_FALSE(assign_bin(clock_ms(kDay, 15, 45), grid).has_value());
}

TEST_CASE("bins partition the trimmed session") {
    const BinGrid grid;
    // Brute force: walk every second of the day and compare with interval membership.
    for (Millis ts = clock_ms(kDay, 9, 0); ts < clock_ms(kDay, 16, 30); ts += 997) {
        int hits = 0;
        int which = 0;
        for (int t = 1; t <= grid.bin_count(); ++t) {
            if (ts >= grid.bin_start(kDay, t) && ts < grid.bin_start(kDay, t) + grid.bin_width_ms()) {
                ++hits;
                which = t;
            }
        }
        const auto got = assign_bin(ts, grid);
        CHECK(hits <= 1);
        if (hits == 1) {
            CHECK(got == which);
        } else {
            CHECK_FALSE(got.has_value());
        }
    }
    for (int t = 1; t < grid.bin_count(); ++t) {
        CHECK(grid.bin_start(kDay, t) + grid.bin_width_ms() == grid.bin_start(kDay, t + 1));
    }
}

TEST_CASE("utc offset shifts the session") {
    BinGrid grid;
    grid.utc_offset_minutes = -300;
    CHECK(assign_bin(clock_ms(kDay, 14, 45), grid) == 1);
    CHECK(grid.local_day(clock_ms(kDay, 2, 0)) == kDay - 1);
}

TEST_CASE("grid validation") {
    BinGrid grid;
    grid.bin_width_minutes = 7;
    CHECK_THROWS_AS(grid.validate(), ValidationError);
}

TEST_CASE("single bin features") {
    const BinGrid grid;
    const Millis b1 = grid.bin_start(kDay, 1);
    std::vector<TradeRecord> trades{{b1 + 10'000, "AAA", 10.0, 100.0}};
    std::vector<QuoteRecord> quotes{quote(b1 - 5'000, 99.99, 100.01)};
    const auto bins = compute_bin_features(trades, quotes, kDay, grid, 0.01, kRealized);
    REQUIRE(bins.size() == 72);
    CHECK(bins[0].V == doctest::Approx(1000.0));
    CHECK(bins[0].sigma == 0.0);
    CHECK(bins[0].phi == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(bins[0].B == doctest::Approx(200.0));
    CHECK_FALSE(bins[0].missing);
    // Later bins carry the quote but have no trades.
    CHECK(bins[1].missing);
    CHECK(bins[1].V == 0.0);
}

TEST_CASE("spread is averaged over seconds") {
    const BinGrid grid;
    const Millis b1 = grid.bin_start(kDay, 1);
    // 1 tick for the first 100 s, 3 ticks for the remaining 200 s.
    std::vector<QuoteRecord> quotes{quote(b1, 10.00, 10.01), quote(b1 + 100'000, 10.00, 10.03)};
    std::vector<TradeRecord> trades{{b1 + 1'000, "AAA", 10.0, 1.0}};
    const auto bins = compute_bin_features(trades, quotes, kDay, grid, 0.01, kRealized);
    CHECK(bins[0].phi == doctest::Approx((100.0 * 1 + 200.0 * 3) / 300.0).epsilon(1e-9));
}

TEST_CASE("realized volatility from second-sampled prices") {
    const BinGrid grid;
    const Millis b1 = grid.bin_start(kDay, 1);
    std::vector<QuoteRecord> quotes{quote(b1, 9.99, 10.01)};
    std::vector<TradeRecord> trades{{b1 + 500, "AAA", 10.0, 1.0},
                                    {b1 + 60'500, "AAA", 11.0, 1.0},
                                    {b1 + 120'500, "AAA", 10.0, 1.0}};
    const auto bins = compute_bin_features(trades, quotes, kDay, grid, 0.01, kRealized);
    const double r = std::log(11.0 / 10.0);
    CHECK(bins[0].sigma == doctest::Approx(std::sqrt(2 * r * r)));
    const std::vector<double> flat(300, 42.0);
    CHECK(kRealized.estimate(flat) == 0.0);
    CHECK(BipowerVolatility().estimate(flat) == 0.0);
    CHECK_THROWS_AS(make_volatility_estimator("garch"), ValidationError);
}

TEST_CASE("turnover is additive over trade subsets") {
    const BinGrid grid;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> price(10, 20), size(1, 500);
    std::uniform_int_distribution<Millis> offset(0, grid.bin_width_ms() - 1);
    const Millis b5 = grid.bin_start(kDay, 5);
    std::vector<QuoteRecord> quotes{quote(b5 - 1, 9.99, 10.01)};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TradeRecord> all, a, b;
        for (int i = 0; i < 30; ++i) {
            all.push_back({b5 + offset(rng), "AAA", price(rng), size(rng)});
        }
        std::sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.timestamp < y.timestamp; });
        for (const auto& tr : all) {
            (rng() % 2 ? a : b).push_back(tr);
        }
        const double v = compute_bin_features(all, quotes, kDay, grid, 0.01, kRealized)[4].V;
        const double va = compute_bin_features(a, quotes, kDay, grid, 0.01, kRealized)[4].V;
        const double vb = compute_bin_features(b, quotes, kDay, grid, 0.01, kRealized)[4].V;
        CHECK(v == doctest::Approx(va + vb).epsilon(1e-12));
    }
}

TEST_CASE("repeated quotes leave spread and book unchanged") {
    const BinGrid grid;
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<Millis> offset(0, 72 * grid.bin_width_ms() - 1);
    const Millis start = grid.bin_start(kDay, 1);
    std::vector<QuoteRecord> quotes;
    double bid = 50.0;
    for (int i = 0; i < 200; ++i) {
        bid += (rng() % 3 == 0 ? 0.01 : 0.0);
        quotes.push_back(quote(start + offset(rng), bid, bid + 0.01 * (1 + rng() % 4), 1 + rng() % 500,
                               1 + rng() % 500));
    }
    std::sort(quotes.begin(), quotes.end(), [](auto& x, auto& y) { return x.timestamp < y.timestamp; });
    // The repeats must not overtake the next distinct quote.
    std::vector<QuoteRecord> filtered;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        filtered.push_back(quotes[i]);
        QuoteRecord copy = quotes[i];
        copy.timestamp += 1;
        if (i + 1 == quotes.size() || copy.timestamp < quotes[i + 1].timestamp) {
            filtered.push_back(copy);
        }
    }
    const std::vector<TradeRecord> none;
    const auto base = compute_bin_features(none, quotes, kDay, grid, 0.01, kRealized);
    const auto with = compute_bin_features(none, filtered, kDay, grid, 0.01, kRealized);
    for (std::size_t t = 0; t < base.size(); ++t) {
        CHECK(base[t].phi == with[t].phi);
        CHECK(base[t].B == with[t].B);
    }
}

TEST_CASE("crossed quotes are ignored") {
    const BinGrid grid;
    const Millis b1 = grid.bin_start(kDay, 1);
    std::vector<QuoteRecord> quotes{quote(b1, 9.99, 10.01), quote(b1 + 30'000, 10.05, 10.00)};
    std::vector<TradeRecord> trades{{b1, "AAA", 10.0, 1.0}};
    const auto bins = compute_bin_features(trades, quotes, kDay, grid, 0.01, kRealized);
    CHECK(bins[0].phi == doctest::Approx(2.0));
}

TEST_CASE("universe loading, drops and parse errors") {
    testing::TempDir dir("md");
    MarketDataConfig config;

    SUBCASE("empty directory") {
        try {
            load_universe(dir.path(), {}, config);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("no input files") != std::string::npos);
        }
    }

    SUBCASE("one stock, one day") {
        std::vector<TradeRecord> trades;
        std::vector<QuoteRecord> quotes;
        complete_day(trades, quotes, "AAA", kDay);
        write_trades_csv(dir / "2024-01-02/trades.csv", trades);
        write_quotes_csv(dir / "2024-01-02/quotes.csv", quotes);
        const auto u = load_universe(dir.path(), {}, config);
        REQUIRE(u.panel.rows.size() == 1);
        CHECK(u.panel.rows[0].bins.size() == 72);
        CHECK(u.dropped.empty());
        for (const auto& b : u.panel.rows[0].bins) {
            CHECK_FALSE(b.missing);
            CHECK(b.phi == doctest::Approx(2.0));
        }
    }

    SUBCASE("16 of 72 missing bins drop the stock-day") {
        std::vector<TradeRecord> trades;
        std::vector<QuoteRecord> quotes;
        std::vector<int> sixteen, fourteen;
        for (int t = 1; t <= 16; ++t) {
            sixteen.push_back(t * 4);
        }
        for (int t = 1; t <= 14; ++t) {
            fourteen.push_back(t * 5);
        }
        complete_day(trades, quotes, "AAA", kDay, sixteen);
        complete_day(trades, quotes, "BBB", kDay, fourteen);
        write_trades_csv(dir / "2024-01-02/trades.csv", trades);
        write_quotes_csv(dir / "2024-01-02/quotes.csv", quotes);
        const auto u = load_universe(dir.path(), {}, config);
        REQUIRE(u.panel.rows.size() == 1);
        CHECK(u.panel.rows[0].ticker == "BBB");
        REQUIRE(u.dropped.size() == 1);
        CHECK(u.dropped[0].ticker == "AAA");
        CHECK(u.dropped[0].missing_bins == 16);
        write_drop_log(dir / "drops.csv", u.dropped);
        CHECK(testing::read_file(dir / "drops.csv") == "date,ticker,missing_bins,total_bins\n2024-01-02,AAA,16,72\n");
    }

    SUBCASE("malformed row names its line") {
        testing::write_file(dir / "2024-01-02/trades.csv",
                            "timestamp,ticker,price,size\n1704188700000,AAA,10,5\n1704188701000,AAA,-1,5\n");
        testing::write_file(dir / "2024-01-02/quotes.csv", "timestamp,ticker,bid_price,ask_price,bid_size,ask_size\n");
        try {
            load_universe(dir.path(), {}, config);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row() == 3);
        }
    }

    SUBCASE("crossed quotes are counted") {
        testing::write_file(dir / "q.csv",
                            "timestamp,ticker,bid_price,ask_price,bid_size,ask_size\n"
                            "1,AAA,10,10.01,1,1\n2,AAA,10.02,10.01,1,1\n");
        ParseStats stats;
        CHECK(read_quotes_csv(dir / "q.csv", stats).size() == 1);
        CHECK(stats.crossed_quotes == 1);
    }

    SUBCASE("out-of-order timestamps are rejected") {
        testing::write_file(dir / "t.csv", "timestamp,ticker,price,size\n5,AAA,10,1\n4,BBB,10,1\n3,AAA,10,1\n");
        ParseStats stats;
        CHECK_THROWS_AS(read_trades_csv(dir / "t.csv", stats), ParseError);
    }
}

TEST_CASE("panel csv round trip") {
    testing::TempDir dir("panel");
    Panel p;
    p.bins_per_day = 3;
    for (DayNumber d : {kDay + 1, kDay}) {
        StockDay row{d, "AAA", {}};
        for (int t = 0; t < 3; ++t) {
            LiquidityVector lv;
            lv.phi = 1.0 + t / 3.0;
            lv.V = 1e5 * (t + 1);
            lv.sigma = 1e-3 / 7.0;
            lv.B = 250.5;
            lv.missing = t == 1;
            row.bins.push_back(lv);
        }
        p.rows.push_back(row);
    }
    p.sort();
    write_panel_csv(dir / "p.csv", p, false);
    const Panel q = read_panel_csv(dir / "p.csv");
    REQUIRE(q.rows.size() == 2);
    CHECK(q.bins_per_day == 3);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(q.rows[i].day == p.rows[i].day);
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(q.rows[i].bins[t].values() == p.rows[i].bins[t].values());
            CHECK(q.rows[i].bins[t].missing == p.rows[i].bins[t].missing);
        }
    }
}

TEST_CASE("price book lookups") {
    PriceBook book;
    book.add(kDay, "AAA", 2000, 11.0);
    book.add(kDay, "AAA", 1000, 10.0);
    book.finalize();
    CHECK_FALSE(book.last_at_or_before(kDay, "AAA", 999).has_value());
    CHECK(book.last_at_or_before(kDay, "AAA", 1000) == 10.0);
    CHECK(book.last_at_or_before(kDay, "AAA", 1999) == 10.0);
    CHECK(book.last_at_or_before(kDay, "AAA", 5000) == 11.0);
    CHECK_FALSE(book.last_at_or_before(kDay, "BBB", 5000).has_value());
    CHECK(book.size() == 2);
}

}
