#include "liqmode/errors.hpp"
#include "liqmode/labeling.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace liqmode;
using liqmode::testing::clock_ms;
using liqmode::testing::kDay;

namespace {

NewsArticle article(Millis ts, const std::string& ticker) {
    NewsArticle a;
    a.timestamp = ts;
    a.ticker = ticker;
    a.headline = ticker + " news";
    return a;
}

std::vector<DetrendedReturn> returns_from(const std::vector<double>& values) {
    std::vector<DetrendedReturn> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        DetrendedReturn r;
        r.article = i;
        r.horizon_minutes = 15;
        r.value = values[i];
        out.push_back(r);
    }
    return out;
}

std::vector<double> random_values(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 0.01);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = z(rng);
    }
    return v;
}

}  // namespace

TEST_SUITE("labeling") {

TEST_CASE("stock up 2 percent against a market up 0.5 percent") {
    const BinGrid grid;
    PriceBook book;
    const Millis t0 = clock_ms(kDay, 11, 0);
    const Millis t1 = t0 + 15 * kMillisPerMinute;
    // AAA +2%, BBB -1%: equal-weight market +0.5%.
    book.add(kDay, "AAA", t0 - 1000, 100.0);
    book.add(kDay, "AAA", t1 - 1000, 102.0);
    book.add(kDay, "BBB", t0 - 5000, 50.0);
    book.add(kDay, "BBB", t1, 49.5);
    book.finalize();
    const auto r = post_news_return(article(t0, "AAA"), book, 15, grid);
    REQUIRE(r.has_value());
    CHECK(r->raw == doctest::Approx(0.02));
    CHECK(r->value == doctest::Approx(0.015));
    CHECK(r->universe_size == 2);
    CHECK(r->small_universe);
}

TEST_CASE("identical moves detrend to zero") {
    const BinGrid grid;
    PriceBook book;
    const Millis t0 = clock_ms(kDay, 10, 0);
    for (const char* s : {"A", "B", "C", "D"}) {
        book.add(kDay, s, t0 - 1, 10.0);
        book.add(kDay, s, t0 + 60'000, 10.3);
    }
    book.finalize();
    const auto r = post_news_return(article(t0, "C"), book, 5, grid);
    REQUIRE(r.has_value());
    CHECK(std::abs(r->value) <= 1e-15);
}

TEST_CASE("three-stock panel against a direct recomputation") {
    const BinGrid grid;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> price(20, 40);
    std::uniform_int_distribution<Millis> when(clock_ms(kDay, 9, 30), clock_ms(kDay, 16, 0));
    const std::vector<std::string> names{"X", "Y", "Z"};
    std::map<std::string, std::vector<std::pair<Millis, double>>> series;
    PriceBook book;
    for (const auto& s : names) {
        for (int i = 0; i < 40; ++i) {
            const Millis ts = when(rng);
            const double p = price(rng);
            series[s].push_back({ts, p});
            book.add(kDay, s, ts, p);
        }
        std::sort(series[s].begin(), series[s].end());
    }
    book.finalize();
    auto last = [&](const std::string& s, Millis t) -> std::optional<double> {
        std::optional<double> v;
        for (const auto& [ts, p] : series[s]) {
            if (ts <= t) {
                v = p;
            }
        }
        return v;
    };
    for (int trial = 0; trial < 50; ++trial) {
        const Millis t0 = when(rng);
        const auto& who = names[rng() % 3];
        const int h = 5 * (1 + static_cast<int>(rng() % 12));
        const Millis t1 = std::min(t0 + h * kMillisPerMinute, grid.session_close(kDay));
        const auto got = post_news_return(article(t0, who), book, h, grid);
        const auto a0 = last(who, t0), a1 = last(who, t1);
        if (!a0 || !a1) {
            CHECK_FALSE(got.has_value());
            continue;
        }
        double sum = 0.0;
        int n = 0;
        for (const auto& s : names) {
            const auto b0 = last(s, t0), b1 = last(s, t1);
            if (b0 && b1) {
                sum += *b1 / *b0 - 1.0;
                ++n;
            }
        }
        REQUIRE(got.has_value());
        CHECK(got->value == doctest::Approx(*a1 / *a0 - 1.0 - sum / n).epsilon(1e-12));
        CHECK(got->universe_size == n);
    }
}

TEST_CASE("detrended returns average to zero over a fully priced universe") {
    const BinGrid grid;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> price(10, 100);
    PriceBook book;
    std::vector<NewsArticle> news;
    const Millis t0 = clock_ms(kDay, 13, 7);
    for (int s = 0; s < 25; ++s) {
        const std::string name = "S" + std::to_string(s);
        book.add(kDay, name, t0 - 10, price(rng));
        book.add(kDay, name, t0 + 600'000, price(rng));
        news.push_back(article(t0, name));
    }
    book.finalize();
    const auto batch = compute_returns(news, book, 15, grid);
    REQUIRE(batch.returns.size() == 25);
    double sum = 0.0;
    for (const auto& r : batch.returns) {
        sum += r.value;
        CHECK_FALSE(r.small_universe);
    }
    CHECK(std::abs(sum / 25) <= 1e-12);
}

TEST_CASE("horizon is capped at the session close and unpriced stocks are dropped") {
    const BinGrid grid;
    PriceBook book;
    const Millis late = clock_ms(kDay, 15, 55);
    book.add(kDay, "AAA", late - 1, 10.0);
    book.add(kDay, "AAA", clock_ms(kDay, 15, 59), 11.0);
    book.add(kDay, "AAA", clock_ms(kDay, 16, 5), 50.0);
    book.finalize();
    const std::vector<NewsArticle> news{article(late, "AAA"), article(late, "BBB")};
    const auto batch = compute_returns(news, book, 30, grid);
    REQUIRE(batch.returns.size() == 1);
    CHECK(batch.returns[0].raw == doctest::Approx(0.1));
    CHECK(batch.dropped == std::vector<std::size_t>{1});
}

TEST_CASE("k = 10 on 100 distinct returns gives 10 and 10") {
    const auto values = random_values(5, 100);
    const auto sets = build_label_sets(returns_from(values), {}, 10);
    CHECK(sets.z_plus.size() == 10);
    CHECK(sets.z_minus.size() == 10);
    // Percentile oracle: the ten largest and ten smallest.
    std::vector<std::size_t> order(100);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<std::size_t> low(order.begin(), order.begin() + 10), high(order.end() - 10, order.end());
    std::sort(low.begin(), low.end());
    std::sort(high.begin(), high.end());
    CHECK(sets.z_minus == low);
    CHECK(sets.z_plus == high);
    CHECK(sets.n_plus.empty());
    CHECK(sets.n_minus.empty());
}

TEST_CASE("k = 50 covers every article once") {
    auto values = random_values(6, 151);
    values[7] = values[8] = values[9] = 0.0;  // ties around the median
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto sets = build_label_sets(returns_from(values), {}, 50);
    CHECK(sets.z_plus.size() + sets.z_minus.size() == 151);
    std::vector<std::size_t> both;
    std::set_intersection(sets.z_plus.begin(), sets.z_plus.end(), sets.z_minus.begin(), sets.z_minus.end(),
                          std::back_inserter(both));
    CHECK(both.empty());
    CHECK(sets.lower_threshold == sets.upper_threshold);
    const double median = sorted[75];
    for (auto i : sets.z_minus) {
        CHECK(values[i] < median);
    }
}

TEST_CASE("set invariants on random samples") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto values = random_values(seed + 100, 250);
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> screened;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (rng() % 4 == 0) {
                screened.push_back(i);
            }
        }
        const auto rets = returns_from(values);
        LabelSets previous;
        bool first = true;
        for (double k : {50.0, 25.0, 10.0, 5.0, 1.0}) {
            const auto s = build_label_sets(rets, screened, k);
            std::vector<std::size_t> inter;
            std::set_intersection(s.z_plus.begin(), s.z_plus.end(), s.z_minus.begin(), s.z_minus.end(),
                                  std::back_inserter(inter));
            CHECK(inter.empty());
            // N = D intersect Z.
            for (const auto* pair : {&s.z_plus, &s.z_minus}) {
                std::vector<std::size_t> expect;
                std::set_intersection(pair->begin(), pair->end(), screened.begin(), screened.end(),
                                      std::back_inserter(expect));
                CHECK(expect == (pair == &s.z_plus ? s.n_plus : s.n_minus));
            }
            if (k < 50) {
                double min_plus = 1e9, max_rest = -1e9;
                for (auto i : s.z_plus) {
                    min_plus = std::min(min_plus, values[i]);
                }
                for (std::size_t i = 0; i < values.size(); ++i) {
                    if (!std::binary_search(s.z_plus.begin(), s.z_plus.end(), i) &&
                        !std::binary_search(s.z_minus.begin(), s.z_minus.end(), i)) {
                        max_rest = std::max(max_rest, values[i]);
                    }
                }
                CHECK(min_plus >= max_rest);
            }
            if (!first) {
                CHECK(std::includes(previous.z_plus.begin(), previous.z_plus.end(), s.z_plus.begin(), s.z_plus.end()));
                CHECK(std::includes(previous.z_minus.begin(), previous.z_minus.end(), s.z_minus.begin(), s.z_minus.end()));
            }
            previous = s;
            first = false;
        }
    }
}

TEST_CASE("no screened articles gives empty N sets") {
    const auto sets = build_label_sets(returns_from(random_values(1, 120)), {}, 10);
    CHECK(sets.n_plus.empty());
    CHECK(sets.n_minus.empty());
}

TEST_CASE("too few returns or a bad k") {
    CHECK_THROWS_AS(build_label_sets(returns_from(random_values(1, 99)), {}, 10), DegenerateError);
    CHECK_THROWS_AS(build_label_sets(returns_from(random_values(1, 100)), {}, 0), ValidationError);
    CHECK_THROWS_AS(build_label_sets(returns_from(random_values(1, 100)), {}, 51), ValidationError);
}

TEST_CASE("labels csv round trip") {
    testing::TempDir dir("labels");
    std::vector<NewsArticle> news;
    for (int i = 0; i < 100; ++i) {
        news.push_back(article(1000 + i, "T" + std::to_string(i)));
    }
    const auto rets = returns_from(random_values(3, 100));
    const std::vector<std::size_t> screened{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto sets = build_label_sets(rets, screened, 10);
    write_labels_csv(dir / "l.csv", news, rets, sets);
    const auto back = read_labels_csv(dir / "l.csv");
    CHECK(back.size() == sets.z_plus.size() + sets.z_minus.size() + sets.n_plus.size() + sets.n_minus.size());
    for (const auto& rec : back) {
        const auto idx = static_cast<std::size_t>(rec.article.timestamp - 1000);
        CHECK(rec.detrended_return == rets[idx].value);
    }
}

}
