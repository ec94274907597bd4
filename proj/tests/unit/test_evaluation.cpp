#include "liqmode/errors.hpp"
#include "liqmode/evaluation.hpp"
#include "support.hpp"
#include "synth_experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace liqmode;
using liqmode::testing::clock_ms;
using liqmode::testing::kDay;

namespace {

// n stocks with one article each at 11:00; stock i's price moves by moves[i]
// between the article and every later time.
struct Market {
    std::vector<NewsArticle> news;
    PriceBook prices;
};

Market market(const std::vector<double>& moves) {
    Market m;
    const Millis t0 = clock_ms(kDay, 11, 0);
    for (std::size_t i = 0; i < moves.size(); ++i) {
        const std::string name = "S" + std::to_string(1000 + i);
        m.prices.add(kDay, name, t0 - 1000, 10.0);
        m.prices.add(kDay, name, t0 + 1000, 10.0 * (1.0 + moves[i]));
        m.news.push_back({t0, name, name + " update", std::nullopt, std::nullopt});
    }
    m.prices.finalize();
    return m;
}

std::vector<ScoredArticle> scores(const std::vector<double>& s) {
    std::vector<ScoredArticle> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.push_back({i, s[i]});
    }
    return out;
}

const std::vector<int> kHorizons{5, 10, 15};

SynthSpec small_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.n_stocks = 12;
    spec.n_days = 9;
    spec.news_rate = 12;
    return spec;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("constant prices give flat curves") {
    const Market m = market(std::vector<double>(40, 0.0));
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    std::mt19937_64 rng(1);
    std::vector<double> s(40);
    for (auto& v : s) {
        v = std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    const auto r = drift_curves(scores(s), table, 0.1);
    for (const auto* c : {&r.top, &r.bottom, &r.reference}) {
        for (double v : c->mean) {
            CHECK(v == 0.0);
        }
    }
    CHECK(r.terminal_separation == 0.0);
}

TEST_CASE("planted drift in the top bucket") {
    // The 10 highest-scored stocks rise by d, the others stay flat.
    const double d = 0.01;
    std::vector<double> moves(100, 0.0), s(100);
    for (std::size_t i = 0; i < 100; ++i) {
        s[i] = static_cast<double>(i);
        if (i >= 90) {
            moves[i] = d;
        }
    }
    const Market m = market(moves);
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    const auto r = drift_curves(scores(s), table, 0.1);
    const double market_move = 10 * d / 100;
    CHECK(r.top.count == 10);
    for (double v : r.top.mean) {
        CHECK(v == doctest::Approx(d - market_move).epsilon(1e-9));
    }
    for (double v : r.bottom.mean) {
        CHECK(v == doctest::Approx(-market_move).epsilon(1e-9));
    }
    CHECK(r.terminal_separation == doctest::Approx(d).epsilon(1e-9));
    CHECK(std::abs(r.reference.terminal_mean()) <= 1e-12);
}

TEST_CASE("bucket sizes and standard errors") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0, 0.01);
    for (std::size_t n : {1u, 7u, 10u, 30u, 31u, 99u, 250u}) {
        std::vector<double> moves(n), s(n);
        for (auto& v : moves) {
            v = z(rng);
        }
        for (auto& v : s) {
            v = z(rng);
        }
        const Market m = market(moves);
        const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
        for (double decile : {0.1, 0.25, 0.5}) {
            const auto r = drift_curves(scores(s), table, decile);
            const auto expect = static_cast<std::size_t>(std::ceil(decile * static_cast<double>(n) - 1e-9));
            CHECK(r.top.count == std::max<std::size_t>(1, expect));
            CHECK(r.bottom.count == r.top.count);
            CHECK(r.reference.count == n);
            CHECK(r.top.small_sample == (r.top.count < 30));
            // Standard error recomputed from the member returns.
            std::vector<double> vals;
            for (auto a : r.top.members) {
                vals.push_back(*table.get(a, 2));
            }
            double mu = 0, ss = 0;
            for (double v : vals) {
                mu += v;
            }
            mu /= static_cast<double>(vals.size());
            for (double v : vals) {
                ss += (v - mu) * (v - mu);
            }
            const double se = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) / std::sqrt(static_cast<double>(vals.size())) : 0.0;
            CHECK(r.top.stderr_of_mean[2] == doctest::Approx(se).epsilon(1e-9));
            CHECK(r.top.mean[2] == doctest::Approx(mu).epsilon(1e-12));
        }
    }
    const Market m = market({0.0, 0.0});
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    CHECK_THROWS_AS(drift_curves(scores({0.1, 0.2}), table, 0.0), ValidationError);
    CHECK_THROWS_AS(drift_curves(scores({0.1, 0.2}), table, 0.6), ValidationError);
}

TEST_CASE("ties in the score are broken by article index") {
    const Market m = market(std::vector<double>(20, 0.0));
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    const auto r = drift_curves(scores(std::vector<double>(20, 0.5)), table, 0.1);
    CHECK(r.top.members == std::vector<std::size_t>{0, 1});
    CHECK(r.bottom.members == std::vector<std::size_t>{0, 1});
}

TEST_CASE("buckets are invariant to strictly increasing transforms of the score") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z(0, 1);
    std::vector<double> moves(80), s(80);
    for (auto& v : moves) {
        v = 0.01 * z(rng);
    }
    for (auto& v : s) {
        v = std::tanh(z(rng));
    }
    const Market m = market(moves);
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    const auto base = drift_curves(scores(s), table, 0.1);
    for (auto f : {+[](double x) { return 3 * x - 1; }, +[](double x) { return std::exp(5 * x); },
                   +[](double x) { return x * x * x; }}) {
        std::vector<double> t(s.size());
        std::transform(s.begin(), s.end(), t.begin(), f);
        const auto r = drift_curves(scores(t), table, 0.1);
        CHECK(r.top.members == base.top.members);
        CHECK(r.bottom.members == base.bottom.members);
    }
}

TEST_CASE("articles lacking a horizon are dropped") {
    Market m = market({0.01, 0.02, 0.03});
    m.news.push_back({clock_ms(kDay, 11, 0), "NOPRICE", "x", std::nullopt, std::nullopt});
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    CHECK_FALSE(table.complete(3));
    const auto r = drift_curves(scores({0.1, 0.2, 0.3, 0.9}), table, 0.5);
    CHECK(r.reference.count == 3);
    CHECK(r.top.members == std::vector<std::size_t>{1, 2});
}

TEST_CASE("compare") {
    std::vector<double> moves(50), s(50), t(50);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0, 1);
    for (std::size_t i = 0; i < 50; ++i) {
        moves[i] = 0.01 * z(rng);
        s[i] = z(rng);
        t[i] = moves[i];
    }
    const Market m = market(moves);
    const ReturnTable table(m.news, m.prices, kHorizons, BinGrid{});
    const auto same = compare(scores(s), scores(s), table, 0.1);
    CHECK(same.difference == 0.0);
    CHECK(same.common == 50);
    // Scoring by the realised move is a perfect scorer.
    const auto perfect = compare(scores(s), scores(t), table, 0.1);
    CHECK(perfect.difference > 0.0);

    std::vector<ScoredArticle> a{{0, 0.1}, {1, 0.2}}, b{{2, 0.1}, {3, 0.2}};
    try {
        compare(a, b, table, 0.1);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("empty intersection") != std::string::npos);
    }
}

TEST_CASE("reference bucket is flat without planted signal") {
    SynthSpec spec = small_spec(3);
    spec.drift = 0.0;
    spec.neutral_drift_sd = 0.0;
    const auto data = testing::experiment_data(spec);
    const ReturnTable table(data.eval_news, data.prices, {5, 30, 60}, data.grid);
    std::vector<ScoredArticle> s;
    for (std::size_t i = 0; i < data.eval_news.size(); ++i) {
        s.push_back({i, 0.0});
    }
    const auto r = drift_curves(s, table, 0.1);
    REQUIRE(r.reference.count > 100);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(r.reference.mean[j]) <= 3.0 * r.reference.stderr_of_mean[j]);
    }
}

TEST_CASE("sweep is unaffected by fit caching and a one-cell grid equals a direct run") {
    const auto data = testing::experiment_data(small_spec(1));
    ExperimentOptions o;
    o.eval_horizons = {5, 15, 30};
    o.jump.restarts = 3;
    SweepGrid grid;
    grid.lambdas = {0.25, 0.5};
    grid.horizons = {15};
    grid.ks = {10, 25};

    Experiment cached(data, o);
    o.cache_fits = false;
    Experiment uncached(data, o);
    const auto a = sweep(cached, grid);
    const auto b = sweep(uncached, grid);
    CHECK(cached.fits_computed() == 2);
    CHECK(uncached.fits_computed() == 4);
    testing::TempDir dir("sweep");
    write_sweep_csv(dir / "a.csv", a);
    write_sweep_csv(dir / "b.csv", b);
    CHECK(testing::read_file(dir / "a.csv") == testing::read_file(dir / "b.csv"));

    SweepGrid one;
    one.lambdas = {0.5};
    one.horizons = {15};
    one.ks = {10};
    const auto single = sweep(cached, one);
    REQUIRE(single.size() == 1);
    Experiment fresh(data, o);
    const auto direct = fresh.run(0.5, 15, 10);
    CHECK(single[0].n_train == direct.n_train);
    CHECK(single[0].degenerate == direct.degenerate);
    if (!direct.degenerate) {
        CHECK(single[0].terminal_separation == direct.terminal_separation);
    }
}

TEST_CASE("empty screened classes mark the cell degenerate") {
    const auto data = testing::experiment_data(small_spec(2));
    ExperimentOptions o;
    o.eval_horizons = {5, 15};
    o.jump.restarts = 2;
    Experiment ex(data, o);
    // A huge penalty leaves no switches, so nothing is screened.
    const auto cell = ex.run(1e9, 15, 10);
    CHECK(cell.degenerate);
    CHECK(cell.n_train == 0);
    CHECK(std::isnan(cell.terminal_separation));
    CHECK_FALSE(cell.report.has_value());
}

TEST_CASE("scores csv round trip") {
    testing::TempDir dir("scores");
    const Market m = market({0.0, 0.0});
    write_scores_csv(dir / "s.csv", m.news, scores({-0.25, 1.0}));
    const auto back = read_scores_csv(dir / "s.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].score == -0.25);
    CHECK(back[1].headline == m.news[1].headline);
}

}
