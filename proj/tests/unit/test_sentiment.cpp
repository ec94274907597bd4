#include "liqmode/errors.hpp"
#include "liqmode/sentiment.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace liqmode;

namespace {

using Tokens = std::vector<std::string>;

std::vector<LabeledDoc> up_down() { return {make_doc("up", true), make_doc("down", false)}; }

NbcOptions opts(std::size_t min_df = 1, double alpha = 1.0) {
    NbcOptions o;
    o.min_df = min_df;
    o.alpha = alpha;
    return o;
}

// Plug-in mutual information by direct summation over the four cells, in bits.
double mi_direct(const std::vector<LabeledDoc>& corpus, const std::string& word) {
    double n[2][2] = {{0, 0}, {0, 0}};  // [class][present]
    for (const auto& d : corpus) {
        const bool has = std::find(d.tokens.begin(), d.tokens.end(), word) != d.tokens.end();
        n[d.bullish ? 1 : 0][has ? 1 : 0] += 1;
    }
    const double total = n[0][0] + n[0][1] + n[1][0] + n[1][1];
    double mi = 0.0;
    for (int c = 0; c < 2; ++c) {
        for (int f = 0; f < 2; ++f) {
            if (n[c][f] == 0) {
                continue;
            }
            const double pc = (n[c][0] + n[c][1]) / total;
            const double pf = (n[0][f] + n[1][f]) / total;
            const double p = n[c][f] / total;
            mi += p * std::log(p / (pc * pf)) / std::log(2.0);
        }
    }
    return mi;
}

const std::vector<LabeledDoc> kToy{
    make_doc("Shares surge on record profit", true),  make_doc("Profit beats estimates, shares up", true),
    make_doc("Record sales lift outlook", true),      make_doc("Shares plunge after profit warning", false),
    make_doc("Outlook cut, sales miss", false),       make_doc("Regulator probe hits shares", false),
};

}  // namespace

TEST_SUITE("sentiment") {

TEST_CASE("tokenize") {
    CHECK(tokenize("Boeing 737 recall") == Tokens{"737", "boeing", "recall"});
    CHECK(tokenize("A.I. --").empty());
    CHECK(tokenize("Up, up and AWAY!") == Tokens{"and", "away", "up"});
    CHECK(tokenize("caf\xc3\xa9 r\xc3\xa9sum\xc3\xa9") == Tokens{"caf", "sum"});
    for (const char* h : {"Boeing 737 recall", "Q3: EPS $1.02 vs. $0.98 est.", "x-ray  Y2K", ""}) {
        const auto once = tokenize(h);
        std::string joined;
        for (const auto& t : once) {
            joined += t + " ";
        }
        CHECK(tokenize(joined) == once);
    }
}

TEST_CASE("mutual information limits") {
    // Present in half of each class.
    CHECK(mutual_information_counts(2, 4, 2, 4) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mutual_information_counts(5, 5, 0, 5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mutual_information_counts(0, 5, 5, 5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mutual_information(up_down(), "up") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mutual_information(up_down(), "sideways") == 0.0);
    CHECK_THROWS_AS(mutual_information(std::vector<LabeledDoc>{make_doc("up", true)}, "up"), ValidationError);
}

TEST_CASE("mutual information on a toy corpus matches direct summation") {
    for (const std::string w : {"shares", "profit", "record", "outlook", "sales", "probe", "cut"}) {
        CHECK(std::abs(mutual_information(kToy, w) - mi_direct(kToy, w)) <= 1e-12);
    }
}

TEST_CASE("mutual information is non-negative and zero exactly when the table factorizes") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t pos = 1 + rng() % 12, neg = 1 + rng() % 12;
        const std::size_t pw = rng() % (pos + 1), nw = rng() % (neg + 1);
        const double mi = mutual_information_counts(pw, pos, nw, neg);
        CHECK(mi >= 0.0);
        // Factorizes iff the word rate is the same in both classes.
        const bool independent = pw * neg == nw * pos;
        if (independent) {
            CHECK(mi <= 1e-12);
        } else {
            CHECK(mi > 1e-12);
        }
    }
}

TEST_CASE("top words ranking") {
    const auto ranked = top_words(kToy, 100);
    // Oracle: every word's direct MI, sorted descending then alphabetically.
    std::vector<std::pair<double, std::string>> expect;
    for (const auto& [w, df] : DocFrequency::count(kToy).df) {
        expect.push_back({-mi_direct(kToy, w), w});
    }
    std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.first - b.first) > 1e-12) {
            return a.first < b.first;
        }
        return a.second < b.second;
    });
    REQUIRE(ranked.size() == expect.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        CHECK(ranked[i].word == expect[i].second);
    }
    CHECK(top_words(up_down(), 1)[0].mutual_information == doctest::Approx(1.0));

    const std::vector<LabeledDoc> flat{make_doc("zeta alpha", true), make_doc("zeta alpha", false),
                                       make_doc("mid", true), make_doc("mid", false)};
    const auto f = top_words(flat, 10);
    REQUIRE(f.size() == 3);
    CHECK(f[0].word == "alpha");
    CHECK(f[1].word == "mid");
    CHECK(f[2].word == "zeta");
    for (const auto& w : f) {
        CHECK(w.mutual_information == 0.0);
    }
    CHECK(top_words(kToy, 100, 2).size() < ranked.size());
}

TEST_CASE("two-document corpus conditionals") {
    const SentimentModel m = fit_nbc(up_down(), opts());
    REQUIRE(m.find("up") != nullptr);
    CHECK(m.find("up")->p_bullish == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.find("up")->p_bearish == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(m.prior_bullish() == 0.5);
}

TEST_CASE("two-document corpus scores") {
    SUBCASE("word 'up' as the only vocabulary word") {
        NbcOptions o = opts();
        o.stop_words = {"down"};
        const SentimentModel m = fit_nbc(up_down(), o);
        const auto [pp, pm] = m.posterior(tokenize("up"));
        CHECK(std::abs(pp - 2.0 / 3.0) <= 1e-12);
        CHECK(std::abs(pm - 1.0 / 3.0) <= 1e-12);
        CHECK(std::abs(m.score("up") - 1.0 / 3.0) <= 1e-12);
    }
    SUBCASE("full Bernoulli likelihood with absent 'down'") {
        const SentimentModel m = fit_nbc(up_down(), opts());
        // +: 1/2 * 2/3 * (1 - 1/3);  -: 1/2 * 1/3 * (1 - 2/3)
        const double plus = 0.5 * (2.0 / 3) * (2.0 / 3), minus = 0.5 * (1.0 / 3) * (1.0 / 3);
        const auto [pp, pm] = m.posterior(tokenize("up"));
        CHECK(std::abs(pp - plus / (plus + minus)) <= 1e-12);
        CHECK(std::abs(pp - 0.8) <= 1e-12);
        CHECK(std::abs(m.score("up") - 0.6) <= 1e-12);
        CHECK(std::abs(m.score("Up!") - 0.6) <= 1e-12);
        CHECK(std::abs(m.score("down") + 0.6) <= 1e-12);
        // Neither word: symmetric corpus and equal priors.
        CHECK(std::abs(m.score("flat session")) <= 1e-12);
        CHECK(std::abs(m.score("up down")) <= 1e-12);
    }
}

TEST_CASE("large smoothing drives conditionals to one half") {
    const std::vector<LabeledDoc> c{make_doc("up", true), make_doc("up", true), make_doc("down", false)};
    const SentimentModel m = fit_nbc(c, opts(1, 1e9));
    for (const auto& w : m.vocabulary()) {
        CHECK(std::abs(w.p_bullish - 0.5) < 1e-8);
        CHECK(std::abs(w.p_bearish - 0.5) < 1e-8);
    }
    // Only the 2:1 prior remains.
    CHECK(m.score("up") == doctest::Approx(2.0 / 3 - 1.0 / 3).epsilon(1e-6));
}

TEST_CASE("empty class is an error") {
    const std::vector<LabeledDoc> pos{make_doc("up", true)};
    CHECK_THROWS_AS(fit_nbc(pos, opts()), DegenerateError);
    CHECK_THROWS_AS(fit_nbc(std::vector<LabeledDoc>{}, opts()), DegenerateError);
    NbcOptions bad = opts();
    bad.alpha = 0;
    CHECK_THROWS_AS(fit_nbc(up_down(), bad), ValidationError);
}

TEST_CASE("vocabulary respects min_df and stop words") {
    const SentimentModel m = fit_nbc(kToy, opts(2));
    for (const auto& w : m.vocabulary()) {
        CHECK(w.df_bullish + w.df_bearish >= 2);
        CHECK(w.p_bullish > 0.0);
        CHECK(w.p_bullish < 1.0);
    }
    CHECK(m.find("shares") != nullptr);
    CHECK(m.find("probe") == nullptr);
    NbcOptions o = opts(2);
    o.stop_words = {"shares"};
    CHECK(fit_nbc(kToy, o).find("shares") == nullptr);
}

TEST_CASE("swapping class labels negates the score") {
    std::vector<LabeledDoc> swapped = kToy;
    for (auto& d : swapped) {
        d.bullish = !d.bullish;
    }
    const SentimentModel a = fit_nbc(kToy, opts());
    const SentimentModel b = fit_nbc(swapped, opts());
    for (const char* h : {"shares surge", "profit warning", "nothing here", "record outlook cut"}) {
        CHECK(std::abs(a.score(h) + b.score(h)) <= 1e-12);
    }
}

TEST_CASE("posteriors sum to one and log scoring matches the direct product") {
    const SentimentModel m = fit_nbc(kToy, opts());
    for (const char* h : {"shares surge", "profit warning", "nothing here", "record outlook cut sales"}) {
        const auto tokens = tokenize(h);
        const auto [pp, pm] = m.posterior(tokens);
        CHECK(std::abs(pp + pm - 1.0) <= 1e-12);
        double plus = m.prior_bullish(), minus = m.prior_bearish();
        for (const auto& w : m.vocabulary()) {
            const bool has = std::find(tokens.begin(), tokens.end(), w.word) != tokens.end();
            plus *= has ? w.p_bullish : 1.0 - w.p_bullish;
            minus *= has ? w.p_bearish : 1.0 - w.p_bearish;
        }
        CHECK(std::abs(pp - plus / (plus + minus)) <= 1e-9);
        CHECK(std::abs(m.score(h) - (plus - minus) / (plus + minus)) <= 1e-9);
    }
}

TEST_CASE("a duplicated document shifts conditionals by the exact increment") {
    const SentimentModel base = fit_nbc(kToy, opts());
    std::vector<LabeledDoc> more = kToy;
    more.push_back(kToy[0]);
    const SentimentModel m = fit_nbc(more, opts());
    const double n_pos = 3, n_neg = 3;
    for (const auto& w : base.vocabulary()) {
        const bool has = std::binary_search(kToy[0].tokens.begin(), kToy[0].tokens.end(), w.word);
        const auto* after = m.find(w.word);
        REQUIRE(after != nullptr);
        CHECK(after->p_bullish == doctest::Approx((w.df_bullish + (has ? 1.0 : 0.0) + 1.0) / (n_pos + 1 + 2.0)).epsilon(1e-12));
        CHECK(after->p_bearish == doctest::Approx((w.df_bearish + 1.0) / (n_neg + 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("scores are independent of token order") {
    const SentimentModel m = fit_nbc(kToy, opts());
    Tokens t{"shares", "record", "cut", "unknown"};
    const double s = m.score_tokens(t);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        std::shuffle(t.begin(), t.end(), rng);
        CHECK(m.score_tokens(t) == s);
    }
}

TEST_CASE("model save and load round trip") {
    testing::TempDir dir("model");
    const SentimentModel m = fit_nbc(kToy, opts());
    m.save(dir / "model.txt");
    const SentimentModel back = SentimentModel::load(dir / "model.txt");
    CHECK(back.vocabulary().size() == m.vocabulary().size());
    CHECK(back.prior_bullish() == m.prior_bullish());
    for (const char* h : {"shares surge", "profit warning", "nothing"}) {
        CHECK(back.score(h) == m.score(h));
    }
    testing::write_file(dir / "bad.txt", "something else\n");
    CHECK_THROWS_AS(SentimentModel::load(dir / "bad.txt"), ParseError);
    CHECK_THROWS_AS(SentimentModel::load(dir / "absent.txt"), DataError);
}

}
