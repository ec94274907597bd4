#include "liqmode/synth.hpp"

#include "liqmode/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace liqmode {

namespace {

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

enum Stream : std::uint64_t { kStocks = 1, kDays = 2, kEpochs = 3, kRegimePanel = 4 };

const std::vector<std::string> kBullish{
    "surge",    "soar",       "beat",      "upgrade",   "record",    "rally",      "jump",     "gain",
    "profit",   "growth",     "boost",     "strong",    "upbeat",    "outperform", "raise",    "expand",
    "win",      "award",      "approval",  "breakthrough", "exceed", "robust",     "rebound",  "climb",
    "buyback",  "dividend",   "bullish",   "optimistic", "accelerate", "momentum", "milestone", "partnership",
    "acquire",  "innovative", "recover",   "tops",      "highs",     "positive",   "upside",   "advance"};

const std::vector<std::string> kBearish{
    "plunge",  "slump",      "miss",       "downgrade", "loss",        "fall",       "drop",    "cut",
    "warn",    "weak",       "lawsuit",    "probe",     "recall",      "fraud",      "decline", "tumble",
    "sink",    "slash",      "layoffs",    "bankruptcy", "default",    "investigation", "delay", "halt",
    "resign",  "scandal",    "penalty",    "fine",      "underperform", "bearish",   "pessimistic", "shortfall",
    "deficit", "writedown",  "impairment", "crash",     "slowdown",    "risk",       "negative", "downside"};

const std::vector<std::string> kNeutral{
    "company",   "announces",  "reports",    "update",     "meeting",   "conference", "quarterly", "statement",
    "board",     "annual",     "filing",     "schedule",   "market",    "trading",    "session",   "shares",
    "stock",     "investors",  "analysts",   "industry",   "sector",    "product",    "service",   "customers",
    "plan",      "program",    "review",     "data",       "release",   "report",     "results",   "outlook",
    "management", "chief",     "executive",  "officer",    "director",  "press",      "holds",     "presents",
    "webinar",   "event",      "call",       "earnings",   "date",      "notice",     "index",     "fund",
    "portfolio", "exchange",   "listing",    "regulatory", "unit",      "division",   "segment",   "region",
    "europe",    "asia",       "america",    "global",     "local",     "team",       "office",    "plant",
    "factory",   "supply",     "chain",      "contract",   "deal",      "talks",      "agreement", "proposal",
    "vote",      "shareholders", "holders",  "bond",       "debt",      "notes",      "offering",  "capital",
    "spending",  "budget",     "forecast",   "guidance",   "estimate",  "consensus",  "week",      "month",
    "year",      "today",      "monday",     "friday",     "morning",   "afternoon",  "new",       "first",
    "second",    "third",      "fourth",     "says",       "said",      "comments",   "interview", "media",
    "brand",     "retail",     "online",     "digital",    "software",  "hardware",   "energy",    "health"};

double round_to(double value, double scale) { return std::round(value * scale) / scale; }

struct StockParams {
    double base_price = 50.0;
    double phi = 1.0;
    double turnover = 1.0;
    double sigma = 1.0;
    double book = 1.0;
};

struct Article {
    Millis timestamp = 0;
    int sentiment = 0;
    bool in_session = false;
    bool planted = false;
    double drift = 0.0;
};

void pick_distinct(Rng& rng, const std::vector<std::string>& words, int count, std::vector<std::string>& out) {
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    int added = 0;
    while (added < count) {
        const std::string& w = words[pick(rng)];
        if (std::find(out.begin(), out.end(), w) == out.end()) {
            out.push_back(w);
            ++added;
        }
    }
}

}  // namespace

void SynthSpec::complete_lexicons() {
    if (bullish_words.empty()) bullish_words = kBullish;
    if (bearish_words.empty()) bearish_words = kBearish;
    if (neutral_words.empty()) neutral_words = kNeutral;
}

std::string synth_ticker(int stock_index, int n_stocks) {
    std::string digits = std::to_string(stock_index + 1);
    const std::size_t width = std::max<std::size_t>(3, std::to_string(n_stocks).size());
    if (digits.size() < width) {
        digits.insert(0, width - digits.size(), '0');
    }
    return "S" + digits;
}

std::string SynthSpec::ticker(int stock_index) const { return synth_ticker(stock_index, n_stocks); }

void SynthSpec::validate() const {
    grid.validate();
    if (n_stocks < 1) throw ValidationError("synth.n_stocks must be >= 1");
    if (n_days < 1) throw ValidationError("synth.n_days must be >= 1");
    if (!(tick > 0.0)) throw ValidationError("synth.tick must be positive");
    if (grid.trim_minutes % grid.bin_width_minutes != 0) {
        throw ValidationError("synth needs trim_minutes to be a multiple of bin_width_minutes");
    }
    for (const auto& m : modes) {
        if (!(m.phi > 0 && m.turnover > 0 && m.sigma > 0 && m.book > 0 && m.trades_per_bin > 0)) {
            throw ValidationError("synth mode parameters must be positive");
        }
    }
    if (!(modes[1].sigma > modes[0].sigma)) {
        throw ValidationError("synth: Mode 2 volatility must exceed Mode 1 volatility");
    }
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string("synth.") + name + " must lie in [0, 1]");
    };
    prob(stay_calm, "stay_calm");
    prob(stay_active, "stay_active");
    prob(sentiment_fraction, "sentiment_fraction");
    prob(outside_session_fraction, "outside_session_fraction");
    prob(duplicate_prob, "duplicate_prob");
    prob(vendor_accuracy, "vendor_accuracy");
    if (!(quotes_per_bin >= 0.0)) throw ValidationError("synth.quotes_per_bin must be >= 0");
    if (!(dispersion >= 0.0)) throw ValidationError("synth.dispersion must be >= 0");
    if (!(market_vol >= 0.0)) throw ValidationError("synth.market_vol must be >= 0");
    if (!(news_rate >= 0.0)) throw ValidationError("synth.news_rate must be >= 0");
    if (!(drift >= 0.0)) throw ValidationError("synth.drift must be >= 0");
    if (!(neutral_drift_sd >= 0.0)) throw ValidationError("synth.neutral_drift_sd must be >= 0");
    if (drift_minutes < 1) throw ValidationError("synth.drift_minutes must be >= 1");
    if (drift_epoch_days < 1) throw ValidationError("synth.drift_epoch_days must be >= 1");
    const int T = grid.bin_count();
    if (active_bins < 1 || active_bins >= T) {
        throw ValidationError("synth.active_bins must lie in [1, T - 1]");
    }
    if (sentiment_fraction > 0.0 && news_rate == 0.0) {
        throw InfeasibleSpecError("infeasible synth spec: impactful news are planted but news_rate is 0");
    }
    if (sentiment_fraction > 0.0 && T - active_bins + 1 < 2) {
        throw InfeasibleSpecError("infeasible synth spec: no bin can host a planted switch");
    }
    for (const auto& p : planted_switches) {
        if (p.day_index < 0 || p.day_index >= n_days || p.stock_index < 0 || p.stock_index >= n_stocks ||
            p.bin < 2 || p.bin > T) {
            throw ValidationError("synth planted switch out of range");
        }
    }
}

void generate(const SynthSpec& input, const std::function<void(SynthDay&&)>& sink) {
    input.validate();
    SynthSpec spec = input;
    spec.complete_lexicons();
    if (spec.bullish_words.size() < 2 || spec.bearish_words.size() < 2 || spec.neutral_words.size() < 3) {
        throw ValidationError("synth lexicons are too small");
    }

    const BinGrid& grid = spec.grid;
    const int T = grid.bin_count();
    const int width_s = grid.bin_width_minutes * 60;
    const int full_bins = (grid.session_close_minutes - grid.session_open_minutes) / grid.bin_width_minutes;
    const int head = grid.trim_minutes / grid.bin_width_minutes;
    const int n_sec = full_bins * width_s;
    const double tick_scale = std::round(1.0 / spec.tick);
    const Millis width_ms = grid.bin_width_ms();

    std::vector<StockParams> stocks(static_cast<std::size_t>(spec.n_stocks));
    {
        Rng rng = make_rng(spec.seed, kStocks, 0);
        std::uniform_real_distribution<double> log_price(std::log(20.0), std::log(200.0));
        std::normal_distribution<double> z;
        for (auto& s : stocks) {
            s.base_price = std::exp(log_price(rng));
            s.phi = std::exp(0.15 * z(rng));
            s.turnover = std::exp(0.5 * z(rng));
            s.sigma = std::exp(0.2 * z(rng));
            s.book = std::exp(0.4 * z(rng));
        }
    }
    std::vector<std::string> tickers;
    for (int i = 0; i < spec.n_stocks; ++i) {
        tickers.push_back(spec.ticker(i));
    }

    int epoch_loaded = -1;
    std::vector<double> neutral_drift(stocks.size());

    DayNumber day = spec.start_day;
    for (int di = 0; di < spec.n_days; ++di, ++day) {
        while (weekday(day) == 0 || weekday(day) == 6) {
            ++day;
        }
        const int epoch = di / spec.drift_epoch_days;
        if (epoch != epoch_loaded) {
            Rng erng = make_rng(spec.seed, kEpochs, static_cast<std::uint64_t>(epoch));
            std::normal_distribution<double> nd(0.0, 1.0);
            for (auto& d : neutral_drift) {
                d = spec.neutral_drift_sd * nd(erng);
            }
            epoch_loaded = epoch;
        }

        Rng rng = make_rng(spec.seed, kDays, static_cast<std::uint64_t>(di));
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        // Common market component on the one-second grid.
        std::vector<double> market(static_cast<std::size_t>(n_sec) + 1, 0.0);
        const double market_step = spec.market_vol / std::sqrt(static_cast<double>(width_s));
        for (int s = 0; s < n_sec; ++s) {
            market[static_cast<std::size_t>(s) + 1] = market[static_cast<std::size_t>(s)] + market_step * z(rng);
        }

        SynthDay out;
        out.day = day;
        out.tickers = tickers;
        const Millis open_ms = grid.session_open(day);
        const Millis close_ms = grid.session_close(day);

        for (int si = 0; si < spec.n_stocks; ++si) {
            const StockParams& sp = stocks[static_cast<std::size_t>(si)];
            const std::string& ticker = tickers[static_cast<std::size_t>(si)];

            // Regime over the full session.
            std::vector<int> modes(static_cast<std::size_t>(full_bins));
            const double p_active = (1.0 - spec.stay_calm) / (2.0 - spec.stay_calm - spec.stay_active + 1e-300);
            modes[0] = u01(rng) < p_active ? kActiveMode : kCalmMode;
            for (int f = 1; f < full_bins; ++f) {
                const int prev = modes[static_cast<std::size_t>(f - 1)];
                const double stay = prev == kCalmMode ? spec.stay_calm : spec.stay_active;
                modes[static_cast<std::size_t>(f)] = u01(rng) < stay ? prev : 1 - prev;
            }
            auto force = [&](int t) {
                const int f = head + t - 1;
                if (f >= 1) {
                    modes[static_cast<std::size_t>(f - 1)] = kCalmMode;
                }
                for (int j = f; j < std::min(full_bins, f + spec.active_bins); ++j) {
                    modes[static_cast<std::size_t>(j)] = kActiveMode;
                }
            };

            // News arrivals.
            std::poisson_distribution<int> n_news(spec.news_rate);
            const int count = spec.news_rate > 0.0 ? n_news(rng) : 0;
            std::vector<Article> articles;
            std::vector<int> planted_bins;
            for (int a = 0; a < count; ++a) {
                Article art;
                if (u01(rng) < spec.sentiment_fraction) {
                    art.sentiment = u01(rng) < 0.5 ? 1 : -1;
                    std::uniform_int_distribution<int> pick_bin(2, T - spec.active_bins + 1);
                    const int t = pick_bin(rng);
                    art.timestamp = grid.bin_start(day, t) + static_cast<Millis>(u01(rng) * static_cast<double>(width_ms));
                    art.in_session = true;
                    art.planted = true;
                    art.drift = art.sentiment * spec.drift;
                } else if (u01(rng) < spec.outside_session_fraction) {
                    const bool before = u01(rng) < 0.5;
                    const Millis span = 60 * kMillisPerMinute;
                    const auto offset = static_cast<Millis>(u01(rng) * static_cast<double>(span));
                    art.timestamp = before ? open_ms - span + offset : close_ms + offset;
                } else {
                    art.timestamp = open_ms + static_cast<Millis>(u01(rng) * static_cast<double>(close_ms - open_ms));
                    art.in_session = true;
                    art.drift = neutral_drift[static_cast<std::size_t>(si)];
                }
                articles.push_back(art);
            }
            std::stable_sort(articles.begin(), articles.end(),
                             [](const Article& a, const Article& b) { return a.timestamp < b.timestamp; });
            for (const auto& p : spec.planted_switches) {
                if (p.day_index == di && p.stock_index == si) {
                    force(p.bin);
                }
            }
            for (const auto& art : articles) {
                if (art.planted) {
                    force(*assign_bin(art.timestamp, grid));
                }
            }

            // Per-bin targets.
            std::vector<double> sigma(static_cast<std::size_t>(full_bins)), turnover(sigma.size()),
                phi(sigma.size()), book(sigma.size());
            std::vector<int> n_trades(sigma.size());
            for (int f = 0; f < full_bins; ++f) {
                const auto fi = static_cast<std::size_t>(f);
                const ModeParams& mp = spec.modes[static_cast<std::size_t>(modes[fi])];
                const double u = 2.0 * (f + 0.5) / full_bins - 1.0;
                const double season = 1.0 + 0.8 * u * u;
                sigma[fi] = mp.sigma * sp.sigma * season * std::exp(spec.dispersion * z(rng));
                turnover[fi] = mp.turnover * sp.turnover * season * std::exp(spec.dispersion * z(rng));
                phi[fi] = mp.phi * sp.phi * (1.0 + 0.3 * u * u) * std::exp(spec.dispersion * z(rng));
                book[fi] = mp.book * sp.book * (1.0 - 0.3 * u * u) * std::exp(spec.dispersion * z(rng));
                std::poisson_distribution<int> nt(mp.trades_per_bin);
                n_trades[fi] = std::max(1, nt(rng));
            }

            // Efficient log price on the one-second grid.
            std::vector<double> x(static_cast<std::size_t>(n_sec) + 1);
            x[0] = std::log(sp.base_price);
            for (int s = 0; s < n_sec; ++s) {
                const auto fi = static_cast<std::size_t>(s / width_s);
                const auto i = static_cast<std::size_t>(s);
                x[i + 1] = x[i] + sigma[fi] / std::sqrt(static_cast<double>(width_s)) * z(rng) +
                           (market[i + 1] - market[i]);
            }
            const double ramp_s = spec.drift_minutes * 60.0;
            for (const auto& art : articles) {
                if (!art.in_session || art.drift == 0.0) {
                    continue;
                }
                const double t0 = static_cast<double>(art.timestamp - open_ms) / 1000.0;
                for (int s = static_cast<int>(std::ceil(t0)); s <= n_sec; ++s) {
                    x[static_cast<std::size_t>(s)] += art.drift * std::min(1.0, (s - t0) / ramp_s);
                }
            }
            auto price_at = [&](Millis ts) {
                const auto s = static_cast<std::size_t>(std::clamp<Millis>((ts - open_ms) / 1000, 0, n_sec));
                return std::exp(x[s]);
            };

            // Trades and quotes.
            std::vector<Millis> times;
            for (int f = 0; f < full_bins; ++f) {
                const auto fi = static_cast<std::size_t>(f);
                const Millis start = open_ms + f * width_ms;
                times.clear();
                for (int k = 0; k < n_trades[fi]; ++k) {
                    times.push_back(start + static_cast<Millis>(u01(rng) * static_cast<double>(width_ms)));
                }
                std::sort(times.begin(), times.end());
                for (Millis ts : times) {
                    const double price = std::max(1e-4, round_to(price_at(ts), 1e4));
                    const double size =
                        std::max(1.0, std::round(turnover[fi] / (n_trades[fi] * price) * (0.5 + u01(rng))));
                    out.trades.push_back({ts, ticker, price, size});
                }
                times.clear();
                times.push_back(start);
                std::poisson_distribution<int> extra(spec.quotes_per_bin);
                for (int k = extra(rng); k > 0; --k) {
                    times.push_back(start + static_cast<Millis>(u01(rng) * static_cast<double>(width_ms)));
                }
                std::sort(times.begin(), times.end());
                for (Millis ts : times) {
                    const double spread_ticks = std::max(1.0, std::round(phi[fi] * std::exp(0.25 * z(rng))));
                    const double mid_ticks = price_at(ts) * tick_scale;
                    const double bid_ticks = std::max(1.0, std::round(mid_ticks - spread_ticks / 2.0));
                    QuoteRecord q;
                    q.timestamp = ts;
                    q.ticker = ticker;
                    q.bid_price = bid_ticks / tick_scale;
                    q.ask_price = (bid_ticks + spread_ticks) / tick_scale;
                    q.bid_size = std::max(1.0, std::round(book[fi] * (0.6 + 0.8 * u01(rng))));
                    q.ask_size = std::max(1.0, std::round(book[fi] * (0.6 + 0.8 * u01(rng))));
                    out.quotes.push_back(std::move(q));
                }
            }

            ModeSequence truth(modes.begin() + head, modes.begin() + head + T);

            // Headlines, vendor fields, re-publications.
            std::uniform_int_distribution<int> confidence(40, 99);
            std::uniform_int_distribution<int> any_score(-1, 1);
            std::string company = ticker;
            std::transform(company.begin(), company.end(), company.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            for (const auto& art : articles) {
                std::vector<std::string> words;
                if (art.sentiment > 0) {
                    pick_distinct(rng, spec.bullish_words, 2, words);
                } else if (art.sentiment < 0) {
                    pick_distinct(rng, spec.bearish_words, 2, words);
                }
                pick_distinct(rng, spec.neutral_words, art.sentiment == 0 ? 3 : 2, words);
                std::shuffle(words.begin(), words.end(), rng);
                std::string headline = ticker;
                for (const auto& w : words) {
                    headline += ' ';
                    headline += w;
                }
                NewsArticle n;
                n.timestamp = art.timestamp;
                n.ticker = ticker;
                n.headline = std::move(headline);
                if (u01(rng) < spec.vendor_accuracy) {
                    n.vendor_score = art.sentiment;
                } else {
                    n.vendor_score = art.sentiment == 0 ? (u01(rng) < 0.5 ? 1 : -1) : any_score(rng);
                }
                n.vendor_confidence = confidence(rng);

                bool impactful = false;
                if (art.planted) {
                    const auto t = assign_bin(art.timestamp, grid);
                    impactful = t && impactful_reason(truth, *t).has_value();
                }
                const bool duplicate = u01(rng) < spec.duplicate_prob;
                const Millis delay = 1000 + static_cast<Millis>(u01(rng) * 29000.0);
                out.truth_news.push_back({n.timestamp, ticker, art.sentiment, impactful});
                if (duplicate) {
                    NewsArticle copy = n;
                    copy.timestamp += delay;
                    out.truth_news.push_back({copy.timestamp, ticker, art.sentiment, false});
                    out.news.push_back(std::move(n));
                    out.news.push_back(std::move(copy));
                } else {
                    out.news.push_back(std::move(n));
                }
            }
            out.truth_modes.push_back(std::move(truth));
        }

        // News in time order, truth kept parallel.
        std::vector<std::size_t> order(out.news.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& x = out.news[a];
            const auto& y = out.news[b];
            return x.timestamp != y.timestamp ? x.timestamp < y.timestamp : x.ticker < y.ticker;
        });
        std::vector<NewsArticle> news;
        std::vector<TruthArticle> truth;
        for (auto i : order) {
            news.push_back(std::move(out.news[i]));
            truth.push_back(std::move(out.truth_news[i]));
        }
        out.news = std::move(news);
        out.truth_news = std::move(truth);
        sink(std::move(out));
    }
}

SynthSummary generate_to_directory(const SynthSpec& spec, const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    SynthSummary summary;
    std::vector<NewsArticle> news;
    CsvWriter truth_modes(root / "truth_modes.csv");
    constexpr std::array<std::string_view, 4> mode_header{"date", "ticker", "bin", "true_mode"};
    truth_modes.header(mode_header);
    CsvWriter truth_news(root / "truth_news.csv");
    constexpr std::array<std::string_view, 4> news_header{"timestamp", "ticker", "true_sentiment",
                                                          "planted_impactful"};
    truth_news.header(news_header);

    generate(spec, [&](SynthDay&& day) {
        const auto dir = root / format_date(day.day);
        std::filesystem::create_directories(dir);
        write_trades_csv(dir / "trades.csv", day.trades);
        write_quotes_csv(dir / "quotes.csv", day.quotes);
        const std::string date = format_date(day.day);
        for (std::size_t s = 0; s < day.tickers.size(); ++s) {
            const auto& m = day.truth_modes[s];
            for (std::size_t t = 0; t < m.size(); ++t) {
                truth_modes.field(date).field(day.tickers[s]).field(t + 1).field(m[t] + 1).end_row();
            }
        }
        for (const auto& tn : day.truth_news) {
            truth_news.field(tn.timestamp).field(tn.ticker).field(tn.sentiment).field(tn.planted_impactful ? 1 : 0);
            truth_news.end_row();
            summary.planted_impactful += tn.planted_impactful ? 1 : 0;
        }
        ++summary.days;
        summary.trades += day.trades.size();
        summary.quotes += day.quotes.size();
        summary.news += day.news.size();
        std::move(day.news.begin(), day.news.end(), std::back_inserter(news));
    });
    write_news_csv(root / "news.csv", news);
    truth_modes.close();
    truth_news.close();
    return summary;
}

SynthDataset generate_dataset(const SynthSpec& spec, const MarketDataConfig& market) {
    market.validate();
    SynthDataset out;
    generate(spec, [&](SynthDay&& day) {
        out.universe.stats.trades += day.trades.size();
        out.universe.stats.quotes += day.quotes.size();
        for (std::size_t s = 0; s < day.tickers.size(); ++s) {
            out.truth_modes[{day.day, day.tickers[s]}] = std::move(day.truth_modes[s]);
        }
        std::move(day.news.begin(), day.news.end(), std::back_inserter(out.news));
        std::move(day.truth_news.begin(), day.truth_news.end(), std::back_inserter(out.truth_news));
        add_universe_day(out.universe, day.day, std::move(day.trades), std::move(day.quotes), market, true);
    });
    finish_universe(out.universe, true);
    return out;
}

void RegimePanelSpec::validate() const {
    if (n_stocks < 1 || n_days < 2 || bins < 1) {
        throw ValidationError("regime panel needs n_stocks >= 1, n_days >= 2, bins >= 1");
    }
    if (!(separation >= 0.0) || !(log_sd > 0.0)) {
        throw ValidationError("regime panel needs separation >= 0 and log_sd > 0");
    }
    if (!(persistence >= 0.0 && persistence <= 1.0)) {
        throw ValidationError("regime panel persistence must lie in [0, 1]");
    }
}

RegimePanel generate_regime_panel(const RegimePanelSpec& spec) {
    spec.validate();
    Rng rng = make_rng(spec.seed, kRegimePanel, 0);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<std::array<double, kFeatureDim>> scale(static_cast<std::size_t>(spec.n_stocks));
    for (auto& s : scale) {
        s = {std::exp(0.15 * z(rng)), std::exp(0.5 * z(rng)), std::exp(0.2 * z(rng)), std::exp(0.4 * z(rng))};
    }
    const double mu_calm = std::log(1e-3);
    const double mu_active = mu_calm + spec.separation * spec.log_sd;

    RegimePanel out;
    out.raw.bins_per_day = spec.bins;
    for (int d = 0; d < spec.n_days; ++d) {
        for (int s = 0; s < spec.n_stocks; ++s) {
            StockDay row;
            row.day = 19724 + d;
            row.ticker = synth_ticker(s, spec.n_stocks);
            ModeSequence truth(static_cast<std::size_t>(spec.bins));
            int m = u01(rng) < 0.5 ? kCalmMode : kActiveMode;
            const auto& sc = scale[static_cast<std::size_t>(s)];
            for (int t = 0; t < spec.bins; ++t) {
                if (t > 0 && u01(rng) >= spec.persistence) {
                    m = 1 - m;
                }
                truth[static_cast<std::size_t>(t)] = m;
                const double u = 2.0 * (t + 0.5) / spec.bins - 1.0;
                const double season = 1.0 + 0.8 * u * u;
                LiquidityVector lv;
                lv.phi = 1.5 * sc[kPhi] * (1.0 + 0.3 * u * u) * std::exp(spec.log_sd * z(rng));
                lv.V = 2e5 * sc[kTurnover] * season * std::exp(spec.log_sd * z(rng));
                lv.sigma = sc[kSigma] * season * std::exp((m == kCalmMode ? mu_calm : mu_active) +
                                                          spec.log_sd * z(rng));
                lv.B = 800.0 * sc[kBookSize] * (1.0 - 0.3 * u * u) * std::exp(spec.log_sd * z(rng));
                lv.missing = false;
                row.bins.push_back(lv);
            }
            out.raw.rows.push_back(std::move(row));
            out.truth.push_back(std::move(truth));
        }
    }
    return out;
}

}  // namespace liqmode
