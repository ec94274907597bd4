#include "liqmode/screening.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

namespace liqmode {

std::optional<double> NewsArticle::composed_score() const {
    if (!vendor_score || !vendor_confidence) {
        return std::nullopt;
    }
    return static_cast<double>(*vendor_score) * *vendor_confidence;
}

std::string NewsArticle::key() const {
    return std::to_string(timestamp) + '\x1f' + ticker + '\x1f' + headline;
}

namespace {

constexpr std::array<std::string_view, 5> kNewsHeader{"timestamp", "ticker", "score", "confidence",
                                                      "headline"};

NewsArticle parse_news_row(const CsvReader& in, std::size_t c_ts, std::size_t c_ticker,
                           std::size_t c_score, std::size_t c_conf, std::size_t c_headline) {
    NewsArticle a;
    a.timestamp = in.get_int(c_ts);
    a.ticker = std::string(in.get(c_ticker));
    a.headline = std::string(in.get(c_headline));
    if (a.ticker.empty()) {
        in.fail("empty ticker");
    }
    if (a.headline.empty()) {
        in.fail("empty headline");
    }
    if (!in.get(c_score).empty()) {
        const auto s = in.get_int(c_score);
        if (s < -1 || s > 1) {
            in.fail("score must be -1, 0 or 1");
        }
        a.vendor_score = static_cast<int>(s);
    }
    if (!in.get(c_conf).empty()) {
        const double c = in.get_double(c_conf);
        if (!(c >= 0.0 && c <= 100.0)) {
            in.fail("confidence must lie in [0, 100]");
        }
        a.vendor_confidence = c;
    }
    return a;
}

void write_news_fields(CsvWriter& out, const NewsArticle& a) {
    out.field(a.timestamp).field(a.ticker);
    if (a.vendor_score) {
        out.field(*a.vendor_score);
    } else {
        out.empty();
    }
    if (a.vendor_confidence) {
        out.field(*a.vendor_confidence);
    } else {
        out.empty();
    }
    out.quoted(a.headline);
}

bool article_less(const NewsArticle& a, const NewsArticle& b) {
    return std::tie(a.timestamp, a.ticker, a.headline) < std::tie(b.timestamp, b.ticker, b.headline);
}

}  // namespace

std::vector<NewsArticle> read_news_csv(const std::filesystem::path& path) {
    CsvReader in(path);
    in.expect_header(kNewsHeader);
    std::vector<NewsArticle> out;
    while (in.next()) {
        out.push_back(parse_news_row(in, 0, 1, 2, 3, 4));
    }
    return out;
}

void write_news_csv(const std::filesystem::path& path, std::span<const NewsArticle> news) {
    CsvWriter out(path);
    out.header(kNewsHeader);
    for (const auto& a : news) {
        write_news_fields(out, a);
        out.end_row();
    }
    out.close();
}

std::vector<NewsArticle> deduplicate_news(std::span<const NewsArticle> news, Millis window_ms) {
    std::vector<NewsArticle> sorted(news.begin(), news.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const NewsArticle& a, const NewsArticle& b) {
        if (article_less(a, b) || article_less(b, a)) {
            return article_less(a, b);
        }
        // Exact duplicates differing only in vendor fields: order by those.
        return std::tie(a.vendor_score, a.vendor_confidence) < std::tie(b.vendor_score, b.vendor_confidence);
    });
    std::unordered_map<std::string, Millis> last_kept;
    std::vector<NewsArticle> out;
    for (auto& a : sorted) {
        const std::string k = a.ticker + '\x1f' + a.headline;
        auto it = last_kept.find(k);
        if (it != last_kept.end() && a.timestamp - it->second <= window_ms) {
            continue;
        }
        last_kept[k] = a.timestamp;
        out.push_back(std::move(a));
    }
    return out;
}

ModeStats mode_stats(std::span<const DayFit> fits) {
    if (fits.empty()) {
        throw ValidationError("mode_stats needs at least one fit");
    }
    std::size_t K = 0;
    for (const auto& df : fits) {
        K = std::max(K, df.fit.centroids.size());
        for (const auto& seq : df.fit.modes) {
            for (int m : seq) {
                K = std::max(K, static_cast<std::size_t>(m) + 1);
            }
        }
    }
    K = std::max<std::size_t>(K, 2);

    ModeStats st;
    st.bins.assign(K, 0);
    st.transitions.counts.assign(K, std::vector<std::uint64_t>(K, 0));
    std::map<std::string, std::pair<std::uint64_t, std::size_t>> per_stock;  // jumps, stock-days
    for (const auto& df : fits) {
        for (std::size_t s = 0; s < df.fit.modes.size(); ++s) {
            const auto& m = df.fit.modes[s];
            std::uint64_t jumps = 0;
            for (std::size_t t = 0; t < m.size(); ++t) {
                ++st.bins[static_cast<std::size_t>(m[t])];
                if (t + 1 < m.size()) {
                    ++st.transitions.counts[static_cast<std::size_t>(m[t])][static_cast<std::size_t>(m[t + 1])];
                    if (m[t] == kCalmMode && m[t + 1] == kActiveMode) {
                        ++jumps;
                    }
                }
            }
            st.calm_to_active_jumps += jumps;
            ++st.stock_days;
            const std::string ticker = s < df.tickers.size() ? df.tickers[s] : std::to_string(s);
            auto& acc = per_stock[ticker];
            acc.first += jumps;
            ++acc.second;
        }
    }
    std::uint64_t total = 0;
    for (auto b : st.bins) {
        total += b;
    }
    st.occupancy.resize(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        st.occupancy[k] = total ? static_cast<double>(st.bins[k]) / static_cast<double>(total) : 0.0;
    }
    st.transitions.probabilities.resize(K);
    for (std::size_t i = 0; i < K; ++i) {
        std::uint64_t row = 0;
        for (auto c : st.transitions.counts[i]) {
            row += c;
        }
        if (row == 0) {
            continue;
        }
        std::vector<double> p(K);
        for (std::size_t j = 0; j < K; ++j) {
            p[j] = static_cast<double>(st.transitions.counts[i][j]) / static_cast<double>(row);
        }
        st.transitions.probabilities[i] = std::move(p);
    }
    st.mean_daily_jumps_per_stock =
        st.stock_days ? static_cast<double>(st.calm_to_active_jumps) / static_cast<double>(st.stock_days) : 0.0;
    for (const auto& [ticker, acc] : per_stock) {
        st.daily_jumps_by_stock[ticker] = static_cast<double>(acc.first) / static_cast<double>(acc.second);
    }
    return st;
}

std::string_view to_string(SelectionReason reason) {
    switch (reason) {
        case SelectionReason::JumpAtStart: return "jump_at_start";
        case SelectionReason::JumpAtEnd: return "jump_at_end";
        case SelectionReason::Both: return "both";
    }
    return "";
}

std::optional<SelectionReason> parse_selection_reason(std::string_view text) {
    if (text == "jump_at_start") return SelectionReason::JumpAtStart;
    if (text == "jump_at_end") return SelectionReason::JumpAtEnd;
    if (text == "both") return SelectionReason::Both;
    return std::nullopt;
}

std::optional<SelectionReason> impactful_reason(const ModeSequence& modes, int t) {
    const int T = static_cast<int>(modes.size());
    if (t < 1 || t > T) {
        return std::nullopt;
    }
    auto m = [&](int i) { return modes[static_cast<std::size_t>(i - 1)]; };
    const bool at_start = t >= 2 && m(t - 1) == kCalmMode && m(t) == kActiveMode;
    const bool at_end = t <= T - 1 && m(t) == kCalmMode && m(t + 1) == kActiveMode;
    // m_t cannot be both modes, so a single sequence never yields Both.
    if (at_start) {
        return SelectionReason::JumpAtStart;
    }
    if (at_end) {
        return SelectionReason::JumpAtEnd;
    }
    return std::nullopt;
}

ScreeningResult select_impactful(std::span<const NewsArticle> news, std::span<const DayFit> fits,
                                 const BinGrid& grid) {
    std::map<DayNumber, const DayFit*> by_day;
    for (const auto& df : fits) {
        by_day[df.day] = &df;
    }
    ScreeningResult out;
    for (std::size_t i = 0; i < news.size(); ++i) {
        const auto& a = news[i];
        const auto t = assign_bin(a.timestamp, grid);
        if (!t) {
            out.excluded.push_back({i, "outside_session"});
            continue;
        }
        auto d = by_day.find(grid.local_day(a.timestamp));
        const ModeSequence* modes = d == by_day.end() ? nullptr : d->second->modes_for(a.ticker);
        if (!modes) {
            out.excluded.push_back({i, "unfitted"});
            continue;
        }
        if (auto reason = impactful_reason(*modes, *t)) {
            out.selected.push_back({i, *reason});
        } else {
            out.excluded.push_back({i, "no_jump"});
        }
    }
    return out;
}

double selection_ratio(std::span<const NewsArticle> news, std::size_t selected_count, const BinGrid& grid) {
    const auto intraday = static_cast<std::size_t>(std::count_if(
        news.begin(), news.end(), [&](const NewsArticle& a) { return assign_bin(a.timestamp, grid).has_value(); }));
    if (intraday == 0) {
        throw DataError("selection_ratio: no intraday news");
    }
    if (selected_count > intraday) {
        throw ValidationError("selection_ratio: more selected articles than intraday articles");
    }
    return static_cast<double>(selected_count) / static_cast<double>(intraday);
}

void write_selected_csv(const std::filesystem::path& path, std::span<const NewsArticle> news,
                        std::span<const SelectedArticle> selected) {
    CsvWriter out(path);
    for (auto h : kNewsHeader) {
        out.field(h);
    }
    out.field("selected_reason").end_row();
    for (const auto& s : selected) {
        write_news_fields(out, news[s.index]);
        out.field(to_string(s.reason)).end_row();
    }
    out.close();
}

std::vector<SelectedRecord> read_selected_csv(const std::filesystem::path& path) {
    CsvReader in(path);
    const std::size_t c_reason = in.column("selected_reason");
    std::vector<SelectedRecord> out;
    while (in.next()) {
        auto reason = parse_selection_reason(in.get(c_reason));
        if (!reason) {
            in.fail("bad selected_reason");
        }
        out.push_back({parse_news_row(in, in.column("timestamp"), in.column("ticker"), in.column("score"),
                                      in.column("confidence"), in.column("headline")),
                       *reason});
    }
    return out;
}

void write_mode_stats_csv(const std::filesystem::path& path, const ModeStats& stats) {
    CsvWriter out(path);
    constexpr std::array<std::string_view, 3> header{"statistic", "key", "value"};
    out.header(header);
    for (std::size_t k = 0; k < stats.occupancy.size(); ++k) {
        out.field("occupancy").field("mode" + std::to_string(k + 1)).field(stats.occupancy[k]).end_row();
    }
    const auto K = stats.transitions.counts.size();
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            const std::string key = std::to_string(i + 1) + "->" + std::to_string(j + 1);
            out.field("transition_count").field(key).field(stats.transitions.counts[i][j]).end_row();
            const auto& row = stats.transitions.probabilities[i];
            out.field("transition_prob").field(key).field(row ? (*row)[j] : std::nan("")).end_row();
        }
    }
    out.field("mean_daily_jumps_per_stock").field("all").field(stats.mean_daily_jumps_per_stock).end_row();
    for (const auto& [ticker, v] : stats.daily_jumps_by_stock) {
        out.field("daily_jumps").field(ticker).field(v).end_row();
    }
    out.close();
}

}  // namespace liqmode
