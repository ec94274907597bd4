#include "liqmode/pipeline.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"
#include "liqmode/labeling.hpp"
#include "liqmode/screening.hpp"
#include "liqmode/stationarize.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace liqmode {

namespace fs = std::filesystem;

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    text = trim(text);
    if (text.empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.emplace_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_same_v<T, std::string>) {
            out += values[i];
        } else if constexpr (std::is_floating_point_v<T>) {
            out += format_double(values[i]);
        } else {
            out += std::to_string(values[i]);
        }
    }
    return out;
}

class FieldParser {
public:
    FieldParser(std::string section, std::string key) : name_(std::move(section) + "." + std::move(key)) {}

    [[noreturn]] void fail(const std::string& what) const { throw ValidationError("config " + name_ + ": " + what); }

    double real(std::string_view text) const {
        auto v = parse_double(trim(text));
        if (!v || !std::isfinite(*v)) fail("expected a number, got '" + std::string(text) + "'");
        return *v;
    }
    int integer(std::string_view text) const {
        auto v = parse_int(trim(text));
        if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
            fail("expected an integer, got '" + std::string(text) + "'");
        }
        return static_cast<int>(*v);
    }
    std::uint64_t unsigned64(std::string_view text) const {
        text = trim(text);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            fail("expected a non-negative integer, got '" + std::string(text) + "'");
        }
        return v;
    }
    bool boolean(std::string_view text) const {
        text = trim(text);
        if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
        if (text == "false" || text == "0" || text == "no" || text == "off") return false;
        fail("expected true or false, got '" + std::string(text) + "'");
    }
    std::optional<DayNumber> date(std::string_view text) const {
        text = trim(text);
        if (text.empty()) return std::nullopt;
        auto d = parse_date(text);
        if (!d) fail("expected YYYY-MM-DD, got '" + std::string(text) + "'");
        return d;
    }
    int clock(std::string_view text) const {
        auto m = parse_clock(trim(text));
        if (!m) fail("expected HH:MM, got '" + std::string(text) + "'");
        return *m;
    }
    std::vector<int> integers(std::string_view text) const {
        std::vector<int> out;
        for (const auto& item : split_list(text)) out.push_back(integer(item));
        return out;
    }
    std::vector<double> reals(std::string_view text) const {
        std::vector<double> out;
        for (const auto& item : split_list(text)) out.push_back(real(item));
        return out;
    }

private:
    std::string name_;
};

std::string date_text(const std::optional<DayNumber>& d) { return d ? format_date(*d) : std::string(); }

std::vector<Field> fields_of(PipelineConfig& c) {
    std::vector<Field> f;
    auto add = [&](std::string section, std::string key, auto setter, std::function<std::string()> getter) {
        FieldParser p(section, key);
        f.push_back({section, key, [p, setter](std::string_view v) { setter(p, v); }, std::move(getter)});
    };
    auto real = [&](std::string section, std::string key, double& target) {
        add(section, key, [&target](const FieldParser& p, std::string_view v) { target = p.real(v); },
            [&target] { return format_double(target); });
    };
    auto integer = [&](std::string section, std::string key, int& target) {
        add(section, key, [&target](const FieldParser& p, std::string_view v) { target = p.integer(v); },
            [&target] { return std::to_string(target); });
    };
    auto boolean = [&](std::string section, std::string key, bool& target) {
        add(section, key, [&target](const FieldParser& p, std::string_view v) { target = p.boolean(v); },
            [&target] { return std::string(target ? "true" : "false"); });
    };
    auto date = [&](std::string section, std::string key, std::optional<DayNumber>& target) {
        add(section, key, [&target](const FieldParser& p, std::string_view v) { target = p.date(v); },
            [&target] { return date_text(target); });
    };
    auto clock = [&](std::string section, std::string key, int& target) {
        add(section, key, [&target](const FieldParser& p, std::string_view v) { target = p.clock(v); },
            [&target] { return format_clock(target); });
    };
    auto path = [&](std::string section, std::string key, fs::path& target) {
        add(section, key, [&target](const FieldParser&, std::string_view v) { target = fs::path(std::string(trim(v))); },
            [&target] { return target.generic_string(); });
    };

    path("paths", "data", c.data_dir);
    path("paths", "work", c.work_dir);

    clock("market_data", "session_open", c.market.grid.session_open_minutes);
    clock("market_data", "session_close", c.market.grid.session_close_minutes);
    integer("market_data", "trim_minutes", c.market.grid.trim_minutes);
    integer("market_data", "bin_width_minutes", c.market.grid.bin_width_minutes);
    integer("market_data", "utc_offset_minutes", c.market.grid.utc_offset_minutes);
    real("market_data", "default_tick", c.market.default_tick);
    add("market_data", "vol_estimator",
        [&c](const FieldParser&, std::string_view v) { c.market.vol_estimator = std::string(trim(v)); },
        [&c] { return c.market.vol_estimator; });
    real("market_data", "max_missing_fraction", c.market.max_missing_fraction);

    date("windows", "train_start", c.train_start);
    date("windows", "train_end", c.train_end);
    date("windows", "eval_start", c.eval_start);
    date("windows", "eval_end", c.eval_end);
    real("windows", "train_fraction", c.train_fraction);

    integer("jump_model", "modes", c.jump.modes);
    real("jump_model", "lambda", c.jump.lambda);
    real("jump_model", "epsilon", c.jump.epsilon);
    integer("jump_model", "max_iters", c.jump.max_iters);
    integer("jump_model", "restarts", c.jump.restarts);
    integer("jump_model", "init_lloyd_iters", c.jump.init_lloyd_iters);

    integer("screening", "dedup_seconds", c.dedup_seconds);

    integer("labeling", "h", c.h);
    real("labeling", "k", c.k);

    real("sentiment", "alpha", c.nbc.alpha);
    add("sentiment", "min_df",
        [&c](const FieldParser& p, std::string_view v) {
            const int n = p.integer(v);
            if (n < 0) p.fail("must be >= 0");
            c.nbc.min_df = static_cast<std::size_t>(n);
        },
        [&c] { return std::to_string(c.nbc.min_df); });
    add("sentiment", "stop_words",
        [&c](const FieldParser&, std::string_view v) { c.nbc.stop_words = split_list(v); },
        [&c] { return join(c.nbc.stop_words); });
    add("sentiment", "top_words",
        [&c](const FieldParser& p, std::string_view v) {
            const int n = p.integer(v);
            if (n < 1) p.fail("must be >= 1");
            c.top_words = static_cast<std::size_t>(n);
        },
        [&c] { return std::to_string(c.top_words); });
    add("sentiment", "train_set",
        [&c](const FieldParser& p, std::string_view v) {
            const std::string s(trim(v));
            if (s != "N" && s != "Z") p.fail("expected N or Z, got '" + s + "'");
            c.train_set = s;
        },
        [&c] { return c.train_set; });

    add("evaluation", "horizons",
        [&c](const FieldParser& p, std::string_view v) { c.eval_horizons = p.integers(v); },
        [&c] { return join(c.eval_horizons); });
    real("evaluation", "decile", c.decile);
    add("evaluation", "sweep_lambdas",
        [&c](const FieldParser& p, std::string_view v) { c.sweep.lambdas = p.reals(v); },
        [&c] { return join(c.sweep.lambdas); });
    add("evaluation", "sweep_h",
        [&c](const FieldParser& p, std::string_view v) { c.sweep.horizons = p.integers(v); },
        [&c] { return join(c.sweep.horizons); });
    add("evaluation", "sweep_k",
        [&c](const FieldParser& p, std::string_view v) { c.sweep.ks = p.reals(v); },
        [&c] { return join(c.sweep.ks); });
    boolean("evaluation", "cache_fits", c.cache_fits);
    boolean("evaluation", "sweep_unscreened", c.sweep_unscreened);

    SynthSpec& s = c.synth;
    integer("synth", "n_stocks", s.n_stocks);
    integer("synth", "n_days", s.n_days);
    add("synth", "start_date",
        [&s](const FieldParser& p, std::string_view v) {
            auto d = p.date(v);
            if (!d) p.fail("must not be empty");
            s.start_day = *d;
        },
        [&s] { return format_date(s.start_day); });
    real("synth", "news_rate", s.news_rate);
    real("synth", "sentiment_fraction", s.sentiment_fraction);
    real("synth", "outside_session_fraction", s.outside_session_fraction);
    real("synth", "duplicate_prob", s.duplicate_prob);
    real("synth", "drift", s.drift);
    integer("synth", "drift_minutes", s.drift_minutes);
    real("synth", "neutral_drift_sd", s.neutral_drift_sd);
    integer("synth", "drift_epoch_days", s.drift_epoch_days);
    real("synth", "vendor_accuracy", s.vendor_accuracy);
    real("synth", "stay_calm", s.stay_calm);
    real("synth", "stay_active", s.stay_active);
    integer("synth", "active_bins", s.active_bins);
    real("synth", "dispersion", s.dispersion);
    real("synth", "market_vol", s.market_vol);
    real("synth", "calm_sigma", s.modes[0].sigma);
    real("synth", "active_sigma", s.modes[1].sigma);

    add("run", "seed", [&c](const FieldParser& p, std::string_view v) { c.seed = p.unsigned64(v); },
        [&c] { return std::to_string(c.seed); });
    return f;
}

}  // namespace

void PipelineConfig::set(std::string_view section, std::string_view key, std::string_view value) {
    if (section == "tick_sizes") {
        const std::string ticker(trim(key));
        if (ticker.empty()) {
            throw ValidationError("config tick_sizes: empty ticker");
        }
        market.tick_sizes[ticker] = FieldParser("tick_sizes", ticker).real(value);
        return;
    }
    for (auto& f : fields_of(*this)) {
        if (f.section == section && f.key == key) {
            f.set(value);
            return;
        }
    }
    throw ValidationError("config: unknown key " + std::string(section) + "." + std::string(key));
}

void PipelineConfig::validate() const {
    market.validate();
    jump_config().validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("config windows.train_fraction must lie in (0, 1)");
    }
    if (train_start && train_end && *train_start > *train_end) {
        throw ValidationError("config windows.train_start is after windows.train_end");
    }
    if (eval_start && eval_end && *eval_start > *eval_end) {
        throw ValidationError("config windows.eval_start is after windows.eval_end");
    }
    if (train_end && eval_start && *eval_start <= *train_end) {
        throw ValidationError("config windows.eval_start must be after windows.train_end");
    }
    if (dedup_seconds < 0) {
        throw ValidationError("config screening.dedup_seconds must be >= 0");
    }
    if (h <= 0) {
        throw ValidationError("config labeling.h must be positive minutes");
    }
    if (!(k > 0.0 && k <= 50.0)) {
        throw ValidationError("config labeling.k must lie in (0, 50]");
    }
    nbc.validate();
    ExperimentOptions opts;
    opts.eval_horizons = eval_horizons;
    opts.decile = decile;
    opts.validate();
    sweep.validate();
    synth_spec().validate();
}

std::string PipelineConfig::canonical() const {
    auto fields = fields_of(const_cast<PipelineConfig&>(*this));
    std::vector<std::string> lines;
    for (const auto& f : fields) {
        lines.push_back(f.section + "." + f.key + "=" + f.get());
    }
    for (const auto& [ticker, tick] : market.tick_sizes) {
        lines.push_back("tick_sizes." + ticker + "=" + format_double(tick));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a(canonical()); }

JumpConfig PipelineConfig::jump_config() const {
    JumpConfig j = jump;
    j.seed = seed;
    return j;
}

SynthSpec PipelineConfig::synth_spec() const {
    SynthSpec s = synth;
    s.grid = market.grid;
    s.tick = market.default_tick;
    s.seed = seed;
    return s;
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ValidationError("config file not found: " + path.string());
    }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError("config " + path.string() + ": " + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
    }
    PipelineConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ValidationError("config: key " + section + " is outside any section");
        }
        for (const auto& [key, value] : body) {
            c.set(section, key, value.data());
        }
    }
    const fs::path base = path.parent_path();
    if (c.data_dir.is_relative()) c.data_dir = base / c.data_dir;
    if (c.work_dir.is_relative()) c.work_dir = base / c.work_dir;
    return c;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << value;
    return s.str();
}

Windows resolve_windows(const PipelineConfig& config, const std::vector<DayNumber>& available) {
    Windows w;
    const bool explicit_windows = config.train_start || config.train_end || config.eval_start || config.eval_end;
    if (explicit_windows) {
        const DateRange train{config.train_start, config.train_end};
        const DateRange eval{config.eval_start, config.eval_end};
        for (DayNumber d : available) {
            if (train.contains(d)) w.train.insert(d);
            if (eval.contains(d)) w.eval.insert(d);
        }
    } else {
        const auto n = available.size();
        auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(n)));
        n_train = std::clamp<std::size_t>(n_train, 1, n > 1 ? n - 1 : n);
        for (std::size_t i = 0; i < n; ++i) {
            (i < n_train ? w.train : w.eval).insert(available[i]);
        }
    }
    if (w.train.empty()) {
        throw DataError("training window contains no data days");
    }
    if (w.eval.empty()) {
        throw DataError("evaluation window contains no data days");
    }
    return w;
}

// --- stages -----------------------------------------------------------------

namespace {

class Stage {
public:
    Stage(std::string name, const PipelineConfig& config, std::ostream& log)
        : name_(std::move(name)), config_(config), log_(log) {
        fs::create_directories(config_.work_dir);
    }

    fs::path work(const std::string& file) const { return config_.work_dir / file; }

    fs::path require(const std::string& file, const std::string& stage_hint) const {
        const fs::path p = work(file);
        if (!fs::exists(p)) {
            throw MissingArtifactError("missing " + file + ", run " + stage_hint + " first");
        }
        inputs_.push_back(file);
        return p;
    }

    fs::path output(const std::string& file) {
        outputs_.emplace_back(file, work(file));
        return work(file);
    }

    std::ostream& log() { return log_ << name_ << ": "; }

    void write_manifest() const {
        nlohmann::json m;
        m["stage"] = name_;
        m["config_hash"] = hex64(config_.hash());
        m["seed"] = config_.seed;
        m["inputs"] = inputs_;
        nlohmann::json outs = nlohmann::json::object();
        for (const auto& [label, path] : outputs_) {
            std::ifstream in(path, std::ios::binary);
            std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            outs[label] = hex64(fnv1a(bytes));
        }
        m["outputs"] = outs;
        std::ofstream out(work("manifest_" + name_ + ".json"), std::ios::binary | std::ios::trunc);
        out << m.dump(2) << '\n';
    }

    // Files outside the work directory, e.g. generated data.
    void add_external_output(const std::string& label, const fs::path& p) { outputs_.emplace_back(label, p); }

private:
    std::string name_;
    const PipelineConfig& config_;
    std::ostream& log_;
    mutable std::vector<std::string> inputs_;
    std::vector<std::pair<std::string, fs::path>> outputs_;
};

std::vector<NewsArticle> load_news(const PipelineConfig& c) {
    const auto raw = read_news_csv(c.data_dir / "news.csv");
    return deduplicate_news(raw, static_cast<Millis>(c.dedup_seconds) * kMillisPerSecond);
}

std::vector<NewsArticle> news_in(std::span<const NewsArticle> news, const std::set<DayNumber>& days,
                                 const BinGrid& grid) {
    std::vector<NewsArticle> out;
    for (const auto& a : news) {
        if (days.count(grid.local_day(a.timestamp))) {
            out.push_back(a);
        }
    }
    return out;
}

DateRange span_of(const std::set<DayNumber>& days) { return DateRange{*days.begin(), *days.rbegin()}; }

Windows windows_for(const PipelineConfig& c) { return resolve_windows(c, list_days(c.data_dir, DateRange{})); }

void stage_features(const PipelineConfig& c, std::ostream& log) {
    Stage s("features", c, log);
    auto load = load_universe(c.data_dir, DateRange{}, c.market);
    write_panel_csv(s.output("panel.csv"), load.panel, false);
    write_drop_log(s.output("drops.csv"), load.dropped);
    s.log() << load.panel.days().size() << " days, " << load.panel.rows.size() << " stock-days, "
            << load.dropped.size() << " dropped, " << load.stats.trades << " trades, " << load.stats.quotes
            << " quotes, " << load.stats.crossed_quotes << " crossed quotes skipped\n";
    s.write_manifest();
}

void stage_stationarize(const PipelineConfig& c, std::ostream& log) {
    Stage s("stationarize", c, log);
    const Panel raw = read_panel_csv(s.require("panel.csv", "features"));
    const Panel st = apply_profile(raw, fit_profile(raw));
    write_panel_csv(s.output("stationarized.csv"), st, true);
    s.log() << st.rows.size() << " stock-days stationarized\n";
    s.write_manifest();
}

void stage_fit(const PipelineConfig& c, std::ostream& log) {
    Stage s("fit", c, log);
    const Panel st = read_panel_csv(s.require("stationarized.csv", "stationarize"));
    const std::size_t before = total_monotonicity_violations();
    const auto fits = fit_panel(st, c.jump_config());
    write_centroids_csv(s.output("centroids.csv"), fits);
    write_modes_csv(s.output("modes.csv"), fits);
    int reseeds = 0;
    for (const auto& f : fits) {
        reseeds += f.fit.reseeded_clusters;
    }
    s.log() << fits.size() << " days fitted at lambda " << format_double(c.jump.lambda) << ", " << reseeds
            << " empty-cluster reseeds, " << (total_monotonicity_violations() - before)
            << " loss-monotonicity violations\n";
    s.write_manifest();
}

void stage_screen(const PipelineConfig& c, std::ostream& log) {
    Stage s("screen", c, log);
    const auto modes_path = s.require("modes.csv", "fit");
    const auto fits = read_fits_csv(s.require("centroids.csv", "fit"), modes_path);
    const auto raw = read_news_csv(c.data_dir / "news.csv");
    const auto news = deduplicate_news(raw, static_cast<Millis>(c.dedup_seconds) * kMillisPerSecond);
    const auto result = select_impactful(news, fits, c.market.grid);
    write_selected_csv(s.output("selected.csv"), news, result.selected);
    {
        CsvWriter out(s.output("screen_excluded.csv"));
        constexpr std::array<std::string_view, 3> header{"timestamp", "ticker", "reason"};
        out.header(header);
        for (const auto& e : result.excluded) {
            out.field(news[e.index].timestamp).field(news[e.index].ticker).field(e.reason).end_row();
        }
        out.close();
    }
    write_mode_stats_csv(s.output("mode_stats.csv"), mode_stats(fits));
    const double ratio = selection_ratio(news, result.selected.size(), c.market.grid);
    {
        CsvWriter out(s.output("screen_summary.csv"));
        constexpr std::array<std::string_view, 2> header{"statistic", "value"};
        out.header(header);
        out.field("news_raw").field(raw.size()).end_row();
        out.field("news_deduplicated").field(news.size()).end_row();
        out.field("selected").field(result.selected.size()).end_row();
        out.field("selection_ratio").field(ratio).end_row();
        out.close();
    }
    s.log() << result.selected.size() << " of " << news.size() << " articles selected, intraday ratio "
            << format_double(ratio) << "\n";
    s.write_manifest();
}

void stage_label(const PipelineConfig& c, std::ostream& log) {
    Stage s("label", c, log);
    s.require("modes.csv", "fit/screen");
    const auto selected = read_selected_csv(s.require("selected.csv", "screen"));
    const Windows w = windows_for(c);
    const auto news = news_in(load_news(c), w.train, c.market.grid);
    std::unordered_set<std::string> keys;
    for (const auto& r : selected) {
        keys.insert(r.article.key());
    }
    std::vector<std::size_t> impactful;
    for (std::size_t i = 0; i < news.size(); ++i) {
        if (keys.count(news[i].key())) {
            impactful.push_back(i);
        }
    }
    PriceBook prices = load_prices(c.data_dir, span_of(w.train));
    const auto batch = compute_returns(news, prices, c.h, c.market.grid);
    const auto sets = build_label_sets(batch.returns, impactful, c.k);
    write_labels_csv(s.output("labels.csv"), news, batch.returns, sets);
    s.log() << batch.returns.size() << " training returns at h=" << c.h << " (" << batch.dropped.size()
            << " without price), |Z+|=" << sets.z_plus.size() << " |Z-|=" << sets.z_minus.size()
            << " |N+|=" << sets.n_plus.size() << " |N-|=" << sets.n_minus.size() << "\n";
    s.write_manifest();
}

void stage_train(const PipelineConfig& c, std::ostream& log) {
    Stage s("train", c, log);
    const auto labels = read_labels_csv(s.require("labels.csv", "label"));
    const std::string plus = c.train_set + "p";
    const std::string minus = c.train_set + "m";
    std::vector<LabeledDoc> docs;
    std::size_t n_plus = 0, n_minus = 0;
    for (const auto& r : labels) {
        if (r.set == plus) {
            docs.push_back(make_doc(r.article.headline, true));
            ++n_plus;
        } else if (r.set == minus) {
            docs.push_back(make_doc(r.article.headline, false));
            ++n_minus;
        }
    }
    if (n_plus == 0 || n_minus == 0) {
        throw DegenerateError("empty training class: |" + plus + "|=" + std::to_string(n_plus) + ", |" + minus +
                              "|=" + std::to_string(n_minus));
    }
    const auto model = fit_nbc(docs, c.nbc);
    model.save(s.output("model.txt"));
    {
        CsvWriter out(s.output("top_words.csv"));
        constexpr std::array<std::string_view, 3> header{"rank", "word", "mutual_information"};
        out.header(header);
        const auto ranked = top_words(docs, c.top_words, c.nbc.min_df);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            out.field(i + 1).field(ranked[i].word).field(ranked[i].mutual_information).end_row();
        }
        out.close();
    }
    s.log() << "trained on " << n_plus << " bullish and " << n_minus << " bearish headlines, vocabulary "
            << model.vocabulary().size() << "\n";
    s.write_manifest();
}

void stage_score(const PipelineConfig& c, std::ostream& log) {
    Stage s("score", c, log);
    const auto model = SentimentModel::load(s.require("model.txt", "train"));
    const Windows w = windows_for(c);
    const auto news = news_in(load_news(c), w.eval, c.market.grid);
    std::vector<ScoredArticle> scores;
    for (std::size_t i = 0; i < news.size(); ++i) {
        scores.push_back({i, model.score(news[i].headline)});
    }
    write_scores_csv(s.output("scores.csv"), news, scores);
    s.log() << scores.size() << " evaluation articles scored\n";
    s.write_manifest();
}

void stage_eval(const PipelineConfig& c, std::ostream& log) {
    Stage s("eval", c, log);
    const auto records = read_scores_csv(s.require("scores.csv", "score"));
    const Windows w = windows_for(c);
    const auto news = news_in(load_news(c), w.eval, c.market.grid);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < news.size(); ++i) {
        index.emplace(news[i].key(), i);
    }
    std::vector<ScoredArticle> model_scores, vendor_scores;
    for (const auto& r : records) {
        NewsArticle probe;
        probe.timestamp = r.timestamp;
        probe.ticker = r.ticker;
        probe.headline = r.headline;
        auto it = index.find(probe.key());
        if (it == index.end()) {
            continue;
        }
        model_scores.push_back({it->second, r.score});
    }
    for (std::size_t i = 0; i < news.size(); ++i) {
        if (auto v = news[i].composed_score()) {
            vendor_scores.push_back({i, *v});
        }
    }
    if (model_scores.size() < records.size()) {
        s.log() << (records.size() - model_scores.size())
                << " scored articles are not in the evaluation window and were ignored\n";
    }
    const PriceBook prices = load_prices(c.data_dir, span_of(w.eval));
    const ReturnTable returns(news, prices, c.eval_horizons, c.market.grid);
    const auto report = drift_curves(model_scores, returns, c.decile);
    write_curves_csv(s.output("curves.csv"), report);

    CsvWriter summary(s.output("eval_summary.csv"));
    constexpr std::array<std::string_view, 2> header{"statistic", "value"};
    summary.header(header);
    summary.field("articles").field(report.reference.count).end_row();
    summary.field("bucket_size").field(report.top.count).end_row();
    summary.field("small_sample").field(report.top.small_sample ? 1 : 0).end_row();
    summary.field("terminal_horizon").field(c.eval_horizons.back()).end_row();
    summary.field("terminal_separation").field(report.terminal_separation).end_row();
    if (!vendor_scores.empty()) {
        const auto cmp = compare(vendor_scores, model_scores, returns, c.decile);
        CsvWriter out(s.output("comparison.csv"));
        constexpr std::array<std::string_view, 5> curve_header{"bucket", "horizon", "mean", "stderr", "count"};
        out.header(curve_header);
        append_curves(out, cmp.baseline, "vendor_");
        append_curves(out, cmp.candidate, "model_");
        out.close();
        summary.field("compared_articles").field(cmp.common).end_row();
        summary.field("vendor_terminal_separation").field(cmp.baseline.terminal_separation).end_row();
        summary.field("model_minus_vendor").field(cmp.difference).end_row();
    }
    summary.close();
    s.log() << "terminal separation " << format_double(report.terminal_separation) << " over "
            << report.reference.count << " articles\n";
    s.write_manifest();
}

void stage_sweep(const PipelineConfig& c, std::ostream& log) {
    Stage s("sweep", c, log);
    ExperimentData data;
    data.grid = c.market.grid;
    data.stationarized = read_panel_csv(s.require("stationarized.csv", "stationarize"));
    const Windows w = windows_for(c);
    data.train_days = w.train;
    const auto news = load_news(c);
    data.train_news = news_in(news, w.train, c.market.grid);
    data.eval_news = news_in(news, w.eval, c.market.grid);
    std::set<DayNumber> all = w.train;
    all.insert(w.eval.begin(), w.eval.end());
    data.prices = load_prices(c.data_dir, span_of(all));

    ExperimentOptions opts;
    opts.jump = c.jump_config();
    opts.nbc = c.nbc;
    opts.eval_horizons = c.eval_horizons;
    opts.decile = c.decile;
    opts.cache_fits = c.cache_fits;
    Experiment experiment(std::move(data), opts);

    auto cells = sweep(experiment, c.sweep);
    if (c.sweep_unscreened) {
        for (int h : c.sweep.horizons) {
            for (double k : c.sweep.ks) {
                cells.push_back(experiment.run(std::nullopt, h, k));
            }
        }
    }
    write_sweep_csv(s.output("sweep.csv"), cells);
    const auto degenerate = std::count_if(cells.begin(), cells.end(), [](const CellResult& r) { return r.degenerate; });
    s.log() << cells.size() << " cells, " << degenerate << " degenerate, " << experiment.fits_computed()
            << " panel fits\n";
    s.write_manifest();
}

void stage_synth(const PipelineConfig& c, std::ostream& log) {
    Stage s("synth", c, log);
    const auto summary = generate_to_directory(c.synth_spec(), c.data_dir);
    for (const char* f : {"news.csv", "truth_modes.csv", "truth_news.csv"}) {
        s.add_external_output(std::string("data/") + f, c.data_dir / f);
    }
    s.log() << summary.days << " days, " << summary.trades << " trades, " << summary.quotes << " quotes, "
            << summary.news << " news (" << summary.planted_impactful << " planted impactful) in "
            << c.data_dir.string() << "\n";
    s.write_manifest();
}

}  // namespace

void run_stage(std::string_view stage, const PipelineConfig& config, std::ostream& log) {
    config.validate();
    static const std::map<std::string, void (*)(const PipelineConfig&, std::ostream&), std::less<>> table{
        {"features", stage_features}, {"stationarize", stage_stationarize}, {"fit", stage_fit},
        {"screen", stage_screen},     {"label", stage_label},               {"train", stage_train},
        {"score", stage_score},       {"eval", stage_eval},                 {"sweep", stage_sweep},
        {"synth", stage_synth}};
    if (stage == "all") {
        for (const auto& name : pipeline_stages()) {
            table.at(name)(config, log);
        }
        return;
    }
    auto it = table.find(stage);
    if (it == table.end()) {
        throw ValidationError("unknown stage: " + std::string(stage));
    }
    it->second(config, log);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Liquidity-mode news screening pipeline", "liqmode"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.fallthrough();
    app.require_subcommand(1, 1);
    std::string config_path;
    std::optional<std::string> lambda, h, k, seed;
    std::vector<std::string> overrides;
    app.add_option("--config,-c", config_path, "INI config file");
    app.add_option("--lambda", lambda, "jump_model.lambda");
    app.add_option("--h", h, "labeling.h (minutes)");
    app.add_option("--k", k, "labeling.k (percentile)");
    app.add_option("--seed", seed, "run.seed");
    app.add_option("--set", overrides, "override any key: section.key=value");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "generate synthetic trades, quotes, news and ground truth"},
        {"features", "bin trades and quotes into the liquidity panel"},
        {"stationarize", "remove intraday seasonality from the panel"},
        {"fit", "fit the jump model per day"},
        {"screen", "select news next to calm-to-active switches"},
        {"label", "build return-percentile label sets"},
        {"train", "fit the naive Bayes sentiment model"},
        {"score", "score evaluation headlines"},
        {"eval", "drift curves of the scored evaluation news"},
        {"sweep", "lambda/h/k robustness grid"},
        {"all", "run features through sweep"}};
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (lambda) config.set("jump_model", "lambda", *lambda);
        if (h) config.set("labeling", "h", *h);
        if (k) config.set("labeling", "k", *k);
        if (seed) config.set("run", "seed", *seed);
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            const auto dot = o.find('.');
            if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
                throw ValidationError("--set expects section.key=value, got '" + o + "'");
            }
            config.set(o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
        }
        config.validate();
        run_stage(app.get_subcommands().front()->get_name(), config, err);
        return 0;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const MissingArtifactError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateError& e) {
        err << "degenerate result: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace liqmode
