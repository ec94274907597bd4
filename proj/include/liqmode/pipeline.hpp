#pragma once

#include "liqmode/evaluation.hpp"
#include "liqmode/jump_model.hpp"
#include "liqmode/market_data.hpp"
#include "liqmode/sentiment.hpp"
#include "liqmode/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace liqmode {

struct PipelineConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path work_dir = "work";

    MarketDataConfig market;

    // Explicit date windows; when all are unset the available days are split
    // chronologically by train_fraction.
    std::optional<DayNumber> train_start, train_end, eval_start, eval_end;
    double train_fraction = 2.0 / 3.0;

    JumpConfig jump;
    int dedup_seconds = 60;

    int h = 15;
    double k = 10.0;
    std::string train_set = "N";  // N (screened) or Z (all news)

    NbcOptions nbc;
    std::size_t top_words = 30;

    std::vector<int> eval_horizons = default_eval_horizons();
    double decile = 0.1;
    SweepGrid sweep;
    bool cache_fits = true;
    bool sweep_unscreened = true;  // adds Z rows (lambda = none) to the sweep

    SynthSpec synth;
    std::uint64_t seed = 0;

    // Applies one `section.key = value` setting; throws ValidationError naming
    // the field on unknown keys or unparsable values.
    void set(std::string_view section, std::string_view key, std::string_view value);
    void validate() const;

    // Every setting as sorted `section.key=value` lines.
    std::string canonical() const;
    std::uint64_t hash() const;

    JumpConfig jump_config() const;
    SynthSpec synth_spec() const;
};

// INI file with sections paths, market_data, tick_sizes, windows, jump_model,
// screening, labeling, sentiment, evaluation, synth, run. Relative paths are
// resolved against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

struct Windows {
    std::set<DayNumber> train;
    std::set<DayNumber> eval;
};
Windows resolve_windows(const PipelineConfig& config, const std::vector<DayNumber>& available);

inline const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages{"features", "stationarize", "fit",   "screen", "label",
                                                 "train",    "score",        "eval", "sweep"};
    return stages;
}

// Runs one stage ("synth", "all" or any of pipeline_stages()) and writes its
// manifest. Progress goes to `log`.
void run_stage(std::string_view stage, const PipelineConfig& config, std::ostream& log);

// Command-line entry point: args excludes the program name. Returns the exit
// status: 0 success, 2 validation error, 3 missing artifact or input,
// 4 degenerate result, 1 anything else.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace liqmode
