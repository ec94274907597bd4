#pragma once

#include "liqmode/jump_model.hpp"
#include "liqmode/market_data.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace liqmode::testing {

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("liqmode_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 2024-01-02, a Tuesday.
inline constexpr DayNumber kDay = 19724;

inline Millis clock_ms(DayNumber day, int hour, int minute, int second = 0, int ms = 0) {
    return day * kMillisPerDay + ((hour * 60 + minute) * 60 + second) * kMillisPerSecond + ms;
}

inline Point uniform_point(std::mt19937_64& rng, double lo = -3.0, double hi = 3.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng), u(rng)};
}

inline Sequence uniform_sequence(std::mt19937_64& rng, std::size_t T, double lo = -3.0, double hi = 3.0) {
    Sequence s(T);
    for (auto& x : s) {
        x = uniform_point(rng, lo, hi);
    }
    return s;
}

}  // namespace liqmode::testing
