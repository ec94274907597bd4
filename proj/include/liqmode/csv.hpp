#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liqmode {

// Streaming reader for RFC 4180-style CSV with a mandatory header row.
// Quoted fields may contain commas, doubled quotes and newlines.
class CsvReader {
public:
    // Throws DataError when the file cannot be opened.
    explicit CsvReader(const std::filesystem::path& path);
    CsvReader(std::string source_name, std::string content);

    const std::vector<std::string>& header() const noexcept { return header_; }

    // Advances to the next non-blank record. Returns false at end of input.
    bool next();

    std::span<const std::string_view> fields() const noexcept { return fields_; }
    std::size_t row() const noexcept { return row_; }
    const std::string& source() const noexcept { return source_; }

    // Column index by header name; throws ParseError when absent.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;

    // Checks the header equals `expected` exactly (order and names).
    void expect_header(std::span<const std::string_view> expected) const;

    std::string_view get(std::size_t col) const;
    double get_double(std::size_t col) const;
    std::int64_t get_int(std::size_t col) const;
    bool get_bool(std::size_t col) const;  // accepts 0/1/true/false

    [[noreturn]] void fail(const std::string& what) const;

private:
    bool parse_record(std::vector<std::string_view>& out);

    std::string source_;
    std::string buffer_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;  // lines consumed so far
    std::size_t row_ = 0;   // 1-based line number of the current record
    std::vector<std::string> header_;
    std::vector<std::string_view> fields_;
    std::deque<std::string> scratch_;
};

// Buffered CSV writer. Output is flushed to disk by close() or the destructor.
class CsvWriter {
public:
    explicit CsvWriter(std::filesystem::path path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& header(std::span<const std::string_view> names);
    CsvWriter& field(std::string_view text);
    CsvWriter& quoted(std::string_view text);  // always quoted
    CsvWriter& field(double value);
    CsvWriter& field(std::int64_t value);
    CsvWriter& field(int value) { return field(static_cast<std::int64_t>(value)); }
    CsvWriter& field(std::size_t value) { return field(static_cast<std::int64_t>(value)); }
    CsvWriter& empty();
    void end_row();
    void close();

private:
    void separator();

    std::filesystem::path path_;
    std::string buffer_;
    bool row_open_ = false;
    bool closed_ = false;
};

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

}  // namespace liqmode
