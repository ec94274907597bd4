#include "liqmode/csv.hpp"

#include "liqmode/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace liqmode {

CsvReader::CsvReader(const std::filesystem::path& path) : source_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("missing file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    buffer_ = std::move(ss).str();
    std::vector<std::string_view> head;
    if (!parse_record(head)) {
        throw ParseError(source_, 1, "missing header row");
    }
    header_.assign(head.begin(), head.end());
}

CsvReader::CsvReader(std::string source_name, std::string content)
    : source_(std::move(source_name)), buffer_(std::move(content)) {
    std::vector<std::string_view> head;
    if (!parse_record(head)) {
        throw ParseError(source_, 1, "missing header row");
    }
    header_.assign(head.begin(), head.end());
}

bool CsvReader::parse_record(std::vector<std::string_view>& out) {
    out.clear();
    scratch_.clear();
    // Skip blank lines.
    while (pos_ < buffer_.size() && (buffer_[pos_] == '\n' || buffer_[pos_] == '\r')) {
        if (buffer_[pos_] == '\n') {
            ++line_;
        }
        ++pos_;
    }
    if (pos_ >= buffer_.size()) {
        return false;
    }
    row_ = line_ + 1;
    const std::size_t n = buffer_.size();
    while (true) {
        if (pos_ < n && buffer_[pos_] == '"') {
            ++pos_;
            std::string& value = scratch_.emplace_back();
            bool closed = false;
            while (pos_ < n) {
                const char c = buffer_[pos_++];
                if (c == '"') {
                    if (pos_ < n && buffer_[pos_] == '"') {
                        value.push_back('"');
                        ++pos_;
                    } else {
                        closed = true;
                        break;
                    }
                } else {
                    if (c == '\n') {
                        ++line_;
                    }
                    value.push_back(c);
                }
            }
            if (!closed) {
                throw ParseError(source_, row_, "unterminated quoted field");
            }
            out.emplace_back(value);
            if (pos_ < n && buffer_[pos_] != ',' && buffer_[pos_] != '\n' && buffer_[pos_] != '\r') {
                throw ParseError(source_, row_, "unexpected character after quoted field");
            }
        } else {
            const std::size_t start = pos_;
            while (pos_ < n && buffer_[pos_] != ',' && buffer_[pos_] != '\n' && buffer_[pos_] != '\r') {
                ++pos_;
            }
            out.emplace_back(buffer_.data() + start, pos_ - start);
        }
        if (pos_ >= n) {
            break;
        }
        if (buffer_[pos_] == ',') {
            ++pos_;
            continue;
        }
        // End of line: consume \r\n or \n.
        if (buffer_[pos_] == '\r') {
            ++pos_;
        }
        if (pos_ < n && buffer_[pos_] == '\n') {
            ++pos_;
        }
        break;
    }
    ++line_;
    return true;
}

bool CsvReader::next() {
    if (!parse_record(fields_)) {
        fields_.clear();
        return false;
    }
    if (fields_.size() != header_.size()) {
        fail("expected " + std::to_string(header_.size()) + " fields, found " +
             std::to_string(fields_.size()));
    }
    return true;
}

std::optional<std::size_t> CsvReader::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t CsvReader::column(std::string_view name) const {
    if (auto c = find_column(name)) {
        return *c;
    }
    throw ParseError(source_, 1, "missing column '" + std::string(name) + "'");
}

void CsvReader::expect_header(std::span<const std::string_view> expected) const {
    bool ok = expected.size() == header_.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
        ok = header_[i] == expected[i];
    }
    if (!ok) {
        std::string want;
        for (auto e : expected) {
            want += (want.empty() ? "" : ",") + std::string(e);
        }
        throw ParseError(source_, 1, "expected header '" + want + "'");
    }
}

void CsvReader::fail(const std::string& what) const { throw ParseError(source_, row_, what); }

std::string_view CsvReader::get(std::size_t col) const { return fields_.at(col); }

double CsvReader::get_double(std::size_t col) const {
    auto v = parse_double(fields_.at(col));
    if (!v) {
        fail("column '" + header_.at(col) + "': not a number '" + std::string(fields_[col]) + "'");
    }
    return *v;
}

std::int64_t CsvReader::get_int(std::size_t col) const {
    auto v = parse_int(fields_.at(col));
    if (!v) {
        fail("column '" + header_.at(col) + "': not an integer '" + std::string(fields_[col]) + "'");
    }
    return *v;
}

bool CsvReader::get_bool(std::size_t col) const {
    const auto f = fields_.at(col);
    if (f == "1" || f == "true") {
        return true;
    }
    if (f == "0" || f == "false") {
        return false;
    }
    fail("column '" + header_.at(col) + "': not a boolean '" + std::string(f) + "'");
}

std::optional<double> parse_double(std::string_view text) {
    if (text.empty()) {
        return std::nullopt;
    }
    if (text == "nan") {
        return std::nan("");
    }
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
    if (text.empty()) {
        return std::nullopt;
    }
    std::int64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return v;
}

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

// --- writer ---------------------------------------------------------------

CsvWriter::CsvWriter(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
        }
    }
}

void CsvWriter::separator() {
    if (row_open_) {
        buffer_.push_back(',');
    }
    row_open_ = true;
}

CsvWriter& CsvWriter::header(std::span<const std::string_view> names) {
    for (auto n : names) {
        field(n);
    }
    end_row();
    return *this;
}

CsvWriter& CsvWriter::field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") != std::string_view::npos) {
        return quoted(text);
    }
    separator();
    buffer_.append(text);
    return *this;
}

CsvWriter& CsvWriter::quoted(std::string_view text) {
    separator();
    buffer_.push_back('"');
    for (char c : text) {
        if (c == '"') {
            buffer_.push_back('"');
        }
        buffer_.push_back(c);
    }
    buffer_.push_back('"');
    return *this;
}

CsvWriter& CsvWriter::field(double value) {
    separator();
    if (std::isnan(value)) {
        buffer_.append("nan");
        return *this;
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    buffer_.append(buf, ptr);
    return *this;
}

CsvWriter& CsvWriter::field(std::int64_t value) {
    separator();
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    buffer_.append(buf, ptr);
    return *this;
}

CsvWriter& CsvWriter::empty() {
    separator();
    return *this;
}

void CsvWriter::end_row() {
    buffer_.push_back('\n');
    row_open_ = false;
}

void CsvWriter::close() {
    if (closed_) {
        return;
    }
    closed_ = true;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write file: " + path_.string());
    }
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) {
        throw DataError("write failed: " + path_.string());
    }
}

}  // namespace liqmode
