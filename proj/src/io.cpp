#include "credhedge/io.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace credhedge::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

void split(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

}  // namespace

CsvReader::CsvReader(const std::filesystem::path& path, const std::vector<std::string>& required_columns)
    : path_(path), in_(path) {
    if (!in_) throw DataError(path.string() + ": cannot open file");
    std::string header;
    while (std::getline(in_, header)) {
        ++line_no_;
        if (!header.empty() && header[0] != '#') break;
        header.clear();
    }
    if (header.empty()) throw DataError(path.string() + ": missing header row");
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header.erase(0, 3);
    std::vector<std::string_view> names;
    split(header, names);
    for (std::size_t i = 0; i < names.size(); ++i) columns_.emplace(std::string(names[i]), i);
    for (const auto& col : required_columns) {
        if (!columns_.contains(col)) {
            throw DataError(path.string() + ":" + std::to_string(line_no_) + ": missing column '" + col + "'");
        }
    }
}

bool CsvReader::next() {
    while (std::getline(in_, current_)) {
        ++line_no_;
        if (trim(current_).empty() || current_[0] == '#') continue;
        split(current_, fields_);
        if (fields_.size() != columns_.size()) {
            throw DataError(path_.string() + ":" + std::to_string(line_no_) + ": expected " +
                            std::to_string(columns_.size()) + " fields, found " + std::to_string(fields_.size()));
        }
        return true;
    }
    return false;
}

std::size_t CsvReader::column_index(std::string_view column) const {
    auto it = columns_.find(column);
    if (it == columns_.end()) fail(column, "unknown column");
    return it->second;
}

void CsvReader::fail(std::string_view column, const std::string& what) const {
    throw DataError(path_.string() + ":" + std::to_string(line_no_) + ": column '" + std::string(column) +
                    "': " + what);
}

std::string_view CsvReader::text(std::string_view column) const { return fields_[column_index(column)]; }

double CsvReader::number(std::string_view column) const {
    const auto value = optional_number(column);
    if (!value) fail(column, "required numeric value is empty");
    return *value;
}

std::optional<double> CsvReader::optional_number(std::string_view column) const {
    const auto field = text(column);
    if (field.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
        fail(column, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

Date CsvReader::date(std::string_view column) const {
    try {
        return parse_date(text(column));
    } catch (const DataError& e) {
        fail(column, e.what());
    }
}

AtomicFile::AtomicFile(std::filesystem::path path) : path_(std::move(path)) {
    tmp_ = path_;
    tmp_ += ".tmp";
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError(tmp_.string() + ": cannot open for writing");
}

AtomicFile::~AtomicFile() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void AtomicFile::commit() {
    out_.flush();
    if (!out_) throw DataError(tmp_.string() + ": write failed");
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
}

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace credhedge::io
