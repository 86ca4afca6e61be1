#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "credhedge/core.hpp"

namespace credhedge::io {

/// Minimal header-driven CSV reader (no quoting; the ingestion formats never
/// carry embedded commas). Lines starting with '#' are skipped. Errors name
/// the file, line and column.
class CsvReader {
public:
    CsvReader(const std::filesystem::path& path, const std::vector<std::string>& required_columns);

    /// Advances to the next data row. Returns false at end of file.
    bool next();

    std::size_t line() const { return line_no_; }
    const std::filesystem::path& path() const { return path_; }

    std::string_view text(std::string_view column) const;
    double number(std::string_view column) const;
    std::optional<double> optional_number(std::string_view column) const;
    Date date(std::string_view column) const;

    [[noreturn]] void fail(std::string_view column, const std::string& what) const;

private:
    std::size_t column_index(std::string_view column) const;

    std::filesystem::path path_;
    std::ifstream in_;
    std::map<std::string, std::size_t, std::less<>> columns_;
    std::string current_;
    std::vector<std::string_view> fields_;
    std::size_t line_no_ = 0;
};

/// Writes to `<path>.tmp` and renames over `path` on commit(). A writer
/// destroyed without commit() removes its temporary file.
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path path);
    ~AtomicFile();
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

/// Shortest round-trippable text for a double.
std::string format_double(double value);

}  // namespace credhedge::io
