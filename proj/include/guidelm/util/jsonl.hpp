#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace guidelm {

using json = nlohmann::json;

struct LineError {
    std::size_t line = 0;  // 1-based
    std::string reason;

    friend bool operator==(const LineError&, const LineError&) = default;
};

json to_json(const LineError& e);

/// Calls fn(line_number, line) for every line of the file, stripping a trailing CR.
/// Throws IoError if the file cannot be opened.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn);

/// Parses each non-blank line as JSON. Unparseable lines are reported through `errors`.
std::vector<std::pair<std::size_t, json>> read_json_lines(const std::filesystem::path& path,
                                                          std::vector<LineError>& errors);

/// One compact JSON object per line, LF endings, UTF-8, no BOM.
void write_json_line(std::ostream& out, const json& value);

/// Writes all values to `path`, replacing it. Returns the line count.
std::size_t write_json_lines(const std::filesystem::path& path, const std::vector<json>& values);

void write_line_errors(const std::filesystem::path& path, const std::vector<LineError>& errors);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Append-only JSONL log. Appends are serialized and flushed before append() returns.
class AppendLog {
public:
    explicit AppendLog(std::filesystem::path path);

    void append(const json& value);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
    std::ofstream out_;
};

}  // namespace guidelm
