#include "guidelm/util/jsonl.hpp"

#include <sstream>

#include "guidelm/errors.hpp"

namespace guidelm {

json to_json(const LineError& e) {
    return json{{"line", e.line}, {"reason", e.reason}};
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        fn(number, view);
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
}

std::vector<std::pair<std::size_t, json>> read_json_lines(const std::filesystem::path& path,
                                                          std::vector<LineError>& errors) {
    std::vector<std::pair<std::size_t, json>> out;
    for_each_line(path, [&](std::size_t number, std::string_view line) {
        if (line.find_first_not_of(" \t") == std::string_view::npos) return;
        try {
            out.emplace_back(number, json::parse(line));
        } catch (const json::parse_error& e) {
            errors.push_back({number, std::string("invalid JSON: ") + e.what()});
        }
    });
    return out;
}

void write_json_line(std::ostream& out, const json& value) {
    out << value.dump() << '\n';
}

std::size_t write_json_lines(const std::filesystem::path& path, const std::vector<json>& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& v : values) write_json_line(out, v);
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
    return values.size();
}

void write_line_errors(const std::filesystem::path& path, const std::vector<LineError>& errors) {
    std::vector<json> values;
    values.reserve(errors.size());
    for (const auto& e : errors) values.push_back(to_json(e));
    write_json_lines(path, values);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failure on " + path.string());
}

AppendLog::AppendLog(std::filesystem::path path) : path_(std::move(path)) {
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open log " + path_.string());
}

void AppendLog::append(const json& value) {
    const std::string line = value.dump() + '\n';
    std::lock_guard lock(mutex_);
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) throw IoError("append failure on " + path_.string());
}

}  // namespace guidelm
