#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace devforge {

using json = nlohmann::json;

struct JsonlError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Streams one parsed object per non-empty line. Throws JsonlError on
// unreadable files or lines that are not a single JSON object.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(json&&)>& sink) {
    std::ifstream in(path);
    if (!in) {
        throw JsonlError("cannot open " + path.string());
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded()) {
            throw JsonlError(path.string() + ":" + std::to_string(lineno) +
                             ": malformed JSON line");
        }
        sink(std::move(row));
    }
}

inline std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::vector<json> rows;
    for_each_jsonl(path, [&](json&& row) { rows.push_back(std::move(row)); });
    return rows;
}

// Variant for upstream data of unknown quality: unparseable lines are
// reported, not fatal.
inline std::size_t for_each_jsonl_lenient(const std::filesystem::path& path,
                                          const std::function<void(json&&)>& sink) {
    std::ifstream in(path);
    if (!in) {
        throw JsonlError("cannot open " + path.string());
    }
    std::string line;
    std::size_t bad_lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded()) {
            ++bad_lines;
            continue;
        }
        sink(std::move(row));
    }
    return bad_lines;
}

// One compact object per line, UTF-8, '\n' terminated.
class JsonlWriter {
  public:
    explicit JsonlWriter(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) {
            throw JsonlError("cannot write " + path.string());
        }
    }

    void write(const json& row) {
        out_ << row.dump() << '\n';
        if (!out_) {
            throw JsonlError("write failed");
        }
        ++rows_;
    }

    std::size_t rows_written() const { return rows_; }

  private:
    std::ofstream out_;
    std::size_t rows_ = 0;
};

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<json>& rows) {
    JsonlWriter w(path);
    for (const auto& row : rows) {
        w.write(row);
    }
}

}  // namespace devforge
