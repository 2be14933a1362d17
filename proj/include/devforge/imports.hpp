#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace devforge::imports {

struct PatternTimeoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedNotebookError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpecTableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LanguageId : std::uint8_t {
    C,
    CSharp,
    Java,
    Fortran,
    Go,
    JavaScript,
    Python,
    R,
    Rust,
    Scala,
    Perl,
    Ruby,
    Dart,
    Kotlin,
    TypeScript,
    Julia,
    JupyterNotebook,
};

inline constexpr std::array<LanguageId, 17> kAllLanguages = {
    LanguageId::C,          LanguageId::CSharp,     LanguageId::Java,
    LanguageId::Fortran,    LanguageId::Go,         LanguageId::JavaScript,
    LanguageId::Python,     LanguageId::R,          LanguageId::Rust,
    LanguageId::Scala,      LanguageId::Perl,       LanguageId::Ruby,
    LanguageId::Dart,       LanguageId::Kotlin,     LanguageId::TypeScript,
    LanguageId::Julia,      LanguageId::JupyterNotebook,
};

inline std::string_view to_string(LanguageId id) {
    switch (id) {
        case LanguageId::C: return "C";
        case LanguageId::CSharp: return "CSharp";
        case LanguageId::Java: return "Java";
        case LanguageId::Fortran: return "Fortran";
        case LanguageId::Go: return "Go";
        case LanguageId::JavaScript: return "JavaScript";
        case LanguageId::Python: return "Python";
        case LanguageId::R: return "R";
        case LanguageId::Rust: return "Rust";
        case LanguageId::Scala: return "Scala";
        case LanguageId::Perl: return "Perl";
        case LanguageId::Ruby: return "Ruby";
        case LanguageId::Dart: return "Dart";
        case LanguageId::Kotlin: return "Kotlin";
        case LanguageId::TypeScript: return "TypeScript";
        case LanguageId::Julia: return "Julia";
        case LanguageId::JupyterNotebook: return "JupyterNotebook";
    }
    throw SpecTableError("invalid LanguageId value");
}

inline std::optional<LanguageId> language_from_string(std::string_view name) {
    for (LanguageId id : kAllLanguages) {
        if (to_string(id) == name) {
            return id;
        }
    }
    return std::nullopt;
}

// One line-scoped regular expression; capture group `group` is the import
// name. With comma_list the captured text is a comma-separated list and the
// first whitespace-delimited word of each piece is taken.
struct ExtractionPattern {
    std::string text;
    int group = 1;
    bool icase = false;
    bool comma_list = false;
    std::regex compiled;
};

// Multi-line grouped-import syntax (Go's `import ( ... )`): member patterns
// apply to lines between a start and an end line.
struct BlockRule {
    std::string start_text;
    std::string end_text;
    std::regex start;
    std::regex end;
    ExtractionPattern member;
};

struct LanguageSpec {
    LanguageId language;
    std::vector<std::string> extensions;  // lowercase, dot-prefixed
    std::vector<ExtractionPattern> patterns;
    std::vector<BlockRule> blocks;
};

// The versioned pattern table. data/language_specs.json carries the same
// content; a test pins the two together.
inline const char* builtin_spec_json() {
    return R"JSON({
  "version": 1,
  "languages": [
    {
      "language": "C",
      "extensions": [".c", ".h"],
      "patterns": [
        {"pattern": "^\\s*#\\s*include\\s*[<\"]([^>\"]+)[>\"]", "group": 1}
      ]
    },
    {
      "language": "CSharp",
      "extensions": [".cs"],
      "patterns": [
        {"pattern": "^\\s*using\\s+(?:static\\s+)?([A-Za-z_][\\w.]*)\\s*;", "group": 1}
      ]
    },
    {
      "language": "Java",
      "extensions": [".java"],
      "patterns": [
        {"pattern": "^\\s*import\\s+(?:static\\s+)?([\\w.]+)(?:\\.\\*)?\\s*;", "group": 1}
      ]
    },
    {
      "language": "Fortran",
      "extensions": [".f", ".for", ".f77", ".f90", ".f95", ".f03", ".f08"],
      "patterns": [
        {"pattern": "^\\s*use\\s*(?:,\\s*[a-z_]\\w*\\s*)?(?:::)?\\s*([a-z]\\w*)", "group": 1, "icase": true},
        {"pattern": "^\\s*include\\s+['\"]([^'\"]+)['\"]", "group": 1, "icase": true}
      ]
    },
    {
      "language": "Go",
      "extensions": [".go"],
      "patterns": [
        {"pattern": "^\\s*import\\s+(?:[\\w.]+\\s+)?\"([^\"]+)\"", "group": 1}
      ],
      "blocks": [
        {
          "start": "^\\s*import\\s*\\(",
          "end": "^\\s*\\)",
          "member": {"pattern": "^\\s*(?:[\\w.]+\\s+)?\"([^\"]+)\"", "group": 1}
        }
      ]
    },
    {
      "language": "JavaScript",
      "extensions": [".js", ".mjs", ".cjs", ".jsx"],
      "patterns": [
        {"pattern": "^\\s*import\\b[^'\"]*\\bfrom\\s+['\"]([^'\"]+)['\"]", "group": 1},
        {"pattern": "^\\s*import\\s+['\"]([^'\"]+)['\"]", "group": 1},
        {"pattern": "\\brequire\\s*\\(\\s*['\"]([^'\"]+)['\"]\\s*\\)", "group": 1},
        {"pattern": "^\\s*export\\b[^'\"]*\\bfrom\\s+['\"]([^'\"]+)['\"]", "group": 1}
      ]
    },
    {
      "language": "Python",
      "extensions": [".py", ".pyw"],
      "patterns": [
        {"pattern": "^\\s*from\\s+([.\\w]+)\\s+import\\b", "group": 1},
        {"pattern": "^\\s*import\\s+([\\w. ,]+)", "group": 1, "comma_list": true}
      ]
    },
    {
      "language": "R",
      "extensions": [".r"],
      "patterns": [
        {"pattern": "^\\s*(?:library|require|requireNamespace)\\s*\\(\\s*[\"']?([\\w.]+)[\"']?", "group": 1}
      ]
    },
    {
      "language": "Rust",
      "extensions": [".rs"],
      "patterns": [
        {"pattern": "^\\s*(?:pub(?:\\s*\\([^)]*\\))?\\s+)?use\\s+([A-Za-z_][\\w:]*)", "group": 1},
        {"pattern": "^\\s*extern\\s+crate\\s+([A-Za-z_]\\w*)", "group": 1}
      ]
    },
    {
      "language": "Scala",
      "extensions": [".scala", ".sc"],
      "patterns": [
        {"pattern": "^\\s*import\\s+([\\w.]+)", "group": 1}
      ]
    },
    {
      "language": "Perl",
      "extensions": [".pl", ".pm"],
      "patterns": [
        {"pattern": "^\\s*(?:use|require)\\s+([A-Za-z_][\\w:]*)", "group": 1},
        {"pattern": "^\\s*require\\s+['\"]([^'\"]+)['\"]", "group": 1}
      ]
    },
    {
      "language": "Ruby",
      "extensions": [".rb"],
      "patterns": [
        {"pattern": "^\\s*require(?:_relative)?\\s+['\"]([^'\"]+)['\"]", "group": 1}
      ]
    },
    {
      "language": "Dart",
      "extensions": [".dart"],
      "patterns": [
        {"pattern": "^\\s*import\\s+['\"]([^'\"]+)['\"]", "group": 1},
        {"pattern": "^\\s*export\\s+['\"]([^'\"]+)['\"]", "group": 1}
      ]
    },
    {
      "language": "Kotlin",
      "extensions": [".kt", ".kts"],
      "patterns": [
        {"pattern": "^\\s*import\\s+([\\w.]+)", "group": 1}
      ]
    },
    {
      "language": "TypeScript",
      "extensions": [".ts", ".tsx"],
      "patterns": [
        {"pattern": "^\\s*import\\b[^'\"]*\\bfrom\\s+['\"]([^'\"]+)['\"]", "group": 1},
        {"pattern": "^\\s*import\\s+['\"]([^'\"]+)['\"]", "group": 1},
        {"pattern": "\\brequire\\s*\\(\\s*['\"]([^'\"]+)['\"]\\s*\\)", "group": 1},
        {"pattern": "^\\s*export\\b[^'\"]*\\bfrom\\s+['\"]([^'\"]+)['\"]", "group": 1}
      ]
    },
    {
      "language": "Julia",
      "extensions": [".jl"],
      "patterns": [
        {"pattern": "^\\s*using\\s+([\\w.]+(?:\\s*,\\s*[\\w.]+)*)", "group": 1, "comma_list": true},
        {"pattern": "^\\s*import\\s+([\\w.]+(?:\\s*,\\s*[\\w.]+)*)", "group": 1, "comma_list": true}
      ]
    },
    {
      "language": "JupyterNotebook",
      "extensions": [".ipynb"],
      "patterns": []
    }
  ]
})JSON";
}

namespace detail {

inline ExtractionPattern compile_pattern(const nlohmann::json& p) {
    ExtractionPattern out;
    out.text = p.at("pattern").get<std::string>();
    out.group = p.value("group", 1);
    out.icase = p.value("icase", false);
    out.comma_list = p.value("comma_list", false);
    auto flags = std::regex::ECMAScript | std::regex::optimize;
    if (out.icase) {
        flags |= std::regex::icase;
    }
    try {
        out.compiled = std::regex(out.text, flags);
    } catch (const std::regex_error& e) {
        throw SpecTableError("bad pattern '" + out.text + "': " + e.what());
    }
    if (out.group < 1) {
        throw SpecTableError("pattern '" + out.text + "' has no capture group index");
    }
    return out;
}

}  // namespace detail

inline std::vector<LanguageSpec> parse_language_specs(const nlohmann::json& doc) {
    std::vector<LanguageSpec> specs;
    for (const auto& entry : doc.at("languages")) {
        LanguageSpec spec;
        auto id = language_from_string(entry.at("language").get<std::string>());
        if (!id) {
            throw SpecTableError("unknown language in spec table: " +
                                 entry.at("language").get<std::string>());
        }
        spec.language = *id;
        for (const auto& ext : entry.at("extensions")) {
            spec.extensions.push_back(ext.get<std::string>());
        }
        if (entry.contains("patterns")) {
            for (const auto& p : entry["patterns"]) {
                spec.patterns.push_back(detail::compile_pattern(p));
            }
        }
        if (entry.contains("blocks")) {
            for (const auto& b : entry["blocks"]) {
                BlockRule rule;
                rule.start_text = b.at("start").get<std::string>();
                rule.end_text = b.at("end").get<std::string>();
                rule.start = std::regex(rule.start_text);
                rule.end = std::regex(rule.end_text);
                rule.member = detail::compile_pattern(b.at("member"));
                spec.blocks.push_back(std::move(rule));
            }
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

inline const std::vector<LanguageSpec>& language_specs() {
    static const std::vector<LanguageSpec> specs =
        parse_language_specs(nlohmann::json::parse(builtin_spec_json()));
    return specs;
}

inline const LanguageSpec& spec_for(LanguageId id) {
    for (const auto& spec : language_specs()) {
        if (spec.language == id) {
            return spec;
        }
    }
    throw SpecTableError("no spec for language " + std::string(to_string(id)));
}

// Case-insensitive extension lookup; unknown extensions map to nullopt.
inline std::optional<LanguageId> detect_language(const std::string& file_path) {
    auto dot = file_path.find_last_of('.');
    if (dot == std::string::npos) {
        return std::nullopt;
    }
    auto slash = file_path.find_last_of("/\\");
    if (slash != std::string::npos && dot < slash) {
        return std::nullopt;
    }
    std::string ext = file_path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const auto& spec : language_specs()) {
        for (const auto& known : spec.extensions) {
            if (known == ext) {
                return spec.language;
            }
        }
    }
    return std::nullopt;
}

namespace detail {

inline bool has_whitespace(const std::string& s) {
    return s.find_first_of(" \t\r\n\f\v") != std::string::npos;
}

// Normalizes a captured import name: quote/semicolon/comma trim, leading
// ./ and ../ segments stripped, leading dots stripped, trailing wildcard
// leftovers ("._", trailing dots) stripped.
inline std::string clean_import_name(std::string name) {
    auto drop_edges = [&](auto pred) {
        while (!name.empty() && pred(name.front())) {
            name.erase(name.begin());
        }
        while (!name.empty() && pred(name.back())) {
            name.pop_back();
        }
    };
    drop_edges([](char c) {
        return c == '\'' || c == '"' || c == ';' || c == ',' || c == ' ' ||
               c == '\t' || c == '\r';
    });
    while (name.rfind("./", 0) == 0 || name.rfind("../", 0) == 0) {
        name.erase(0, name.find('/') + 1);
    }
    while (!name.empty() && name.front() == '.') {
        name.erase(name.begin());
    }
    if (name.size() >= 2 && name.compare(name.size() - 2, 2, "._") == 0) {
        name.erase(name.size() - 2);
    }
    while (!name.empty() && (name.back() == '.' || name.back() == ':')) {
        name.pop_back();
    }
    return name;
}

inline void emit_captured(const std::string& captured, bool comma_list,
                          std::vector<std::string>& out) {
    auto push = [&](std::string name) {
        name = clean_import_name(std::move(name));
        if (!name.empty() && !has_whitespace(name)) {
            out.push_back(std::move(name));
        }
    };
    if (!comma_list) {
        push(captured);
        return;
    }
    std::size_t start = 0;
    while (start <= captured.size()) {
        std::size_t comma = captured.find(',', start);
        std::string piece = captured.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        // "name as alias" keeps only the name.
        std::size_t a = piece.find_first_not_of(" \t");
        if (a != std::string::npos) {
            std::size_t b = piece.find_first_of(" \t", a);
            push(piece.substr(a, b == std::string::npos ? std::string::npos : b - a));
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
}

struct LineMatch {
    std::size_t pos;
    std::string captured;
    bool comma_list;
};

inline void match_line(const std::string& line,
                       const std::vector<const ExtractionPattern*>& patterns,
                       std::vector<std::string>& out) {
    std::vector<LineMatch> found;
    for (const auto* pat : patterns) {
        auto begin = std::sregex_iterator(line.begin(), line.end(), pat->compiled);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            const std::smatch& m = *it;
            if (static_cast<int>(m.size()) <= pat->group || !m[pat->group].matched) {
                continue;
            }
            found.push_back({static_cast<std::size_t>(m.position(pat->group)),
                             m[pat->group].str(), pat->comma_list});
        }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const LineMatch& a, const LineMatch& b) { return a.pos < b.pos; });
    for (const auto& m : found) {
        emit_captured(m.captured, m.comma_list, out);
    }
}

}  // namespace detail

inline constexpr std::chrono::milliseconds kDefaultExtractBudget{2000};

// All pattern matches' capture groups in textual order, duplicates preserved.
// Throws PatternTimeoutError when one file exceeds the wall budget.
inline std::vector<std::string> extract_imports(
    const std::string& content, LanguageId language,
    std::chrono::milliseconds budget = kDefaultExtractBudget);

inline std::vector<std::string> extract_from_notebook(
    const std::string& content,
    std::chrono::milliseconds budget = kDefaultExtractBudget) {
    nlohmann::json nb = nlohmann::json::parse(content, nullptr, false);
    if (nb.is_discarded() || !nb.is_object() || !nb.contains("cells") ||
        !nb["cells"].is_array()) {
        throw MalformedNotebookError("notebook is not a JSON object with cells");
    }
    std::vector<std::string> imports;
    for (const auto& cell : nb["cells"]) {
        if (!cell.is_object() || cell.value("cell_type", "") != "code") {
            continue;
        }
        std::string source;
        const auto& src = cell.contains("source") ? cell["source"] : nlohmann::json();
        if (src.is_string()) {
            source = src.get<std::string>();
        } else if (src.is_array()) {
            for (const auto& piece : src) {
                if (piece.is_string()) {
                    source += piece.get<std::string>();
                }
            }
        }
        auto cell_imports = extract_imports(source, LanguageId::Python, budget);
        imports.insert(imports.end(), cell_imports.begin(), cell_imports.end());
    }
    return imports;
}

inline std::vector<std::string> extract_imports(const std::string& content,
                                                LanguageId language,
                                                std::chrono::milliseconds budget) {
    if (language == LanguageId::JupyterNotebook) {
        return extract_from_notebook(content, budget);
    }
    const LanguageSpec& spec = spec_for(language);
    const auto deadline = std::chrono::steady_clock::now() + budget;

    std::vector<const ExtractionPattern*> line_patterns;
    for (const auto& p : spec.patterns) {
        line_patterns.push_back(&p);
    }

    std::vector<std::string> out;
    const BlockRule* open_block = nullptr;
    std::size_t start = 0;
    while (start <= content.size()) {
        if (std::chrono::steady_clock::now() > deadline) {
            throw PatternTimeoutError("import extraction exceeded wall budget");
        }
        std::size_t nl = content.find('\n', start);
        std::string line = content.substr(
            start, nl == std::string::npos ? std::string::npos : nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }

        if (open_block != nullptr) {
            if (std::regex_search(line, open_block->end)) {
                open_block = nullptr;
            } else {
                detail::match_line(line, {&open_block->member}, out);
            }
        } else {
            bool opened = false;
            for (const auto& block : spec.blocks) {
                if (std::regex_search(line, block.start)) {
                    open_block = &block;
                    opened = true;
                    break;
                }
            }
            if (!opened && !line_patterns.empty()) {
                detail::match_line(line, line_patterns, out);
            }
        }

        if (nl == std::string::npos) {
            break;
        }
        start = nl + 1;
    }
    return out;
}

}  // namespace devforge::imports
