#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "devforge/facts.hpp"
#include "devforge/stopwords.hpp"
#include "devforge/types.hpp"

namespace devforge::corpus {

namespace detail {

inline bool is_kept_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
           c == '#' || c == '.' || c == '-' || c == '_';
}

// Edge stripping keeps meaningful suffixes: "c++", "c#", "node.js" survive,
// "#crypto" -> "crypto", "end." -> "end".
inline void strip_token_edges(std::string& tok) {
    std::size_t begin = 0;
    while (begin < tok.size() && (tok[begin] == '.' || tok[begin] == '-' ||
                                  tok[begin] == '_' || tok[begin] == '#')) {
        ++begin;
    }
    std::size_t end = tok.size();
    while (end > begin &&
           (tok[end - 1] == '.' || tok[end - 1] == '-' || tok[end - 1] == '_')) {
        --end;
    }
    tok = tok.substr(begin, end - begin);
}

inline bool has_letter(const std::string& tok) {
    for (char c : tok) {
        if (c >= 'a' && c <= 'z') {
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Lowercases, splits on anything outside [a-z0-9+#.-_], strips edge
// punctuation, drops letterless tokens, stopwords, and empties. Total and
// idempotent on its own output.
inline std::vector<std::string> clean_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) {
            return;
        }
        detail::strip_token_edges(current);
        if (!current.empty() && detail::has_letter(current) &&
            stopword_set().count(current) == 0) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
        if (detail::is_kept_char(c)) {
            current.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

// Per developer: tokens from name, tags, topic, readme of every repo, in
// stream order. Developers with zero repos are absent.
inline std::map<std::string, TaggedDocument> build_repo_documents(
    std::span<const RepoFacts> repos) {
    std::map<std::string, TaggedDocument> docs;
    for (const RepoFacts& repo : repos) {
        TaggedDocument& doc = docs[repo.developer_id];
        doc.tag = repo.developer_id;
        auto append = [&](std::string_view text) {
            auto toks = clean_tokenize(text);
            doc.tokens.insert(doc.tokens.end(), toks.begin(), toks.end());
        };
        append(repo.name);
        for (const auto& tag : repo.tags) {
            append(tag);
        }
        append(repo.topic);
        append(repo.readme);
    }
    return docs;
}

// Per developer: title tokens then body tokens, issue by issue in stream
// order. The relation field does not affect tokens.
inline std::map<std::string, TaggedDocument> build_issue_documents(
    std::span<const IssueFacts> issues) {
    std::map<std::string, TaggedDocument> docs;
    for (const IssueFacts& issue : issues) {
        TaggedDocument& doc = docs[issue.developer_id];
        doc.tag = issue.developer_id;
        auto append = [&](std::string_view text) {
            auto toks = clean_tokenize(text);
            doc.tokens.insert(doc.tokens.end(), toks.begin(), toks.end());
        };
        append(issue.title);
        append(issue.body);
    }
    return docs;
}

using ImportExtractor =
    std::function<std::vector<std::string>(const CommitSnapshot&)>;

struct ApiAggregation {
    std::map<std::string, std::map<std::string, std::uint64_t>> per_developer;
    std::size_t snapshots_failed = 0;
};

// Sums import occurrences per developer over all snapshots; repetition is
// preserved. A snapshot whose extraction throws is skipped and counted.
inline ApiAggregation build_api_multisets(std::span<const CommitSnapshot> snapshots,
                                          const ImportExtractor& extractor) {
    ApiAggregation out;
    for (const CommitSnapshot& snap : snapshots) {
        std::vector<std::string> names;
        try {
            names = extractor(snap);
        } catch (const std::exception&) {
            ++out.snapshots_failed;
            continue;
        }
        if (names.empty()) {
            continue;
        }
        auto& counts = out.per_developer[snap.developer_id];
        for (const auto& name : names) {
            ++counts[name];
        }
    }
    return out;
}

inline ImportExtractor default_extractor(
    std::chrono::milliseconds budget = imports::kDefaultExtractBudget) {
    return [budget](const CommitSnapshot& snap) {
        return imports::extract_imports(snap.content, snap.language, budget);
    };
}

// Joins the per-source views into per-developer records. Developers without
// any evidence never enter a pipeline and are left out here.
inline std::vector<DeveloperRecord> assemble_records(
    const std::map<std::string, std::optional<RoleLabel>>& developers,
    const std::map<std::string, TaggedDocument>& docs_repos,
    const std::map<std::string, TaggedDocument>& docs_issues,
    const std::map<std::string, std::map<std::string, std::uint64_t>>& api_counts) {
    std::vector<DeveloperRecord> records;
    for (const auto& [id, role] : developers) {
        DeveloperRecord record;
        record.developer_id = id;
        record.role = role;
        if (auto it = docs_repos.find(id); it != docs_repos.end()) {
            record.doc_repos = it->second;
        }
        if (auto it = docs_issues.find(id); it != docs_issues.end()) {
            record.doc_issues = it->second;
        }
        if (auto it = api_counts.find(id); it != api_counts.end()) {
            record.api_multiset = it->second;
        }
        if (record.doc_repos || record.doc_issues || record.api_multiset) {
            records.push_back(std::move(record));
        }
    }
    return records;
}

}  // namespace devforge::corpus
