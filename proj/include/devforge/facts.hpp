#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "devforge/imports.hpp"
#include "devforge/types.hpp"

namespace devforge {

using json = nlohmann::json;

// A record that violates its type invariants or the exchange schema.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class IssueRelation : std::uint8_t {
    Assigned = 0,   // strongest
    Created = 1,
    Participated = 2,
};

inline std::string_view to_string(IssueRelation r) {
    switch (r) {
        case IssueRelation::Assigned: return "assigned";
        case IssueRelation::Created: return "created";
        case IssueRelation::Participated: return "participated";
    }
    throw ValidationError("invalid IssueRelation value");
}

inline IssueRelation relation_from_string(std::string_view name) {
    if (name == "assigned") return IssueRelation::Assigned;
    if (name == "created") return IssueRelation::Created;
    if (name == "participated") return IssueRelation::Participated;
    throw ValidationError("unknown issue relation: " + std::string(name));
}

struct RepoFacts {
    std::string developer_id;
    std::string repo_full_name;
    std::string name;
    std::vector<std::string> tags;
    std::string topic;
    std::string readme;
    std::optional<std::string> forked_from;
};

struct IssueFacts {
    std::string developer_id;
    std::string issue_id;
    std::string title;
    std::string body;
    IssueRelation relation = IssueRelation::Participated;
};

struct CommitSnapshot {
    std::string developer_id;
    std::string commit_sha;  // lowercase hex, length 40
    std::string file_path;
    imports::LanguageId language = imports::LanguageId::C;
    std::string content;
};

namespace detail {

inline void require_keys(const json& row, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
    for (const char* key : required) {
        if (!row.contains(key)) {
            throw ValidationError(std::string("missing field: ") + key);
        }
    }
    for (auto it = row.begin(); it != row.end(); ++it) {
        bool known = false;
        for (const char* key : required) {
            if (it.key() == key) known = true;
        }
        for (const char* key : optional) {
            if (it.key() == key) known = true;
        }
        if (!known) {
            throw ValidationError("unknown field: " + it.key());
        }
    }
}

inline bool is_repo_full_name(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == s.size()) {
        return false;
    }
    if (s.find('/', slash + 1) != std::string::npos) {
        return false;
    }
    return s.find_first_of(" \t\r\n") == std::string::npos;
}

inline bool is_lower_hex40(const std::string& s) {
    if (s.size() != 40) {
        return false;
    }
    for (char c : s) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

inline json to_json(const RepoFacts& r) {
    json row{{"developer_id", r.developer_id},
             {"repo_full_name", r.repo_full_name},
             {"name", r.name},
             {"tags", r.tags},
             {"topic", r.topic},
             {"readme", r.readme}};
    if (r.forked_from) {
        row["forked_from"] = *r.forked_from;
    }
    return row;
}

inline RepoFacts repo_facts_from_json(const json& row) {
    detail::require_keys(
        row, {"developer_id", "repo_full_name", "name", "tags", "topic", "readme"},
        {"forked_from"});
    RepoFacts r;
    r.developer_id = row.at("developer_id").get<std::string>();
    r.repo_full_name = row.at("repo_full_name").get<std::string>();
    r.name = row.at("name").get<std::string>();
    r.tags = row.at("tags").get<std::vector<std::string>>();
    r.topic = row.at("topic").get<std::string>();
    r.readme = row.at("readme").get<std::string>();
    if (row.contains("forked_from")) {
        r.forked_from = row.at("forked_from").get<std::string>();
    }
    if (r.developer_id.empty()) {
        throw ValidationError("developer_id empty");
    }
    if (r.name.empty()) {
        throw ValidationError("repo name empty");
    }
    if (!detail::is_repo_full_name(r.repo_full_name)) {
        throw ValidationError("repo_full_name not owner/name: " + r.repo_full_name);
    }
    return r;
}

inline json to_json(const IssueFacts& f) {
    return json{{"developer_id", f.developer_id},
                {"issue_id", f.issue_id},
                {"title", f.title},
                {"body", f.body},
                {"relation", std::string(to_string(f.relation))}};
}

inline IssueFacts issue_facts_from_json(const json& row) {
    detail::require_keys(row, {"developer_id", "issue_id", "title", "body", "relation"});
    IssueFacts f;
    f.developer_id = row.at("developer_id").get<std::string>();
    f.issue_id = row.at("issue_id").get<std::string>();
    f.title = row.at("title").get<std::string>();
    f.body = row.at("body").get<std::string>();
    f.relation = relation_from_string(row.at("relation").get<std::string>());
    if (f.developer_id.empty() || f.issue_id.empty()) {
        throw ValidationError("developer_id/issue_id empty");
    }
    return f;
}

inline json to_json(const CommitSnapshot& s) {
    return json{{"developer_id", s.developer_id},
                {"commit_sha", s.commit_sha},
                {"file_path", s.file_path},
                {"language", std::string(imports::to_string(s.language))},
                {"content", s.content}};
}

inline CommitSnapshot commit_snapshot_from_json(const json& row) {
    detail::require_keys(row,
                         {"developer_id", "commit_sha", "file_path", "language", "content"});
    CommitSnapshot s;
    s.developer_id = row.at("developer_id").get<std::string>();
    s.commit_sha = row.at("commit_sha").get<std::string>();
    s.file_path = row.at("file_path").get<std::string>();
    auto lang = imports::language_from_string(row.at("language").get<std::string>());
    if (!lang) {
        throw ValidationError("unknown language: " +
                              row.at("language").get<std::string>());
    }
    s.language = *lang;
    s.content = row.at("content").get<std::string>();
    if (s.developer_id.empty()) {
        throw ValidationError("developer_id empty");
    }
    if (!detail::is_lower_hex40(s.commit_sha)) {
        throw ValidationError("commit_sha not 40-char lowercase hex: " + s.commit_sha);
    }
    return s;
}

}  // namespace devforge
