#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "devforge/facts.hpp"
#include "devforge/imports.hpp"
#include "devforge/jsonl.hpp"

namespace devforge::miner {

struct MinerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AuthError : MinerError {
    using MinerError::MinerError;
};

struct RateLimitedError : MinerError {
    using MinerError::MinerError;
};

enum class SourceKind : std::uint8_t { Repos, Issues, Apis };

inline std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::Repos: return "repos";
        case SourceKind::Issues: return "issues";
        case SourceKind::Apis: return "apis";
    }
    throw MinerError("invalid SourceKind value");
}

struct AcquisitionJob {
    std::string developer_login;
    std::set<SourceKind> sources;
    std::optional<std::string> since;  // ISO-8601
    std::filesystem::path output_dir;

    void validate() const {
        if (developer_login.empty() ||
            developer_login.find_first_of(" \t\r\n") != std::string::npos) {
            throw MinerError("developer_login must be nonempty without whitespace");
        }
        if (sources.empty()) {
            throw MinerError("job needs at least one source");
        }
    }
};

// Refill-on-demand token bucket; the caller performs the returned wait
// before issuing its request, so the requests/second budget is never
// exceeded.
class TokenBucket {
  public:
    explicit TokenBucket(double rate_per_second, double burst = 1.0)
        : rate_(rate_per_second), burst_(burst), tokens_(burst) {}

    std::chrono::duration<double> acquire(std::chrono::steady_clock::time_point now) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (initialized_) {
            const std::chrono::duration<double> dt = now - last_;
            tokens_ = std::min(burst_, tokens_ + dt.count() * rate_);
        }
        last_ = now;
        initialized_ = true;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return std::chrono::duration<double>(0.0);
        }
        const double wait = (1.0 - tokens_) / rate_;
        tokens_ = 0.0;
        last_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(wait));
        return std::chrono::duration<double>(wait);
    }

  private:
    double rate_;
    double burst_;
    double tokens_;
    bool initialized_ = false;
    std::chrono::steady_clock::time_point last_{};
    std::mutex mutex_;
};

struct MinerOptions {
    std::optional<std::filesystem::path> fixture_dir;
    std::string base_url = "https://api.github.com";
    std::string token;  // falls back to DEV2VEC_GH_TOKEN
    double requests_per_second = 1.0;
    std::size_t max_file_bytes = 1 << 20;
    int max_retries = 5;
    std::chrono::milliseconds backoff_base{1000};
};

struct MinerStats {
    std::atomic<std::size_t> emitted{0};
    std::atomic<std::size_t> dropped_invalid{0};
    std::atomic<std::size_t> skipped_oversized{0};
    std::atomic<std::size_t> skipped_unsupported{0};
    std::atomic<std::size_t> warnings{0};
};

namespace detail {

inline std::string base64_decode(const std::string& in) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    int buffer = 0;
    int bits = 0;
    for (char c : in) {
        if (c == '=' || c == '\n' || c == '\r' || c == ' ') {
            continue;
        }
        const int v = value_of(c);
        if (v < 0) {
            continue;
        }
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
        }
    }
    return out;
}

inline std::string url_encode_query(const std::string& q) {
    std::string out;
    for (unsigned char c : q) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' ||
            c == '+' || c == ':' || c == '/' || c == '>' || c == '=') {
            out.push_back(static_cast<char>(c));
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace detail

// Acquires GitHub evidence over HTTP, or replays a fixture directory in
// fully offline mode. A single instance may be shared by concurrent jobs;
// the request budget is enforced through one token bucket.
class GithubMiner {
  public:
    explicit GithubMiner(MinerOptions options)
        : options_(std::move(options)),
          bucket_(options_.requests_per_second,
                  std::max(1.0, options_.requests_per_second)) {
        if (options_.token.empty()) {
            if (const char* env = std::getenv("DEV2VEC_GH_TOKEN")) {
                options_.token = env;
            }
        }
    }

    const MinerStats& stats() const { return stats_; }

    std::vector<RepoFacts> fetch_repos(const AcquisitionJob& job) {
        job.validate();
        if (options_.fixture_dir) {
            return fixture_records<RepoFacts>(*options_.fixture_dir / "repos.jsonl",
                                              job.developer_login,
                                              repo_facts_from_json);
        }
        return live_repos(job);
    }

    std::vector<IssueFacts> fetch_issues(const AcquisitionJob& job) {
        job.validate();
        if (options_.fixture_dir) {
            return fixture_records<IssueFacts>(*options_.fixture_dir / "issues.jsonl",
                                               job.developer_login,
                                               issue_facts_from_json);
        }
        return live_issues(job);
    }

    std::vector<CommitSnapshot> fetch_commit_snapshots(const AcquisitionJob& job) {
        job.validate();
        if (options_.fixture_dir) {
            return fixture_records<CommitSnapshot>(
                *options_.fixture_dir / "snapshots.jsonl", job.developer_login,
                commit_snapshot_from_json);
        }
        return live_snapshots(job);
    }

  private:
    template <typename Fact, typename Parser>
    std::vector<Fact> fixture_records(const std::filesystem::path& path,
                                      const std::string& login, Parser parse) {
        std::vector<Fact> out;
        if (!std::filesystem::exists(path)) {
            return out;
        }
        const std::size_t bad_lines = for_each_jsonl_lenient(path, [&](json&& row) {
            try {
                Fact fact = parse(row);
                if (fact.developer_id == login) {
                    out.push_back(std::move(fact));
                    stats_.emitted.fetch_add(1);
                }
            } catch (const ValidationError& e) {
                stats_.dropped_invalid.fetch_add(1);
                warn(std::string("dropped invalid fixture record: ") + e.what());
            }
        });
        for (std::size_t i = 0; i < bad_lines; ++i) {
            stats_.dropped_invalid.fetch_add(1);
            warn("dropped unparseable fixture line in " + path.filename().string());
        }
        return out;
    }

    void warn(const std::string& message) {
        stats_.warnings.fetch_add(1);
        std::cerr << "[miner] warning: " << message << '\n';
    }

    // GET with token-bucket pacing, auth, retry/backoff. nullopt on 404.
    std::optional<json> get_json(const std::string& path, const AcquisitionJob& job,
                                 SourceKind source) {
        for (int attempt = 0;; ++attempt) {
            const auto wait = bucket_.acquire(std::chrono::steady_clock::now());
            if (wait.count() > 0) {
                std::this_thread::sleep_for(wait);
            }
            httplib::Client client(options_.base_url);
            client.set_connection_timeout(std::chrono::seconds(10));
            client.set_read_timeout(std::chrono::seconds(30));
            httplib::Headers headers{{"Accept", "application/vnd.github+json"},
                                     {"User-Agent", "devforge-miner"}};
            if (!options_.token.empty()) {
                headers.emplace("Authorization", "Bearer " + options_.token);
            }
            auto res = client.Get(path, headers);
            if (!res) {
                throw MinerError("transport failure on GET " + path + ": " +
                                 httplib::to_string(res.error()));
            }
            if (res->status == 404) {
                return std::nullopt;
            }
            if (res->status == 401 ||
                (res->status == 403 && !res->has_header("Retry-After"))) {
                throw AuthError("HTTP " + std::to_string(res->status) + " on " + path);
            }
            if (res->status == 429 ||
                (res->status == 403 && res->has_header("Retry-After"))) {
                if (attempt + 1 >= options_.max_retries) {
                    write_checkpoint(job, source, path);
                    throw RateLimitedError("rate limited on " + path + " after " +
                                           std::to_string(options_.max_retries) +
                                           " attempts; checkpoint written");
                }
                std::this_thread::sleep_for(options_.backoff_base * (1 << attempt));
                continue;
            }
            if (res->status != 200) {
                throw MinerError("HTTP " + std::to_string(res->status) + " on " + path);
            }
            json body = json::parse(res->body, nullptr, false);
            if (body.is_discarded()) {
                throw MinerError("non-JSON body on " + path);
            }
            return body;
        }
    }

    void write_checkpoint(const AcquisitionJob& job, SourceKind source,
                          const std::string& path) {
        if (job.output_dir.empty()) {
            return;
        }
        std::error_code ec;
        std::filesystem::create_directories(job.output_dir, ec);
        json checkpoint{{"developer_login", job.developer_login},
                        {"source", std::string(to_string(source))},
                        {"resume_path", path}};
        std::ofstream out(job.output_dir / "checkpoint.json",
                          std::ios::binary | std::ios::trunc);
        out << checkpoint.dump(2) << '\n';
    }

    std::optional<std::pair<std::string, std::string>> split_full_name(
        const std::string& full_name) {
        auto slash = full_name.find('/');
        if (slash == std::string::npos) {
            return std::nullopt;
        }
        return std::make_pair(full_name.substr(0, slash), full_name.substr(slash + 1));
    }

    RepoFacts repo_facts_for(const json& repo, const std::string& login,
                             const AcquisitionJob& job,
                             std::optional<std::string> forked_from) {
        RepoFacts facts;
        facts.developer_id = login;
        facts.repo_full_name = repo.value("full_name", "");
        facts.name = repo.value("name", "");
        facts.topic =
            repo.contains("description") && repo["description"].is_string()
                ? repo["description"].get<std::string>()
                : "";
        facts.forked_from = std::move(forked_from);
        auto owner_repo = split_full_name(facts.repo_full_name);
        if (owner_repo) {
            const auto& [owner, name] = *owner_repo;
            if (auto topics = get_json("/repos/" + owner + "/" + name + "/topics",
                                       job, SourceKind::Repos)) {
                if (topics->contains("names")) {
                    facts.tags = (*topics)["names"].get<std::vector<std::string>>();
                }
            }
            if (auto readme = get_json("/repos/" + owner + "/" + name + "/readme",
                                       job, SourceKind::Repos)) {
                if (readme->value("encoding", "") == "base64") {
                    facts.readme = detail::base64_decode(readme->value("content", ""));
                } else {
                    facts.readme = readme->value("content", "");
                }
            }
        }
        return facts;
    }

    bool has_commits_on(const std::string& full_name, const std::string& login,
                        const AcquisitionJob& job) {
        auto owner_repo = split_full_name(full_name);
        if (!owner_repo) {
            return false;
        }
        const auto& [owner, name] = *owner_repo;
        auto commits = get_json(
            "/repos/" + owner + "/" + name + "/commits?author=" + login + "&per_page=1",
            job, SourceKind::Repos);
        return commits && commits->is_array() && !commits->empty();
    }

    std::vector<RepoFacts> live_repos(const AcquisitionJob& job) {
        std::vector<RepoFacts> out;
        std::set<std::string> seen;
        const std::string& login = job.developer_login;
        for (int page = 1; page <= kMaxPages; ++page) {
            auto body = get_json("/users/" + login + "/repos?per_page=100&type=all&page=" +
                                     std::to_string(page),
                                 job, SourceKind::Repos);
            if (!body) {
                warn("developer not found: " + login);
                return out;
            }
            if (!body->is_array() || body->empty()) {
                break;
            }
            for (const auto& repo : *body) {
                const std::string full_name = repo.value("full_name", "");
                if (full_name.empty() || !seen.insert(full_name).second) {
                    continue;
                }
                std::optional<std::string> parent_full_name;
                if (repo.value("fork", false) && repo.contains("parent") &&
                    repo["parent"].is_object()) {
                    parent_full_name = repo["parent"].value("full_name", "");
                }
                emit_validated(out, repo_facts_for(repo, login, job, parent_full_name));
                // Fork rule: the parent's facts count only when the developer
                // actually committed on the parent.
                if (parent_full_name && !parent_full_name->empty() &&
                    seen.insert(*parent_full_name).second &&
                    has_commits_on(*parent_full_name, login, job)) {
                    json parent = repo["parent"];
                    emit_validated(out,
                                   repo_facts_for(parent, login, job, std::nullopt));
                }
            }
            if (body->size() < 100) {
                break;
            }
        }
        return out;
    }

    void emit_validated(std::vector<RepoFacts>& out, RepoFacts facts) {
        try {
            RepoFacts checked = repo_facts_from_json(to_json(facts));
            out.push_back(std::move(checked));
            stats_.emitted.fetch_add(1);
        } catch (const ValidationError& e) {
            stats_.dropped_invalid.fetch_add(1);
            warn(std::string("dropped invalid repo payload: ") + e.what());
        }
    }

    std::vector<IssueFacts> live_issues(const AcquisitionJob& job) {
        std::vector<IssueFacts> out;
        std::map<std::string, std::size_t> by_id;  // issue_id -> index in out
        const std::string& login = job.developer_login;
        const std::array<std::pair<std::string, IssueRelation>, 3> queries{{
            {"assignee", IssueRelation::Assigned},
            {"author", IssueRelation::Created},
            {"commenter", IssueRelation::Participated},
        }};
        bool any_found = false;
        for (const auto& [qualifier, relation] : queries) {
            std::string q = qualifier + ":" + login + "+type:issue";
            if (job.since) {
                q += "+created:>=" + *job.since;
            }
            for (int page = 1; page <= kMaxPages; ++page) {
                auto body = get_json("/search/issues?q=" + detail::url_encode_query(q) +
                                         "&per_page=100&page=" + std::to_string(page),
                                     job, SourceKind::Issues);
                if (!body || !body->contains("items") || !(*body)["items"].is_array()) {
                    break;
                }
                any_found = true;
                const auto& items = (*body)["items"];
                for (const auto& item : items) {
                    IssueFacts facts;
                    facts.developer_id = login;
                    if (item.contains("id")) {
                        facts.issue_id = item["id"].is_string()
                                             ? item["id"].get<std::string>()
                                             : std::to_string(item["id"].get<std::int64_t>());
                    }
                    facts.title = item.value("title", "");
                    facts.body = item.contains("body") && item["body"].is_string()
                                     ? item["body"].get<std::string>()
                                     : "";
                    facts.relation = relation;
                    try {
                        IssueFacts checked = issue_facts_from_json(to_json(facts));
                        auto it = by_id.find(checked.issue_id);
                        if (it == by_id.end()) {
                            by_id.emplace(checked.issue_id, out.size());
                            out.push_back(std::move(checked));
                            stats_.emitted.fetch_add(1);
                        } else if (static_cast<int>(checked.relation) <
                                   static_cast<int>(out[it->second].relation)) {
                            out[it->second].relation = checked.relation;
                        }
                    } catch (const ValidationError& e) {
                        stats_.dropped_invalid.fetch_add(1);
                        warn(std::string("dropped invalid issue payload: ") + e.what());
                    }
                }
                if (items.size() < 100) {
                    break;
                }
            }
        }
        if (!any_found) {
            warn("no issue search results for " + login);
        }
        return out;
    }

    std::vector<CommitSnapshot> live_snapshots(const AcquisitionJob& job) {
        std::vector<CommitSnapshot> out;
        const std::string& login = job.developer_login;
        auto repos = get_json("/users/" + login + "/repos?per_page=100&type=all",
                              job, SourceKind::Apis);
        if (!repos) {
            warn("developer not found: " + login);
            return out;
        }
        for (const auto& repo : *repos) {
            auto owner_repo = split_full_name(repo.value("full_name", ""));
            if (!owner_repo) {
                continue;
            }
            const auto& [owner, name] = *owner_repo;
            std::string commits_path =
                "/repos/" + owner + "/" + name + "/commits?author=" + login +
                "&per_page=100";
            if (job.since) {
                commits_path += "&since=" + *job.since;
            }
            auto commits = get_json(commits_path, job, SourceKind::Apis);
            if (!commits || !commits->is_array()) {
                continue;
            }
            for (const auto& commit : *commits) {
                const std::string sha = detail::lowercase(commit.value("sha", ""));
                if (!commit.contains("files") || !commit["files"].is_array()) {
                    continue;
                }
                for (const auto& file : commit["files"]) {
                    const std::string path = file.value("filename", "");
                    auto language = imports::detect_language(path);
                    if (!language) {
                        stats_.skipped_unsupported.fetch_add(1);
                        continue;
                    }
                    auto contents = get_json("/repos/" + owner + "/" + name +
                                                 "/contents/" + path + "?ref=" + sha,
                                             job, SourceKind::Apis);
                    if (!contents) {
                        continue;
                    }
                    if (contents->value("size", std::size_t{0}) > options_.max_file_bytes) {
                        stats_.skipped_oversized.fetch_add(1);
                        warn("oversized file skipped: " + path);
                        continue;
                    }
                    CommitSnapshot snap;
                    snap.developer_id = login;
                    snap.commit_sha = sha;
                    snap.file_path = path;
                    snap.language = *language;
                    snap.content =
                        contents->value("encoding", "") == "base64"
                            ? detail::base64_decode(contents->value("content", ""))
                            : contents->value("content", "");
                    if (snap.content.size() > options_.max_file_bytes) {
                        stats_.skipped_oversized.fetch_add(1);
                        warn("oversized file skipped: " + path);
                        continue;
                    }
                    try {
                        out.push_back(commit_snapshot_from_json(to_json(snap)));
                        stats_.emitted.fetch_add(1);
                    } catch (const ValidationError& e) {
                        stats_.dropped_invalid.fetch_add(1);
                        warn(std::string("dropped invalid snapshot payload: ") + e.what());
                    }
                }
            }
        }
        return out;
    }

    static constexpr int kMaxPages = 50;

    MinerOptions options_;
    TokenBucket bucket_;
    MinerStats stats_;
};

// Runs a job and writes repos.jsonl / issues.jsonl / snapshots.jsonl rows
// through the given writers (one writer per file keeps output serialized).
struct MineWriters {
    JsonlWriter* repos = nullptr;
    JsonlWriter* issues = nullptr;
    JsonlWriter* snapshots = nullptr;
};

inline void run_job(GithubMiner& miner, const AcquisitionJob& job,
                    const MineWriters& writers) {
    job.validate();
    if (job.sources.count(SourceKind::Repos) && writers.repos) {
        for (const auto& facts : miner.fetch_repos(job)) {
            writers.repos->write(to_json(facts));
        }
    }
    if (job.sources.count(SourceKind::Issues) && writers.issues) {
        for (const auto& facts : miner.fetch_issues(job)) {
            writers.issues->write(to_json(facts));
        }
    }
    if (job.sources.count(SourceKind::Apis) && writers.snapshots) {
        for (const auto& snap : miner.fetch_commit_snapshots(job)) {
            writers.snapshots->write(to_json(snap));
        }
    }
}

}  // namespace devforge::miner
