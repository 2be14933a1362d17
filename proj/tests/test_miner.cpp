#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "devforge/miner.hpp"

using namespace devforge;
using namespace devforge::miner;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("devforge_miner_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string b64(const std::string& raw) {
    static const char* table =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    std::size_t i = 0;
    while (i + 2 < raw.size()) {
        const unsigned v = (static_cast<unsigned char>(raw[i]) << 16) |
                           (static_cast<unsigned char>(raw[i + 1]) << 8) |
                           static_cast<unsigned char>(raw[i + 2]);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
        i += 3;
    }
    if (i + 1 == raw.size()) {
        const unsigned v = static_cast<unsigned char>(raw[i]) << 16;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == raw.size()) {
        const unsigned v = (static_cast<unsigned char>(raw[i]) << 16) |
                           (static_cast<unsigned char>(raw[i + 1]) << 8);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += "=";
    }
    return out;
}

// Loopback replay server for live-mode tests.
class ReplayServer {
  public:
    httplib::Server server;

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~ReplayServer() {
        server.stop();
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    std::string base_url() const {
        return "http://127.0.0.1:" + std::to_string(port_);
    }

  private:
    int port_ = 0;
    std::thread thread_;
};

MinerOptions loopback_options(const ReplayServer& replay) {
    MinerOptions options;
    options.base_url = replay.base_url();
    options.requests_per_second = 10000.0;
    options.max_retries = 3;
    options.backoff_base = std::chrono::milliseconds(1);
    options.token = "test-token";
    return options;
}

AcquisitionJob job_for(const std::string& login, const fs::path& out_dir) {
    AcquisitionJob job;
    job.developer_login = login;
    job.sources = {SourceKind::Repos, SourceKind::Issues, SourceKind::Apis};
    job.output_dir = out_dir;
    return job;
}

}  // namespace

TEST_CASE("acquisition jobs validate login and sources") {
    AcquisitionJob job;
    job.developer_login = "has space";
    job.sources = {SourceKind::Repos};
    CHECK_THROWS_AS(job.validate(), MinerError);
    job.developer_login = "";
    CHECK_THROWS_AS(job.validate(), MinerError);
    job.developer_login = "ok";
    job.sources.clear();
    CHECK_THROWS_AS(job.validate(), MinerError);
    job.sources = {SourceKind::Issues};
    CHECK_NOTHROW(job.validate());
}

TEST_CASE("token bucket enforces the requests-per-second budget") {
    TokenBucket bucket(2.0, 1.0);  // 2 rps, burst of one
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(bucket.acquire(t0).count() == 0.0);
    CHECK(bucket.acquire(t0).count() == Catch::Approx(0.5).margin(1e-9));
    CHECK(bucket.acquire(t0).count() == Catch::Approx(1.0).margin(1e-9));
    // After the backlog drains, a late arrival pays nothing.
    CHECK(bucket.acquire(t0 + std::chrono::seconds(10)).count() == 0.0);
}

TEST_CASE("fixture mode passes records through field-identically") {
    TempDir dir;
    std::vector<json> rows;
    for (int i = 0; i < 3; ++i) {
        RepoFacts facts{"alice", "alice/repo" + std::to_string(i),
                        "repo" + std::to_string(i),
                        {"tag" + std::to_string(i)},
                        "topic",
                        "readme text",
                        i == 0 ? std::optional<std::string>("up/stream")
                               : std::nullopt};
        rows.push_back(to_json(facts));
    }
    rows.push_back(to_json(RepoFacts{"bob", "bob/other", "other", {}, "", "",
                                      std::nullopt}));
    write_jsonl(dir.path / "repos.jsonl", rows);

    MinerOptions options;
    options.fixture_dir = dir.path;
    GithubMiner miner(options);
    auto facts = miner.fetch_repos(job_for("alice", dir.path));
    REQUIRE(facts.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(to_json(facts[i]) == rows[i]);
    }
}

TEST_CASE("fixture mode is bit-deterministic over a 5-issue fixture") {
    TempDir dir;
    std::vector<json> rows;
    rows.push_back(to_json(IssueFacts{"alice", "repo1-11", "Title A", "Body A",
                                      IssueRelation::Assigned}));
    rows.push_back(to_json(IssueFacts{"alice", "repo1-12", "Title B", "",
                                      IssueRelation::Participated}));
    rows.push_back(to_json(IssueFacts{"alice", "repo1-13", "Title C", "Body C",
                                      IssueRelation::Created}));
    rows.push_back(to_json(IssueFacts{"alice", "repo2-7", "Title D", "Body D",
                                      IssueRelation::Assigned}));
    rows.push_back(to_json(IssueFacts{"alice", "repo2-9", "Title E", "",
                                      IssueRelation::Participated}));
    write_jsonl(dir.path / "issues.jsonl", rows);

    MinerOptions options;
    options.fixture_dir = dir.path;
    auto render = [&] {
        GithubMiner miner(options);
        std::string out;
        for (const auto& f : miner.fetch_issues(job_for("alice", dir.path))) {
            out += to_json(f).dump() + "\n";
        }
        return out;
    };
    const std::string once = render();
    CHECK(std::count(once.begin(), once.end(), '\n') == 5);
    CHECK(once == render());
}

TEST_CASE("snapshot fixtures pass content through byte-identically") {
    TempDir dir;
    CommitSnapshot snap;
    snap.developer_id = "alice";
    snap.commit_sha = std::string(40, 'e');
    snap.file_path = "src/mod.rs";
    snap.language = imports::LanguageId::Rust;
    snap.content = "use serde::Deserialize;\n\nfn main() {\n\t// \xF0\x9F\x9A\x80\n}\n";
    write_jsonl(dir.path / "snapshots.jsonl", {to_json(snap)});

    MinerOptions options;
    options.fixture_dir = dir.path;
    GithubMiner miner(options);
    auto snaps = miner.fetch_commit_snapshots(job_for("alice", dir.path));
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].content == snap.content);
    CHECK(to_json(snaps[0]) == to_json(snap));
}

TEST_CASE("token falls back to the DEV2VEC_GH_TOKEN environment variable") {
    ReplayServer replay;
    std::string seen_auth;
    replay.server.Get("/users/envy/repos",
                      [&](const httplib::Request& req, httplib::Response& res) {
                          seen_auth = req.get_header_value("Authorization");
                          res.set_content("[]", "application/json");
                      });
    replay.start();
    TempDir dir;
    ::setenv("DEV2VEC_GH_TOKEN", "env-secret", 1);
    auto options = loopback_options(replay);
    options.token.clear();
    GithubMiner miner(options);
    (void)miner.fetch_repos(job_for("envy", dir.path));
    ::unsetenv("DEV2VEC_GH_TOKEN");
    CHECK(seen_auth == "Bearer env-secret");
}

TEST_CASE("the since bound reaches issue and commit queries") {
    ReplayServer replay;
    std::string issue_q;
    std::string commits_query;
    replay.server.Get("/search/issues",
                      [&](const httplib::Request& req, httplib::Response& res) {
                          issue_q = req.get_param_value("q");
                          res.set_content(R"({"total_count":0,"items":[]})",
                                          "application/json");
                      });
    replay.server.Get("/users/alice/repos",
                      [](const httplib::Request&, httplib::Response& res) {
                          json repos = json::array();
                          repos.push_back({{"full_name", "alice/code"},
                                           {"name", "code"},
                                           {"fork", false}});
                          res.set_content(repos.dump(), "application/json");
                      });
    replay.server.Get(R"(/repos/alice/code/commits)",
                      [&](const httplib::Request& req, httplib::Response& res) {
                          commits_query = req.get_param_value("since");
                          res.set_content("[]", "application/json");
                      });
    replay.start();
    TempDir dir;
    GithubMiner miner(loopback_options(replay));
    auto job = job_for("alice", dir.path);
    job.since = "2024-01-01T00:00:00Z";
    (void)miner.fetch_issues(job);
    (void)miner.fetch_commit_snapshots(job);
    CHECK(issue_q.find("created:>=2024-01-01T00:00:00Z") != std::string::npos);
    CHECK(commits_query == "2024-01-01T00:00:00Z");
}

TEST_CASE("invalid fixture records are dropped and counted, never emitted") {
    TempDir dir;
    std::vector<json> rows;
    rows.push_back(to_json(RepoFacts{"alice", "alice/good", "good", {}, "", "",
                                      std::nullopt}));
    json bad_shape = to_json(RepoFacts{"alice", "not-owner-name", "x", {}, "", "",
                                        std::nullopt});
    rows.push_back(bad_shape);
    json unknown_field = rows[0];
    unknown_field["surprise"] = 1;
    rows.push_back(unknown_field);
    json empty_name = to_json(RepoFacts{"alice", "alice/e", "", {}, "", "",
                                         std::nullopt});
    rows.push_back(empty_name);
    write_jsonl(dir.path / "repos.jsonl", rows);

    MinerOptions options;
    options.fixture_dir = dir.path;
    GithubMiner miner(options);
    auto facts = miner.fetch_repos(job_for("alice", dir.path));
    CHECK(facts.size() == 1);
    CHECK(miner.stats().dropped_invalid.load() == 3);
}

TEST_CASE("unknown login in live mode yields an empty stream and a warning") {
    ReplayServer replay;
    replay.server.Get("/users/ghost/repos",
                      [](const httplib::Request&, httplib::Response& res) {
                          res.status = 404;
                          res.set_content("{}", "application/json");
                      });
    replay.start();
    TempDir dir;
    GithubMiner miner(loopback_options(replay));
    auto facts = miner.fetch_repos(job_for("ghost", dir.path));
    CHECK(facts.empty());
    CHECK(miner.stats().warnings.load() >= 1);
}

TEST_CASE("live repos apply the fork-parent participation rule") {
    ReplayServer replay;
    std::string seen_auth;
    replay.server.Get(
        "/users/alice/repos", [&](const httplib::Request& req, httplib::Response& res) {
            seen_auth = req.get_header_value("Authorization");
            if (req.get_param_value("page") != "1") {
                res.set_content("[]", "application/json");
                return;
            }
            json repos = json::array();
            repos.push_back({{"full_name", "alice/own"},
                             {"name", "own"},
                             {"description", "own topic"},
                             {"fork", false}});
            repos.push_back({{"full_name", "alice/forked-live"},
                             {"name", "forked-live"},
                             {"description", ""},
                             {"fork", true},
                             {"parent",
                              {{"full_name", "upstream/active"},
                               {"name", "active"},
                               {"description", "parent topic"}}}});
            repos.push_back({{"full_name", "alice/forked-idle"},
                             {"name", "forked-idle"},
                             {"description", ""},
                             {"fork", true},
                             {"parent",
                              {{"full_name", "upstream/idle"},
                               {"name", "idle"},
                               {"description", ""}}}});
            res.set_content(repos.dump(), "application/json");
        });
    replay.server.Get(R"(/repos/([^/]+)/([^/]+)/topics)",
                      [](const httplib::Request& req, httplib::Response& res) {
                          json topics{{"names", {"t-" + req.matches[2].str()}}};
                          res.set_content(topics.dump(), "application/json");
                      });
    replay.server.Get(R"(/repos/([^/]+)/([^/]+)/readme)",
                      [](const httplib::Request& req, httplib::Response& res) {
                          json readme{{"encoding", "base64"},
                                      {"content",
                                       b64("readme of " + req.matches[2].str())}};
                          res.set_content(readme.dump(), "application/json");
                      });
    // Only upstream/active has commits authored by alice.
    replay.server.Get(R"(/repos/upstream/active/commits)",
                      [](const httplib::Request&, httplib::Response& res) {
                          res.set_content(R"([{"sha":"abc"}])", "application/json");
                      });
    replay.server.Get(R"(/repos/upstream/idle/commits)",
                      [](const httplib::Request&, httplib::Response& res) {
                          res.set_content("[]", "application/json");
                      });
    replay.start();

    TempDir dir;
    GithubMiner miner(loopback_options(replay));
    auto facts = miner.fetch_repos(job_for("alice", dir.path));

    REQUIRE(facts.size() == 4);  // own + two forks + one active parent
    CHECK(seen_auth == "Bearer test-token");
    std::map<std::string, RepoFacts> by_name;
    for (const auto& f : facts) {
        by_name[f.repo_full_name] = f;
    }
    CHECK(by_name.count("alice/own") == 1);
    CHECK(by_name.count("alice/forked-live") == 1);
    CHECK(by_name.count("upstream/active") == 1);
    CHECK(by_name.count("upstream/idle") == 0);
    CHECK(by_name["alice/forked-live"].forked_from == "upstream/active");
    CHECK(by_name["upstream/active"].readme == "readme of active");
    CHECK(by_name["upstream/active"].tags == std::vector<std::string>{"t-active"});
    CHECK(by_name["alice/own"].topic == "own topic");
}

TEST_CASE("issue queries dedicate relations with assigned > created > participated") {
    ReplayServer replay;
    replay.server.Get("/search/issues", [](const httplib::Request& req,
                                           httplib::Response& res) {
        const std::string q = req.get_param_value("q");
        json items = json::array();
        auto add = [&](int id, const std::string& title) {
            items.push_back({{"id", id}, {"title", title}, {"body", "b"}});
        };
        if (q.find("assignee:") == 0) {
            add(1, "both assigned and commented");
        } else if (q.find("author:") == 0) {
            add(2, "created one");
        } else if (q.find("commenter:") == 0) {
            add(1, "both assigned and commented");
            add(3, "only commented");
        }
        res.set_content(json{{"total_count", items.size()}, {"items", items}}.dump(),
                        "application/json");
    });
    replay.start();

    TempDir dir;
    GithubMiner miner(loopback_options(replay));
    auto issues = miner.fetch_issues(job_for("alice", dir.path));
    REQUIRE(issues.size() == 3);
    std::map<std::string, IssueRelation> relation;
    for (const auto& f : issues) {
        relation[f.issue_id] = f.relation;
    }
    CHECK(relation["1"] == IssueRelation::Assigned);
    CHECK(relation["2"] == IssueRelation::Created);
    CHECK(relation["3"] == IssueRelation::Participated);
}

TEST_CASE("snapshots keep supported extensions and respect the byte cap") {
    ReplayServer replay;
    replay.server.Get("/users/alice/repos",
                      [](const httplib::Request& req, httplib::Response& res) {
                          if (req.get_param_value("page") == "2") {
                              res.set_content("[]", "application/json");
                              return;
                          }
                          json repos = json::array();
                          repos.push_back({{"full_name", "alice/code"},
                                           {"name", "code"},
                                           {"fork", false}});
                          res.set_content(repos.dump(), "application/json");
                      });
    const std::string sha = "ABCDEF0123456789abcdef0123456789abcdef01";
    replay.server.Get(
        R"(/repos/alice/code/commits)",
        [&](const httplib::Request&, httplib::Response& res) {
            json commits = json::array();
            commits.push_back(
                {{"sha", sha},
                 {"files", json::array({{{"filename", "src/main.py"}},
                                        {{"filename", "README.md"}},
                                        {{"filename", "huge.py"}}})}});
            res.set_content(commits.dump(), "application/json");
        });
    replay.server.Get(R"(/repos/alice/code/contents/.*)",
                      [&](const httplib::Request& req, httplib::Response& res) {
                          const bool huge = req.path.find("huge.py") != std::string::npos;
                          json contents{
                              {"encoding", "base64"},
                              {"size", huge ? 99999999 : 18},
                              {"content", b64("import numpy as np")}};
                          res.set_content(contents.dump(), "application/json");
                      });
    replay.start();

    TempDir dir;
    GithubMiner miner(loopback_options(replay));
    auto snaps = miner.fetch_commit_snapshots(job_for("alice", dir.path));
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].file_path == "src/main.py");
    CHECK(snaps[0].language == imports::LanguageId::Python);
    CHECK(snaps[0].content == "import numpy as np");
    CHECK(snaps[0].commit_sha == "abcdef0123456789abcdef0123456789abcdef01");
    CHECK(miner.stats().skipped_unsupported.load() == 1);
    CHECK(miner.stats().skipped_oversized.load() == 1);
}

TEST_CASE("401 responses raise AuthError") {
    ReplayServer replay;
    replay.server.Get("/users/alice/repos",
                      [](const httplib::Request&, httplib::Response& res) {
                          res.status = 401;
                          res.set_content("{}", "application/json");
                      });
    replay.start();
    TempDir dir;
    GithubMiner miner(loopback_options(replay));
    CHECK_THROWS_AS(miner.fetch_repos(job_for("alice", dir.path)), AuthError);
}

TEST_CASE("rate limiting retries with backoff then aborts with a checkpoint") {
    ReplayServer replay;
    int hits = 0;
    replay.server.Get("/users/alice/repos",
                      [&](const httplib::Request&, httplib::Response& res) {
                          ++hits;
                          res.status = 429;
                          res.set_header("Retry-After", "1");
                          res.set_content("{}", "application/json");
                      });
    replay.start();
    TempDir dir;
    auto options = loopback_options(replay);
    options.max_retries = 4;
    GithubMiner miner(options);
    CHECK_THROWS_AS(miner.fetch_repos(job_for("alice", dir.path)),
                    RateLimitedError);
    CHECK(hits == 4);
    REQUIRE(fs::exists(dir.path / "checkpoint.json"));
    std::ifstream in(dir.path / "checkpoint.json");
    json checkpoint = json::parse(in);
    CHECK(checkpoint["developer_login"] == "alice");
    CHECK(checkpoint["source"] == "repos");
}

TEST_CASE("403 with Retry-After is rate limiting, without is auth failure") {
    ReplayServer replay;
    replay.server.Get("/users/limited/repos",
                      [](const httplib::Request&, httplib::Response& res) {
                          res.status = 403;
                          res.set_header("Retry-After", "1");
                          res.set_content("{}", "application/json");
                      });
    replay.server.Get("/users/denied/repos",
                      [](const httplib::Request&, httplib::Response& res) {
                          res.status = 403;
                          res.set_content("{}", "application/json");
                      });
    replay.start();
    TempDir dir;
    auto options = loopback_options(replay);
    options.max_retries = 2;
    GithubMiner miner(options);
    CHECK_THROWS_AS(miner.fetch_repos(job_for("limited", dir.path)),
                    RateLimitedError);
    CHECK_THROWS_AS(miner.fetch_repos(job_for("denied", dir.path)), AuthError);
}
