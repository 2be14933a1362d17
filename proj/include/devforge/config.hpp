#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "devforge/eval.hpp"
#include "devforge/pv.hpp"

namespace devforge::config {

using json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "0.1.0";

struct MalformedConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownKeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::filesystem::path corpus_dir = "out/corpus";
    std::filesystem::path model_dir = "out/models";
    std::filesystem::path report_dir = "out/reports";

    pv::Hyperparams repos;
    pv::Hyperparams issues;
    pv::Hyperparams apis;

    eval::SplitPlan split;
    eval::LogRegConfig classifier;
    std::vector<int> pca_dims = {50, 100, 200, 250, 300};

    std::uint64_t seed = 1;
    int workers = 1;

    bool api_frequency_weighted = true;
    bool api_direct_when_available = false;
    std::size_t tfidf_top_k = 1471;

    std::string miner_base_url = "https://api.github.com";
    double miner_requests_per_second = 1.0;
    std::size_t miner_max_file_bytes = 1 << 20;
    std::vector<std::string> miner_developers;

    std::optional<std::filesystem::path> fixtures_dir;
    bool deterministic = false;
};

inline RunConfig default_config() {
    RunConfig cfg;
    cfg.repos = {230, 5, 5, pv::Algorithm::DM, 5, 15};
    cfg.issues = {150, 5, 5, pv::Algorithm::DM, 5, 20};
    cfg.apis = {200, 30, 5, pv::Algorithm::DBOW, 20, 10};
    cfg.apis.train_word_vectors = true;
    return cfg;
}

namespace detail {

template <typename T>
inline T checked_get(const json& obj, const std::string& key,
                     const std::string& context, const T& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw MalformedConfigError("config key '" + context + key +
                                   "' has the wrong type");
    }
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                           const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw UnknownKeyError("unknown config key '" + context + it.key() + "'");
        }
    }
}

inline void apply_hyper(const json& obj, const std::string& context,
                        pv::Hyperparams& hp) {
    reject_unknown(obj,
                   {"vector_size", "window", "min_count", "algorithm", "negative",
                    "epochs", "alpha_initial", "alpha_final", "train_word_vectors"},
                   context);
    hp.vector_size = checked_get<int>(obj, "vector_size", context, hp.vector_size);
    hp.window = checked_get<int>(obj, "window", context, hp.window);
    hp.min_count = checked_get<int>(obj, "min_count", context, hp.min_count);
    if (obj.contains("algorithm")) {
        try {
            hp.algorithm = pv::algorithm_from_string(
                checked_get<std::string>(obj, "algorithm", context, ""));
        } catch (const pv::HyperparamError&) {
            throw MalformedConfigError("config key '" + context +
                                       "algorithm' must be DM or DBOW");
        }
    }
    hp.negative = checked_get<int>(obj, "negative", context, hp.negative);
    hp.epochs = checked_get<int>(obj, "epochs", context, hp.epochs);
    hp.alpha_initial =
        checked_get<double>(obj, "alpha_initial", context, hp.alpha_initial);
    hp.alpha_final = checked_get<double>(obj, "alpha_final", context, hp.alpha_final);
    hp.train_word_vectors =
        checked_get<bool>(obj, "train_word_vectors", context, hp.train_word_vectors);
    try {
        hp.validate();
    } catch (const pv::HyperparamError& e) {
        // Name the offending section so the failure is actionable.
        throw MalformedConfigError("config section '" + context + "': " + e.what());
    }
}

}  // namespace detail

inline RunConfig config_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw MalformedConfigError("config root must be a JSON object");
    }
    detail::reject_unknown(
        doc, {"paths", "repos", "issues", "apis", "split", "classifier", "pca_dims",
              "seed", "workers", "api", "tfidf_top_k", "miner"},
        "");
    RunConfig cfg = default_config();

    if (doc.contains("paths")) {
        const auto& p = doc["paths"];
        detail::reject_unknown(p, {"corpus_dir", "model_dir", "report_dir"}, "paths.");
        cfg.corpus_dir = detail::checked_get<std::string>(p, "corpus_dir", "paths.",
                                                          cfg.corpus_dir.string());
        cfg.model_dir = detail::checked_get<std::string>(p, "model_dir", "paths.",
                                                         cfg.model_dir.string());
        cfg.report_dir = detail::checked_get<std::string>(p, "report_dir", "paths.",
                                                          cfg.report_dir.string());
    }
    if (doc.contains("repos")) detail::apply_hyper(doc["repos"], "repos.", cfg.repos);
    if (doc.contains("issues")) detail::apply_hyper(doc["issues"], "issues.", cfg.issues);
    if (doc.contains("apis")) detail::apply_hyper(doc["apis"], "apis.", cfg.apis);

    if (doc.contains("split")) {
        const auto& s = doc["split"];
        detail::reject_unknown(s, {"ratios", "seed", "stratified"}, "split.");
        if (s.contains("ratios")) {
            auto ratios =
                detail::checked_get<std::vector<double>>(s, "ratios", "split.", {});
            if (ratios.size() != 3) {
                throw MalformedConfigError("config key 'split.ratios' needs 3 entries");
            }
            cfg.split.ratios = {ratios[0], ratios[1], ratios[2]};
        }
        cfg.split.seed =
            detail::checked_get<std::uint64_t>(s, "seed", "split.", cfg.split.seed);
        cfg.split.stratified =
            detail::checked_get<bool>(s, "stratified", "split.", cfg.split.stratified);
        try {
            cfg.split.validate();
        } catch (const std::invalid_argument& e) {
            throw MalformedConfigError(std::string("config key 'split.ratios': ") +
                                       e.what());
        }
    }
    if (doc.contains("classifier")) {
        const auto& c = doc["classifier"];
        detail::reject_unknown(c, {"l2", "lr", "max_iters", "tol"}, "classifier.");
        cfg.classifier.l2 =
            detail::checked_get<double>(c, "l2", "classifier.", cfg.classifier.l2);
        cfg.classifier.lr =
            detail::checked_get<double>(c, "lr", "classifier.", cfg.classifier.lr);
        cfg.classifier.max_iters = detail::checked_get<int>(c, "max_iters", "classifier.",
                                                            cfg.classifier.max_iters);
        cfg.classifier.tol =
            detail::checked_get<double>(c, "tol", "classifier.", cfg.classifier.tol);
        if (cfg.classifier.l2 < 0 || cfg.classifier.lr <= 0 ||
            cfg.classifier.max_iters < 1 || cfg.classifier.tol <= 0) {
            throw MalformedConfigError("config section 'classifier' has invalid values");
        }
    }
    if (doc.contains("pca_dims")) {
        cfg.pca_dims = detail::checked_get<std::vector<int>>(doc, "pca_dims", "", {});
        for (int k : cfg.pca_dims) {
            if (k < 1) {
                throw MalformedConfigError("config key 'pca_dims' entries must be >= 1");
            }
        }
    }
    cfg.seed = detail::checked_get<std::uint64_t>(doc, "seed", "", cfg.seed);
    cfg.workers = detail::checked_get<int>(doc, "workers", "", cfg.workers);
    if (cfg.workers < 1) {
        throw MalformedConfigError("config key 'workers' must be >= 1");
    }
    if (doc.contains("api")) {
        const auto& a = doc["api"];
        detail::reject_unknown(a, {"frequency_weighted", "direct_when_available"},
                               "api.");
        cfg.api_frequency_weighted = detail::checked_get<bool>(
            a, "frequency_weighted", "api.", cfg.api_frequency_weighted);
        cfg.api_direct_when_available = detail::checked_get<bool>(
            a, "direct_when_available", "api.", cfg.api_direct_when_available);
    }
    cfg.tfidf_top_k =
        detail::checked_get<std::size_t>(doc, "tfidf_top_k", "", cfg.tfidf_top_k);
    if (cfg.tfidf_top_k < 1) {
        throw MalformedConfigError("config key 'tfidf_top_k' must be >= 1");
    }
    if (doc.contains("miner")) {
        const auto& m = doc["miner"];
        detail::reject_unknown(
            m, {"base_url", "requests_per_second", "max_file_bytes", "developers"},
            "miner.");
        cfg.miner_base_url = detail::checked_get<std::string>(m, "base_url", "miner.",
                                                              cfg.miner_base_url);
        cfg.miner_requests_per_second = detail::checked_get<double>(
            m, "requests_per_second", "miner.", cfg.miner_requests_per_second);
        cfg.miner_max_file_bytes = detail::checked_get<std::size_t>(
            m, "max_file_bytes", "miner.", cfg.miner_max_file_bytes);
        cfg.miner_developers = detail::checked_get<std::vector<std::string>>(
            m, "developers", "miner.", cfg.miner_developers);
        if (cfg.miner_requests_per_second <= 0) {
            throw MalformedConfigError(
                "config key 'miner.requests_per_second' must be positive");
        }
    }

    // The run seed feeds every stage unless a section pinned its own.
    cfg.repos.seed = cfg.seed;
    cfg.issues.seed = cfg.seed;
    cfg.apis.seed = cfg.seed;
    if (!doc.contains("split") || !doc["split"].contains("seed")) {
        cfg.split.seed = cfg.seed;
    }
    cfg.repos.workers = cfg.workers;
    cfg.issues.workers = cfg.workers;
    cfg.apis.workers = cfg.workers;
    return cfg;
}

// Unspecified keys take the defaults; strict about key names and types.
// MalformedConfig carries line/column for parse failures.
inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedConfigError("cannot open config file " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw MalformedConfigError("config parse error at line " + std::to_string(line) +
                                   " column " + std::to_string(column) + ": " + e.what());
    }
    return config_from_json(doc);
}

inline json hyper_to_json(const pv::Hyperparams& hp) {
    return json{{"vector_size", hp.vector_size},
                {"window", hp.window},
                {"min_count", hp.min_count},
                {"algorithm", std::string(pv::to_string(hp.algorithm))},
                {"negative", hp.negative},
                {"epochs", hp.epochs},
                {"alpha_initial", hp.alpha_initial},
                {"alpha_final", hp.alpha_final},
                {"train_word_vectors", hp.train_word_vectors}};
}

inline json resolved_config_json(const RunConfig& cfg) {
    return json{
        {"artifact_version", kArtifactVersion},
        {"paths",
         {{"corpus_dir", cfg.corpus_dir.string()},
          {"model_dir", cfg.model_dir.string()},
          {"report_dir", cfg.report_dir.string()}}},
        {"repos", hyper_to_json(cfg.repos)},
        {"issues", hyper_to_json(cfg.issues)},
        {"apis", hyper_to_json(cfg.apis)},
        {"split",
         {{"ratios", cfg.split.ratios},
          {"seed", cfg.split.seed},
          {"stratified", cfg.split.stratified}}},
        {"classifier",
         {{"l2", cfg.classifier.l2},
          {"lr", cfg.classifier.lr},
          {"max_iters", cfg.classifier.max_iters},
          {"tol", cfg.classifier.tol}}},
        {"pca_dims", cfg.pca_dims},
        {"seed", cfg.seed},
        {"workers", cfg.workers},
        {"api",
         {{"frequency_weighted", cfg.api_frequency_weighted},
          {"direct_when_available", cfg.api_direct_when_available}}},
        {"tfidf_top_k", cfg.tfidf_top_k},
        {"miner",
         {{"base_url", cfg.miner_base_url},
          {"requests_per_second", cfg.miner_requests_per_second},
          {"max_file_bytes", cfg.miner_max_file_bytes},
          {"developers", cfg.miner_developers}}},
        {"deterministic", cfg.deterministic}};
}

}  // namespace devforge::config
