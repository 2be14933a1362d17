#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "devforge/config.hpp"
#include "devforge/corpus.hpp"
#include "devforge/eval.hpp"
#include "devforge/jsonl.hpp"
#include "devforge/miner.hpp"
#include "devforge/pipelines.hpp"
#include "devforge/pv.hpp"

namespace devforge::cli {

namespace fs = std::filesystem;
using config::RunConfig;

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace files {

inline fs::path repos(const RunConfig& c) { return c.corpus_dir / "repos.jsonl"; }
inline fs::path issues(const RunConfig& c) { return c.corpus_dir / "issues.jsonl"; }
inline fs::path snapshots(const RunConfig& c) { return c.corpus_dir / "snapshots.jsonl"; }
inline fs::path developers(const RunConfig& c) { return c.corpus_dir / "developers.jsonl"; }
inline fs::path docs_repos(const RunConfig& c) { return c.corpus_dir / "docs_repos.jsonl"; }
inline fs::path docs_issues(const RunConfig& c) { return c.corpus_dir / "docs_issues.jsonl"; }
inline fs::path api_counts(const RunConfig& c) { return c.corpus_dir / "api_counts.jsonl"; }

inline fs::path split(const RunConfig& c) { return c.model_dir / "split.json"; }
inline fs::path model(const RunConfig& c, const std::string& name) {
    return c.model_dir / (name + ".model");
}
inline fs::path vectors(const RunConfig& c, const std::string& name) {
    return c.model_dir / ("vectors_" + name + ".jsonl");
}
inline fs::path pca_model(const RunConfig& c, int k) {
    return c.model_dir / ("pca_" + std::to_string(k) + ".model");
}
inline fs::path pca_vectors(const RunConfig& c, int k) {
    return c.model_dir / ("vectors_rias_pca_" + std::to_string(k) + ".jsonl");
}
inline fs::path embed_skipped(const RunConfig& c) {
    return c.model_dir / "embed_skipped.json";
}

inline fs::path resolved_config(const RunConfig& c) {
    return c.report_dir / "resolved_config.json";
}
inline fs::path predictions(const RunConfig& c, const std::string& run) {
    return c.report_dir / ("predictions_" + run + ".jsonl");
}
inline fs::path report(const RunConfig& c) { return c.report_dir / "report.json"; }
inline fs::path matrix_csv(const RunConfig& c) { return c.report_dir / "matrix.csv"; }

}  // namespace files

// ---------------------------------------------------------------------------
// Corpus file IO

inline std::map<std::string, std::optional<RoleLabel>> load_developers(
    const fs::path& path) {
    std::map<std::string, std::optional<RoleLabel>> out;
    for_each_jsonl(path, [&](json&& row) {
        const std::string id = row.at("developer_id").get<std::string>();
        std::optional<RoleLabel> role;
        if (row.contains("role") && row["role"].is_string()) {
            role = role_from_string(row["role"].get<std::string>());
        }
        out[id] = role;
    });
    return out;
}

inline std::vector<std::pair<std::string, RoleLabel>> labeled_developers(
    const std::map<std::string, std::optional<RoleLabel>>& devs) {
    std::vector<std::pair<std::string, RoleLabel>> out;
    for (const auto& [id, role] : devs) {
        if (role) {
            out.emplace_back(id, *role);
        }
    }
    return out;
}

inline std::map<std::string, TaggedDocument> load_docs(const fs::path& path) {
    std::map<std::string, TaggedDocument> out;
    for_each_jsonl(path, [&](json&& row) {
        TaggedDocument doc;
        doc.tag = row.at("tag").get<std::string>();
        doc.tokens = row.at("tokens").get<std::vector<std::string>>();
        out[doc.tag] = std::move(doc);
    });
    return out;
}

inline void write_docs(const fs::path& path,
                       const std::map<std::string, TaggedDocument>& docs) {
    JsonlWriter w(path);
    for (const auto& [tag, doc] : docs) {
        w.write(json{{"tag", doc.tag}, {"tokens", doc.tokens}});
    }
}

inline std::map<std::string, std::map<std::string, std::uint64_t>> load_api_counts(
    const fs::path& path) {
    std::map<std::string, std::map<std::string, std::uint64_t>> out;
    for_each_jsonl(path, [&](json&& row) {
        auto& counts = out[row.at("developer_id").get<std::string>()];
        for (auto it = row.at("counts").begin(); it != row.at("counts").end(); ++it) {
            counts[it.key()] = it.value().get<std::uint64_t>();
        }
    });
    return out;
}

inline std::map<std::string, pipelines::ExpertiseVector> load_vectors(
    const fs::path& path) {
    std::map<std::string, pipelines::ExpertiseVector> out;
    for_each_jsonl(path, [&](json&& row) {
        auto v = pipelines::expertise_vector_from_json(row);
        out[v.developer_id] = std::move(v);
    });
    return out;
}

inline void write_vectors(const fs::path& path,
                          const std::map<std::string, pipelines::ExpertiseVector>& vecs) {
    JsonlWriter w(path);
    for (const auto& [id, v] : vecs) {
        w.write(pipelines::to_json(v));
    }
}

struct SplitFile {
    std::vector<std::string> train_ids;
    std::vector<std::string> val_ids;
    std::vector<std::string> test_ids;

    std::set<std::string> train_set() const {
        return {train_ids.begin(), train_ids.end()};
    }
    std::set<std::string> test_set() const { return {test_ids.begin(), test_ids.end()}; }
};

inline SplitFile load_split(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw StageError("missing split file " + path.string() + "; run `train` first");
    }
    json doc = json::parse(in);
    SplitFile out;
    out.train_ids = doc.at("train_ids").get<std::vector<std::string>>();
    out.val_ids = doc.at("val_ids").get<std::vector<std::string>>();
    out.test_ids = doc.at("test_ids").get<std::vector<std::string>>();
    return out;
}

// Import multisets become training documents: names sorted, each repeated
// by its count, so repetition carries frequency into the embedding.
inline TaggedDocument api_document(const std::string& developer_id,
                                   const std::map<std::string, std::uint64_t>& counts) {
    TaggedDocument doc;
    doc.tag = developer_id;
    for (const auto& [name, count] : counts) {
        for (std::uint64_t i = 0; i < count; ++i) {
            doc.tokens.push_back(name);
        }
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Stages

inline void stage_summary(const std::string& stage, const std::string& detail) {
    std::cout << "[" << stage << "] " << detail << '\n';
}

inline void stage_mine(const RunConfig& cfg) {
    fs::create_directories(cfg.corpus_dir);

    miner::MinerOptions options;
    options.fixture_dir = cfg.fixtures_dir;
    options.base_url = cfg.miner_base_url;
    options.requests_per_second = cfg.miner_requests_per_second;
    options.max_file_bytes = cfg.miner_max_file_bytes;
    miner::GithubMiner github(options);

    std::vector<std::string> logins = cfg.miner_developers;
    if (cfg.fixtures_dir) {
        const fs::path labels = *cfg.fixtures_dir / "developers.jsonl";
        if (fs::exists(labels)) {
            logins.clear();
            for (const auto& [id, role] : load_developers(labels)) {
                logins.push_back(id);
            }
        }
    }
    std::sort(logins.begin(), logins.end());
    if (logins.empty()) {
        throw StageError("no developers to mine: give --fixtures or miner.developers");
    }

    JsonlWriter repos(files::repos(cfg));
    JsonlWriter issues(files::issues(cfg));
    JsonlWriter snapshots(files::snapshots(cfg));
    miner::MineWriters writers{&repos, &issues, &snapshots};
    for (const auto& login : logins) {
        miner::AcquisitionJob job;
        job.developer_login = login;
        job.sources = {miner::SourceKind::Repos, miner::SourceKind::Issues,
                       miner::SourceKind::Apis};
        job.output_dir = cfg.corpus_dir;
        miner::run_job(github, job, writers);
    }
    stage_summary("mine", "developers=" + std::to_string(logins.size()) +
                              " repos=" + std::to_string(repos.rows_written()) +
                              " issues=" + std::to_string(issues.rows_written()) +
                              " snapshots=" + std::to_string(snapshots.rows_written()) +
                              " dropped=" +
                              std::to_string(github.stats().dropped_invalid.load()));
}

inline void stage_ingest(const RunConfig& cfg) {
    fs::create_directories(cfg.corpus_dir);

    std::size_t dropped = 0;
    std::vector<RepoFacts> repos;
    if (fs::exists(files::repos(cfg))) {
        dropped += for_each_jsonl_lenient(files::repos(cfg), [&](json&& row) {
            try {
                repos.push_back(repo_facts_from_json(row));
            } catch (const ValidationError&) {
                ++dropped;
            }
        });
    }
    std::vector<IssueFacts> issues;
    if (fs::exists(files::issues(cfg))) {
        dropped += for_each_jsonl_lenient(files::issues(cfg), [&](json&& row) {
            try {
                issues.push_back(issue_facts_from_json(row));
            } catch (const ValidationError&) {
                ++dropped;
            }
        });
    }
    std::vector<CommitSnapshot> snapshots;
    if (fs::exists(files::snapshots(cfg))) {
        dropped += for_each_jsonl_lenient(files::snapshots(cfg), [&](json&& row) {
            try {
                snapshots.push_back(commit_snapshot_from_json(row));
            } catch (const ValidationError&) {
                ++dropped;
            }
        });
    }

    auto repo_docs = corpus::build_repo_documents(repos);
    auto issue_docs = corpus::build_issue_documents(issues);
    write_docs(files::docs_repos(cfg), repo_docs);
    write_docs(files::docs_issues(cfg), issue_docs);

    auto aggregation =
        corpus::build_api_multisets(snapshots, corpus::default_extractor());
    {
        JsonlWriter w(files::api_counts(cfg));
        for (const auto& [id, counts] : aggregation.per_developer) {
            json c = json::object();
            for (const auto& [name, count] : counts) {
                c[name] = count;
            }
            w.write(json{{"developer_id", id}, {"counts", c}});
        }
    }

    // Labels travel with the fixtures in offline mode; otherwise
    // developers.jsonl must already sit in the corpus directory.
    fs::path labels_source = files::developers(cfg);
    if (cfg.fixtures_dir && fs::exists(*cfg.fixtures_dir / "developers.jsonl")) {
        labels_source = *cfg.fixtures_dir / "developers.jsonl";
    }
    if (!fs::exists(labels_source)) {
        throw StageError("no developers.jsonl with role labels found at " +
                         labels_source.string());
    }
    auto developers = load_developers(labels_source);
    {
        JsonlWriter w(files::developers(cfg));
        for (const auto& [id, role] : developers) {
            json row{{"developer_id", id}};
            row["role"] = role ? json(std::string(to_string(*role))) : json(nullptr);
            w.write(row);
        }
    }
    auto records = corpus::assemble_records(developers, repo_docs, issue_docs,
                                            aggregation.per_developer);
    stage_summary("ingest",
                  "developers=" + std::to_string(developers.size()) +
                      " with_evidence=" + std::to_string(records.size()) +
                      " api_devs=" + std::to_string(aggregation.per_developer.size()) +
                      " snapshots_failed=" + std::to_string(aggregation.snapshots_failed) +
                      " dropped_invalid=" + std::to_string(dropped));
}

inline std::vector<TaggedDocument> docs_for_ids(
    const std::map<std::string, TaggedDocument>& docs,
    const std::vector<std::string>& ids) {
    std::vector<std::string> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::vector<TaggedDocument> out;
    for (const auto& id : sorted) {
        auto it = docs.find(id);
        if (it != docs.end() && !it->second.tokens.empty()) {
            out.push_back(it->second);
        }
    }
    return out;
}

inline void stage_train(const RunConfig& cfg) {
    fs::create_directories(cfg.model_dir);
    auto developers = load_developers(files::developers(cfg));
    auto labeled = labeled_developers(developers);
    if (labeled.empty()) {
        throw StageError("no labeled developers; cannot split");
    }
    auto split = eval::split(labeled, cfg.split);
    {
        std::ofstream out(files::split(cfg), std::ios::binary | std::ios::trunc);
        out << json{{"train_ids", split.train_ids},
                    {"val_ids", split.val_ids},
                    {"test_ids", split.test_ids}}
                   .dump(2)
            << '\n';
    }

    auto docs_repos = load_docs(files::docs_repos(cfg));
    auto docs_issues = load_docs(files::docs_issues(cfg));
    auto api_counts = load_api_counts(files::api_counts(cfg));

    auto train_model = [&](const std::string& name, const pv::Hyperparams& hyper,
                           const std::vector<TaggedDocument>& docs) {
        if (docs.empty()) {
            throw StageError("no train documents for model " + name);
        }
        auto model = pv::train(docs, hyper);
        pv::save(model, files::model(cfg, name));
        stage_summary("train", name + ": docs=" + std::to_string(docs.size()) +
                                   " vocab=" + std::to_string(model.vocab.size()) +
                                   " dim=" + std::to_string(model.dim()) + " algorithm=" +
                                   std::string(pv::to_string(hyper.algorithm)));
    };

    train_model("repos", cfg.repos, docs_for_ids(docs_repos, split.train_ids));
    train_model("issues", cfg.issues, docs_for_ids(docs_issues, split.train_ids));

    std::vector<std::string> train_sorted = split.train_ids;
    std::sort(train_sorted.begin(), train_sorted.end());
    std::vector<TaggedDocument> api_docs;
    for (const auto& id : train_sorted) {
        auto it = api_counts.find(id);
        if (it != api_counts.end() && !it->second.empty()) {
            api_docs.push_back(api_document(id, it->second));
        }
    }
    train_model("apis", cfg.apis, api_docs);
}

inline void stage_embed(const RunConfig& cfg) {
    auto split = load_split(files::split(cfg));
    const auto train_set = split.train_set();
    json skipped = json::object();

    auto embed_text = [&](const std::string& name, const pv::Hyperparams& hyper) {
        auto model = pv::load(files::model(cfg, name));
        auto docs = load_docs(name == "repos" ? files::docs_repos(cfg)
                                              : files::docs_issues(cfg));
        const auto source =
            name == "repos" ? pipelines::Source::Repos : pipelines::Source::Issues;
        std::map<std::string, pipelines::ExpertiseVector> vectors;
        std::vector<std::string> oov;
        for (const auto& [id, doc] : docs) {
            if (train_set.count(id)) {
                auto row = model.doc_row(id);
                if (!row) {
                    continue;
                }
                auto vec = model.doc_vector(*row);
                vectors[id] = {id, source, std::vector<double>(vec.begin(), vec.end())};
            } else {
                try {
                    auto vec = pv::infer(model, doc.tokens, hyper.epochs,
                                         pipelines::developer_seed(hyper.seed, id));
                    vectors[id] = {id, source,
                                   std::vector<double>(vec.begin(), vec.end())};
                } catch (const pv::OovOnlyError&) {
                    oov.push_back(id);
                }
            }
        }
        write_vectors(files::vectors(cfg, name), vectors);
        skipped[name] = oov;
        stage_summary("embed", name + ": vectors=" + std::to_string(vectors.size()) +
                                   " oov_skipped=" + std::to_string(oov.size()));
    };
    embed_text("repos", cfg.repos);
    embed_text("issues", cfg.issues);

    {
        auto model = pv::load(files::model(cfg, "apis"));
        auto api_counts = load_api_counts(files::api_counts(cfg));
        std::map<std::string, pipelines::ExpertiseVector> vectors;
        std::vector<std::string> oov;
        for (const auto& [id, counts] : api_counts) {
            if (cfg.api_direct_when_available) {
                if (auto direct = pipelines::embed_apis_direct(model, id)) {
                    vectors[id] = std::move(*direct);
                    continue;
                }
            }
            try {
                vectors[id] =
                    pipelines::embed_apis(model, counts, id, cfg.api_frequency_weighted);
            } catch (const pv::OovOnlyError&) {
                oov.push_back(id);
            }
        }
        write_vectors(files::vectors(cfg, "apis"), vectors);
        skipped["apis"] = oov;
        stage_summary("embed", "apis: vectors=" + std::to_string(vectors.size()) +
                                   " oov_skipped=" + std::to_string(oov.size()));
    }
    std::ofstream out(files::embed_skipped(cfg), std::ios::binary | std::ios::trunc);
    out << skipped.dump(2) << '\n';
}

inline void stage_concat(const RunConfig& cfg) {
    auto repos = load_vectors(files::vectors(cfg, "repos"));
    auto issues = load_vectors(files::vectors(cfg, "issues"));
    auto apis = load_vectors(files::vectors(cfg, "apis"));
    std::map<std::string, pipelines::ExpertiseVector> rias;
    std::size_t missing = 0;
    for (const auto& [id, repo_vec] : repos) {
        auto issue_it = issues.find(id);
        auto api_it = apis.find(id);
        if (issue_it == issues.end() || api_it == apis.end()) {
            ++missing;
            continue;
        }
        rias[id] = pipelines::concat_rias(repo_vec, issue_it->second, api_it->second);
    }
    if (rias.empty()) {
        throw StageError("no developer has all three source vectors");
    }
    write_vectors(files::vectors(cfg, "rias"), rias);
    stage_summary("concat", "rias_vectors=" + std::to_string(rias.size()) + " dim=" +
                                std::to_string(rias.begin()->second.dim()) +
                                " missing_a_source=" + std::to_string(missing));
}

inline void stage_pca(const RunConfig& cfg) {
    auto split = load_split(files::split(cfg));
    auto rias = load_vectors(files::vectors(cfg, "rias"));
    const auto train_set = split.train_set();

    std::vector<std::vector<double>> train_matrix;
    for (const auto& [id, vec] : rias) {
        if (train_set.count(id)) {
            train_matrix.push_back(vec.values);
        }
    }
    if (train_matrix.size() < 2) {
        throw StageError("need at least 2 train RIAs vectors for PCA");
    }
    for (int k : cfg.pca_dims) {
        auto model = pipelines::pca_fit(train_matrix, k);
        pipelines::save_pca(model, files::pca_model(cfg, k));
        std::map<std::string, pipelines::ExpertiseVector> reduced;
        for (const auto& [id, vec] : rias) {
            reduced[id] = {id, pipelines::Source::RIAsPca,
                           pipelines::pca_transform(model, vec.values)};
        }
        write_vectors(files::pca_vectors(cfg, k), reduced);
        stage_summary("pca", "k=" + std::to_string(k) + " vectors=" +
                                 std::to_string(reduced.size()) +
                                 (model.rank_deficient ? " rank_deficient" : ""));
    }
}

// ---------------------------------------------------------------------------
// Classification runs

struct RunPredictions {
    std::string name;
    std::vector<std::string> ids;
    std::vector<RoleLabel> y_true;
    std::vector<RoleLabel> y_pred;
};

inline RunPredictions vector_run(const std::string& name,
                                 const std::map<std::string, pipelines::ExpertiseVector>& vecs,
                                 const std::map<std::string, std::optional<RoleLabel>>& devs,
                                 const SplitFile& split, const eval::LogRegConfig& lr_cfg) {
    std::vector<std::string> train_ids;
    for (const auto& id : split.train_ids) {
        if (vecs.count(id) && devs.count(id) && devs.at(id)) {
            train_ids.push_back(id);
        }
    }
    std::sort(train_ids.begin(), train_ids.end());
    if (train_ids.empty()) {
        throw StageError("run " + name + ": no train vectors");
    }
    const auto dim = static_cast<Eigen::Index>(vecs.at(train_ids.front()).values.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train_ids.size()), dim);
    std::vector<RoleLabel> y;
    for (std::size_t i = 0; i < train_ids.size(); ++i) {
        const auto& values = vecs.at(train_ids[i]).values;
        if (static_cast<Eigen::Index>(values.size()) != dim) {
            throw StageError("run " + name + ": vector of " + train_ids[i] +
                             " has dim " + std::to_string(values.size()) +
                             ", expected " + std::to_string(dim));
        }
        for (Eigen::Index j = 0; j < dim; ++j) {
            x(static_cast<Eigen::Index>(i), j) = values[static_cast<std::size_t>(j)];
        }
        y.push_back(*devs.at(train_ids[i]));
    }
    auto model = eval::train_logreg(x, y, lr_cfg);

    RunPredictions run;
    run.name = name;
    std::vector<std::string> test_ids;
    for (const auto& id : split.test_ids) {
        if (vecs.count(id) && devs.count(id) && devs.at(id)) {
            test_ids.push_back(id);
        }
    }
    std::sort(test_ids.begin(), test_ids.end());
    for (const auto& id : test_ids) {
        run.ids.push_back(id);
        run.y_true.push_back(*devs.at(id));
        run.y_pred.push_back(eval::predict(model, vecs.at(id).values));
    }
    return run;
}

inline std::vector<RunPredictions> build_runs(const RunConfig& cfg) {
    auto developers = load_developers(files::developers(cfg));
    auto split = load_split(files::split(cfg));

    std::vector<RunPredictions> runs;

    // Majority baseline.
    {
        std::vector<RoleLabel> train_labels;
        for (const auto& id : split.train_ids) {
            if (developers.count(id) && developers.at(id)) {
                train_labels.push_back(*developers.at(id));
            }
        }
        auto baseline = eval::majority_baseline(train_labels);
        RunPredictions run;
        run.name = "baseline";
        std::vector<std::string> test_ids = split.test_ids;
        std::sort(test_ids.begin(), test_ids.end());
        for (const auto& id : test_ids) {
            if (!developers.count(id) || !developers.at(id)) {
                continue;
            }
            run.ids.push_back(id);
            run.y_true.push_back(*developers.at(id));
            run.y_pred.push_back(baseline.modal_role());
        }
        runs.push_back(std::move(run));
    }

    // tf-idf bag-of-words comparison over repository texts.
    {
        auto docs = load_docs(files::docs_repos(cfg));
        auto train_docs = docs_for_ids(docs, split.train_ids);
        auto test_docs = docs_for_ids(docs, split.test_ids);
        std::vector<TaggedDocument> labeled_train;
        std::vector<RoleLabel> y;
        for (auto& doc : train_docs) {
            if (developers.count(doc.tag) && developers.at(doc.tag)) {
                labeled_train.push_back(doc);
                y.push_back(*developers.at(doc.tag));
            }
        }
        if (!labeled_train.empty() && !test_docs.empty()) {
            auto tfidf = eval::tfidf_vectorize(labeled_train, test_docs, cfg.tfidf_top_k);
            auto model = eval::train_logreg(tfidf.train, y, cfg.classifier);
            RunPredictions run;
            run.name = "tfidf_bow";
            for (std::size_t i = 0; i < test_docs.size(); ++i) {
                const auto& id = test_docs[i].tag;
                if (!developers.count(id) || !developers.at(id)) {
                    continue;
                }
                run.ids.push_back(id);
                run.y_true.push_back(*developers.at(id));
                std::vector<double> row(tfidf.test.cols());
                for (Eigen::Index j = 0; j < tfidf.test.cols(); ++j) {
                    row[static_cast<std::size_t>(j)] =
                        tfidf.test(static_cast<Eigen::Index>(i), j);
                }
                run.y_pred.push_back(eval::predict(model, row));
            }
            runs.push_back(std::move(run));
        }
    }

    const std::vector<std::pair<std::string, fs::path>> sources = {
        {"Repos", files::vectors(cfg, "repos")},
        {"Issues", files::vectors(cfg, "issues")},
        {"APIs", files::vectors(cfg, "apis")},
        {"RIAs", files::vectors(cfg, "rias")},
    };
    for (const auto& [name, path] : sources) {
        if (!fs::exists(path)) {
            continue;
        }
        runs.push_back(
            vector_run(name, load_vectors(path), developers, split, cfg.classifier));
    }
    for (int k : cfg.pca_dims) {
        const fs::path path = files::pca_vectors(cfg, k);
        if (!fs::exists(path)) {
            continue;
        }
        runs.push_back(vector_run("RIAsPca-" + std::to_string(k), load_vectors(path),
                                  developers, split, cfg.classifier));
    }
    return runs;
}

inline void stage_classify(const RunConfig& cfg) {
    fs::create_directories(cfg.report_dir);
    for (const auto& run : build_runs(cfg)) {
        JsonlWriter w(files::predictions(cfg, run.name));
        for (std::size_t i = 0; i < run.ids.size(); ++i) {
            w.write(json{{"developer_id", run.ids[i]},
                         {"role", std::string(to_string(run.y_true[i]))},
                         {"predicted", std::string(to_string(run.y_pred[i]))}});
        }
        stage_summary("classify",
                      run.name + ": predictions=" + std::to_string(run.ids.size()));
    }
}

inline void stage_evaluate(const RunConfig& cfg) {
    fs::create_directories(cfg.report_dir);
    json reports = json::object();
    for (const auto& run : build_runs(cfg)) {
        auto report = eval::macro_weighted_metrics(run.y_true, run.y_pred, kAllRoles);
        reports[run.name] = eval::report_to_json(report);
        stage_summary("evaluate",
                      run.name + ": n=" + std::to_string(report.n) + " macroW_f1_pct=" +
                          std::to_string(eval::round_pct(report.macro_weighted_f1)));
    }
    json doc{{"artifact_version", config::kArtifactVersion},
             {"seed", cfg.seed},
             {"runs", reports}};
    std::ofstream out(files::report(cfg), std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << '\n';
    stage_summary("evaluate", "report=" + files::report(cfg).string());
}

inline void stage_analyze(const RunConfig& cfg) {
    fs::create_directories(cfg.report_dir);
    auto developers = load_developers(files::developers(cfg));
    auto rias = load_vectors(files::vectors(cfg, "rias"));
    std::map<RoleLabel, std::vector<std::vector<double>>> groups;
    for (const auto& [id, vec] : rias) {
        auto it = developers.find(id);
        if (it != developers.end() && it->second) {
            groups[*it->second].push_back(vec.values);
        }
    }
    if (groups.empty()) {
        throw StageError("no labeled RIAs vectors to analyze");
    }
    auto matrix = eval::inter_intra_matrix(groups);
    std::ofstream out(files::matrix_csv(cfg), std::ios::binary | std::ios::trunc);
    out << eval::matrix_to_csv(matrix);
    stage_summary("analyze", "roles=" + std::to_string(matrix.roles.size()) +
                                 " matrix=" + files::matrix_csv(cfg).string());
}

// ---------------------------------------------------------------------------
// Entry point

inline void write_resolved_config(const RunConfig& cfg) {
    fs::create_directories(cfg.report_dir);
    std::ofstream out(files::resolved_config(cfg), std::ios::binary | std::ios::trunc);
    out << config::resolved_config_json(cfg).dump(2) << '\n';
}

inline int run_command(int argc, const char* const* argv) {
    CLI::App app{"developer-expertise embedding pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string fixtures_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers_override;
    bool deterministic = false;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--fixtures", fixtures_path, "fixture directory for offline mining");
    app.add_option("--seed", seed_override, "seed override for every stage");
    app.add_option("--workers", workers_override, "training worker threads");
    app.add_flag("--deterministic", deterministic,
                 "force workers=1 for reproducible runs");
    app.add_option("--out", out_dir, "root directory for corpus/models/reports");

    const std::vector<std::string> stage_names = {
        "mine", "ingest", "train", "embed", "concat",
        "pca",  "classify", "evaluate", "analyze", "all"};
    for (const auto& name : stage_names) {
        app.add_subcommand(name)->fallthrough();
    }
    auto* imports_cmd =
        app.add_subcommand("imports", "print the imports of one source file");
    imports_cmd->fallthrough();
    std::string imports_lang;
    std::string imports_file;
    imports_cmd->add_option("--lang", imports_lang, "LanguageId name")->required();
    imports_cmd->add_option("--file", imports_file, "source file path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 2;
    }

    if (imports_cmd->parsed()) {
        auto language = imports::language_from_string(imports_lang);
        if (!language) {
            std::cerr << "config error: unknown --lang value '" << imports_lang << "'\n";
            return 2;
        }
        std::ifstream in(imports_file, std::ios::binary);
        if (!in) {
            std::cerr << "cannot open " << imports_file << '\n';
            return 1;
        }
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        try {
            for (const auto& name : imports::extract_imports(content, *language)) {
                std::cout << name << '\n';
            }
        } catch (const std::exception& e) {
            std::cerr << "extraction failed: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }

    RunConfig cfg;
    try {
        cfg = config_path.empty() ? config::default_config()
                                  : config::load_config(config_path);
        if (!fixtures_path.empty()) {
            cfg.fixtures_dir = fixtures_path;
        }
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.repos.seed = *seed_override;
            cfg.issues.seed = *seed_override;
            cfg.apis.seed = *seed_override;
            cfg.split.seed = *seed_override;
        }
        if (workers_override) {
            cfg.workers = *workers_override;
        }
        if (deterministic) {
            cfg.deterministic = true;
            cfg.workers = 1;
        }
        cfg.repos.workers = cfg.workers;
        cfg.issues.workers = cfg.workers;
        cfg.apis.workers = cfg.workers;
        if (!out_dir.empty()) {
            cfg.corpus_dir = fs::path(out_dir) / "corpus";
            cfg.model_dir = fs::path(out_dir) / "models";
            cfg.report_dir = fs::path(out_dir) / "reports";
        }
    } catch (const config::MalformedConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const config::UnknownKeyError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        write_resolved_config(cfg);
        if (stage == "mine" || stage == "all") stage_mine(cfg);
        if (stage == "ingest" || stage == "all") stage_ingest(cfg);
        if (stage == "train" || stage == "all") stage_train(cfg);
        if (stage == "embed" || stage == "all") stage_embed(cfg);
        if (stage == "concat" || stage == "all") stage_concat(cfg);
        if (stage == "pca" || stage == "all") stage_pca(cfg);
        if (stage == "classify" || stage == "all") stage_classify(cfg);
        if (stage == "evaluate" || stage == "all") stage_evaluate(cfg);
        if (stage == "analyze" || stage == "all") stage_analyze(cfg);
    } catch (const std::exception& e) {
        std::cerr << "stage '" << stage << "' failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

inline int run_command(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& arg : args) {
        argv.push_back(arg.c_str());
    }
    return run_command(static_cast<int>(argv.size()), argv.data());
}

}  // namespace devforge::cli
