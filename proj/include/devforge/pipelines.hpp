#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "devforge/model_io.hpp"
#include "devforge/pv.hpp"
#include "devforge/types.hpp"

namespace devforge::pipelines {

using json = nlohmann::json;

struct MissingSourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Source : std::uint8_t { Repos, Issues, APIs, RIAs, RIAsPca };

inline std::string_view to_string(Source s) {
    switch (s) {
        case Source::Repos: return "Repos";
        case Source::Issues: return "Issues";
        case Source::APIs: return "APIs";
        case Source::RIAs: return "RIAs";
        case Source::RIAsPca: return "RIAsPca";
    }
    throw std::logic_error("invalid Source value");
}

inline Source source_from_string(std::string_view name) {
    if (name == "Repos") return Source::Repos;
    if (name == "Issues") return Source::Issues;
    if (name == "APIs") return Source::APIs;
    if (name == "RIAs") return Source::RIAs;
    if (name == "RIAsPca") return Source::RIAsPca;
    throw std::runtime_error("unknown vector source: " + std::string(name));
}

// One developer's fixed-length expertise vector in one embedding space.
struct ExpertiseVector {
    std::string developer_id;
    Source source = Source::Repos;
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }
};

inline json to_json(const ExpertiseVector& v) {
    return json{{"developer_id", v.developer_id},
                {"source", std::string(to_string(v.source))},
                {"dim", v.values.size()},
                {"values", v.values}};
}

inline ExpertiseVector expertise_vector_from_json(const json& row) {
    ExpertiseVector v;
    v.developer_id = row.at("developer_id").get<std::string>();
    v.source = source_from_string(row.at("source").get<std::string>());
    v.values = row.at("values").get<std::vector<double>>();
    if (row.at("dim").get<std::size_t>() != v.values.size()) {
        throw DimensionMismatchError("dim field disagrees with values length for " +
                                     v.developer_id);
    }
    return v;
}

// Per-developer inference seed: stable FNV-1a mix so results do not depend
// on iteration order.
inline std::uint64_t developer_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = 14695981039346656037ull ^ base;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct TextEmbeddings {
    pv::EmbeddingModel model;
    std::vector<ExpertiseVector> train_vectors;
    std::vector<ExpertiseVector> test_vectors;
    std::vector<std::string> skipped_oov;  // test developers with no in-vocab token
};

// Trains on the train documents and infers vectors for the test documents.
// Test developers whose tokens are all out-of-vocabulary land on the skip
// list instead of being dropped silently.
inline TextEmbeddings embed_text_source(std::span<const TaggedDocument> train_docs,
                                        std::span<const TaggedDocument> test_docs,
                                        const pv::Hyperparams& hyper, Source source) {
    for (const auto& test_doc : test_docs) {
        for (const auto& train_doc : train_docs) {
            if (test_doc.tag == train_doc.tag) {
                throw pv::DuplicateTagError("tag present in both train and test: " +
                                            test_doc.tag);
            }
        }
    }
    TextEmbeddings out;
    out.model = pv::train(train_docs, hyper);
    out.train_vectors.reserve(train_docs.size());
    for (const auto& doc : train_docs) {
        auto row = out.model.doc_row(doc.tag);
        auto vec = out.model.doc_vector(*row);
        out.train_vectors.push_back(
            {doc.tag, source, std::vector<double>(vec.begin(), vec.end())});
    }
    for (const auto& doc : test_docs) {
        try {
            auto vec = pv::infer(out.model, doc.tokens, hyper.epochs,
                                 developer_seed(hyper.seed, doc.tag));
            out.test_vectors.push_back(
                {doc.tag, source, std::vector<double>(vec.begin(), vec.end())});
        } catch (const pv::OovOnlyError&) {
            out.skipped_oov.push_back(doc.tag);
        }
    }
    return out;
}

// Frequency-weighted mean of the in-vocabulary API word vectors:
// v = sum_a count(a) * W_in[a] / sum_a count(a). Unseen APIs are ignored.
inline ExpertiseVector embed_apis(const pv::EmbeddingModel& api_model,
                                  const std::map<std::string, std::uint64_t>& counts,
                                  const std::string& developer_id,
                                  bool frequency_weighted = true) {
    const int d = api_model.dim();
    std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
    double total_weight = 0.0;
    for (const auto& [name, count] : counts) {
        auto idx = api_model.vocab.lookup(name);
        if (!idx) {
            continue;
        }
        const double w = frequency_weighted ? static_cast<double>(count) : 1.0;
        auto vec = api_model.word_vector(*idx);
        for (int i = 0; i < d; ++i) {
            sum[static_cast<std::size_t>(i)] += w * static_cast<double>(vec[i]);
        }
        total_weight += w;
    }
    if (total_weight == 0.0) {
        throw pv::OovOnlyError("no API of developer " + developer_id +
                               " is in the model vocabulary");
    }
    for (auto& x : sum) {
        x /= total_weight;
    }
    return {developer_id, Source::APIs, std::move(sum)};
}

// Direct fetch of the trained document vector when the developer's tag was
// part of API-model training.
inline std::optional<ExpertiseVector> embed_apis_direct(
    const pv::EmbeddingModel& api_model, const std::string& developer_id) {
    auto row = api_model.doc_row(developer_id);
    if (!row) {
        return std::nullopt;
    }
    auto vec = api_model.doc_vector(*row);
    return ExpertiseVector{developer_id, Source::APIs,
                           std::vector<double>(vec.begin(), vec.end())};
}

// Repos || Issues || APIs, in that fixed order.
inline ExpertiseVector concat_rias(const std::optional<ExpertiseVector>& repos,
                                   const std::optional<ExpertiseVector>& issues,
                                   const std::optional<ExpertiseVector>& apis) {
    std::vector<std::string> missing;
    if (!repos) missing.push_back("Repos");
    if (!issues) missing.push_back("Issues");
    if (!apis) missing.push_back("APIs");
    if (!missing.empty()) {
        std::string msg = "missing source(s):";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        throw MissingSourceError(msg);
    }
    if (repos->source != Source::Repos || issues->source != Source::Issues ||
        apis->source != Source::APIs) {
        throw MissingSourceError("vectors passed in the wrong source slots");
    }
    if (repos->developer_id != issues->developer_id ||
        repos->developer_id != apis->developer_id) {
        throw MissingSourceError("vectors belong to different developers");
    }
    ExpertiseVector out;
    out.developer_id = repos->developer_id;
    out.source = Source::RIAs;
    out.values.reserve(repos->values.size() + issues->values.size() +
                       apis->values.size());
    out.values.insert(out.values.end(), repos->values.begin(), repos->values.end());
    out.values.insert(out.values.end(), issues->values.begin(), issues->values.end());
    out.values.insert(out.values.end(), apis->values.begin(), apis->values.end());
    return out;
}

struct PcaModel {
    std::vector<double> mean;                // D
    std::vector<double> components;          // k x D row-major, rows orthonormal
    std::vector<double> explained_variance;  // k, non-increasing
    std::size_t input_dim = 0;
    std::size_t k = 0;
    bool rank_deficient = false;
};

namespace detail {

// Extends an orthonormal row set to `k` rows with an orthonormal completion
// (canonical basis candidates, re-orthogonalized twice).
inline void complete_orthonormal(std::vector<double>& components, std::size_t& rows,
                                 std::size_t k, std::size_t d) {
    pv::Rng rng(0x9E3779B97F4A7C15ull);
    std::size_t candidate = 0;
    while (rows < k) {
        std::vector<double> v(d, 0.0);
        if (candidate < d) {
            v[candidate] = 1.0;
            ++candidate;
        } else {
            for (auto& x : v) {
                x = rng.uniform01() - 0.5;
            }
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t r = 0; r < rows; ++r) {
                const double* row = components.data() + r * d;
                double dot = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    dot += row[i] * v[i];
                }
                for (std::size_t i = 0; i < d; ++i) {
                    v[i] -= dot * row[i];
                }
            }
        }
        double norm2 = 0.0;
        for (double x : v) {
            norm2 += x * x;
        }
        // Candidates nearly inside the current span would lose orthogonality
        // when rescaled; skip them.
        if (norm2 < 1e-4) {
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double x : v) {
            components.push_back(x * inv);
        }
        ++rows;
    }
}

}  // namespace detail

// Principal components of the given vectors: mean-centered SVD, top-k right
// singular directions ordered by decreasing explained variance. Components
// beyond the data rank are an orthonormal completion with zero variance.
inline PcaModel pca_fit(const std::vector<std::vector<double>>& vectors, int k) {
    const std::size_t n = vectors.size();
    if (n < 2) {
        throw std::invalid_argument("pca_fit needs at least 2 vectors");
    }
    const std::size_t d = vectors[0].size();
    for (const auto& v : vectors) {
        if (v.size() != d) {
            throw DimensionMismatchError("pca_fit input vectors differ in length");
        }
    }
    if (k < 1 || static_cast<std::size_t>(k) > d) {
        throw std::invalid_argument("pca_fit needs 1 <= k <= D");
    }

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                vectors[i][j];
        }
    }
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const auto& singular = svd.singularValues();
    const auto& v = svd.matrixV();  // D x min(N, D)
    const std::size_t available =
        std::min<std::size_t>(static_cast<std::size_t>(singular.size()),
                              static_cast<std::size_t>(k));

    PcaModel model;
    model.input_dim = d;
    model.k = static_cast<std::size_t>(k);
    model.mean.assign(mean.data(), mean.data() + d);
    model.components.reserve(model.k * d);
    model.explained_variance.reserve(model.k);
    for (std::size_t r = 0; r < available; ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            model.components.push_back(v(static_cast<Eigen::Index>(j),
                                         static_cast<Eigen::Index>(r)));
        }
        const double s = singular(static_cast<Eigen::Index>(r));
        model.explained_variance.push_back(s * s / static_cast<double>(n - 1));
    }
    std::size_t rows = available;
    if (rows < model.k) {
        detail::complete_orthonormal(model.components, rows, model.k, d);
        model.explained_variance.resize(model.k, 0.0);
    }
    if (model.explained_variance.back() < 1e-12) {
        model.rank_deficient = true;
        std::cerr << "[pca] warning: rank deficient, component " << model.k
                  << " explains < 1e-12 variance\n";
    }
    return model;
}

inline std::vector<double> pca_transform(const PcaModel& model,
                                         std::span<const double> v) {
    if (v.size() != model.input_dim) {
        throw DimensionMismatchError("pca_transform expects length " +
                                     std::to_string(model.input_dim) + ", got " +
                                     std::to_string(v.size()));
    }
    std::vector<double> centered(model.input_dim);
    for (std::size_t i = 0; i < model.input_dim; ++i) {
        centered[i] = v[i] - model.mean[i];
    }
    std::vector<double> out(model.k, 0.0);
    for (std::size_t r = 0; r < model.k; ++r) {
        const double* row = model.components.data() + r * model.input_dim;
        double dot = 0.0;
        for (std::size_t i = 0; i < model.input_dim; ++i) {
            dot += row[i] * centered[i];
        }
        out[r] = dot;
    }
    return out;
}

inline std::vector<double> pca_inverse_transform(const PcaModel& model,
                                                 std::span<const double> y) {
    if (y.size() != model.k) {
        throw DimensionMismatchError("pca_inverse_transform expects length " +
                                     std::to_string(model.k));
    }
    std::vector<double> out = model.mean;
    for (std::size_t r = 0; r < model.k; ++r) {
        const double* row = model.components.data() + r * model.input_dim;
        for (std::size_t i = 0; i < model.input_dim; ++i) {
            out[i] += y[r] * row[i];
        }
    }
    return out;
}

inline void save_pca(const PcaModel& model, const std::filesystem::path& path) {
    json header{{"kind", "pca"},
                {"input_dim", model.input_dim},
                {"k", model.k},
                {"explained_variance", model.explained_variance},
                {"rank_deficient", model.rank_deficient}};
    model_io::NamedMatrix mean{"mean", 1, model.input_dim,
                               std::vector<float>(model.mean.begin(), model.mean.end())};
    model_io::NamedMatrix components{
        "components", model.k, model.input_dim,
        std::vector<float>(model.components.begin(), model.components.end())};
    model_io::save_container(path, std::move(header), {mean, components});
}

inline PcaModel load_pca(const std::filesystem::path& path) {
    auto c = model_io::load_container(path);
    if (c.header.value("kind", "") != "pca") {
        throw model_io::CorruptModelError("container does not hold a pca model");
    }
    PcaModel model;
    model.input_dim = c.header.at("input_dim").get<std::size_t>();
    model.k = c.header.at("k").get<std::size_t>();
    model.explained_variance =
        c.header.at("explained_variance").get<std::vector<double>>();
    model.rank_deficient = c.header.value("rank_deficient", false);
    if (c.matrices.size() != 2 || c.matrices[0].name != "mean" ||
        c.matrices[1].name != "components") {
        throw model_io::CorruptModelError("unexpected matrix set in pca model");
    }
    model.mean.assign(c.matrices[0].data.begin(), c.matrices[0].data.end());
    model.components.assign(c.matrices[1].data.begin(), c.matrices[1].data.end());
    if (model.mean.size() != model.input_dim ||
        model.components.size() != model.k * model.input_dim) {
        throw model_io::CorruptModelError("pca matrix shapes disagree with header");
    }
    return model;
}

}  // namespace devforge::pipelines
