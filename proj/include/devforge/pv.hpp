#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "devforge/model_io.hpp"
#include "devforge/types.hpp"

namespace devforge::pv {

using json = nlohmann::json;

struct EmptyVocabularyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DuplicateTagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OovOnlyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HyperparamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algorithm : std::uint8_t { DM, DBOW };

inline std::string_view to_string(Algorithm a) {
    return a == Algorithm::DM ? "DM" : "DBOW";
}

inline Algorithm algorithm_from_string(std::string_view name) {
    if (name == "DM") return Algorithm::DM;
    if (name == "DBOW") return Algorithm::DBOW;
    throw HyperparamError("unknown algorithm: " + std::string(name));
}

struct Hyperparams {
    int vector_size = 100;
    int window = 5;
    int min_count = 5;
    Algorithm algorithm = Algorithm::DM;
    int negative = 5;
    int epochs = 10;
    double alpha_initial = 0.025;
    double alpha_final = 1e-4;
    std::uint64_t seed = 1;
    int workers = 1;
    // DBOW leaves input word vectors untrained unless this interleaves
    // skip-gram word updates; the API-averaging pipeline needs it on.
    bool train_word_vectors = false;

    void validate() const {
        if (vector_size < 2) throw HyperparamError("vector_size must be >= 2");
        if (window < 1) throw HyperparamError("window must be positive");
        if (min_count < 1) throw HyperparamError("min_count must be positive");
        if (negative < 1) throw HyperparamError("negative must be positive");
        if (epochs < 1) throw HyperparamError("epochs must be positive");
        if (workers < 1) throw HyperparamError("workers must be positive");
        if (!(alpha_final < alpha_initial)) {
            throw HyperparamError("alpha_final must be below alpha_initial");
        }
    }
};

// Deterministic uniform source; the raw engine sequence is pinned by the
// standard, the [0,1) mapping avoids distribution-object variance across
// standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

  private:
    std::mt19937_64 gen_;
};

struct VocabEntry {
    std::string token;
    std::uint64_t count = 0;
};

inline constexpr double kNoiseExponent = 0.75;

class Vocabulary {
  public:
    Vocabulary() = default;

    // Tokens below min_count are excluded; survivors are ordered by
    // descending count then token for dense, reproducible indices.
    static Vocabulary build(std::span<const TaggedDocument> docs, int min_count) {
        std::unordered_map<std::string, std::uint64_t> counts;
        for (const auto& doc : docs) {
            for (const auto& tok : doc.tokens) {
                ++counts[tok];
            }
        }
        std::vector<VocabEntry> entries;
        for (auto& [tok, count] : counts) {
            if (count >= static_cast<std::uint64_t>(min_count)) {
                entries.push_back({tok, count});
            }
        }
        if (entries.empty()) {
            throw EmptyVocabularyError("no token reaches min_count=" +
                                       std::to_string(min_count));
        }
        std::sort(entries.begin(), entries.end(),
                  [](const VocabEntry& a, const VocabEntry& b) {
                      if (a.count != b.count) return a.count > b.count;
                      return a.token < b.token;
                  });
        return Vocabulary(std::move(entries));
    }

    static Vocabulary from_entries(std::vector<VocabEntry> entries) {
        if (entries.empty()) {
            throw EmptyVocabularyError("vocabulary has no entries");
        }
        return Vocabulary(std::move(entries));
    }

    std::size_t size() const { return entries_.size(); }

    const VocabEntry& entry(std::size_t index) const { return entries_[index]; }

    const std::vector<VocabEntry>& entries() const { return entries_; }

    std::uint64_t total_count() const { return total_count_; }

    std::optional<std::int32_t> lookup(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    // Cumulative distribution over indices, proportional to count^0.75.
    const std::vector<double>& noise_cdf() const { return noise_cdf_; }

    std::int32_t sample_noise(Rng& rng) const {
        double u = rng.uniform01();
        auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
        if (it == noise_cdf_.end()) {
            return static_cast<std::int32_t>(noise_cdf_.size()) - 1;
        }
        return static_cast<std::int32_t>(it - noise_cdf_.begin());
    }

  private:
    explicit Vocabulary(std::vector<VocabEntry> entries)
        : entries_(std::move(entries)) {
        total_count_ = 0;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            index_.emplace(entries_[i].token, static_cast<std::int32_t>(i));
            total_count_ += entries_[i].count;
        }
        double z = 0.0;
        for (const auto& e : entries_) {
            z += std::pow(static_cast<double>(e.count), kNoiseExponent);
        }
        noise_cdf_.reserve(entries_.size());
        double cum = 0.0;
        for (const auto& e : entries_) {
            cum += std::pow(static_cast<double>(e.count), kNoiseExponent) / z;
            noise_cdf_.push_back(cum);
        }
        noise_cdf_.back() = 1.0;
    }

    std::vector<VocabEntry> entries_;
    std::unordered_map<std::string, std::int32_t> index_;
    std::uint64_t total_count_ = 0;
    std::vector<double> noise_cdf_;
};

struct EmbeddingModel {
    Hyperparams hyper;
    Vocabulary vocab;
    std::vector<float> w_in;   // V x d input word vectors
    std::vector<float> w_out;  // V x d output vectors (negative sampling)
    std::vector<float> docs;   // N x d document vectors
    std::vector<std::string> tags;
    std::unordered_map<std::string, std::int32_t> tag_index;

    int dim() const { return hyper.vector_size; }

    std::size_t n_docs() const { return tags.size(); }

    std::span<const float> word_vector(std::int32_t index) const {
        return {w_in.data() + static_cast<std::size_t>(index) * dim(),
                static_cast<std::size_t>(dim())};
    }

    std::span<const float> doc_vector(std::int32_t row) const {
        return {docs.data() + static_cast<std::size_t>(row) * dim(),
                static_cast<std::size_t>(dim())};
    }

    std::optional<std::int32_t> doc_row(std::string_view tag) const {
        auto it = tag_index.find(std::string(tag));
        if (it == tag_index.end()) {
            return std::nullopt;
        }
        return it->second;
    }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Learning rate after `done` of `total` updates: exact linear decay.
inline double lr_at(double alpha_initial, double alpha_final, std::uint64_t done,
                    std::uint64_t total) {
    if (total == 0) {
        return alpha_initial;
    }
    double f = static_cast<double>(done) / static_cast<double>(total);
    return alpha_initial + f * (alpha_final - alpha_initial);
}

struct NegSamplingGrads {
    std::vector<double> grad_h;
    std::vector<double> grad_u_target;
    std::vector<std::vector<double>> grad_u_negs;
};

// Gradients of L = -log sigma(u_w.h) - sum_j log sigma(-u_j.h) with respect
// to h, u_w and each u_j, all evaluated at the given parameter values.
template <typename HSpan, typename USpan>
inline NegSamplingGrads negative_sampling_gradients(
    const HSpan& h, const USpan& u_target, const std::vector<USpan>& u_negatives) {
    const std::size_t d = h.size();
    NegSamplingGrads g;
    g.grad_h.assign(d, 0.0);
    g.grad_u_target.assign(d, 0.0);

    double dot_w = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        dot_w += static_cast<double>(u_target[i]) * static_cast<double>(h[i]);
    }
    const double coeff_w = sigmoid(dot_w) - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        g.grad_u_target[i] = coeff_w * static_cast<double>(h[i]);
        g.grad_h[i] = coeff_w * static_cast<double>(u_target[i]);
    }
    g.grad_u_negs.reserve(u_negatives.size());
    for (const auto& u_j : u_negatives) {
        double dot_j = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            dot_j += static_cast<double>(u_j[i]) * static_cast<double>(h[i]);
        }
        const double coeff_j = sigmoid(dot_j);
        std::vector<double> grad_j(d);
        for (std::size_t i = 0; i < d; ++i) {
            grad_j[i] = coeff_j * static_cast<double>(h[i]);
            g.grad_h[i] += coeff_j * static_cast<double>(u_j[i]);
        }
        g.grad_u_negs.push_back(std::move(grad_j));
    }
    return g;
}

// Model-indexed form: rows of W_out are the output vectors.
inline NegSamplingGrads sgd_step_gradients(std::span<const double> h,
                                           std::int32_t target_index,
                                           std::span<const std::int32_t> negative_indices,
                                           const EmbeddingModel& model) {
    const int d = model.dim();
    auto row = [&](std::int32_t index) {
        return std::span<const float>(
            model.w_out.data() + static_cast<std::size_t>(index) * d,
            static_cast<std::size_t>(d));
    };
    std::vector<std::span<const float>> negs;
    negs.reserve(negative_indices.size());
    for (std::int32_t j : negative_indices) {
        negs.push_back(row(j));
    }
    return negative_sampling_gradients(h, row(target_index), negs);
}

// k draws from the count^0.75 noise distribution; draws equal to the target
// are rejected and redrawn.
inline std::vector<std::int32_t> sample_negatives(const Vocabulary& vocab, int k,
                                                  std::int32_t target_index, Rng& rng) {
    if (vocab.size() < 2) {
        throw std::logic_error("negative sampling needs a vocabulary of >= 2");
    }
    std::vector<std::int32_t> out;
    out.reserve(static_cast<std::size_t>(k));
    while (out.size() < static_cast<std::size_t>(k)) {
        std::int32_t draw = vocab.sample_noise(rng);
        if (draw != target_index) {
            out.push_back(draw);
        }
    }
    return out;
}

namespace detail {

inline void init_uniform_rows(std::vector<float>& m, std::size_t rows, int d, Rng& rng) {
    m.resize(rows * static_cast<std::size_t>(d));
    for (auto& x : m) {
        x = static_cast<float>((rng.uniform01() - 0.5) / d);
    }
}

inline std::vector<std::vector<std::int32_t>> encode_docs(
    std::span<const TaggedDocument> docs, const Vocabulary& vocab) {
    std::vector<std::vector<std::int32_t>> encoded;
    encoded.reserve(docs.size());
    for (const auto& doc : docs) {
        std::vector<std::int32_t> enc;
        enc.reserve(doc.tokens.size());
        for (const auto& tok : doc.tokens) {
            if (auto idx = vocab.lookup(tok)) {
                enc.push_back(*idx);
            }
        }
        encoded.push_back(std::move(enc));
    }
    return encoded;
}

// Sigmoid coefficients of one negative-sampling step at `h`, plus grad_h.
// Gradients are evaluated at the pre-step parameter values, so grad_h is
// complete before anything is written back.
inline std::vector<double> output_step_grads(const std::vector<float>& w_out, int d,
                                             std::span<const double> h,
                                             std::int32_t target,
                                             std::span<const std::int32_t> negatives,
                                             std::vector<double>& grad_h) {
    grad_h.assign(static_cast<std::size_t>(d), 0.0);
    std::vector<double> coeffs(negatives.size() + 1);
    const float* u_w = w_out.data() + static_cast<std::size_t>(target) * d;
    double dot_w = 0.0;
    for (int i = 0; i < d; ++i) {
        dot_w += static_cast<double>(u_w[i]) * h[i];
    }
    coeffs[0] = sigmoid(dot_w) - 1.0;
    for (int i = 0; i < d; ++i) {
        grad_h[i] += coeffs[0] * static_cast<double>(u_w[i]);
    }
    for (std::size_t j = 0; j < negatives.size(); ++j) {
        const float* u_j = w_out.data() + static_cast<std::size_t>(negatives[j]) * d;
        double dot_j = 0.0;
        for (int i = 0; i < d; ++i) {
            dot_j += static_cast<double>(u_j[i]) * h[i];
        }
        coeffs[j + 1] = sigmoid(dot_j);
        for (int i = 0; i < d; ++i) {
            grad_h[i] += coeffs[j + 1] * static_cast<double>(u_j[i]);
        }
    }
    return coeffs;
}

inline void apply_output_updates(std::vector<float>& w_out, int d,
                                 std::span<const double> h, std::int32_t target,
                                 std::span<const std::int32_t> negatives, double lr,
                                 const std::vector<double>& coeffs) {
    float* u_w = w_out.data() + static_cast<std::size_t>(target) * d;
    for (int i = 0; i < d; ++i) {
        u_w[i] -= static_cast<float>(lr * coeffs[0] * h[i]);
    }
    for (std::size_t j = 0; j < negatives.size(); ++j) {
        float* u_j = w_out.data() + static_cast<std::size_t>(negatives[j]) * d;
        for (int i = 0; i < d; ++i) {
            u_j[i] -= static_cast<float>(lr * coeffs[j + 1] * h[i]);
        }
    }
}

struct TrainContext {
    EmbeddingModel* model;
    const std::vector<std::vector<std::int32_t>>* encoded;
    std::uint64_t total_updates;
    std::atomic<std::uint64_t>* update_counter;
    int epochs_to_run;
};

inline void train_docs_range(const TrainContext& ctx, std::size_t begin,
                             std::size_t end, Rng& rng) {
    EmbeddingModel& model = *ctx.model;
    const Hyperparams& hp = model.hyper;
    const int d = hp.vector_size;
    std::vector<double> h(static_cast<std::size_t>(d));
    std::vector<double> grad_h;

    for (int epoch = 0; epoch < ctx.epochs_to_run; ++epoch) {
        for (std::size_t doc_i = begin; doc_i < end; ++doc_i) {
            const auto& enc = (*ctx.encoded)[doc_i];
            float* dvec = model.docs.data() + doc_i * static_cast<std::size_t>(d);
            const std::int64_t len = static_cast<std::int64_t>(enc.size());
            for (std::int64_t t = 0; t < len; ++t) {
                const std::uint64_t done =
                    ctx.update_counter->fetch_add(1, std::memory_order_relaxed);
                const double lr =
                    lr_at(hp.alpha_initial, hp.alpha_final, done, ctx.total_updates);
                const std::int32_t target = enc[static_cast<std::size_t>(t)];

                if (hp.algorithm == Algorithm::DM) {
                    const std::int64_t lo = std::max<std::int64_t>(0, t - hp.window);
                    const std::int64_t hi = std::min<std::int64_t>(len - 1, t + hp.window);
                    for (int i = 0; i < d; ++i) {
                        h[static_cast<std::size_t>(i)] = dvec[i];
                    }
                    int n_ctx = 0;
                    for (std::int64_t c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        const float* wv =
                            model.w_in.data() +
                            static_cast<std::size_t>(enc[static_cast<std::size_t>(c)]) * d;
                        for (int i = 0; i < d; ++i) {
                            h[static_cast<std::size_t>(i)] += wv[i];
                        }
                        ++n_ctx;
                    }
                    const double inv = 1.0 / (n_ctx + 1);
                    for (int i = 0; i < d; ++i) {
                        h[static_cast<std::size_t>(i)] *= inv;
                    }
                    auto negatives = sample_negatives(model.vocab, hp.negative, target, rng);
                    auto coeffs = output_step_grads(model.w_out, d, h, target, negatives, grad_h);
                    apply_output_updates(model.w_out, d, h, target, negatives, lr, coeffs);
                    for (int i = 0; i < d; ++i) {
                        dvec[i] -= static_cast<float>(lr * inv * grad_h[static_cast<std::size_t>(i)]);
                    }
                    for (std::int64_t c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        float* wv =
                            model.w_in.data() +
                            static_cast<std::size_t>(enc[static_cast<std::size_t>(c)]) * d;
                        for (int i = 0; i < d; ++i) {
                            wv[i] -= static_cast<float>(lr * inv * grad_h[static_cast<std::size_t>(i)]);
                        }
                    }
                } else {
                    for (int i = 0; i < d; ++i) {
                        h[static_cast<std::size_t>(i)] = dvec[i];
                    }
                    auto negatives = sample_negatives(model.vocab, hp.negative, target, rng);
                    auto coeffs = output_step_grads(model.w_out, d, h, target, negatives, grad_h);
                    apply_output_updates(model.w_out, d, h, target, negatives, lr, coeffs);
                    for (int i = 0; i < d; ++i) {
                        dvec[i] -= static_cast<float>(lr * grad_h[static_cast<std::size_t>(i)]);
                    }
                    if (hp.train_word_vectors) {
                        const std::int64_t lo = std::max<std::int64_t>(0, t - hp.window);
                        const std::int64_t hi = std::min<std::int64_t>(len - 1, t + hp.window);
                        for (std::int64_t c = lo; c <= hi; ++c) {
                            if (c == t) continue;
                            float* wv =
                                model.w_in.data() +
                                static_cast<std::size_t>(enc[static_cast<std::size_t>(c)]) * d;
                            for (int i = 0; i < d; ++i) {
                                h[static_cast<std::size_t>(i)] = wv[i];
                            }
                            auto word_negs =
                                sample_negatives(model.vocab, hp.negative, target, rng);
                            auto word_coeffs = output_step_grads(model.w_out, d, h, target,
                                                                 word_negs, grad_h);
                            apply_output_updates(model.w_out, d, h, target, word_negs, lr,
                                                 word_coeffs);
                            for (int i = 0; i < d; ++i) {
                                wv[i] -= static_cast<float>(lr * grad_h[static_cast<std::size_t>(i)]);
                            }
                        }
                    }
                }
            }
        }
    }
}

}  // namespace detail

using EpochCallback = std::function<void(int epoch, const EmbeddingModel&)>;

// Trains document (and word) vectors over the given tagged documents.
// workers == 1 is the deterministic contract; workers > 1 uses relaxed
// unsynchronized updates and is not reproducible.
inline EmbeddingModel train(std::span<const TaggedDocument> docs, Hyperparams hyper,
                            const EpochCallback& on_epoch = {}) {
    hyper.validate();
    if (docs.empty()) {
        throw EmptyVocabularyError("no documents to train on");
    }

    EmbeddingModel model;
    model.hyper = hyper;
    model.vocab = Vocabulary::build(docs, hyper.min_count);
    if (model.vocab.size() < 2) {
        throw EmptyVocabularyError(
            "negative sampling needs at least 2 distinct in-vocabulary tokens");
    }

    model.tags.reserve(docs.size());
    for (const auto& doc : docs) {
        if (doc.tag.empty()) {
            throw DuplicateTagError("empty document tag");
        }
        auto [it, inserted] = model.tag_index.emplace(
            doc.tag, static_cast<std::int32_t>(model.tags.size()));
        if (!inserted) {
            throw DuplicateTagError("duplicate document tag: " + doc.tag);
        }
        model.tags.push_back(doc.tag);
    }

    const int d = hyper.vector_size;
    Rng init_rng(hyper.seed);
    detail::init_uniform_rows(model.w_in, model.vocab.size(), d, init_rng);
    model.w_out.assign(model.vocab.size() * static_cast<std::size_t>(d), 0.0f);
    detail::init_uniform_rows(model.docs, docs.size(), d, init_rng);

    auto encoded = detail::encode_docs(docs, model.vocab);
    std::uint64_t total_positions = 0;
    for (const auto& enc : encoded) {
        total_positions += enc.size();
    }
    const std::uint64_t total_updates =
        total_positions * static_cast<std::uint64_t>(hyper.epochs);

    std::atomic<std::uint64_t> update_counter{0};
    detail::TrainContext ctx{&model, &encoded, total_updates, &update_counter,
                             hyper.epochs};

    if (hyper.workers == 1) {
        Rng rng(hyper.seed + 1);
        if (on_epoch) {
            ctx.epochs_to_run = 1;
            for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
                detail::train_docs_range(ctx, 0, encoded.size(), rng);
                on_epoch(epoch, model);
            }
        } else {
            detail::train_docs_range(ctx, 0, encoded.size(), rng);
        }
    } else {
        const std::size_t n = encoded.size();
        const std::size_t n_workers =
            std::min<std::size_t>(static_cast<std::size_t>(hyper.workers), n);
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < n_workers; ++w) {
            const std::size_t begin = n * w / n_workers;
            const std::size_t end = n * (w + 1) / n_workers;
            threads.emplace_back([&ctx, &hyper, begin, end, w] {
                Rng rng(hyper.seed + 1 + w);
                detail::train_docs_range(ctx, begin, end, rng);
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        if (on_epoch) {
            on_epoch(hyper.epochs - 1, model);
        }
    }
    return model;
}

// Optimizes a fresh document vector against the frozen model. OOV tokens are
// removed before any randomness is consumed.
inline std::vector<float> infer(const EmbeddingModel& model,
                                std::span<const std::string> tokens, int infer_epochs,
                                Rng& rng) {
    const int d = model.dim();
    const Hyperparams& hp = model.hyper;
    std::vector<std::int32_t> enc;
    enc.reserve(tokens.size());
    for (const auto& tok : tokens) {
        if (auto idx = model.vocab.lookup(tok)) {
            enc.push_back(*idx);
        }
    }
    if (enc.empty()) {
        throw OovOnlyError("no token of the document is in the vocabulary");
    }

    std::vector<float> v(static_cast<std::size_t>(d));
    for (auto& x : v) {
        x = static_cast<float>((rng.uniform01() - 0.5) / d);
    }

    const std::int64_t len = static_cast<std::int64_t>(enc.size());
    const std::uint64_t total =
        static_cast<std::uint64_t>(len) * static_cast<std::uint64_t>(infer_epochs);
    std::uint64_t done = 0;
    std::vector<double> h(static_cast<std::size_t>(d));
    std::vector<double> grad_h;

    for (int epoch = 0; epoch < infer_epochs; ++epoch) {
        for (std::int64_t t = 0; t < len; ++t) {
            const double lr = lr_at(hp.alpha_initial, hp.alpha_final, done++, total);
            const std::int32_t target = enc[static_cast<std::size_t>(t)];
            if (hp.algorithm == Algorithm::DM) {
                const std::int64_t lo = std::max<std::int64_t>(0, t - hp.window);
                const std::int64_t hi = std::min<std::int64_t>(len - 1, t + hp.window);
                for (int i = 0; i < d; ++i) {
                    h[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
                }
                int n_ctx = 0;
                for (std::int64_t c = lo; c <= hi; ++c) {
                    if (c == t) continue;
                    const float* wv =
                        model.w_in.data() +
                        static_cast<std::size_t>(enc[static_cast<std::size_t>(c)]) * d;
                    for (int i = 0; i < d; ++i) {
                        h[static_cast<std::size_t>(i)] += wv[i];
                    }
                    ++n_ctx;
                }
                const double inv = 1.0 / (n_ctx + 1);
                for (int i = 0; i < d; ++i) {
                    h[static_cast<std::size_t>(i)] *= inv;
                }
                auto negatives = sample_negatives(model.vocab, hp.negative, target, rng);
                detail::output_step_grads(model.w_out, d, h, target, negatives, grad_h);
                for (int i = 0; i < d; ++i) {
                    v[static_cast<std::size_t>(i)] -=
                        static_cast<float>(lr * inv * grad_h[static_cast<std::size_t>(i)]);
                }
            } else {
                for (int i = 0; i < d; ++i) {
                    h[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
                }
                auto negatives = sample_negatives(model.vocab, hp.negative, target, rng);
                detail::output_step_grads(model.w_out, d, h, target, negatives, grad_h);
                for (int i = 0; i < d; ++i) {
                    v[static_cast<std::size_t>(i)] -=
                        static_cast<float>(lr * grad_h[static_cast<std::size_t>(i)]);
                }
            }
        }
    }
    return v;
}

inline std::vector<float> infer(const EmbeddingModel& model,
                                std::span<const std::string> tokens, int infer_epochs,
                                std::uint64_t seed) {
    Rng rng(seed);
    return infer(model, tokens, infer_epochs, rng);
}

inline std::vector<float> infer(const EmbeddingModel& model,
                                std::span<const std::string> tokens,
                                std::uint64_t seed) {
    return infer(model, tokens, model.hyper.epochs, seed);
}

namespace detail {

inline json hyper_to_json(const Hyperparams& hp) {
    return json{{"vector_size", hp.vector_size},
                {"window", hp.window},
                {"min_count", hp.min_count},
                {"algorithm", std::string(to_string(hp.algorithm))},
                {"negative", hp.negative},
                {"epochs", hp.epochs},
                {"alpha_initial", hp.alpha_initial},
                {"alpha_final", hp.alpha_final},
                {"seed", hp.seed},
                {"workers", hp.workers},
                {"train_word_vectors", hp.train_word_vectors}};
}

inline Hyperparams hyper_from_json(const json& j) {
    Hyperparams hp;
    hp.vector_size = j.at("vector_size").get<int>();
    hp.window = j.at("window").get<int>();
    hp.min_count = j.at("min_count").get<int>();
    hp.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    hp.negative = j.at("negative").get<int>();
    hp.epochs = j.at("epochs").get<int>();
    hp.alpha_initial = j.at("alpha_initial").get<double>();
    hp.alpha_final = j.at("alpha_final").get<double>();
    hp.seed = j.at("seed").get<std::uint64_t>();
    hp.workers = j.at("workers").get<int>();
    hp.train_word_vectors = j.at("train_word_vectors").get<bool>();
    return hp;
}

}  // namespace detail

inline void save(const EmbeddingModel& model, std::ostream& out) {
    json vocab_entries = json::array();
    for (const auto& e : model.vocab.entries()) {
        vocab_entries.push_back({e.token, e.count});
    }
    json header{{"kind", "embedding"},
                {"hyper", detail::hyper_to_json(model.hyper)},
                {"vocab", {{"entries", std::move(vocab_entries)},
                           {"total_count", model.vocab.total_count()}}},
                {"tags", model.tags}};
    const auto v = static_cast<std::uint64_t>(model.vocab.size());
    const auto n = static_cast<std::uint64_t>(model.n_docs());
    const auto d = static_cast<std::uint64_t>(model.dim());
    model_io::save_container(out, std::move(header),
                             {{"w_in", v, d, model.w_in},
                              {"w_out", v, d, model.w_out},
                              {"docs", n, d, model.docs}});
}

inline void save(const EmbeddingModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw model_io::CorruptModelError("cannot open for writing: " + path.string());
    }
    save(model, out);
}

inline EmbeddingModel from_container(model_io::Container c) {
    if (c.header.value("kind", "") != "embedding") {
        throw model_io::CorruptModelError("container does not hold an embedding model");
    }
    EmbeddingModel model;
    model.hyper = detail::hyper_from_json(c.header.at("hyper"));
    std::vector<VocabEntry> entries;
    for (const auto& e : c.header.at("vocab").at("entries")) {
        entries.push_back({e.at(0).get<std::string>(), e.at(1).get<std::uint64_t>()});
    }
    model.vocab = Vocabulary::from_entries(std::move(entries));
    model.tags = c.header.at("tags").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < model.tags.size(); ++i) {
        model.tag_index.emplace(model.tags[i], static_cast<std::int32_t>(i));
    }
    if (c.matrices.size() != 3 || c.matrices[0].name != "w_in" ||
        c.matrices[1].name != "w_out" || c.matrices[2].name != "docs") {
        throw model_io::CorruptModelError("unexpected matrix set in embedding model");
    }
    model.w_in = std::move(c.matrices[0].data);
    model.w_out = std::move(c.matrices[1].data);
    model.docs = std::move(c.matrices[2].data);
    const auto d = static_cast<std::size_t>(model.hyper.vector_size);
    if (model.w_in.size() != model.vocab.size() * d ||
        model.w_out.size() != model.vocab.size() * d ||
        model.docs.size() != model.tags.size() * d) {
        throw model_io::CorruptModelError("matrix shapes disagree with header");
    }
    return model;
}

inline EmbeddingModel load(const std::filesystem::path& path) {
    return from_container(model_io::load_container(path));
}

inline std::string serialize_to_string(const EmbeddingModel& model) {
    std::ostringstream out(std::ios::binary);
    save(model, out);
    return out.str();
}

}  // namespace devforge::pv
