#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "devforge/pv.hpp"
#include "devforge/types.hpp"

namespace devforge::eval {

using json = nlohmann::json;

struct TooFewPerClassError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingleClassError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteFeatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyVocabularyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Splitting

struct SplitPlan {
    std::array<double, 3> ratios{0.8, 0.1, 0.1};  // train, val, test
    std::uint64_t seed = 1;
    bool stratified = true;

    void validate() const {
        double sum = 0.0;
        for (double r : ratios) {
            if (!(r > 0.0 && r < 1.0)) {
                throw std::invalid_argument("split ratios must each be in (0,1)");
            }
            sum += r;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("split ratios must sum to 1");
        }
    }
};

struct Split {
    std::vector<std::string> train_ids;
    std::vector<std::string> val_ids;
    std::vector<std::string> test_ids;
};

namespace detail {

inline void shuffle_ids(std::vector<std::string>& ids, pv::Rng& rng) {
    for (std::size_t i = ids.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(ids[i - 1], ids[j]);
    }
}

// Largest-remainder allocation of `target` slots over groups with the given
// ideals, honoring per-group caps.
inline std::vector<std::size_t> allocate(const std::vector<double>& ideals,
                                         const std::vector<std::size_t>& caps,
                                         std::size_t target) {
    const std::size_t g = ideals.size();
    std::vector<std::size_t> alloc(g);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < g; ++i) {
        alloc[i] = std::min(caps[i], static_cast<std::size_t>(std::floor(ideals[i])));
        assigned += alloc[i];
    }
    std::vector<std::size_t> order(g);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double fa = ideals[a] - std::floor(ideals[a]);
        double fb = ideals[b] - std::floor(ideals[b]);
        return fa > fb;
    });
    while (assigned < target) {
        bool progressed = false;
        for (std::size_t i : order) {
            if (assigned == target) {
                break;
            }
            if (alloc[i] < caps[i]) {
                ++alloc[i];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) {
            throw std::logic_error("split allocation cannot reach target");
        }
    }
    return alloc;
}

}  // namespace detail

// Deterministic, permutation-insensitive split. Stratified mode keeps the
// per-role share of each split within one member of the exact proportion.
// Global sizes are floor(train), floor(val), remainder for test.
inline Split split(const std::vector<std::pair<std::string, RoleLabel>>& developers,
                   const SplitPlan& plan) {
    plan.validate();
    const std::size_t n = developers.size();
    if (n == 0) {
        throw std::invalid_argument("no developers to split");
    }
    const auto n_train = static_cast<std::size_t>(
        std::floor(plan.ratios[0] * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(
        std::floor(plan.ratios[1] * static_cast<double>(n)));

    pv::Rng rng(plan.seed);
    Split out;

    if (!plan.stratified) {
        std::vector<std::string> ids;
        ids.reserve(n);
        for (const auto& [id, role] : developers) {
            ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        detail::shuffle_ids(ids, rng);
        out.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                           ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        out.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                            ids.end());
        return out;
    }

    std::map<RoleLabel, std::vector<std::string>> groups;
    for (const auto& [id, role] : developers) {
        groups[role].push_back(id);
    }
    for (auto& [role, ids] : groups) {
        if (ids.size() < 3) {
            throw TooFewPerClassError(
                "stratified split needs >= 3 members per role; " +
                std::string(to_string(role)) + " has " + std::to_string(ids.size()));
        }
        std::sort(ids.begin(), ids.end());
        detail::shuffle_ids(ids, rng);
    }

    std::vector<RoleLabel> roles;
    std::vector<double> train_ideals;
    std::vector<std::size_t> sizes;
    for (const auto& [role, ids] : groups) {
        roles.push_back(role);
        sizes.push_back(ids.size());
        train_ideals.push_back(plan.ratios[0] * static_cast<double>(ids.size()));
    }
    auto train_alloc = detail::allocate(train_ideals, sizes, n_train);

    std::vector<double> val_ideals;
    std::vector<std::size_t> val_caps;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        val_ideals.push_back(plan.ratios[1] * static_cast<double>(sizes[i]));
        val_caps.push_back(sizes[i] - train_alloc[i]);
    }
    auto val_alloc = detail::allocate(val_ideals, val_caps, n_val);

    for (std::size_t i = 0; i < roles.size(); ++i) {
        const auto& ids = groups[roles[i]];
        const std::size_t t = train_alloc[i];
        const std::size_t v = val_alloc[i];
        out.train_ids.insert(out.train_ids.end(), ids.begin(),
                             ids.begin() + static_cast<std::ptrdiff_t>(t));
        out.val_ids.insert(out.val_ids.end(),
                           ids.begin() + static_cast<std::ptrdiff_t>(t),
                           ids.begin() + static_cast<std::ptrdiff_t>(t + v));
        out.test_ids.insert(out.test_ids.end(),
                            ids.begin() + static_cast<std::ptrdiff_t>(t + v), ids.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classifiers

struct LogRegConfig {
    double l2 = 1e-4;
    double lr = 0.5;
    int max_iters = 2000;
    double tol = 1e-6;
};

struct LogRegModel {
    Eigen::MatrixXd weights;  // C x d
    Eigen::VectorXd bias;     // C
    std::vector<RoleLabel> classes;
    LogRegConfig config;
    int iterations = 0;
    double final_loss = 0.0;
};

namespace detail {

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double row_max = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - row_max).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

inline double logreg_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_onehot,
                          const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                          double l2) {
    Eigen::MatrixXd logits = x * w.transpose();
    logits.rowwise() += b.transpose();
    double nll = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double row_max = logits.row(i).maxCoeff();
        const double lse =
            row_max + std::log((logits.row(i).array() - row_max).exp().sum());
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            if (y_onehot(i, c) > 0.5) {
                nll += lse - logits(i, c);
            }
        }
    }
    nll /= static_cast<double>(logits.rows());
    return nll + 0.5 * l2 * w.squaredNorm();
}

}  // namespace detail

struct LogRegGradients {
    Eigen::MatrixXd grad_weights;  // C x d
    Eigen::VectorXd grad_bias;     // C
};

// Gradient of mean softmax cross-entropy + (l2/2)*||W||^2 at (W, b).
inline LogRegGradients logreg_gradients(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& y_onehot,
                                        const Eigen::MatrixXd& w,
                                        const Eigen::VectorXd& b, double l2) {
    Eigen::MatrixXd logits = x * w.transpose();
    logits.rowwise() += b.transpose();
    Eigen::MatrixXd p = detail::softmax_rows(logits);
    Eigen::MatrixXd delta = (p - y_onehot) / static_cast<double>(x.rows());
    LogRegGradients g;
    g.grad_weights = delta.transpose() * x + l2 * w;
    g.grad_bias = delta.colwise().sum().transpose();
    return g;
}

// Full-batch descent with zero initialization; the loss never increases
// (step halving on any detected increase).
inline LogRegModel train_logreg(const Eigen::MatrixXd& x,
                                const std::vector<RoleLabel>& y,
                                const LogRegConfig& config = {}) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw DimensionMismatchError("feature matrix rows do not match labels");
    }
    if (!x.allFinite()) {
        throw NonFiniteFeatureError("feature matrix contains NaN or Inf");
    }
    std::vector<RoleLabel> classes;
    for (RoleLabel role : kAllRoles) {
        if (std::find(y.begin(), y.end(), role) != y.end()) {
            classes.push_back(role);
        }
    }
    if (classes.size() < 2) {
        throw SingleClassError("training labels cover fewer than 2 classes");
    }
    if (static_cast<std::size_t>(x.rows()) < classes.size()) {
        throw std::invalid_argument("need at least as many examples as classes");
    }

    const auto n = x.rows();
    const auto d = x.cols();
    const auto c = static_cast<Eigen::Index>(classes.size());
    Eigen::MatrixXd y_onehot = Eigen::MatrixXd::Zero(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto it = std::find(classes.begin(), classes.end(),
                            y[static_cast<std::size_t>(i)]);
        y_onehot(i, static_cast<Eigen::Index>(it - classes.begin())) = 1.0;
    }

    LogRegModel model;
    model.classes = classes;
    model.config = config;
    model.weights = Eigen::MatrixXd::Zero(c, d);
    model.bias = Eigen::VectorXd::Zero(c);

    double loss = detail::logreg_loss(x, y_onehot, model.weights, model.bias, config.l2);
    for (int iter = 0; iter < config.max_iters; ++iter) {
        auto g = logreg_gradients(x, y_onehot, model.weights, model.bias, config.l2);
        const double grad_inf =
            std::max(g.grad_weights.cwiseAbs().maxCoeff(), g.grad_bias.cwiseAbs().maxCoeff());
        model.iterations = iter;
        if (grad_inf <= config.tol) {
            break;
        }
        double step = config.lr;
        for (int halving = 0; halving < 60; ++halving) {
            Eigen::MatrixXd w_next = model.weights - step * g.grad_weights;
            Eigen::VectorXd b_next = model.bias - step * g.grad_bias;
            const double next_loss =
                detail::logreg_loss(x, y_onehot, w_next, b_next, config.l2);
            if (next_loss <= loss) {
                model.weights = std::move(w_next);
                model.bias = std::move(b_next);
                loss = next_loss;
                break;
            }
            step *= 0.5;
        }
    }
    model.final_loss = loss;
    return model;
}

inline Eigen::VectorXd predict_proba(const LogRegModel& model,
                                     std::span<const double> x) {
    if (static_cast<Eigen::Index>(x.size()) != model.weights.cols()) {
        throw DimensionMismatchError("feature length " + std::to_string(x.size()) +
                                     " does not match model dimension " +
                                     std::to_string(model.weights.cols()));
    }
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd logits = model.weights * xv + model.bias;
    const double m = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - m).exp();
    p /= p.sum();
    return p;
}

// Argmax of the softmax logits; ties break to the lowest class index.
inline RoleLabel predict(const LogRegModel& model, std::span<const double> x) {
    Eigen::VectorXd p = predict_proba(model, x);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < p.size(); ++i) {
        if (p(i) > p(best)) {
            best = i;
        }
    }
    return model.classes[static_cast<std::size_t>(best)];
}

// Pluggable classifier contract so other classifier families can slot into
// the harness unchanged.
class RoleClassifier {
  public:
    virtual ~RoleClassifier() = default;
    virtual void fit(const Eigen::MatrixXd& x, const std::vector<RoleLabel>& y) = 0;
    virtual RoleLabel predict(std::span<const double> x) const = 0;
};

class LogisticRegressionClassifier : public RoleClassifier {
  public:
    explicit LogisticRegressionClassifier(LogRegConfig config = {})
        : config_(config) {}

    void fit(const Eigen::MatrixXd& x, const std::vector<RoleLabel>& y) override {
        model_ = train_logreg(x, y, config_);
    }

    RoleLabel predict(std::span<const double> x) const override {
        return eval::predict(model_, x);
    }

    const LogRegModel& model() const { return model_; }

  private:
    LogRegConfig config_;
    LogRegModel model_;
};

// Constant classifier returning the modal training role (ties break to the
// lowest class index).
class MajorityClassifier : public RoleClassifier {
  public:
    void fit(const Eigen::MatrixXd&, const std::vector<RoleLabel>& y) override {
        fit_labels(y);
    }

    void fit_labels(const std::vector<RoleLabel>& y) {
        if (y.empty()) {
            throw std::invalid_argument("majority baseline needs train labels");
        }
        std::array<std::size_t, kAllRoles.size()> counts{};
        for (RoleLabel role : y) {
            ++counts[static_cast<std::size_t>(role)];
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < counts.size(); ++i) {
            if (counts[i] > counts[best]) {
                best = i;
            }
        }
        modal_ = static_cast<RoleLabel>(best);
    }

    RoleLabel predict(std::span<const double>) const override { return modal_; }

    RoleLabel modal_role() const { return modal_; }

  private:
    RoleLabel modal_ = RoleLabel::Backend;
};

inline MajorityClassifier majority_baseline(const std::vector<RoleLabel>& train_labels) {
    MajorityClassifier clf;
    clf.fit_labels(train_labels);
    return clf;
}

// ---------------------------------------------------------------------------
// Metrics

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    std::vector<RoleLabel> classes;
    std::map<RoleLabel, ClassMetrics> per_class;
    double macro_weighted_precision = 0.0;
    double macro_weighted_recall = 0.0;
    double macro_weighted_f1 = 0.0;
    std::vector<std::vector<std::uint64_t>> confusion;  // [true][pred]
    std::size_t n = 0;
};

// Per-class precision/recall/F1 with support weighting:
// weighted X = sum_c (support_c / n) * X_c. Zero-division convention: a
// never-predicted class has precision 0; p + r = 0 gives F1 = 0.
inline EvalReport macro_weighted_metrics(std::span<const RoleLabel> y_true,
                                         std::span<const RoleLabel> y_pred,
                                         std::span<const RoleLabel> classes) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw std::invalid_argument("label vectors must be nonempty and equal length");
    }
    const std::size_t c = classes.size();
    auto class_index = [&](RoleLabel label) -> std::size_t {
        for (std::size_t i = 0; i < c; ++i) {
            if (classes[i] == label) {
                return i;
            }
        }
        throw UnknownLabelError("label " + std::string(to_string(label)) +
                                " not in the class list");
    };

    EvalReport report;
    report.classes.assign(classes.begin(), classes.end());
    report.n = y_true.size();
    report.confusion.assign(c, std::vector<std::uint64_t>(c, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ++report.confusion[class_index(y_true[i])][class_index(y_pred[i])];
    }

    for (std::size_t i = 0; i < c; ++i) {
        std::uint64_t tp = report.confusion[i][i];
        std::uint64_t fp = 0;
        std::uint64_t fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == i) continue;
            fp += report.confusion[j][i];
            fn += report.confusion[i][j];
        }
        ClassMetrics m;
        m.support = static_cast<std::size_t>(tp + fn);
        m.precision = (tp + fp) > 0
                          ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                          : 0.0;
        m.recall = (tp + fn) > 0
                       ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                       : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        report.per_class[classes[i]] = m;

        const double weight =
            static_cast<double>(m.support) / static_cast<double>(report.n);
        report.macro_weighted_precision += weight * m.precision;
        report.macro_weighted_recall += weight * m.recall;
        report.macro_weighted_f1 += weight * m.f1;
    }
    return report;
}

inline double round_pct(double fraction) {
    return std::round(fraction * 10000.0) / 100.0;
}

inline json report_to_json(const EvalReport& report) {
    json per_class = json::object();
    for (const auto& [role, m] : report.per_class) {
        per_class[std::string(to_string(role))] = {
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"support", m.support},
            {"precision_pct", round_pct(m.precision)},
            {"recall_pct", round_pct(m.recall)},
            {"f1_pct", round_pct(m.f1)},
        };
    }
    std::vector<std::string> class_names;
    for (RoleLabel role : report.classes) {
        class_names.emplace_back(to_string(role));
    }
    return json{{"n", report.n},
                {"classes", class_names},
                {"per_class", per_class},
                {"macro_weighted",
                 {{"precision", report.macro_weighted_precision},
                  {"recall", report.macro_weighted_recall},
                  {"f1", report.macro_weighted_f1},
                  {"precision_pct", round_pct(report.macro_weighted_precision)},
                  {"recall_pct", round_pct(report.macro_weighted_recall)},
                  {"f1_pct", round_pct(report.macro_weighted_f1)}}},
                {"confusion", report.confusion}};
}

// ---------------------------------------------------------------------------
// tf-idf baseline

struct TfidfVectors {
    std::vector<std::string> features;  // top_k train tokens by document frequency
    Eigen::MatrixXd train;              // N x k, L2-normalized rows
    Eigen::MatrixXd test;               // M x k
};

// Features are the top_k train tokens by document frequency (ties by token);
// tf is the raw count, idf = ln((1+N)/(1+df)) + 1, rows L2-normalized.
// Test tokens outside the feature set are ignored.
inline TfidfVectors tfidf_vectorize(std::span<const TaggedDocument> train_docs,
                                    std::span<const TaggedDocument> test_docs,
                                    std::size_t top_k = 1471) {
    if (top_k < 1) {
        throw std::invalid_argument("top_k must be >= 1");
    }
    std::map<std::string, std::size_t> df;
    for (const auto& doc : train_docs) {
        std::map<std::string, std::size_t> seen;
        for (const auto& tok : doc.tokens) {
            ++seen[tok];
        }
        for (const auto& [tok, count] : seen) {
            ++df[tok];
        }
    }
    if (df.empty()) {
        throw EmptyVocabularyError("train documents contain no tokens");
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > top_k) {
        ranked.resize(top_k);
    }

    TfidfVectors out;
    std::unordered_map<std::string, std::size_t> feature_index;
    std::vector<double> idf(ranked.size());
    const double n_docs = static_cast<double>(train_docs.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out.features.push_back(ranked[i].first);
        feature_index.emplace(ranked[i].first, i);
        idf[i] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(ranked[i].second))) + 1.0;
    }

    auto vectorize = [&](std::span<const TaggedDocument> docs) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(
            static_cast<Eigen::Index>(docs.size()),
            static_cast<Eigen::Index>(out.features.size()));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            for (const auto& tok : docs[i].tokens) {
                auto it = feature_index.find(tok);
                if (it != feature_index.end()) {
                    m(static_cast<Eigen::Index>(i),
                      static_cast<Eigen::Index>(it->second)) += 1.0;
                }
            }
            for (std::size_t j = 0; j < out.features.size(); ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *= idf[j];
            }
            const double norm = m.row(static_cast<Eigen::Index>(i)).norm();
            if (norm > 0.0) {
                m.row(static_cast<Eigen::Index>(i)) /= norm;
            }
        }
        return m;
    };
    out.train = vectorize(train_docs);
    out.test = vectorize(test_docs);
    return out;
}

// ---------------------------------------------------------------------------
// Role-similarity analysis

struct InterIntraMatrix {
    std::vector<RoleLabel> roles;
    std::vector<std::vector<double>> values;  // rows: roles, cols: centroids
};

// M[r][c]: mean cosine similarity of role r members to the centroid of
// role c. Diagonal dominance indicates separable roles.
inline InterIntraMatrix inter_intra_matrix(
    const std::map<RoleLabel, std::vector<std::vector<double>>>& groups) {
    if (groups.empty()) {
        throw std::invalid_argument("no role groups given");
    }
    std::size_t dim = 0;
    for (const auto& [role, members] : groups) {
        if (members.empty()) {
            throw std::invalid_argument("role group " +
                                        std::string(to_string(role)) + " is empty");
        }
        for (const auto& v : members) {
            if (dim == 0) dim = v.size();
            if (v.size() != dim) {
                throw DimensionMismatchError("member vectors differ in length");
            }
        }
    }

    auto norm_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    InterIntraMatrix out;
    std::vector<std::vector<double>> centroids;
    for (const auto& [role, members] : groups) {
        out.roles.push_back(role);
        std::vector<double> centroid(dim, 0.0);
        for (const auto& v : members) {
            for (std::size_t i = 0; i < dim; ++i) {
                centroid[i] += v[i];
            }
        }
        for (auto& x : centroid) {
            x /= static_cast<double>(members.size());
        }
        if (norm_of(centroid) == 0.0) {
            throw ZeroVectorError("centroid of role " +
                                  std::string(to_string(role)) + " has zero norm");
        }
        centroids.push_back(std::move(centroid));
    }

    out.values.assign(out.roles.size(), std::vector<double>(out.roles.size(), 0.0));
    std::size_t r = 0;
    for (const auto& [role, members] : groups) {
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double centroid_norm = norm_of(centroids[c]);
            double mean_cos = 0.0;
            for (const auto& v : members) {
                const double member_norm = norm_of(v);
                if (member_norm == 0.0) {
                    throw ZeroVectorError("member of role " +
                                          std::string(to_string(role)) +
                                          " has zero norm");
                }
                double dot = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    dot += v[i] * centroids[c][i];
                }
                mean_cos += dot / (member_norm * centroid_norm);
            }
            out.values[r][c] = mean_cos / static_cast<double>(members.size());
        }
        ++r;
    }
    return out;
}

inline std::string matrix_to_csv(const InterIntraMatrix& m) {
    std::ostringstream out;
    out.precision(17);
    out << "role";
    for (RoleLabel role : m.roles) {
        out << ',' << to_string(role);
    }
    out << '\n';
    for (std::size_t r = 0; r < m.roles.size(); ++r) {
        out << to_string(m.roles[r]);
        for (double value : m.values[r]) {
            out << ',' << value;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace devforge::eval
