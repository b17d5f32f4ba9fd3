#include "empaudit/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "empaudit/errors.hpp"

namespace empaudit::lex {
namespace {

using json = nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

IntensityLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file: " + path.string());

    IntensityLexicon lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;

        auto fields = split_tabs(line);
        std::string where = "line " + std::to_string(line_no) + " of " + path.string();
        if (fields.size() != 3) {
            throw ParseError("expected 'word<TAB>emotion<TAB>score' at " + where);
        }
        std::string word = to_lower(trim(fields[0]));
        std::string emotion = to_lower(trim(fields[1]));
        int idx = emotion_index(emotion);
        if (idx < 0) {
            throw ParseError("unknown emotion name '" + emotion + "' at " + where);
        }
        double score;
        try {
            std::size_t consumed = 0;
            score = std::stod(trim(fields[2]), &consumed);
            if (consumed != trim(fields[2]).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("bad score '" + fields[2] + "' at " + where);
        }
        if (score < 0.0 || score > 1.0) {
            throw ValidationError("score outside [0,1] at " + where);
        }

        auto [it, inserted] = lexicon.try_emplace(word);
        double existing = it->second[static_cast<std::size_t>(idx)];
        if (!inserted && existing != 0.0 && existing != score) {
            throw ValidationError("conflicting duplicate entry for '" + word + "'/" +
                                  emotion + " at " + where);
        }
        it->second.set(static_cast<std::size_t>(idx), score);
    }
    return lexicon;
}

// ---------------------------------------------------------------------------
// OOV regressor
// ---------------------------------------------------------------------------

class OovTrainer {
public:
    OovTrainer(const OovTrainingConfig& config, int input_width, std::uint64_t seed)
        : config_(config), rng_(seed) {
        std::vector<int> sizes;
        sizes.push_back(input_width);
        sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
        sizes.push_back(static_cast<int>(kEmotionCount));

        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            int in = sizes[l];
            int out = sizes[l + 1];
            double limit = std::sqrt(6.0 / (in + out));
            Eigen::MatrixXd w(out, in);
            for (int r = 0; r < out; ++r) {
                for (int c = 0; c < in; ++c) w(r, c) = unit(rng_) * limit;
            }
            weights_.push_back(std::move(w));
            biases_.push_back(Eigen::VectorXd::Zero(out));
            m_w_.push_back(Eigen::MatrixXd::Zero(out, in));
            v_w_.push_back(Eigen::MatrixXd::Zero(out, in));
            m_b_.push_back(Eigen::VectorXd::Zero(out));
            v_b_.push_back(Eigen::VectorXd::Zero(out));
        }
    }

    OovModel run(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                 RegressionMetrics* metrics) {
        const auto n = static_cast<std::size_t>(x.rows());
        const int batch = std::max(1, std::min<int>(config_.batch_size,
                                                    static_cast<int>(n)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);

        double lr = config_.learning_rate_init;
        double best_loss = std::numeric_limits<double>::infinity();
        int no_improve = 0;
        std::vector<double> trace;

        int epoch = 0;
        for (; epoch < config_.max_epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng_);
            double epoch_loss = 0.0;
            std::size_t batches = 0;
            for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch)) {
                std::size_t count = std::min<std::size_t>(batch, n - begin);
                Eigen::MatrixXd xb(count, x.cols());
                Eigen::MatrixXd yb(count, y.cols());
                for (std::size_t i = 0; i < count; ++i) {
                    xb.row(static_cast<Eigen::Index>(i)) =
                        x.row(static_cast<Eigen::Index>(order[begin + i]));
                    yb.row(static_cast<Eigen::Index>(i)) =
                        y.row(static_cast<Eigen::Index>(order[begin + i]));
                }
                epoch_loss += step(xb, yb, lr);
                ++batches;
            }
            epoch_loss /= static_cast<double>(batches);
            if (!std::isfinite(epoch_loss)) {
                throw TrainingError("regressor training diverged at epoch " +
                                    std::to_string(epoch + 1));
            }
            trace.push_back(epoch_loss);

            // Divide the step by 5 whenever two consecutive epochs fail to
            // improve the loss by at least tol; stop once the step floors out.
            if (epoch_loss < best_loss - config_.tol) {
                best_loss = epoch_loss;
                no_improve = 0;
            } else {
                if (++no_improve >= 2) {
                    lr /= 5.0;
                    no_improve = 0;
                    if (lr < config_.min_learning_rate) {
                        ++epoch;
                        break;
                    }
                }
            }
            best_loss = std::min(best_loss, epoch_loss);
        }

        OovModel model;
        model.weights_ = std::move(weights_);
        model.biases_ = std::move(biases_);
        model.config_ = config_;
        model.iterations_ = epoch;
        model.final_loss_ = trace.empty() ? 0.0 : trace.back();
        if (metrics) {
            metrics->loss_trace = std::move(trace);
            metrics->epochs_run = epoch;
            metrics->final_loss = model.final_loss_;
        }
        return model;
    }

private:
    // One adaptive-moment update; returns the batch loss
    // (0.5 * mean over samples of the summed squared error).
    double step(const Eigen::MatrixXd& xb, const Eigen::MatrixXd& yb, double lr) {
        const auto layers = weights_.size();
        std::vector<Eigen::MatrixXd> pre(layers);   // pre-activation, rows=samples
        std::vector<Eigen::MatrixXd> act(layers + 1);
        act[0] = xb;
        for (std::size_t l = 0; l < layers; ++l) {
            pre[l] = act[l] * weights_[l].transpose();
            pre[l].rowwise() += biases_[l].transpose();
            act[l + 1] = (l + 1 < layers) ? pre[l].cwiseMax(0.0) : pre[l];
        }

        const double inv_n = 1.0 / static_cast<double>(xb.rows());
        Eigen::MatrixXd err = act[layers] - yb;
        double loss = 0.5 * inv_n * err.squaredNorm();

        Eigen::MatrixXd delta = err * inv_n;  // dL/d(pre) of the output layer
        ++t_;
        for (std::size_t li = layers; li-- > 0;) {
            Eigen::MatrixXd grad_w = delta.transpose() * act[li];
            Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
            if (li > 0) {
                delta = (delta * weights_[li]).cwiseProduct(
                    (pre[li - 1].array() > 0.0).cast<double>().matrix());
            }
            adam(weights_[li], m_w_[li], v_w_[li], grad_w, lr);
            adam(biases_[li], m_b_[li], v_b_[li], grad_b, lr);
        }
        return loss;
    }

    template <typename T>
    void adam(T& param, T& m, T& v, const T& grad, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        double c1 = 1.0 - std::pow(b1, t_);
        double c2 = 1.0 - std::pow(b2, t_);
        param.array() -=
            lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }

    OovTrainingConfig config_;
    std::mt19937_64 rng_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
    long t_ = 0;
};

OovModel OovModel::train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                         const OovTrainingConfig& config, std::uint64_t seed,
                         RegressionMetrics* metrics) {
    if (x.rows() == 0 || x.rows() != y.rows()) {
        throw ArgumentError("OOV training needs matching non-empty X and Y");
    }
    if (y.cols() != static_cast<Eigen::Index>(kEmotionCount)) {
        throw ArgumentError("OOV targets must have 8 columns");
    }
    OovTrainer trainer(config, static_cast<int>(x.cols()), seed);
    return trainer.run(x, y, metrics);
}

int OovModel::input_width() const {
    if (weights_.empty()) return 0;
    return static_cast<int>(weights_.front().cols());
}

std::vector<int> OovModel::layer_sizes() const {
    std::vector<int> sizes;
    if (weights_.empty()) return sizes;
    sizes.push_back(static_cast<int>(weights_.front().cols()));
    for (const auto& w : weights_) sizes.push_back(static_cast<int>(w.rows()));
    return sizes;
}

Eigen::MatrixXd OovModel::predict_matrix(const Eigen::MatrixXd& x) const {
    if (empty()) throw ArgumentError("predict on an untrained OOV model");
    if (x.cols() != weights_.front().cols()) {
        throw ArgumentError("embedding width " + std::to_string(x.cols()) +
                            " does not match model input " +
                            std::to_string(weights_.front().cols()));
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = a * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        a = (l + 1 < weights_.size()) ? z.cwiseMax(0.0) : z;
    }
    return a.cwiseMax(0.0).cwiseMin(1.0);
}

EmotionVector OovModel::predict(const std::vector<double>& embedding) const {
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(embedding.size()));
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        x(0, static_cast<Eigen::Index>(i)) = embedding[i];
    }
    Eigen::MatrixXd out = predict_matrix(x);
    std::array<double, kEmotionCount> values{};
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        values[i] = out(0, static_cast<Eigen::Index>(i));
    }
    return EmotionVector::from(values);
}

namespace {
constexpr char kModelMagic[] = "EMPAUDIT-OOV v1";
}

void OovModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path.string());

    json header;
    header["layers"] = layer_sizes();
    header["iterations"] = iterations_;
    header["final_loss"] = final_loss_;
    header["hyper"] = {
        {"hidden_sizes", config_.hidden_sizes},
        {"learning_rate_init", config_.learning_rate_init},
        {"max_epochs", config_.max_epochs},
        {"batch_size", config_.batch_size},
        {"tol", config_.tol},
    };

    out << kModelMagic << '\n' << header.dump() << '\n';
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const auto& w = weights_[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                double value = w(r, c);
                out.write(reinterpret_cast<const char*>(&value), sizeof(value));
            }
        }
        for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
            double value = biases_[l](r);
            out.write(reinterpret_cast<const char*>(&value), sizeof(value));
        }
    }
}

OovModel OovModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());

    std::string magic, header_line;
    std::getline(in, magic);
    if (magic != kModelMagic) {
        throw ParseError("not an OOV model file (bad magic): " + path.string());
    }
    std::getline(in, header_line);
    json header;
    try {
        header = json::parse(header_line);
    } catch (const json::exception& e) {
        throw ParseError("bad model header in " + path.string() + ": " + e.what());
    }

    OovModel model;
    std::vector<int> sizes = header.at("layers").get<std::vector<int>>();
    if (sizes.size() < 2 || sizes.back() != static_cast<int>(kEmotionCount)) {
        throw ValidationError("model layer record malformed in " + path.string());
    }
    model.iterations_ = header.value("iterations", 0);
    model.final_loss_ = header.value("final_loss", 0.0);
    if (header.contains("hyper")) {
        const auto& h = header["hyper"];
        model.config_.hidden_sizes = h.value("hidden_sizes", model.config_.hidden_sizes);
        model.config_.learning_rate_init =
            h.value("learning_rate_init", model.config_.learning_rate_init);
        model.config_.max_epochs = h.value("max_epochs", model.config_.max_epochs);
        model.config_.batch_size = h.value("batch_size", model.config_.batch_size);
        model.config_.tol = h.value("tol", model.config_.tol);
    }

    auto read_doubles = [&](double* dst, std::size_t count) {
        in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw ParseError("truncated model file: " + path.string());
    };
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(w.cols()));
            read_doubles(row.data(), row.size());
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[static_cast<std::size_t>(c)];
        }
        Eigen::VectorXd b(sizes[l + 1]);
        std::vector<double> raw(static_cast<std::size_t>(b.size()));
        read_doubles(raw.data(), raw.size());
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = raw[static_cast<std::size_t>(r)];
        model.weights_.push_back(std::move(w));
        model.biases_.push_back(std::move(b));
    }
    return model;
}

namespace {

void holdout_metrics(const OovModel& model, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y, RegressionMetrics& metrics) {
    Eigen::MatrixXd pred = model.predict_matrix(x);
    const double n = static_cast<double>(x.rows());
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        auto col = static_cast<Eigen::Index>(e);
        Eigen::VectorXd err = pred.col(col) - y.col(col);
        metrics.mse[e] = err.squaredNorm() / n;
        metrics.mae[e] = err.cwiseAbs().sum() / n;
        double mean = y.col(col).mean();
        double ss_tot = (y.col(col).array() - mean).square().sum();
        double ss_res = err.squaredNorm();
        if (ss_tot < 1e-15) {
            metrics.r2[e] = ss_res < 1e-12 ? 1.0 : 0.0;
        } else {
            metrics.r2[e] = 1.0 - ss_res / ss_tot;
        }
    }
    metrics.holdout_count = static_cast<std::size_t>(x.rows());
}

}  // namespace

std::pair<OovModel, RegressionMetrics> train_oov(const IntensityLexicon& lexicon,
                                                 EmbeddingProvider& embedder,
                                                 const OovTrainingConfig& config,
                                                 std::uint64_t split_seed) {
    if (lexicon.empty()) throw ArgumentError("train_oov: empty lexicon");

    std::vector<std::string> words;
    words.reserve(lexicon.size());
    for (const auto& [word, _] : lexicon) words.push_back(word);
    std::sort(words.begin(), words.end());

    std::mt19937_64 rng(split_seed);
    std::shuffle(words.begin(), words.end(), rng);

    std::size_t holdout = static_cast<std::size_t>(
        std::floor(config.holdout_fraction * static_cast<double>(words.size())));
    holdout = std::min(holdout, words.size() - 1);
    std::size_t train_count = words.size() - holdout;

    const auto width = static_cast<Eigen::Index>(embedder.dimension());
    auto fill = [&](std::size_t begin, std::size_t end, Eigen::MatrixXd& x,
                    Eigen::MatrixXd& y) {
        x.resize(static_cast<Eigen::Index>(end - begin), width);
        y.resize(static_cast<Eigen::Index>(end - begin), kEmotionCount);
        for (std::size_t i = begin; i < end; ++i) {
            std::vector<double> emb = embedder.embed(words[i]);
            if (emb.size() != static_cast<std::size_t>(width)) {
                throw ProviderError("embedding width changed mid-run");
            }
            auto row = static_cast<Eigen::Index>(i - begin);
            for (Eigen::Index c = 0; c < width; ++c) {
                x(row, c) = emb[static_cast<std::size_t>(c)];
            }
            const auto& target = lexicon.at(words[i]);
            for (std::size_t e = 0; e < kEmotionCount; ++e) {
                y(row, static_cast<Eigen::Index>(e)) = target[e];
            }
        }
    };

    Eigen::MatrixXd x_train, y_train, x_hold, y_hold;
    fill(0, train_count, x_train, y_train);
    fill(train_count, words.size(), x_hold, y_hold);

    RegressionMetrics metrics;
    metrics.train_count = train_count;
    OovModel model = OovModel::train(x_train, y_train, config, split_seed, &metrics);
    if (holdout > 0) {
        holdout_metrics(model, x_hold, y_hold, metrics);
    }
    return {std::move(model), std::move(metrics)};
}

EmotionVector intensity(std::string_view word, const IntensityLexicon& lexicon,
                        const OovFallback* fallback) {
    if (trim(word).empty()) throw ArgumentError("intensity: empty word");
    std::string key = to_lower(trim(word));
    auto it = lexicon.find(key);
    if (it != lexicon.end()) return it->second;
    if (fallback && fallback->model && fallback->embedder && !fallback->model->empty()) {
        return fallback->model->predict(fallback->embedder->embed(key));
    }
    throw OovError(key);
}

LexiconDistribution lexicon_distribution(const IntensityLexicon& lexicon) {
    if (lexicon.empty()) throw ArgumentError("lexicon_distribution: empty lexicon");
    LexiconDistribution dist;
    std::array<std::size_t, kEmotionCount> low_counts{};
    for (const auto& [word, vec] : lexicon) {
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            double v = vec[e];
            if (v <= 0.0) continue;
            auto bin = static_cast<std::size_t>(v / 0.05);
            if (bin >= kDistributionBins) bin = kDistributionBins - 1;
            ++dist.bins[e][bin];
            ++dist.nonzero_counts[e];
            if (v <= 0.2) ++low_counts[e];
        }
    }
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        dist.fraction_low[e] =
            dist.nonzero_counts[e] == 0
                ? 0.0
                : static_cast<double>(low_counts[e]) /
                      static_cast<double>(dist.nonzero_counts[e]);
    }
    return dist;
}

}  // namespace empaudit::lex
