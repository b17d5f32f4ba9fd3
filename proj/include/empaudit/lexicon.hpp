#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <unordered_map>
#include <vector>

#include "empaudit/providers.hpp"
#include "empaudit/types.hpp"

namespace empaudit::lex {

// word -> intensity vector. Emotions absent for a word are 0.0.
using IntensityLexicon = std::unordered_map<std::string, EmotionVector>;

// NRC format: tab-separated `word  emotion  score` lines. Unknown emotion
// names are parse errors, scores outside [0,1] validation errors.
IntensityLexicon load_lexicon(const std::filesystem::path& path);

struct OovTrainingConfig {
    std::vector<int> hidden_sizes = {512, 256, 128};
    double learning_rate_init = 0.001;
    int max_epochs = 1000;
    int batch_size = 100;
    double tol = 1e-6;             // adaptive schedule improvement threshold
    double min_learning_rate = 1e-6;
    double holdout_fraction = 0.1;
};

struct RegressionMetrics {
    std::array<double, kEmotionCount> mse{};
    std::array<double, kEmotionCount> mae{};
    std::array<double, kEmotionCount> r2{};
    std::vector<double> loss_trace;  // per-epoch training loss
    int epochs_run = 0;
    double final_loss = 0.0;
    std::size_t train_count = 0;
    std::size_t holdout_count = 0;
};

// Feed-forward regressor mapping a word embedding to the 8 intensities.
// Rectified-linear hidden layers, linear output clamped to [0,1]^8 at
// prediction time.
class OovModel {
public:
    OovModel() = default;

    // Trains on rows of X (one embedding per row) against rows of Y
    // (8 intensities per row) with an adaptive-moment optimizer and the
    // divide-by-5 adaptive step schedule. Deterministic per seed.
    static OovModel train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const OovTrainingConfig& config, std::uint64_t seed,
                          RegressionMetrics* metrics = nullptr);

    bool empty() const { return weights_.empty(); }
    int input_width() const;
    std::vector<int> layer_sizes() const;  // input, hidden..., 8

    EmotionVector predict(const std::vector<double>& embedding) const;
    // Batch prediction, clamped to [0,1]; one row per input row.
    Eigen::MatrixXd predict_matrix(const Eigen::MatrixXd& x) const;

    int iterations() const { return iterations_; }
    double final_loss() const { return final_loss_; }

    // Versioned binary file with an embedded hyperparameter record.
    void save(const std::filesystem::path& path) const;
    static OovModel load(const std::filesystem::path& path);

private:
    friend class OovTrainer;
    std::vector<Eigen::MatrixXd> weights_;  // weights_[l]: out x in
    std::vector<Eigen::VectorXd> biases_;
    OovTrainingConfig config_;
    int iterations_ = 0;
    double final_loss_ = 0.0;
};

// Trains the regressor on the lexicon itself: embeds every lexicon word,
// splits 90/10 by seeded shuffle and reports held-out per-emotion MSE,
// MAE and R^2.
std::pair<OovModel, RegressionMetrics> train_oov(const IntensityLexicon& lexicon,
                                                 EmbeddingProvider& embedder,
                                                 const OovTrainingConfig& config,
                                                 std::uint64_t split_seed);

struct OovFallback {
    const OovModel* model = nullptr;
    EmbeddingProvider* embedder = nullptr;
};

// Lowercased lexicon lookup; on a miss uses the fallback regressor when
// provided, otherwise throws OovError carrying the word.
EmotionVector intensity(std::string_view word, const IntensityLexicon& lexicon,
                        const OovFallback* fallback = nullptr);

inline constexpr std::size_t kDistributionBins = 20;  // width 0.05 over [0,1]

struct LexiconDistribution {
    // Per emotion: counts of nonzero intensities per bin.
    std::array<std::array<std::size_t, kDistributionBins>, kEmotionCount> bins{};
    std::array<std::size_t, kEmotionCount> nonzero_counts{};
    // Fraction of nonzero scores lying in (0, 0.2].
    std::array<double, kEmotionCount> fraction_low{};
};

LexiconDistribution lexicon_distribution(const IntensityLexicon& lexicon);

}  // namespace empaudit::lex
