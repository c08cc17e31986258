// Copyright 2026 The SMOClust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/drift.hpp"
#include "smoclust/learners.hpp"
#include "smoclust/rng.hpp"
#include "smoclust/strategy.hpp"

namespace smoclust {

inline constexpr double kLambdaGuard = 1e-9;

/// Poisson rate that oversamples y up to the majority size (>= 1).
inline double oob_lambda(const ClassSizeEstimator& est, ClassLabel y) {
    if (!est.initialized()) return 1.0;
    const double denom = est.size(y);
    if (denom < kLambdaGuard) return 1.0;
    return est.size(est.majority()) / denom;
}

/// Poisson rate that undersamples y down to the minority size (<= 1).
inline double uob_lambda(const ClassSizeEstimator& est, ClassLabel y) {
    if (!est.initialized()) return 1.0;
    const double denom = est.size(y);
    if (denom < kLambdaGuard) return 1.0;
    return est.size(est.minority()) / denom;
}

enum class BaggingMode { oversampling, undersampling, under_over };

inline std::string to_string(BaggingMode mode) {
    switch (mode) {
        case BaggingMode::oversampling: return "OOB";
        case BaggingMode::undersampling: return "UOB";
        case BaggingMode::under_over: return "oUnderOverB";
    }
    return "?";
}

/// Poisson rates of the m ensemble members for an example of class y.
inline std::vector<double> bagging_rates(BaggingMode mode, const ClassSizeEstimator& est, ClassLabel y, std::size_t m) {
    std::vector<double> rates(m);
    switch (mode) {
        case BaggingMode::oversampling: std::fill(rates.begin(), rates.end(), oob_lambda(est, y)); break;
        case BaggingMode::undersampling: std::fill(rates.begin(), rates.end(), uob_lambda(est, y)); break;
        case BaggingMode::under_over: {
            const double base = oob_lambda(est, y);
            for (std::size_t k = 0; k < m; ++k) rates[k] = base * static_cast<double>(k + 1) / static_cast<double>(m);
            break;
        }
    }
    return rates;
}

/// OOB, UOB and the under/over bagging variant. The class size estimator
/// sees real examples only and is updated before the rate is computed. In
/// under/over mode member k of m trains with rate (k/m) * oob_lambda.
class ImbalanceBagging final : public Strategy {
public:
    ImbalanceBagging(BaggingMode mode, const BaseLearner& prototype, std::size_t members, double theta,
                     std::uint64_t seed)
        : mode_(mode), ensemble_(prototype, members), est_(theta), rng_(seed) {}

    std::string name() const override { return to_string(mode_); }

    /// Per-member Poisson rates for an example of class y under the current estimate.
    std::vector<double> member_rates(ClassLabel y) const { return bagging_rates(mode_, est_, y, ensemble_.size()); }

    void train(const Example& example) override {
        const ClassLabel y = example.class_label();
        est_.update(y);
        const auto rates = member_rates(y);
        for (std::size_t k = 0; k < rates.size(); ++k) ensemble_.train_member(k, example, rng_.poisson(rates[k]));
    }

    Prediction predict(const Example& example) const override { return ensemble_.predict(example); }

    void reset() override {
        ensemble_.reset();
        est_.reset();
    }

    std::uint64_t state_hash() const override { return ensemble_.state_hash(); }

    const ClassSizeEstimator& estimator() const { return est_; }
    const OnlineBagging& ensemble() const { return ensemble_; }

private:
    BaggingMode mode_;
    OnlineBagging ensemble_;
    ClassSizeEstimator est_;
    Rng rng_;
};

struct GauNoiseConfig {
    double scale = 0.1;              ///< numeric noise sd as a fraction of the attribute range
    double category_change = 0.1;    ///< probability of swapping a categorical slot

    void validate() const {
        if (!(scale >= 0.0)) throw PreconditionError("noise scale must be non-negative");
        if (!(category_change >= 0.0 && category_change <= 1.0))
            throw PreconditionError("category change probability must lie in [0, 1]");
    }
};

/// Jitters an example: numeric slots get N(0, (scale * range)^2) noise and
/// are clamped to range, categorical slots switch to a different random
/// category with the configured probability. The label is kept.
inline Example gau_noise_augment(const Example& example, const Schema& schema, const GauNoiseConfig& cfg, Rng& rng) {
    Example out = example;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& a = schema.attributes[i];
        double& x = out.values[i];
        if (a.is_numeric()) {
            x = std::clamp(rng.normal(x, cfg.scale * a.range()), a.lo, a.hi);
        } else if (a.categories.size() > 1 && rng.bernoulli(cfg.category_change)) {
            const auto current = static_cast<std::uint64_t>(x);
            auto pick = rng.uniform_index(a.categories.size() - 1);
            if (pick >= current) ++pick;
            x = static_cast<double>(pick);
        }
    }
    return out;
}

/// Shared skeleton of the approaches that oversample with synthetic
/// examples until the estimated minority size catches up with the majority.
/// The estimator counts both real and synthetic examples.
class SyntheticOversampler : public Strategy {
public:
    static constexpr unsigned kDefaultMaxBoost = 1000;

    SyntheticOversampler(std::unique_ptr<BaseLearner> learner, double theta, unsigned max_boost,
                         std::unique_ptr<DriftDetector> detector)
        : learner_(std::move(learner)), est_(theta), max_boost_(max_boost), detector_(std::move(detector)) {}

    void train(const Example& example) override {
        const ClassLabel y = example.class_label();
        if (detector_) {
            const bool correct = learner_->predict(example).predicted == y;
            if (detector_->observe(correct) == DriftState::drift) {
                reset();
                ++drifts_;
            }
        }
        learner_->train(example, 1);
        est_.update(y);
        last_example_[y] = example;
        const ClassLabel minority = est_.minority();
        const ClassLabel majority = other_class(minority);
        unsigned iterations = 0;
        while (iterations < max_boost_ && est_.size(minority) < est_.size(majority)) {
            if (!oversample_once(minority)) break;
            ++iterations;
        }
        last_iterations_ = iterations;
        synthetic_total_ += iterations;
        after_real_example(example);
        ++step_;
    }

    Prediction predict(const Example& example) const override { return learner_->predict(example); }

    void reset() override {
        learner_->reset();
        est_.reset();
    }

    std::uint64_t state_hash() const override { return learner_->state_hash(); }

    /// Generates one synthetic minority example and absorbs it. Returns false
    /// when no synthesis path is available.
    virtual bool oversample_once(ClassLabel minority) = 0;

    const BaseLearner& learner() const { return *learner_; }
    const ClassSizeEstimator& estimator() const { return est_; }
    const std::optional<Example>& last_example(ClassLabel c) const { return last_example_.at(c); }
    unsigned last_iterations() const { return last_iterations_; }
    std::uint64_t synthetic_total() const { return synthetic_total_; }
    std::uint64_t drift_count() const { return drifts_; }
    std::uint64_t step() const { return step_; }
    unsigned max_boost() const { return max_boost_; }

protected:
    virtual void after_real_example(const Example&) {}

    /// Trains the learner and estimator on a synthetic minority example.
    void learn_synthetic(const Example& synthetic) {
        learner_->train(synthetic, 1);
        est_.update(synthetic.class_label());
    }

    void forget_last_examples() { last_example_ = {}; }

    std::unique_ptr<BaseLearner> learner_;
    ClassSizeEstimator est_;
    std::array<std::optional<Example>, kNumClasses> last_example_;
    unsigned max_boost_;
    std::unique_ptr<DriftDetector> detector_;
    unsigned last_iterations_ = 0;
    std::uint64_t synthetic_total_ = 0;
    std::uint64_t drifts_ = 0;
    std::uint64_t step_ = 0;
};

/// Replays the most recent minority example verbatim.
class OnlineOversampling final : public SyntheticOversampler {
public:
    OnlineOversampling(std::unique_ptr<BaseLearner> learner, double theta, unsigned max_boost = kDefaultMaxBoost)
        : SyntheticOversampler(std::move(learner), theta, max_boost, nullptr) {}

    std::string name() const override { return "oOS"; }

    bool oversample_once(ClassLabel minority) override {
        const auto& last = last_example_[minority];
        if (!last) return false;
        learn_synthetic(*last);
        return true;
    }

    void reset() override {
        SyntheticOversampler::reset();
        forget_last_examples();
    }
};

/// Oversamples with Gaussian-noise copies of the most recent minority example.
class SMOGauNoise final : public SyntheticOversampler {
public:
    SMOGauNoise(std::unique_ptr<BaseLearner> learner, Schema schema, double theta, GauNoiseConfig noise,
                std::uint64_t seed, std::unique_ptr<DriftDetector> detector, unsigned max_boost = kDefaultMaxBoost)
        : SyntheticOversampler(std::move(learner), theta, max_boost, std::move(detector)),
          schema_(std::move(schema)),
          noise_(noise),
          rng_(seed) {
        noise_.validate();
    }

    std::string name() const override { return "SMOGauNoise"; }

    bool oversample_once(ClassLabel minority) override {
        const auto& last = last_example_[minority];
        if (!last) return false;
        learn_synthetic(gau_noise_augment(*last, schema_, noise_, rng_));
        return true;
    }

private:
    Schema schema_;
    GauNoiseConfig noise_;
    Rng rng_;
};

}  // namespace smoclust
