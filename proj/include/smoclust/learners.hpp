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

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/rng.hpp"

namespace smoclust {

/// Incremental classifier trained with positive integer example weights.
class BaseLearner {
public:
    virtual ~BaseLearner() = default;

    virtual void train(const Example& example, unsigned weight) = 0;
    virtual Prediction predict(const Example& example) const = 0;
    /// Back to the untrained state.
    virtual void reset() = 0;
    virtual std::unique_ptr<BaseLearner> clone() const = 0;
    virtual std::uint64_t state_hash() const = 0;
};

struct GaussianNBConfig {
    double variance_floor = 1e-6;
    double laplace = 1.0;
};

/// Naive Bayes with Gaussian numeric likelihoods kept as weighted sums and
/// sums of squares, and Laplace-smoothed categorical frequencies.
class GaussianNB final : public BaseLearner {
public:
    explicit GaussianNB(Schema schema, GaussianNBConfig config = {}) : schema_(std::move(schema)), config_(config) {
        if (!(config_.variance_floor > 0.0) || !(config_.laplace > 0.0))
            throw PreconditionError("variance floor and Laplace constant must be positive");
        reset();
    }

    void train(const Example& example, unsigned weight) override {
        const ClassLabel c = example.class_label();
        check_label(c);
        if (weight == 0) return;
        if (example.values.size() != schema_.size()) throw PreconditionError("example does not match schema");
        const double w = static_cast<double>(weight);
        auto& st = stats_[c];
        st.weight += w;
        for (std::size_t i = 0; i < schema_.size(); ++i) {
            const double x = example.values[i];
            if (schema_.attributes[i].is_numeric()) {
                st.sum[i] += w * x;
                st.sumsq[i] += w * x * x;
            } else {
                st.counts[i][static_cast<std::size_t>(x)] += w;
            }
        }
    }

    Prediction predict(const Example& example) const override {
        const double total = stats_[0].weight + stats_[1].weight;
        if (total == 0.0) return Prediction::from_scores(0.5, 0.5);
        std::array<double, kNumClasses> logp{};
        for (int c = 0; c < kNumClasses; ++c) {
            const auto& st = stats_[c];
            double lp = std::log((st.weight + config_.laplace) / (total + kNumClasses * config_.laplace));
            for (std::size_t i = 0; i < schema_.size(); ++i) {
                const auto& a = schema_.attributes[i];
                const double x = example.values[i];
                if (a.is_numeric()) {
                    if (st.weight > 0.0) {
                        const double m = st.sum[i] / st.weight;
                        const double v = variance(c, i);
                        lp += -0.5 * std::log(2.0 * std::numbers::pi * v) - (x - m) * (x - m) / (2.0 * v);
                    } else {
                        lp -= std::log(a.range());
                    }
                } else {
                    const double k = static_cast<double>(a.categories.size());
                    lp += std::log((st.counts[i][static_cast<std::size_t>(x)] + config_.laplace) /
                                   (st.weight + config_.laplace * k));
                }
            }
            logp[c] = lp;
        }
        const double top = std::max(logp[0], logp[1]);
        const double e0 = std::exp(logp[0] - top);
        const double e1 = std::exp(logp[1] - top);
        return Prediction::from_scores(e0 / (e0 + e1), e1 / (e0 + e1));
    }

    void reset() override {
        for (auto& st : stats_) {
            st.weight = 0.0;
            st.sum.assign(schema_.size(), 0.0);
            st.sumsq.assign(schema_.size(), 0.0);
            st.counts.assign(schema_.size(), {});
            for (std::size_t i = 0; i < schema_.size(); ++i)
                if (!schema_.attributes[i].is_numeric()) st.counts[i].assign(schema_.attributes[i].categories.size(), 0.0);
        }
    }

    std::unique_ptr<BaseLearner> clone() const override { return std::make_unique<GaussianNB>(*this); }

    std::uint64_t state_hash() const override {
        StateHasher h;
        for (const auto& st : stats_) {
            h.add(st.weight);
            h.add(st.sum);
            h.add(st.sumsq);
            for (const auto& c : st.counts) h.add(c);
        }
        return h.value();
    }

    double class_weight(ClassLabel c) const { return stats_.at(c).weight; }

    double mean(ClassLabel c, std::size_t attr) const {
        const auto& st = stats_.at(c);
        return st.weight > 0.0 ? st.sum[attr] / st.weight : 0.0;
    }

    /// Weighted population variance, floored.
    double variance(ClassLabel c, std::size_t attr) const {
        const auto& st = stats_.at(c);
        if (!(st.weight > 0.0)) return config_.variance_floor;
        const double m = st.sum[attr] / st.weight;
        return std::max(config_.variance_floor, st.sumsq[attr] / st.weight - m * m);
    }

    const Schema& schema() const { return schema_; }

    bool operator==(const GaussianNB& other) const {
        for (int c = 0; c < kNumClasses; ++c) {
            const auto& a = stats_[c];
            const auto& b = other.stats_[c];
            if (a.weight != b.weight || a.sum != b.sum || a.sumsq != b.sumsq || a.counts != b.counts) return false;
        }
        return true;
    }

private:
    struct ClassStats {
        double weight = 0.0;
        std::vector<double> sum;
        std::vector<double> sumsq;
        std::vector<std::vector<double>> counts;
    };

    Schema schema_;
    GaussianNBConfig config_;
    std::array<ClassStats, kNumClasses> stats_;
};

/// Online bagging: every member sees each example with a Poisson(lambda) weight.
class OnlineBagging {
public:
    OnlineBagging(const BaseLearner& prototype, std::size_t members) {
        if (members == 0) throw PreconditionError("ensemble needs at least one member");
        for (std::size_t i = 0; i < members; ++i) {
            auto m = prototype.clone();
            m->reset();
            members_.push_back(std::move(m));
        }
    }

    OnlineBagging(const OnlineBagging& other) {
        for (const auto& m : other.members_) members_.push_back(m->clone());
    }
    OnlineBagging& operator=(const OnlineBagging& other) {
        if (this != &other) *this = OnlineBagging(other);
        return *this;
    }
    OnlineBagging(OnlineBagging&&) noexcept = default;
    OnlineBagging& operator=(OnlineBagging&&) noexcept = default;

    std::size_t size() const { return members_.size(); }
    const BaseLearner& member(std::size_t k) const { return *members_.at(k); }

    void train_member(std::size_t k, const Example& example, unsigned weight) {
        if (weight > 0) members_.at(k)->train(example, weight);
    }

    /// Same lambda for every member; returns the drawn weights.
    std::vector<unsigned> train(const Example& example, double lambda, Rng& rng) {
        if (!(lambda > 0.0)) throw PreconditionError("Poisson rate must be positive");
        std::vector<unsigned> weights(members_.size());
        for (std::size_t k = 0; k < members_.size(); ++k) {
            weights[k] = rng.poisson(lambda);
            train_member(k, example, weights[k]);
        }
        return weights;
    }

    /// Unweighted majority vote; ties go to class 0; scores are vote shares.
    Prediction predict(const Example& example) const {
        double votes1 = 0.0;
        for (const auto& m : members_) votes1 += m->predict(example).predicted == 1 ? 1.0 : 0.0;
        const double n = static_cast<double>(members_.size());
        return Prediction::from_scores((n - votes1) / n, votes1 / n);
    }

    void reset() {
        for (auto& m : members_) m->reset();
    }

    std::uint64_t state_hash() const {
        StateHasher h;
        for (const auto& m : members_) h.add(m->state_hash());
        return h.value();
    }

private:
    std::vector<std::unique_ptr<BaseLearner>> members_;
};

}  // namespace smoclust
