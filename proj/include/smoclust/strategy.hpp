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

#include <cstdint>
#include <memory>
#include <string>

#include "smoclust/core.hpp"
#include "smoclust/drift.hpp"
#include "smoclust/learners.hpp"

namespace smoclust {

/// A class-imbalance learning approach driven one labelled example at a time.
class Strategy {
public:
    virtual ~Strategy() = default;

    virtual std::string name() const = 0;
    virtual void train(const Example& example) = 0;
    virtual Prediction predict(const Example& example) const = 0;
    /// Invoked when a wrapping drift detector fires.
    virtual void reset() = 0;
    virtual std::uint64_t state_hash() const = 0;
};

/// Plain base learner, every example trained once.
class PlainLearner final : public Strategy {
public:
    explicit PlainLearner(std::unique_ptr<BaseLearner> learner) : learner_(std::move(learner)) {}

    std::string name() const override { return "Base"; }
    void train(const Example& example) override { learner_->train(example, 1); }
    Prediction predict(const Example& example) const override { return learner_->predict(example); }
    void reset() override { learner_->reset(); }
    std::uint64_t state_hash() const override { return learner_->state_hash(); }

    const BaseLearner& learner() const { return *learner_; }

private:
    std::unique_ptr<BaseLearner> learner_;
};

/// Feeds the correctness of each test-then-train prediction to a detector
/// and resets the wrapped strategy on Drift, before training on the example.
class DriftWrapped final : public Strategy {
public:
    DriftWrapped(std::unique_ptr<Strategy> inner, std::unique_ptr<DriftDetector> detector)
        : inner_(std::move(inner)), detector_(std::move(detector)) {}

    std::string name() const override { return inner_->name() + "(d)"; }

    void train(const Example& example) override {
        const bool correct = inner_->predict(example).predicted == example.class_label();
        if (detector_->observe(correct) == DriftState::drift) {
            inner_->reset();
            ++drifts_;
        }
        inner_->train(example);
    }

    Prediction predict(const Example& example) const override { return inner_->predict(example); }

    void reset() override {
        inner_->reset();
        detector_->reset();
    }

    std::uint64_t state_hash() const override { return inner_->state_hash(); }

    std::uint64_t drift_count() const { return drifts_; }
    const Strategy& inner() const { return *inner_; }

private:
    std::unique_ptr<Strategy> inner_;
    std::unique_ptr<DriftDetector> detector_;
    std::uint64_t drifts_ = 0;
};

}  // namespace smoclust
