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

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>

#include "smoclust/core.hpp"

namespace smoclust {

enum class DriftState { stable, warning, drift };

/// Monitors a stream of prediction outcomes.
class DriftDetector {
public:
    virtual ~DriftDetector() = default;
    virtual DriftState observe(bool correct) = 0;
    virtual void reset() = 0;
    virtual std::unique_ptr<DriftDetector> clone() const = 0;
};

struct DDMConfig {
    std::uint64_t min_instances = 500;
    double warn_factor = 2.0;
    double drift_factor = 4.0;
};

/// Drift Detection Method on the running error rate p with s = sqrt(p(1-p)/n).
/// The (p_min, s_min) pair tracks the smallest p + s seen once warm-up ends.
/// Signalling Drift resets the detector.
class DDMDetector final : public DriftDetector {
public:
    explicit DDMDetector(DDMConfig config = {}) : config_(config) {
        if (!(config_.warn_factor > 0.0 && config_.drift_factor > config_.warn_factor))
            throw PreconditionError("DDM needs 0 < warn_factor < drift_factor");
    }

    DriftState observe(bool correct) override {
        ++n_;
        const double err = correct ? 0.0 : 1.0;
        p_ += (err - p_) / static_cast<double>(n_);
        s_ = std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_));
        if (n_ < config_.min_instances) return DriftState::stable;
        if (p_ + s_ < p_min_ + s_min_) {
            p_min_ = p_;
            s_min_ = s_;
        }
        if (p_ + s_ > p_min_ + config_.drift_factor * s_min_) {
            reset();
            return DriftState::drift;
        }
        if (p_ + s_ > p_min_ + config_.warn_factor * s_min_) return DriftState::warning;
        return DriftState::stable;
    }

    void reset() override {
        n_ = 0;
        p_ = 0.0;
        s_ = 0.0;
        p_min_ = std::numeric_limits<double>::infinity();
        s_min_ = std::numeric_limits<double>::infinity();
    }

    std::unique_ptr<DriftDetector> clone() const override { return std::make_unique<DDMDetector>(*this); }

    std::uint64_t observations() const { return n_; }
    double error_rate() const { return p_; }
    double error_stddev() const { return s_; }
    double min_error_rate() const { return p_min_; }
    double min_error_stddev() const { return s_min_; }
    const DDMConfig& config() const { return config_; }

private:
    DDMConfig config_;
    std::uint64_t n_ = 0;
    double p_ = 0.0;
    double s_ = 0.0;
    double p_min_ = std::numeric_limits<double>::infinity();
    double s_min_ = std::numeric_limits<double>::infinity();
};

}  // namespace smoclust
