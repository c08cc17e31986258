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
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smoclust/clustering.hpp"
#include "smoclust/core.hpp"
#include "smoclust/drift.hpp"
#include "smoclust/geometry.hpp"
#include "smoclust/learners.hpp"
#include "smoclust/resampling.hpp"
#include "smoclust/rng.hpp"

namespace smoclust {

struct SmoClustConfig {
    double theta = 0.9;
    GauNoiseConfig noise;
    std::size_t k = 3;
    ClusteringConfig clustering;
    unsigned max_boost = SyntheticOversampler::kDefaultMaxBoost;
};

enum class SynthesisPath { knn_skewed, anchor_gaussian, gaussian_noise };

inline std::string to_string(SynthesisPath p) {
    switch (p) {
        case SynthesisPath::knn_skewed: return "knn_skewed";
        case SynthesisPath::anchor_gaussian: return "anchor_gaussian";
        case SynthesisPath::gaussian_noise: return "gaussian_noise";
    }
    return "?";
}

/// One synthetic minority example and where it came from. For the
/// micro-cluster paths `sphere` is the sphere it was drawn from and
/// `encoded` the raw point in clustering space.
struct Synthesis {
    Example example;
    SynthesisPath path = SynthesisPath::gaussian_noise;
    std::optional<HyperSphere> sphere;
    Point encoded;
};

/// Oversampling driven by one micro-cluster set per class.
///
/// Per labelled example: the detector sees whether the current prediction is
/// right (a Drift resets the learner and class sizes, never the clusters); the
/// learner and estimator absorb the example; then, while the minority estimate
/// trails the majority, synthetic minority examples are generated. When both
/// cluster sets are ready the generator picks a recency-weighted minority
/// anchor and either samples the combined sphere of the anchor and its k
/// hull-nearest minority clusters with the density peak at the anchor centre
/// (anchor surrounded by minority clusters) or draws a Gaussian inside the
/// anchor. Otherwise it jitters the last real minority example. Each synthetic
/// example trains the minority cluster set, the learner, and the estimator,
/// in that order. Finally the real example is added to its class's set.
class SmoClust final : public SyntheticOversampler {
public:
    SmoClust(std::unique_ptr<BaseLearner> learner, Schema schema, SmoClustConfig config, std::uint64_t seed,
             std::unique_ptr<DriftDetector> detector)
        : SyntheticOversampler(std::move(learner), config.theta, config.max_boost, std::move(detector)),
          config_(config),
          encoder_(std::move(schema)),
          sets_{MicroClusterSet(encoder_.dims(), config.clustering), MicroClusterSet(encoder_.dims(), config.clustering)},
          rng_(seed) {
        config_.noise.validate();
    }

    std::string name() const override { return "SMOClust"; }

    bool clusters_ready() const { return sets_[0].ready() && sets_[1].ready(); }

    /// Draws a synthetic minority example without learning from it.
    std::optional<Synthesis> synthesize(ClassLabel minority) {
        check_label(minority);
        if (clusters_ready()) {
            const MicroClusterSet& own = sets_[minority];
            const MicroClusterSet& rival = sets_[other_class(minority)];
            const MicroCluster& anchor = own.pick_anchor(rng_);
            Synthesis s;
            if (is_surrounded(anchor, own, rival, config_.k)) {
                std::vector<MicroCluster> group{anchor};
                for (auto& mc : own.knn(anchor, config_.k).neighbours) group.push_back(std::move(mc));
                HyperSphere sphere = combine(group, own.radius_rule());
                s.encoded = skewed_sample(anchor.centre(), sphere, rng_);
                s.sphere = std::move(sphere);
                s.path = SynthesisPath::knn_skewed;
            } else {
                HyperSphere sphere = own.sphere(anchor);
                s.encoded = gaussian_in_sphere(sphere, rng_);
                s.sphere = std::move(sphere);
                s.path = SynthesisPath::anchor_gaussian;
            }
            s.example = encoder_.decode(s.encoded, minority);
            s.example.timestamp = step_;
            return s;
        }
        const auto& last = last_example_[minority];
        if (!last) return std::nullopt;
        Synthesis s;
        s.example = gau_noise_augment(*last, encoder_.schema(), config_.noise, rng_);
        s.path = SynthesisPath::gaussian_noise;
        return s;
    }

    bool oversample_once(ClassLabel minority) override { return oversample_once_traced(minority).has_value(); }

    /// As oversample_once, also reporting the synthesis that was absorbed.
    std::optional<Synthesis> oversample_once_traced(ClassLabel minority) {
        auto s = synthesize(minority);
        if (!s) return std::nullopt;
        sets_[minority].insert(encoder_.encode(s->example), step_, PointOrigin::synthetic);
        learn_synthetic(s->example);
        ++path_counts_[static_cast<std::size_t>(s->path)];
        return s;
    }

    const MicroClusterSet& clusters(ClassLabel c) const { return sets_.at(c); }
    const ClusteringEncoder& encoder() const { return encoder_; }
    const SmoClustConfig& config() const { return config_; }

    std::uint64_t path_count(SynthesisPath p) const { return path_counts_[static_cast<std::size_t>(p)]; }

protected:
    void after_real_example(const Example& example) override {
        sets_[example.class_label()].insert(encoder_.encode(example), step_);
    }

private:
    SmoClustConfig config_;
    ClusteringEncoder encoder_;
    std::array<MicroClusterSet, kNumClasses> sets_;
    Rng rng_;
    std::array<std::uint64_t, 3> path_counts_{};
};

}  // namespace smoclust
