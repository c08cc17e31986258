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
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/geometry.hpp"
#include "smoclust/rng.hpp"

namespace smoclust {

/// Boundary rule: radius = factor * RMS deviation, never below the singleton floor.
struct RadiusRule {
    double factor = 2.0;
    double singleton = 0.01;
};

/// Whether a clustered point was observed on the stream or synthesised.
enum class PointOrigin { real, synthetic };

/// Additive cluster feature: count, per-dimension linear and squared sums,
/// and the linear and squared sums of arrival steps.

class MicroCluster {
public:
    MicroCluster() = default;

    MicroCluster(std::uint64_t id, std::span<const double> point, std::uint64_t step,
                 PointOrigin origin = PointOrigin::real)
        : ls_(point.begin(), point.end()), ss_(point.size()), id_(id) {
        for (std::size_t i = 0; i < point.size(); ++i) ss_[i] = point[i] * point[i];
        n_ = 1.0;
        const double s = static_cast<double>(step);
        lst_ = s;
        sst_ = s * s;
        last_update_ = step;
        if (origin == PointOrigin::real) {
            real_n_ = 1.0;
            last_real_update_ = step;
        }
    }

    void absorb(std::span<const double> point, std::uint64_t step, PointOrigin origin = PointOrigin::real) {
        if (point.size() != ls_.size()) throw PreconditionError("point dimension does not match micro-cluster");
        for (std::size_t i = 0; i < point.size(); ++i) {
            ls_[i] += point[i];
            ss_[i] += point[i] * point[i];
        }
        n_ += 1.0;
        const double s = static_cast<double>(step);
        lst_ += s;
        sst_ += s * s;
        last_update_ = std::max(last_update_, step);
        if (origin == PointOrigin::real) {
            real_n_ += 1.0;
            last_real_update_ = std::max(last_real_update_, step);
        }
    }

    void merge(const MicroCluster& other) {
        if (other.ls_.size() != ls_.size()) throw PreconditionError("cannot merge micro-clusters of different dimension");
        for (std::size_t i = 0; i < ls_.size(); ++i) {
            ls_[i] += other.ls_[i];
            ss_[i] += other.ss_[i];
        }
        n_ += other.n_;
        lst_ += other.lst_;
        sst_ += other.sst_;
        last_update_ = std::max(last_update_, other.last_update_);
        real_n_ += other.real_n_;
        last_real_update_ = std::max(last_real_update_, other.last_real_update_);
        id_ = std::min(id_, other.id_);
    }

    std::uint64_t id() const { return id_; }
    double n() const { return n_; }
    std::size_t dims() const { return ls_.size(); }
    const std::vector<double>& linear_sum() const { return ls_; }
    const std::vector<double>& squared_sum() const { return ss_; }
    double time_linear_sum() const { return lst_; }
    double time_squared_sum() const { return sst_; }
    std::uint64_t last_update() const { return last_update_; }
    /// Points that came from the stream rather than the synthesiser.
    double real_n() const { return real_n_; }
    std::uint64_t last_real_update() const { return last_real_update_; }

    double mean_timestamp() const {
        require_points();
        return lst_ / n_;
    }

    Point centre() const {
        require_points();
        Point c(ls_);
        for (auto& x : c) x /= n_;
        return c;
    }

    /// sqrt of the per-dimension variance averaged over dimensions; tiny
    /// negative variances from rounding are clamped to zero.
    double rms_deviation() const {
        require_points();
        if (ls_.empty()) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < ls_.size(); ++i) {
            const double mean = ls_[i] / n_;
            acc += std::max(0.0, ss_[i] / n_ - mean * mean);
        }
        return std::sqrt(acc / static_cast<double>(ls_.size()));
    }

    double radius(const RadiusRule& rule) const {
        require_points();
        if (n_ < 2.0) return rule.singleton;
        return std::max(rule.singleton, rule.factor * rms_deviation());
    }

    HyperSphere sphere(const RadiusRule& rule) const { return {centre(), radius(rule)}; }

    bool operator==(const MicroCluster&) const = default;

private:
    void require_points() const {
        if (!(n_ > 0.0)) throw PreconditionError("micro-cluster is empty");
    }

    double n_ = 0.0;
    std::vector<double> ls_;
    std::vector<double> ss_;
    double lst_ = 0.0;
    double sst_ = 0.0;
    std::uint64_t last_update_ = 0;
    double real_n_ = 0.0;
    std::uint64_t last_real_update_ = 0;
    std::uint64_t id_ = 0;
};

/// Distance between two hulls, zero when they touch or overlap.
inline double hull_distance(const HyperSphere& a, const HyperSphere& b) {
    return std::max(0.0, distance(a.centre, b.centre) - a.radius - b.radius);
}

inline double hull_distance(const MicroCluster& a, const MicroCluster& b, const RadiusRule& rule) {
    return hull_distance(a.sphere(rule), b.sphere(rule));
}

struct WeightedSphere {
    HyperSphere sphere;
    double weight = 1.0;
};

/// Smallest sphere around the weighted mean centre that holds every input
/// sphere: r = max_i (|c - c_i| + r_i).
inline HyperSphere combine(std::span<const WeightedSphere> parts) {
    if (parts.empty()) throw PreconditionError("combine needs at least one sphere");
    const std::size_t dims = parts.front().sphere.dims();
    Point c(dims, 0.0);
    double total = 0.0;
    for (const auto& p : parts) {
        if (p.sphere.dims() != dims) throw PreconditionError("combine inputs differ in dimension");
        for (std::size_t i = 0; i < dims; ++i) c[i] += p.weight * p.sphere.centre[i];
        total += p.weight;
    }
    if (!(total > 0.0)) throw PreconditionError("combine weights must be positive");
    for (auto& x : c) x /= total;
    double r = 0.0;
    for (const auto& p : parts) r = std::max(r, distance(c, p.sphere.centre) + p.sphere.radius);
    return {std::move(c), r};
}

inline HyperSphere combine(std::span<const MicroCluster> clusters, const RadiusRule& rule) {
    std::vector<WeightedSphere> parts;
    parts.reserve(clusters.size());
    for (const auto& mc : clusters) parts.push_back({mc.sphere(rule), mc.n()});
    return combine(parts);
}

/// What the anchor draw counts: every absorbed point, or only points that
/// arrived on the stream. Counting synthetic points lets a cluster that is
/// picked as an anchor grow its own weight with every synthesis, which
/// concentrates all later synthesis on one region.
enum class AnchorWeighting { all_points, real_arrivals };

struct ClusteringConfig {
    std::size_t capacity = 100;
    RadiusRule radius;
    std::uint64_t horizon = 4000;
    std::size_t min_ready_clusters = 2;
    double recency_decay = 0.999;
    AnchorWeighting anchor_weighting = AnchorWeighting::real_arrivals;
};

struct KnnResult {
    std::vector<MicroCluster> neighbours;
    bool shortfall = false;
};

/// Online micro-cluster maintenance for the examples of a single class.
class MicroClusterSet {
public:
    explicit MicroClusterSet(std::size_t dims = 0, ClusteringConfig config = {}) : dims_(dims), config_(config) {}

    const ClusteringConfig& config() const { return config_; }
    const RadiusRule& radius_rule() const { return config_.radius; }
    std::size_t dims() const { return dims_; }
    const std::vector<MicroCluster>& clusters() const { return clusters_; }
    std::size_t size() const { return clusters_.size(); }
    bool empty() const { return clusters_.empty(); }
    std::uint64_t now() const { return now_; }

    bool ready() const {
        if (clusters_.empty()) return false;
        if (clusters_.size() >= config_.min_ready_clusters) return true;
        return std::any_of(clusters_.begin(), clusters_.end(), [](const auto& mc) { return mc.n() >= 2.0; });
    }

    HyperSphere sphere(const MicroCluster& mc) const { return mc.sphere(config_.radius); }

    const MicroCluster* find(std::uint64_t id) const {
        for (const auto& mc : clusters_)
            if (mc.id() == id) return &mc;
        return nullptr;
    }

    /// Absorbs the point into the nearest cluster when it falls inside that
    /// cluster's boundary, otherwise opens a new cluster. A singleton's
    /// boundary is the distance to its closest other cluster. Over capacity,
    /// a cluster whose mean step is older than the horizon is dropped, or
    /// else the closest pair of centres is merged. A zero capacity disables
    /// the set.
    void insert(std::span<const double> point, std::uint64_t step, PointOrigin origin = PointOrigin::real) {
        if (point.size() != dims_)
            throw PreconditionError("point has " + std::to_string(point.size()) + " dimensions, set expects " +
                                    std::to_string(dims_));
        if (config_.capacity == 0) return;
        now_ = std::max(now_, step);
        if (clusters_.empty()) {
            clusters_.emplace_back(next_id_++, point, step, origin);
            return;
        }
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters_.size(); ++i) {
            const double dc = centre_distance_sq(i, point);
            if (dc < best) {
                best = dc;
                nearest = i;
            }
        }
        const double dist = std::sqrt(best);
        if (dist <= boundary(nearest)) {
            clusters_[nearest].absorb(point, step, origin);
            return;
        }
        clusters_.emplace_back(next_id_++, point, step, origin);
        if (clusters_.size() > config_.capacity) make_room();
    }

    /// Unnormalised anchor weights n_i * decay^(now - last_update_i), in
    /// cluster order. Under real-arrival weighting n_i and last_update_i
    /// count stream points only; should no cluster hold one, every point counts.
    std::vector<double> anchor_weights() const {
        auto logw = log_anchor_weights();
        for (auto& lw : logw) lw = std::exp(lw);
        return logw;
    }

    /// Recency- and size-weighted random choice of an anchor cluster.
    const MicroCluster& pick_anchor(Rng& rng) const {
        if (clusters_.empty()) throw PreconditionError("cannot pick an anchor from an empty set");
        // Log-space weights so long idle gaps cannot underflow every weight to zero.
        auto w = log_anchor_weights();
        const double top = *std::max_element(w.begin(), w.end());
        double total = 0.0;
        for (auto& lw : w) {
            lw = std::exp(lw - top);
            total += lw;
        }
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < clusters_.size(); ++i) {
            u -= w[i];
            if (u < 0.0 && w[i] > 0.0) return clusters_[i];
        }
        for (std::size_t i = clusters_.size(); i-- > 0;)
            if (w[i] > 0.0) return clusters_[i];
        return clusters_.back();
    }

    /// The k clusters closest to the anchor by hull distance (anchor itself
    /// excluded), ties broken by smaller id.
    KnnResult knn(const MicroCluster& anchor, std::size_t k) const {
        const HyperSphere a = sphere(anchor);
        std::vector<std::pair<double, const MicroCluster*>> ranked;
        for (const auto& mc : clusters_) {
            if (mc.id() == anchor.id()) continue;
            ranked.emplace_back(hull_distance(a, sphere(mc)), &mc);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first < y.first;
            return x.second->id() < y.second->id();
        });
        KnnResult out;
        out.shortfall = ranked.size() < k;
        const std::size_t take = std::min(k, ranked.size());
        for (std::size_t i = 0; i < take; ++i) out.neighbours.push_back(*ranked[i].second);
        return out;
    }

    /// Debug dump: id,n,c1..cd,radius,last_update,real_n.
    void write_csv(std::ostream& os) const {
        os << "id,n";
        for (std::size_t i = 0; i < dims_; ++i) os << ",c" << (i + 1);
        os << ",radius,last_update,real_n\n";
        for (const auto& mc : clusters_) {
            os << mc.id() << ',' << mc.n();
            for (double x : mc.centre()) os << ',' << x;
            os << ',' << mc.radius(config_.radius) << ',' << mc.last_update() << ',' << mc.real_n() << '\n';
        }
    }

    bool operator==(const MicroClusterSet& other) const {
        return dims_ == other.dims_ && clusters_ == other.clusters_ && now_ == other.now_ &&
               next_id_ == other.next_id_;
    }

private:
    std::vector<double> log_anchor_weights() const {
        const double log_decay = std::log(config_.recency_decay);
        const bool real_only = config_.anchor_weighting == AnchorWeighting::real_arrivals &&
                         std::any_of(clusters_.begin(), clusters_.end(), [](const auto& mc) { return mc.real_n() > 0.0; });
        std::vector<double> logw;
        logw.reserve(clusters_.size());
        for (const auto& mc : clusters_) {
            const double n = real_only ? mc.real_n() : mc.n();
            const auto last = real_only ? mc.last_real_update() : mc.last_update();
            logw.push_back(n > 0.0 ? std::log(n) + static_cast<double>(now_ - last) * log_decay
                                   : -std::numeric_limits<double>::infinity());
        }
        return logw;
    }

    double centre_distance_sq(std::size_t i, std::span<const double> point) const {
        const auto& mc = clusters_[i];
        const auto& ls = mc.linear_sum();
        double acc = 0.0;
        for (std::size_t j = 0; j < dims_; ++j) {
            const double d = ls[j] / mc.n() - point[j];
            acc += d * d;
        }
        return acc;
    }

    double boundary(std::size_t i) const {
        const auto& mc = clusters_[i];
        if (mc.n() >= 2.0 || clusters_.size() == 1) return mc.radius(config_.radius);
        const Point c = mc.centre();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < clusters_.size(); ++j)
            if (j != i) best = std::min(best, centre_distance_sq(j, c));
        return std::max(config_.radius.singleton, std::sqrt(best));
    }

    void make_room() {
        std::size_t oldest = 0;
        for (std::size_t i = 1; i < clusters_.size(); ++i)
            if (clusters_[i].mean_timestamp() < clusters_[oldest].mean_timestamp()) oldest = i;
        const double cutoff = static_cast<double>(now_) - static_cast<double>(config_.horizon);
        if (clusters_[oldest].mean_timestamp() < cutoff) {
            clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(oldest));
            return;
        }
        std::vector<Point> centres;
        centres.reserve(clusters_.size());
        for (const auto& mc : clusters_) centres.push_back(mc.centre());
        std::size_t a = 0, b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centres.size(); ++i)
            for (std::size_t j = i + 1; j < centres.size(); ++j) {
                const double d = squared_distance(centres[i], centres[j]);
                if (d < best) {
                    best = d;
                    a = i;
                    b = j;
                }
            }
        clusters_[a].merge(clusters_[b]);
        clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(b));
    }

    std::size_t dims_;
    ClusteringConfig config_;
    std::vector<MicroCluster> clusters_;
    std::uint64_t now_ = 0;
    std::uint64_t next_id_ = 0;
};

/// True iff the k hull-nearest clusters to the anchor, drawn from both
/// classes' sets, all belong to the minority set. Fewer than k candidates
/// yields false. At equal distance a majority cluster ranks first.
inline bool is_surrounded(const MicroCluster& anchor, const MicroClusterSet& minority,
                          const MicroClusterSet& majority, std::size_t k) {
    if (k == 0) return false;
    const HyperSphere a = minority.sphere(anchor);
    struct Candidate {
        double dist;
        bool is_majority;
        std::uint64_t id;
    };
    std::vector<Candidate> cands;
    for (const auto& mc : minority.clusters())
        if (mc.id() != anchor.id()) cands.push_back({hull_distance(a, minority.sphere(mc)), false, mc.id()});
    for (const auto& mc : majority.clusters()) cands.push_back({hull_distance(a, majority.sphere(mc)), true, mc.id()});
    if (cands.size() < k) return false;
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
        if (x.dist != y.dist) return x.dist < y.dist;
        if (x.is_majority != y.is_majority) return x.is_majority;
        return x.id < y.id;
    });
    for (std::size_t i = 0; i < k; ++i)
        if (cands[i].is_majority) return false;
    return true;
}

/// Maps examples to the numeric clustering space (categoricals one-hot) and back.
class ClusteringEncoder {
public:
    ClusteringEncoder() = default;
    explicit ClusteringEncoder(Schema schema) : schema_(std::move(schema)) {
        for (const auto& a : schema_.attributes) dims_ += a.is_numeric() ? 1 : a.categories.size();
    }

    std::size_t dims() const { return dims_; }
    const Schema& schema() const { return schema_; }

    Point encode(const Example& e) const {
        Point p;
        p.reserve(dims_);
        for (std::size_t i = 0; i < schema_.size(); ++i) {
            const auto& a = schema_.attributes[i];
            if (a.is_numeric()) {
                p.push_back(e.values[i]);
            } else {
                const auto idx = static_cast<std::size_t>(e.values[i]);
                for (std::size_t c = 0; c < a.categories.size(); ++c) p.push_back(c == idx ? 1.0 : 0.0);
            }
        }
        return p;
    }

    /// Numeric slots are clamped to the attribute range; categorical slots take
    /// the arg-max of their one-hot block.
    Example decode(std::span<const double> p, ClassLabel label) const {
        if (p.size() != dims_) throw PreconditionError("encoded point has wrong dimension");
        Example e;
        e.label = label;
        std::size_t pos = 0;
        for (const auto& a : schema_.attributes) {
            if (a.is_numeric()) {
                e.values.push_back(std::clamp(p[pos++], a.lo, a.hi));
            } else {
                std::size_t best = 0;
                for (std::size_t c = 1; c < a.categories.size(); ++c)
                    if (p[pos + c] > p[pos + best]) best = c;
                e.values.push_back(static_cast<double>(best));
                pos += a.categories.size();
            }
        }
        return e;
    }

private:
    Schema schema_;
    std::size_t dims_ = 0;
};

}  // namespace smoclust
