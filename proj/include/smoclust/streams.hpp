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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/geometry.hpp"
#include "smoclust/rng.hpp"

namespace smoclust {

/// Raised for stream names outside the supported grammar.
class StreamNameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when rejection sampling cannot satisfy a concept's constraints.
class GeneratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape constants of the artificial generator, in attribute units of the
/// (-1, 1)^d box. Safe minority examples fill the inner `safe_core * r`
/// ball of a sub-cluster, borderline ones the shell out to `border * r`, and
/// majority examples stay outside every `border * r` ball.
struct GeneratorGeometry {
    double radius = 0.2;
    double safe_core = 0.7;
    double border = 1.3;
    double rare_jitter = 0.05;
    int max_attempts = 10000;
};

struct SubCluster {
    Point centre;
    double radius = 0.0;

    bool operator==(const SubCluster&) const = default;
};

/// Percentages of safe, borderline and rare minority examples.
struct ExampleMix {
    double safe = 100.0;
    double borderline = 0.0;
    double rare = 0.0;

    void validate() const {
        if (safe < -1e-9 || borderline < -1e-9 || rare < -1e-9)
            throw PreconditionError("example mix percentages must be non-negative");
        if (std::abs(safe + borderline + rare - 100.0) > 1e-6)
            throw PreconditionError("example mix must sum to 100");
    }

    bool operator==(const ExampleMix&) const = default;
};

struct ConceptSpec {
    std::size_t dims = 5;
    std::vector<SubCluster> clusters;
    double minority_prior = 0.5;
    ExampleMix mix;

    /// Checks the static constraints: valid prior and mix, sub-clusters inside
    /// the box and not overlapping one another.
    void validate() const {
        if (!(minority_prior > 0.0 && minority_prior < 1.0))
            throw PreconditionError("minority prior must lie in (0, 1)");
        mix.validate();
        if (clusters.empty()) throw PreconditionError("concept needs at least one minority sub-cluster");
        for (const auto& c : clusters) {
            if (c.centre.size() != dims) throw PreconditionError("sub-cluster dimension mismatch");
            for (double x : c.centre)
                if (std::abs(x) + c.radius > 1.0 + 1e-12) throw PreconditionError("sub-cluster leaves the domain box");
        }
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j)
                if (distance(clusters[i].centre, clusters[j].centre) + 1e-12 <
                    clusters[i].radius + clusters[j].radius)
                    throw PreconditionError("minority sub-clusters overlap");
    }

    bool operator==(const ConceptSpec&) const = default;
};

enum class FactorKind { im, split, move, merge, borderline, rare };

inline std::string_view factor_keyword(FactorKind k) {
    switch (k) {
        case FactorKind::im: return "Im";
        case FactorKind::split: return "Split";
        case FactorKind::move: return "Move";
        case FactorKind::merge: return "Merge";
        case FactorKind::borderline: return "Borderline";
        case FactorKind::rare: return "Rare";
    }
    return "";
}

/// Percent value of a digit string, where a leading zero marks a fraction:
/// "10" is 10%, "07" is 0.7%, "005" is 0.05%.
inline double percent_from_digits(std::string_view digits) {
    if (digits.empty()) throw StreamNameError("missing number");
    double v = 0.0;
    if (digits.size() > 1 && digits.front() == '0') {
        double scale = 0.1;
        for (char ch : digits.substr(1)) {
            v += (ch - '0') * scale;
            scale /= 10.0;
        }
        return v;
    }
    for (char ch : digits) v = v * 10.0 + (ch - '0');
    return v;
}

struct DriftFactor {
    FactorKind kind = FactorKind::im;
    std::string digits;

    double value() const { return percent_from_digits(digits); }
    std::size_t count() const { return static_cast<std::size_t>(value()); }

    bool operator==(const DriftFactor&) const = default;
};

/// Parsed form of `[StaticImP_]FACTOR[+FACTOR...]`.
struct StreamName {
    std::optional<std::string> static_im;
    std::vector<DriftFactor> factors;

    std::string canonical() const {
        std::string out;
        if (static_im) out += "StaticIm" + *static_im + (factors.empty() ? "" : "_");
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (i) out += '+';
            out += factor_keyword(factors[i].kind);
            out += factors[i].digits;
        }
        return out;
    }

    const DriftFactor* find(FactorKind k) const {
        for (const auto& f : factors)
            if (f.kind == k) return &f;
        return nullptr;
    }

    bool operator==(const StreamName&) const = default;
};

inline StreamName parse_stream_name(std::string_view text) {
    const std::string original(text);
    auto fail = [&](const std::string& why) -> StreamNameError {
        return StreamNameError("cannot parse stream name '" + original + "': " + why);
    };
    auto take_digits = [&](std::string_view& s) {
        std::size_t n = 0;
        while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
        if (n == 0) throw fail("expected a number");
        std::string d(s.substr(0, n));
        s.remove_prefix(n);
        return d;
    };

    StreamName name;
    std::string_view rest = text;
    if (rest.starts_with("StaticIm")) {
        rest.remove_prefix(8);
        name.static_im = take_digits(rest);
        if (!rest.empty()) {
            if (rest.front() != '_') throw fail("expected '_' after the static ratio");
            rest.remove_prefix(1);
            if (rest.empty()) throw fail("no drift factor after '_'");
        }
    } else if (rest.empty()) {
        throw fail("no drift factor");
    }
    constexpr FactorKind kinds[] = {FactorKind::split,      FactorKind::move, FactorKind::merge,
                                    FactorKind::borderline, FactorKind::rare, FactorKind::im};
    while (!rest.empty()) {
        bool matched = false;
        for (FactorKind k : kinds) {
            const auto kw = factor_keyword(k);
            if (!rest.starts_with(kw)) continue;
            rest.remove_prefix(kw.size());
            DriftFactor f{k, take_digits(rest)};
            if (name.find(k)) throw fail("factor '" + std::string(kw) + "' repeated");
            name.factors.push_back(std::move(f));
            matched = true;
            break;
        }
        if (!matched) throw fail("unknown factor at '" + std::string(rest) + "'");
        if (rest.empty()) break;
        if (rest.front() != '+') throw fail("expected '+' between factors");
        rest.remove_prefix(1);
        if (rest.empty()) throw fail("trailing '+'");
    }

    auto check_percent = [&](const std::string& digits, bool strict_prior) {
        const double v = percent_from_digits(digits);
        if (strict_prior ? !(v > 0.0 && v < 100.0) : !(v >= 0.0 && v <= 100.0))
            throw fail("percentage " + digits + " out of range");
    };
    if (name.static_im) check_percent(*name.static_im, true);
    int geometric = 0;
    for (const auto& f : name.factors) {
        switch (f.kind) {
            case FactorKind::im: check_percent(f.digits, true); break;
            case FactorKind::borderline:
            case FactorKind::rare: check_percent(f.digits, false); break;
            default:
                if (f.digits.front() == '0' || f.count() < 1) throw fail("cluster count must be a positive integer");
                ++geometric;
        }
    }
    if (geometric > 1) throw fail("at most one of Split, Move, Merge per stream");
    const double bl = name.find(FactorKind::borderline) ? name.find(FactorKind::borderline)->value() : 0.0;
    const double ra = name.find(FactorKind::rare) ? name.find(FactorKind::rare)->value() : 0.0;
    if (bl + ra > 100.0) throw fail("borderline and rare shares exceed 100%");
    return name;
}

/// Straight-line trajectory of one minority sub-cluster across the drift window.
struct ClusterPath {
    SubCluster from;
    SubCluster to;
};

/// A gradual drift from `initial` to `target` over steps [start, end].
struct DriftScript {
    StreamName name;
    std::uint64_t start = 0;
    std::uint64_t end = 0;
    ConceptSpec initial;
    ConceptSpec target;
    std::vector<ClusterPath> paths;

    double progress(std::uint64_t t) const {
        if (t <= start) return 0.0;
        if (t >= end) return 1.0;
        return static_cast<double>(t - start) / static_cast<double>(end - start);
    }

    /// Concept active at step t; geometric and probabilistic factors are
    /// interpolated linearly in the drift progress.
    ConceptSpec concept_at(std::uint64_t t) const {
        const double a = progress(t);
        if (a <= 0.0) return initial;
        if (a >= 1.0) return target;
        auto lerp = [a](double x, double y) { return x + a * (y - x); };
        ConceptSpec c;
        c.dims = initial.dims;
        c.minority_prior = lerp(initial.minority_prior, target.minority_prior);
        c.mix.safe = lerp(initial.mix.safe, target.mix.safe);
        c.mix.borderline = lerp(initial.mix.borderline, target.mix.borderline);
        c.mix.rare = lerp(initial.mix.rare, target.mix.rare);
        for (const auto& p : paths) {
            SubCluster s;
            s.radius = lerp(p.from.radius, p.to.radius);
            s.centre.resize(c.dims);
            for (std::size_t i = 0; i < c.dims; ++i) s.centre[i] = lerp(p.from.centre[i], p.to.centre[i]);
            c.clusters.push_back(std::move(s));
        }
        return c;
    }
};

namespace detail {

/// Random centres, each at least `margin` inside the box and pairwise at
/// least `separation` apart.
inline std::vector<Point> place_centres(std::size_t count, std::size_t dims, double margin, double separation,
                                        Rng& rng, const std::vector<Point>& avoid = {}) {
    for (int restart = 0; restart < 100; ++restart) {
        std::vector<Point> out;
        int attempts = 0;
        while (out.size() < count && attempts < 10000) {
            ++attempts;
            Point p(dims);
            for (auto& x : p) x = rng.uniform(-1.0 + margin, 1.0 - margin);
            bool ok = true;
            for (const auto& q : out) ok = ok && distance(p, q) >= separation;
            for (const auto& q : avoid) ok = ok && distance(p, q) >= separation;
            if (ok) out.push_back(std::move(p));
        }
        if (out.size() == count) return out;
    }
    throw GeneratorError("cannot place " + std::to_string(count) + " separated sub-clusters in " +
                         std::to_string(dims) + " dimensions");
}

}  // namespace detail

/// Drift window [0.35 L, 0.5 L], the 70k..100k window of a 200k stream scaled to length L.
inline std::pair<std::uint64_t, std::uint64_t> default_drift_window(std::uint64_t length) {
    return {static_cast<std::uint64_t>(std::llround(0.35 * static_cast<double>(length))),
            static_cast<std::uint64_t>(std::llround(0.5 * static_cast<double>(length)))};
}

/// Turns a parsed name into a concrete drift script. Sub-cluster positions
/// are drawn from `rng`; Move and Merge start with N clusters, Split starts
/// with one cluster that fissions into N.
inline DriftScript make_drift_script(const StreamName& name, std::size_t dims, std::uint64_t start, std::uint64_t end,
                                     Rng& rng, const GeneratorGeometry& geo = {}) {
    if (dims == 0) throw PreconditionError("streams need at least one attribute");
    if (start > end) throw PreconditionError("drift window must satisfy start <= end");
    DriftScript s;
    s.name = name;
    s.start = start;
    s.end = end;

    const double prior0 = name.static_im ? percent_from_digits(*name.static_im) / 100.0 : 0.5;
    double prior1 = prior0;
    if (const auto* f = name.find(FactorKind::im)) prior1 = f->value() / 100.0;

    ExampleMix mix1;
    if (const auto* f = name.find(FactorKind::borderline)) mix1.borderline = f->value();
    if (const auto* f = name.find(FactorKind::rare)) mix1.rare = f->value();
    mix1.safe = 100.0 - mix1.borderline - mix1.rare;

    const double margin = geo.border * geo.radius;
    const double separation = 2.0 * geo.border * geo.radius;
    auto sub = [&](Point c) { return SubCluster{std::move(c), geo.radius}; };

    std::vector<SubCluster> from, to;
    if (const auto* f = name.find(FactorKind::move)) {
        const auto a = detail::place_centres(f->count(), dims, margin, separation, rng);
        const auto b = detail::place_centres(f->count(), dims, margin, separation, rng);
        for (std::size_t i = 0; i < a.size(); ++i) {
            from.push_back(sub(a[i]));
            to.push_back(sub(b[i]));
        }
        s.initial.clusters = from;
        s.target.clusters = to;
    } else if (const auto* f = name.find(FactorKind::split)) {
        const auto origin = detail::place_centres(1, dims, margin, separation, rng).front();
        const auto b = detail::place_centres(f->count(), dims, margin, separation, rng);
        for (const auto& c : b) {
            from.push_back(sub(origin));
            to.push_back(sub(c));
        }
        s.initial.clusters = {sub(origin)};
        s.target.clusters = to;
    } else if (const auto* f = name.find(FactorKind::merge)) {
        const auto a = detail::place_centres(f->count(), dims, margin, separation, rng);
        Point centroid(dims, 0.0);
        for (const auto& c : a)
            for (std::size_t i = 0; i < dims; ++i) centroid[i] += c[i] / static_cast<double>(a.size());
        for (const auto& c : a) {
            from.push_back(sub(c));
            to.push_back(sub(centroid));
        }
        s.initial.clusters = from;
        s.target.clusters = {sub(centroid)};
    } else {
        const auto c = detail::place_centres(1, dims, margin, separation, rng).front();
        from = to = {sub(c)};
        s.initial.clusters = s.target.clusters = from;
    }
    for (std::size_t i = 0; i < from.size(); ++i) s.paths.push_back({from[i], to[i]});

    s.initial.dims = s.target.dims = dims;
    s.initial.minority_prior = prior0;
    s.target.minority_prior = prior1;
    s.initial.mix = ExampleMix{};
    s.target.mix = mix1;
    s.initial.validate();
    s.target.validate();
    return s;
}

inline DriftScript make_drift_script(std::string_view name, std::size_t dims, std::uint64_t length, Rng& rng,
                                     const GeneratorGeometry& geo = {}) {
    const auto [start, end] = default_drift_window(length);
    return make_drift_script(parse_stream_name(name), dims, start, end, rng, geo);
}

/// Draws labelled examples from a concept. Holds the small amount of state
/// needed to emit rare minority examples in groups of one to three.
class ConceptSampler {
public:
    explicit ConceptSampler(GeneratorGeometry geo = {}) : geo_(geo) {}

    const GeneratorGeometry& geometry() const { return geo_; }

    Example sample(const ConceptSpec& spec, Rng& rng) {
        const ClassLabel label = rng.bernoulli(spec.minority_prior) ? 1 : 0;
        return sample_class(spec, label, rng);
    }

    Example sample_class(const ConceptSpec& spec, ClassLabel label, Rng& rng) {
        check_label(label);
        Example e;
        e.label = label;
        e.values = label == 1 ? minority_point(spec, rng) : majority_point(spec, rng);
        return e;
    }

    enum class MinorityType { safe, borderline, rare };

    MinorityType draw_type(const ExampleMix& mix, Rng& rng) const {
        const double u = rng.uniform() * (mix.safe + mix.borderline + mix.rare);
        if (u < mix.safe) return MinorityType::safe;
        if (u < mix.safe + mix.borderline) return MinorityType::borderline;
        return MinorityType::rare;
    }

private:
    static Point in_shell(const Point& centre, double inner, double outer, Rng& rng) {
        const double d = static_cast<double>(centre.size());
        const Point dir = unit_direction(centre.size(), rng);
        const double lo = std::pow(inner, d);
        const double hi = std::pow(outer, d);
        const double rad = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / d);
        Point p(centre);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += rad * dir[i];
        return p;
    }

    bool clear_of_clusters(const ConceptSpec& spec, const Point& p) const {
        for (const auto& c : spec.clusters)
            if (distance(p, c.centre) <= geo_.border * c.radius) return false;
        return true;
    }

    static bool in_box(const Point& p) {
        return std::all_of(p.begin(), p.end(), [](double x) { return x > -1.0 && x < 1.0; });
    }

    Point minority_point(const ConceptSpec& spec, Rng& rng) {
        const auto type = draw_type(spec.mix, rng);
        if (type == MinorityType::rare) return rare_point(spec, rng);
        const auto& c = spec.clusters[rng.uniform_index(spec.clusters.size())];
        if (type == MinorityType::safe) return in_shell(c.centre, 0.0, geo_.safe_core * c.radius, rng);
        return in_shell(c.centre, geo_.safe_core * c.radius, geo_.border * c.radius, rng);
    }

    Point rare_point(const ConceptSpec& spec, Rng& rng) {
        for (int attempt = 0; attempt < geo_.max_attempts; ++attempt) {
            if (group_left_ == 0 || !clear_of_clusters(spec, group_centre_)) {
                Point g(spec.dims);
                for (auto& x : g) x = rng.uniform(-1.0 + geo_.rare_jitter, 1.0 - geo_.rare_jitter);
                if (!clear_of_clusters(spec, g)) continue;
                group_centre_ = std::move(g);
                group_left_ = 1 + static_cast<int>(rng.uniform_index(3));
            }
            const Point p = in_shell(group_centre_, 0.0, geo_.rare_jitter, rng);
            if (in_box(p) && clear_of_clusters(spec, p)) {
                --group_left_;
                return p;
            }
        }
        throw GeneratorError("rare example rejection failed; concept too crowded");
    }

    Point majority_point(const ConceptSpec& spec, Rng& rng) const {
        Point p(spec.dims);
        for (int attempt = 0; attempt < geo_.max_attempts; ++attempt) {
            for (auto& x : p) x = rng.uniform(-1.0, 1.0);
            if (clear_of_clusters(spec, p)) return p;
        }
        throw GeneratorError("majority example rejection failed; concept too crowded");
    }

    GeneratorGeometry geo_;
    Point group_centre_;
    int group_left_ = 0;
};

/// Fisher-Yates with the project RNG, so shuffles are platform independent.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.uniform_index(i)]);
}

/// m/2 examples of each class drawn from the concept, shuffled.
inline std::vector<Example> balanced_holdout(const ConceptSpec& spec, std::size_t m, Rng& rng,
                                             const GeneratorGeometry& geo = {}) {
    if (m % 2 != 0) throw PreconditionError("holdout size must be even");
    ConceptSampler sampler(geo);
    std::vector<Example> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m / 2; ++i) out.push_back(sampler.sample_class(spec, 0, rng));
    for (std::size_t i = 0; i < m / 2; ++i) out.push_back(sampler.sample_class(spec, 1, rng));
    shuffle_in_place(out, rng);
    return out;
}

/// Source of labelled examples.
class StreamSource {
public:
    virtual ~StreamSource() = default;
    virtual const Schema& schema() const = 0;
    virtual std::string name() const = 0;
    /// Next example, or nullopt once the stream is exhausted.
    virtual std::optional<Example> next() = 0;
    /// Concept in force at step t; only artificial streams know it.
    virtual std::optional<ConceptSpec> concept_at(std::uint64_t) const { return std::nullopt; }
    virtual std::optional<std::uint64_t> length() const { return std::nullopt; }
};

/// Finite artificial stream following a drift script; (script, seed) fixes
/// the example sequence.
class ArtificialStream final : public StreamSource {
public:
    ArtificialStream(DriftScript script, std::uint64_t length, std::uint64_t seed, GeneratorGeometry geo = {})
        : script_(std::move(script)),
          schema_(Schema::numeric_box(script_.initial.dims)),
          length_(length),
          rng_(seed),
          sampler_(geo) {}

    /// Builds the script from a stream name with the scaled default window.
    /// Cluster placement and example draws use independent seeds derived from `seed`.
    static ArtificialStream from_name(std::string_view name, std::size_t dims, std::uint64_t length,
                                      std::uint64_t seed, std::optional<std::pair<std::uint64_t, std::uint64_t>> window = {},
                                      GeneratorGeometry geo = {}) {
        Rng layout(mix_seed(seed, 101));
        const auto w = window ? *window : default_drift_window(length);
        auto script = make_drift_script(parse_stream_name(name), dims, w.first, w.second, layout, geo);
        return ArtificialStream(std::move(script), length, mix_seed(seed, 202), geo);
    }

    const Schema& schema() const override { return schema_; }
    std::string name() const override { return script_.name.canonical(); }
    std::optional<std::uint64_t> length() const override { return length_; }
    const DriftScript& script() const { return script_; }
    const GeneratorGeometry& geometry() const { return sampler_.geometry(); }
    std::uint64_t position() const { return t_; }

    std::optional<Example> next() override {
        if (t_ >= length_) return std::nullopt;
        Example e = sampler_.sample(script_.concept_at(t_), rng_);
        e.timestamp = t_++;
        return e;
    }

    std::optional<ConceptSpec> concept_at(std::uint64_t t) const override { return script_.concept_at(t); }

private:
    DriftScript script_;
    Schema schema_;
    std::uint64_t length_;
    Rng rng_;
    ConceptSampler sampler_;
    std::uint64_t t_ = 0;
};

}  // namespace smoclust
