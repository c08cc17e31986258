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
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smoclust {

/// Raised when a caller violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an invariant that should be unreachable is broken at runtime.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Binary class label. Only 0 and 1 are valid.
using ClassLabel = int;
inline constexpr int kNumClasses = 2;

inline void check_label(ClassLabel c) {
    if (c != 0 && c != 1) throw PreconditionError("class label must be 0 or 1, got " + std::to_string(c));
}

inline ClassLabel other_class(ClassLabel c) { return 1 - c; }

enum class AttributeKind { numeric, categorical };

struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::numeric;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::string> categories;

    static AttributeSpec numeric(std::string name, double lo, double hi) {
        AttributeSpec a;
        a.name = std::move(name);
        a.kind = AttributeKind::numeric;
        a.lo = lo;
        a.hi = hi;
        a.validate();
        return a;
    }

    static AttributeSpec categorical(std::string name, std::vector<std::string> categories) {
        AttributeSpec a;
        a.name = std::move(name);
        a.kind = AttributeKind::categorical;
        a.categories = std::move(categories);
        a.validate();
        return a;
    }

    bool is_numeric() const { return kind == AttributeKind::numeric; }

    double range() const { return hi - lo; }

    void validate() const {
        if (is_numeric()) {
            if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
                throw PreconditionError("numeric attribute '" + name + "' needs finite lo < hi");
            return;
        }
        if (categories.empty()) throw PreconditionError("categorical attribute '" + name + "' has no categories");
        std::set<std::string> seen(categories.begin(), categories.end());
        if (seen.size() != categories.size())
            throw PreconditionError("categorical attribute '" + name + "' has duplicate categories");
    }

    bool operator==(const AttributeSpec&) const = default;
};

/// Attribute layout of a binary classification stream. The class column is
/// implicit and always takes the labels {0, 1}.
struct Schema {
    std::vector<AttributeSpec> attributes;

    static Schema numeric_box(std::size_t dims, double lo = -1.0, double hi = 1.0) {
        Schema s;
        for (std::size_t i = 0; i < dims; ++i)
            s.attributes.push_back(AttributeSpec::numeric("x" + std::to_string(i + 1), lo, hi));
        return s;
    }

    std::size_t size() const { return attributes.size(); }

    bool all_numeric() const {
        for (const auto& a : attributes)
            if (!a.is_numeric()) return false;
        return true;
    }

    void validate() const {
        for (const auto& a : attributes) a.validate();
    }

    bool operator==(const Schema&) const = default;
};

/// One stream element. Categorical slots hold the category index as a double.
struct Example {
    std::vector<double> values;
    std::optional<ClassLabel> label;
    std::uint64_t timestamp = 0;

    ClassLabel class_label() const {
        if (!label) throw PreconditionError("example is unlabelled");
        return *label;
    }

    bool operator==(const Example&) const = default;
};

inline void validate_example(const Schema& schema, const Example& e) {
    if (e.values.size() != schema.size())
        throw PreconditionError("example has " + std::to_string(e.values.size()) + " slots, schema has " +
                                std::to_string(schema.size()));
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& a = schema.attributes[i];
        const double v = e.values[i];
        if (!std::isfinite(v)) throw PreconditionError("non-finite value in slot " + std::to_string(i));
        if (!a.is_numeric()) {
            if (v < 0 || v != std::floor(v) || v >= static_cast<double>(a.categories.size()))
                throw PreconditionError("invalid category index in slot " + std::to_string(i));
        }
    }
    if (e.label) check_label(*e.label);
}

struct Prediction {
    std::array<double, kNumClasses> scores{0.0, 0.0};
    ClassLabel predicted = 0;

    /// Picks the arg-max class; ties go to class 0.
    static Prediction from_scores(double score0, double score1) {
        Prediction p;
        p.scores = {score0, score1};
        p.predicted = score1 > score0 ? 1 : 0;
        return p;
    }
};

/// Time-decayed normalised class sizes.
///
/// The first update after construction or reset() sets both sizes to 1/2.
/// Every later update with true class c applies, for each class m,
///   size(m) <- ([c == m] + theta * size(m) * u) / (u + 1)
/// where u is the number of updates already absorbed since the base case.
/// Sizes are not renormalised.
class ClassSizeEstimator {
public:
    explicit ClassSizeEstimator(double theta = 0.9) : theta_(theta) {
        if (!(theta > 0.0 && theta < 1.0)) throw PreconditionError("fading factor must lie in (0, 1)");
    }

    void update(ClassLabel observed) {
        check_label(observed);
        if (updates_ == 0) {
            sizes_ = {0.5, 0.5};
        } else {
            const double u = static_cast<double>(updates_);
            for (int m = 0; m < kNumClasses; ++m) {
                const double hit = observed == m ? 1.0 : 0.0;
                sizes_[m] = (hit + theta_ * sizes_[m] * u) / (u + 1.0);
            }
        }
        ++updates_;
    }

    /// Returns to the base case; the next update is treated as t = f.
    void reset() {
        sizes_ = {0.0, 0.0};
        updates_ = 0;
    }

    /// Loads a saved state; `updates` counts the base case, so it must be >= 1.
    void restore(std::array<double, kNumClasses> sizes, std::uint64_t updates) {
        if (updates == 0) throw PreconditionError("restored estimator needs at least one update");
        for (double s : sizes)
            if (!(s >= 0.0 && s <= 1.0)) throw PreconditionError("class sizes must lie in [0, 1]");
        sizes_ = sizes;
        updates_ = updates;
    }

    bool initialized() const { return updates_ > 0; }
    std::uint64_t updates() const { return updates_; }
    double theta() const { return theta_; }

    double size(ClassLabel c) const {
        check_label(c);
        return sizes_[c];
    }

    const std::array<double, kNumClasses>& sizes() const { return sizes_; }

    /// Class with the strictly smaller size; a tie resolves to class 1.
    ClassLabel minority() const {
        if (!initialized()) throw PreconditionError("class size estimator has no observations");
        return sizes_[0] < sizes_[1] ? 0 : 1;
    }

    ClassLabel majority() const { return other_class(minority()); }

    bool operator==(const ClassSizeEstimator&) const = default;

private:
    double theta_;
    std::array<double, kNumClasses> sizes_{0.0, 0.0};
    std::uint64_t updates_ = 0;
};

/// FNV-1a accumulator used for cheap state fingerprints in tests and logs.
class StateHasher {
public:
    void add(double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        add(bits);
    }
    void add(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (v >> (8 * i)) & 0xffu;
            h_ *= 0x100000001b3ULL;
        }
    }
    void add(const std::vector<double>& vs) {
        add(static_cast<std::uint64_t>(vs.size()));
        for (double v : vs) add(v);
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace smoclust
