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
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "smoclust/core.hpp"
#include "smoclust/csv.hpp"
#include "smoclust/rng.hpp"
#include "smoclust/strategy.hpp"
#include "smoclust/streams.hpp"

namespace smoclust {

inline double gmean(double recall0, double recall1) {
    return std::sqrt(std::max(0.0, recall0) * std::max(0.0, recall1));
}

/// Exponentially faded per-class recall.
class FadingRecalls {
public:
    explicit FadingRecalls(double theta = 0.999) : theta_(theta) {
        if (!(theta > 0.0 && theta <= 1.0)) throw PreconditionError("fading factor must lie in (0, 1]");
    }

    void update(ClassLabel true_class, bool correct) {
        check_label(true_class);
        correct_[true_class] = theta_ * correct_[true_class] + (correct ? 1.0 : 0.0);
        total_[true_class] = theta_ * total_[true_class] + 1.0;
    }

    double recall(ClassLabel c) const {
        check_label(c);
        return total_[c] > 0.0 ? correct_[c] / total_[c] : 0.0;
    }

    double gmean() const { return smoclust::gmean(recall(0), recall(1)); }
    double correct(ClassLabel c) const { return correct_.at(c); }
    double total(ClassLabel c) const { return total_.at(c); }
    double theta() const { return theta_; }

private:
    double theta_;
    std::array<double, kNumClasses> correct_{};
    std::array<double, kNumClasses> total_{};
};

struct GMeanSample {
    std::uint64_t step = 0;
    double gmean = 0.0;
};

struct RunRecord {
    std::string approach;
    std::string stream;
    std::uint64_t seed = 0;
    std::vector<GMeanSample> samples;
    double average = 0.0;

    void finish() {
        double sum = 0.0;
        for (const auto& s : samples) sum += s.gmean;
        average = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
    }
};

/// G-Mean of the strategy's predictions on a labelled test set.
inline double test_gmean(const Strategy& strategy, const std::vector<Example>& test) {
    std::array<double, kNumClasses> hit{}, seen{};
    for (const auto& e : test) {
        const ClassLabel y = e.class_label();
        seen[y] += 1.0;
        if (strategy.predict(e).predicted == y) hit[y] += 1.0;
    }
    const double r0 = seen[0] > 0 ? hit[0] / seen[0] : 0.0;
    const double r1 = seen[1] > 0 ? hit[1] / seen[1] : 0.0;
    return gmean(r0, r1);
}

/// Trains on the stream and, after every n_train examples, scores the
/// strategy on a fresh class-balanced holdout set of m_test examples drawn
/// from the concept in force at that step.
inline RunRecord holdout_run(Strategy& strategy, StreamSource& stream, std::uint64_t n_train, std::size_t m_test,
                             std::uint64_t seed, const GeneratorGeometry& geo = {}) {
    if (n_train == 0) throw PreconditionError("holdout interval must be positive");
    RunRecord rec{strategy.name(), stream.name(), seed, {}, 0.0};
    Rng test_rng(mix_seed(seed, 303));
    std::uint64_t t = 0;
    while (auto e = stream.next()) {
        strategy.train(*e);
        ++t;
        if (t % n_train != 0) continue;
        const auto concept_now = stream.concept_at(t);
        if (!concept_now) throw PreconditionError("holdout evaluation needs an artificial stream");
        rec.samples.push_back({t, test_gmean(strategy, balanced_holdout(*concept_now, m_test, test_rng, geo))});
    }
    rec.finish();
    return rec;
}

/// Test-then-train over the stream; the faded G-Mean is sampled after every
/// `sample_every` examples.
inline RunRecord prequential_run(Strategy& strategy, StreamSource& stream, std::uint64_t sample_every,
                                 double theta_e = 0.999, std::uint64_t seed = 0) {
    if (sample_every == 0) throw PreconditionError("sampling interval must be positive");
    RunRecord rec{strategy.name(), stream.name(), seed, {}, 0.0};
    FadingRecalls recalls(theta_e);
    std::uint64_t t = 0;
    while (auto e = stream.next()) {
        const ClassLabel y = e->class_label();
        recalls.update(y, strategy.predict(*e).predicted == y);
        strategy.train(*e);
        ++t;
        if (t % sample_every == 0) rec.samples.push_back({t, recalls.gmean()});
    }
    rec.finish();
    return rec;
}

/// Ranks one observation; 1 is the highest value, ties share the average rank.
inline std::vector<double> rank_descending(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = shared;
        i = j + 1;
    }
    return ranks;
}

/// Studentized range statistic divided by sqrt(2) for k = 2..12.
inline double nemenyi_q(std::size_t k, double alpha) {
    static constexpr std::array<double, 11> q05{1.960, 2.343, 2.569, 2.728, 2.850, 2.949,
                                                3.031, 3.102, 3.164, 3.219, 3.268};
    static constexpr std::array<double, 11> q10{1.645, 2.052, 2.291, 2.459, 2.589, 2.693,
                                                2.780, 2.855, 2.920, 2.978, 3.030};
    if (k < 2 || k > 12) throw PreconditionError("Nemenyi table covers 2 to 12 approaches");
    if (std::abs(alpha - 0.05) < 1e-12) return q05[k - 2];
    if (std::abs(alpha - 0.10) < 1e-12) return q10[k - 2];
    throw PreconditionError("Nemenyi table covers alpha 0.05 and 0.10 only");
}

struct FriedmanResult {
    std::vector<double> average_ranks;
    double chi_squared = 0.0;
    double p_value = 1.0;
    double critical_difference = 0.0;
    std::size_t approaches = 0;
    std::size_t observations = 0;
    double alpha = 0.05;
};

/// Friedman test over a table of observations (rows) by approaches (columns),
/// higher values better, with the Nemenyi critical difference.
inline FriedmanResult friedman_nemenyi(const std::vector<std::vector<double>>& table, double alpha = 0.05) {
    const std::size_t n = table.size();
    if (n < 2) throw PreconditionError("Friedman test needs at least two observations");
    const std::size_t k = table.front().size();
    if (k < 2) throw PreconditionError("Friedman test needs at least two approaches");
    FriedmanResult res;
    res.approaches = k;
    res.observations = n;
    res.alpha = alpha;
    res.average_ranks.assign(k, 0.0);
    for (const auto& row : table) {
        if (row.size() != k) throw PreconditionError("ragged Friedman table");
        for (double v : row)
            if (!std::isfinite(v)) throw PreconditionError("non-finite value in Friedman table");
        const auto r = rank_descending(row);
        for (std::size_t j = 0; j < k; ++j) res.average_ranks[j] += r[j];
    }
    for (auto& r : res.average_ranks) r /= static_cast<double>(n);
    const double kd = static_cast<double>(k), nd = static_cast<double>(n);
    double sum_sq = 0.0;
    for (double r : res.average_ranks) sum_sq += r * r;
    res.chi_squared = std::max(0.0, 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0));
    boost::math::chi_squared dist(kd - 1.0);
    res.p_value = res.chi_squared <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, res.chi_squared));
    res.critical_difference = nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
    return res;
}

struct SummaryRow {
    std::string approach;
    std::string stream;
    double mean = 0.0;
    double std = 0.0;   ///< sample standard deviation over seeds, 0 for a single run
    std::size_t runs = 0;
};

/// Per (approach, stream) mean and spread of the stream-average G-Mean.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
    for (const auto& r : records) cells[{r.approach, r.stream}].push_back(r.average);
    std::vector<SummaryRow> out;
    for (const auto& [key, v] : cells) {
        SummaryRow row{key.first, key.second, 0.0, 0.0, v.size()};
        row.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - row.mean) * (x - row.mean);
            row.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
        }
        out.push_back(std::move(row));
    }
    return out;
}

struct MissingCell {
    std::string approach;
    std::string stream;
    std::optional<std::uint64_t> seed;   ///< empty when the whole (approach, stream) cell is absent
};

/// Approaches x streams (x seeds) matrix assembled from run records.
struct ResultMatrix {
    std::vector<std::string> approaches;
    std::vector<std::string> streams;
    std::vector<std::uint64_t> seeds;
    std::map<std::tuple<std::string, std::string, std::uint64_t>, double> averages;
    std::vector<MissingCell> missing;

    static ResultMatrix from_records(const std::vector<RunRecord>& records) {
        ResultMatrix m;
        std::set<std::string> a, s;
        std::set<std::uint64_t> seeds;
        for (const auto& r : records) {
            a.insert(r.approach);
            s.insert(r.stream);
            seeds.insert(r.seed);
            m.averages[{r.approach, r.stream, r.seed}] = r.average;
        }
        m.approaches.assign(a.begin(), a.end());
        m.streams.assign(s.begin(), s.end());
        m.seeds.assign(seeds.begin(), seeds.end());
        for (const auto& ap : m.approaches)
            for (const auto& st : m.streams) {
                std::size_t present = 0;
                for (auto sd : m.seeds) present += m.averages.count({ap, st, sd});
                if (present == 0) {
                    m.missing.push_back({ap, st, std::nullopt});
                    continue;
                }
                for (auto sd : m.seeds)
                    if (!m.averages.count({ap, st, sd})) m.missing.push_back({ap, st, sd});
            }
        return m;
    }

    bool complete() const { return missing.empty(); }

    std::optional<double> stream_mean(const std::string& approach, const std::string& stream) const {
        double sum = 0.0;
        std::size_t n = 0;
        for (auto sd : seeds)
            if (auto it = averages.find({approach, stream, sd}); it != averages.end()) {
                sum += it->second;
                ++n;
            }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    }
};

enum class RankUnit { stream, run };

/// Friedman table with one row per stream (seed-averaged) or per (stream, seed) run.
inline std::vector<std::vector<double>> friedman_table(const ResultMatrix& m, RankUnit unit) {
    if (!m.complete()) throw PreconditionError("result matrix has missing cells");
    std::vector<std::vector<double>> table;
    for (const auto& st : m.streams) {
        if (unit == RankUnit::stream) {
            std::vector<double> row;
            for (const auto& ap : m.approaches) row.push_back(*m.stream_mean(ap, st));
            table.push_back(std::move(row));
        } else {
            for (auto sd : m.seeds) {
                std::vector<double> row;
                for (const auto& ap : m.approaches) row.push_back(m.averages.at({ap, st, sd}));
                table.push_back(std::move(row));
            }
        }
    }
    return table;
}

/// (approach - reference) mean G-Mean per stream; a positive delta means the
/// reference did worse. Cells with no data on either side stay empty.
struct DifferenceTable {
    std::string reference;
    std::vector<std::string> streams;
    std::vector<std::string> approaches;
    std::vector<std::vector<std::optional<double>>> delta;   ///< [stream][approach]

    void write_csv(std::ostream& os) const {
        os << "stream";
        for (const auto& a : approaches) os << ',' << a;
        os << '\n';
        for (std::size_t i = 0; i < streams.size(); ++i) {
            os << streams[i];
            for (const auto& d : delta[i]) os << ',' << (d ? csv::format_double(*d) : std::string("missing"));
            os << '\n';
        }
    }
};

inline DifferenceTable difference_table(const ResultMatrix& m, const std::string& reference = "SMOClust") {
    if (std::find(m.approaches.begin(), m.approaches.end(), reference) == m.approaches.end())
        throw PreconditionError("reference approach '" + reference + "' has no results");
    DifferenceTable t;
    t.reference = reference;
    t.streams = m.streams;
    for (const auto& a : m.approaches)
        if (a != reference) t.approaches.push_back(a);
    for (const auto& st : m.streams) {
        std::vector<std::optional<double>> row;
        const auto ref = m.stream_mean(reference, st);
        for (const auto& a : t.approaches) {
            const auto v = m.stream_mean(a, st);
            row.push_back(v && ref ? std::optional<double>(*v - *ref) : std::nullopt);
        }
        t.delta.push_back(std::move(row));
    }
    return t;
}

struct GridBounds {
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
};

struct GridCell {
    double x = 0.0;
    double y = 0.0;
    ClassLabel predicted = 0;
};

/// Predictions at the cell centres of a resolution x resolution lattice,
/// row-major with y outer.
inline std::vector<GridCell> export_decision_grid(const Strategy& strategy, const Schema& schema, GridBounds b,
                                                  std::size_t resolution) {
    if (schema.size() != 2 || !schema.all_numeric())
        throw PreconditionError("decision grids need a two-attribute numeric schema");
    if (resolution == 0) throw PreconditionError("grid resolution must be positive");
    if (!(b.x_hi > b.x_lo && b.y_hi > b.y_lo)) throw PreconditionError("grid bounds must be non-empty");
    const double dx = (b.x_hi - b.x_lo) / static_cast<double>(resolution);
    const double dy = (b.y_hi - b.y_lo) / static_cast<double>(resolution);
    std::vector<GridCell> out;
    out.reserve(resolution * resolution);
    Example probe;
    probe.values.resize(2);
    for (std::size_t j = 0; j < resolution; ++j)
        for (std::size_t i = 0; i < resolution; ++i) {
            probe.values[0] = b.x_lo + (static_cast<double>(i) + 0.5) * dx;
            probe.values[1] = b.y_lo + (static_cast<double>(j) + 0.5) * dy;
            out.push_back({probe.values[0], probe.values[1], strategy.predict(probe).predicted});
        }
    return out;
}

inline void write_grid_csv(std::ostream& os, const std::vector<GridCell>& grid) {
    os << "x,y,predicted\n";
    for (const auto& c : grid) os << csv::format_double(c.x) << ',' << csv::format_double(c.y) << ',' << c.predicted << '\n';
}

inline void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "approach,stream,seed,step,gmean\n";
    for (const auto& r : records)
        for (const auto& s : r.samples)
            os << r.approach << ',' << r.stream << ',' << r.seed << ',' << s.step << ',' << csv::format_double(s.gmean)
               << '\n';
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "approach,stream,mean_gmean,std\n";
    for (const auto& r : rows)
        os << r.approach << ',' << r.stream << ',' << csv::format_double(r.mean) << ',' << csv::format_double(r.std)
           << '\n';
}

inline void write_ranks_csv(std::ostream& os, const std::vector<std::string>& approaches, const FriedmanResult& f) {
    os << "approach,average_rank\n";
    for (std::size_t j = 0; j < approaches.size(); ++j)
        os << approaches[j] << ',' << csv::format_double(f.average_ranks[j]) << '\n';
}

}  // namespace smoclust
