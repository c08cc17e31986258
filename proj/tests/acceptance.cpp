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

// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 10 and 11 run 10-seed, 50k-example campaigns and
// dominate the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "smoclust/experiment.hpp"

namespace smoclust {
namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class ScriptedDetector final : public DriftDetector {
public:
    explicit ScriptedDetector(std::uint64_t at) : at_(at) {}
    DriftState observe(bool) override { return n_++ == at_ ? DriftState::drift : DriftState::stable; }
    void reset() override {}
    std::unique_ptr<DriftDetector> clone() const override { return std::make_unique<ScriptedDetector>(*this); }

private:
    std::uint64_t at_;
    std::uint64_t n_ = 0;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<Example> drain(StreamSource& s) {
    std::vector<Example> out;
    while (auto e = s.next()) out.push_back(*e);
    return out;
}

Outcome geometry_identity() {
    Rng rng(1);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_index(10));
        HyperSphere s{Point(d), rng.uniform(0.01, 5.0)};
        for (auto& x : s.centre) x = rng.uniform(-10, 10);
        // Interior origin: random direction, radius fraction below one.
        const Point u = unit_direction(d, rng);
        const double frac = rng.uniform(0.0, 0.999);
        Point origin(s.centre);
        for (std::size_t k = 0; k < d; ++k) origin[k] += frac * s.radius * u[k];
        const Point dir = unit_direction(d, rng);
        Point through(origin);
        for (std::size_t k = 0; k < d; ++k) through[k] += dir[k];
        const double t = positive_intercept(origin, through, s);
        Point hit(origin);
        for (std::size_t k = 0; k < d; ++k) hit[k] += t * dir[k];
        const double rel = std::abs(squared_distance(hit, s.centre) - s.radius * s.radius) / (s.radius * s.radius);
        worst = std::max(worst, rel);
        if (!(t > 0.0)) return {false, "non-positive intercept"};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= 1e-9 && secs < 5.0, fmt("worst relative residual %.3g, %.3f s", worst, secs)};
}

Outcome hand_intercept() {
    const HyperSphere s{{0.0, 0.0}, 10.0};
    const Point anchor{-7.0, 0.0}, through{-6.0, 0.0};
    const double t = positive_intercept(anchor, through, s);
    // A = 1, B = -2 * (1 * 7) = -14, C = 49 - 100 = -51; t = (14 + sqrt(196 + 204)) / 2 = 17.
    return {std::abs(t - 17.0) <= 1e-12, fmt("t = %.15g", t)};
}

Outcome containment() {
    Rng rng(3);
    std::size_t outside = 0;
    for (int i = 0; i < 100000; ++i) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_index(10));
        HyperSphere s{Point(d), rng.uniform(0.01, 3.0)};
        for (auto& x : s.centre) x = rng.uniform(-5, 5);
        const Point u = unit_direction(d, rng);
        Point anchor(s.centre);
        const double frac = rng.uniform(0.0, 0.999);
        for (std::size_t k = 0; k < d; ++k) anchor[k] += frac * s.radius * u[k];
        outside += !s.contains(skewed_sample(anchor, s, rng));
        outside += !s.contains(gaussian_in_sphere(s, rng));
    }
    return {outside == 0, fmt("%.0f of 200000 draws outside", static_cast<double>(outside))};
}

Outcome estimator_oracle() {
    Rng rng(4);
    double worst = 0.0;
    for (int seq = 0; seq < 100; ++seq) {
        const double p = rng.uniform(0.01, 0.99);
        ClassSizeEstimator est(0.9);
        std::array<double, 2> brute{0.5, 0.5};
        for (int t = 0; t < 1000; ++t) {
            const int c = rng.bernoulli(p) ? 1 : 0;
            est.update(c);
            if (t > 0)
                for (int m = 0; m < 2; ++m) brute[m] = ((c == m ? 1.0 : 0.0) + 0.9 * brute[m] * t) / (t + 1.0);
            for (int m = 0; m < 2; ++m) worst = std::max(worst, std::abs(est.size(m) - brute[m]));
        }
    }
    return {worst <= 1e-12, fmt("max |difference| %.3g", worst)};
}

Outcome combine_containment() {
    Rng rng(5);
    std::size_t violations = 0;
    for (int list = 0; list < 1000; ++list) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_index(10));
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_index(10));
        std::vector<WeightedSphere> parts;
        for (std::size_t i = 0; i < n; ++i) {
            WeightedSphere w{{Point(d), rng.uniform(0.0, 2.0)}, rng.uniform(0.1, 50.0)};
            for (auto& x : w.sphere.centre) x = rng.uniform(-5, 5);
            parts.push_back(std::move(w));
        }
        const auto big = combine(parts);
        for (const auto& p : parts)
            for (int k = 0; k < 50; ++k) {
                const Point u = unit_direction(d, rng);
                Point q(p.sphere.centre);
                for (std::size_t j = 0; j < d; ++j) q[j] += p.sphere.radius * u[j];
                violations += !big.contains(q);
            }
    }
    return {violations == 0, fmt("%.0f hull points outside", static_cast<double>(violations))};
}

Outcome resampling_lambda() {
    auto stream = ArtificialStream::from_name("StaticIm10", 2, 15000, 6);
    ImbalanceBagging oob(BaggingMode::oversampling, GaussianNB(stream.schema()), 10, 0.9, 7);
    double s0 = 0.0, s1 = 0.0, per_step = 0.0;
    std::size_t n = 0, arrivals = 0;
    while (auto e = stream.next()) {
        const bool measured = e->timestamp >= 5000;
        if (measured && e->class_label() == 1) {
            per_step += oob_lambda(oob.estimator(), 1);
            ++arrivals;
        }
        oob.train(*e);
        if (!measured) continue;
        s0 += oob.estimator().size(0);
        s1 += oob.estimator().size(1);
        ++n;
    }
    const double lambda = (s0 / n) / (s1 / n);
    return {lambda >= 7.2 && lambda <= 10.8,
            fmt("lambda from time-averaged sizes %.3f (per-arrival mean %.3f over %.0f minority arrivals)", lambda,
                per_step / static_cast<double>(arrivals), static_cast<double>(arrivals))};
}

long first_drift(std::uint64_t seed, double p0, double p1, long change, long length) {
    DDMDetector ddm;
    Rng rng(seed);
    for (long t = 0; t < length; ++t)
        if (ddm.observe(!rng.bernoulli(t < change ? p0 : p1)) == DriftState::drift) return t;
    return -1;
}

Outcome drift_detector() {
    int hits = 0, early = 0, alarms = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const long t = first_drift(seed, 0.1, 0.5, 5000, 5500);
        hits += t >= 5000;
        early += t >= 0 && t < 5000;
        alarms += first_drift(1000 + seed, 0.1, 0.1, 0, 10000) >= 0;
    }
    return {hits >= 28 && alarms <= 2,
            fmt("detected within 500 steps in %.0f/30 (%.0f fired before the change), false alarms %.0f/30", hits,
                early, alarms)};
}

Outcome degenerate_equivalence() {
    auto src = ArtificialStream::from_name("StaticIm10_Split5", 2, 10000, 8);
    const Schema s = src.schema();
    SmoClustConfig cfg;
    cfg.noise = GauNoiseConfig{0.0, 0.0};
    cfg.clustering.capacity = 0;
    SmoClust sc(std::make_unique<GaussianNB>(s), s, cfg, 9, nullptr);
    OnlineOversampling oos(std::make_unique<GaussianNB>(s), 0.9);
    std::size_t steps = 0;
    while (auto e = src.next()) {
        sc.train(*e);
        oos.train(*e);
        if (sc.state_hash() != oos.state_hash() || !(sc.estimator() == oos.estimator()))
            return {false, fmt("diverged at step %.0f", static_cast<double>(steps))};
        ++steps;
    }
    return {true, fmt("%.0f steps identical, %.0f synthetic examples", static_cast<double>(steps),
                      static_cast<double>(sc.synthetic_total()))};
}

Outcome drift_reset_scope() {
    auto src = ArtificialStream::from_name("StaticIm10_Split5", 2, 6000, 10);
    const Schema s = src.schema();
    const auto data = drain(src);
    const std::uint64_t k = 5000;
    SmoClust sc(std::make_unique<GaussianNB>(s), s, SmoClustConfig{}, 11, std::make_unique<ScriptedDetector>(k));
    for (std::uint64_t i = 0; i < k; ++i) sc.train(data[i]);
    MicroClusterSet before0 = sc.clusters(0), before1 = sc.clusters(1);
    // Observe the reset in isolation: the drift fires while testing data[k],
    // and the only later cluster change is the insertion of data[k] itself.
    const auto& e = data[k];
    const std::uint64_t synthetic_before = sc.synthetic_total();
    sc.train(e);
    (e.class_label() == 0 ? before0 : before1).insert(e.values, k);
    const bool clusters_equal = sc.clusters(0) == before0 && sc.clusters(1) == before1;
    const bool est_reset = sc.estimator().size(0) == 0.5 && sc.estimator().size(1) == 0.5 && sc.estimator().updates() == 1;
    const bool no_synthesis = sc.synthetic_total() == synthetic_before;
    return {clusters_equal && est_reset && no_synthesis && sc.drift_count() == 1,
            std::string("clusters deep-equal: ") + (clusters_equal ? "yes" : "no") +
                ", estimator (0.5, 0.5): " + (est_reset ? "yes" : "no")};
}

// Seed-averaged holdout curve per approach, from a 10-seed campaign.
struct Campaign {
    std::map<std::string, std::vector<GMeanSample>> curve;
    std::map<std::string, double> stream_average;
    std::uint64_t drift_start = 0, drift_end = 0;
    std::size_t failures = 0;
};

Campaign run_campaign(const std::string& stream, const std::vector<std::string>& names) {
    ExperimentConfig cfg;
    cfg.streams = {stream};
    cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    cfg.length = 50000;
    cfg.dims = 2;
    cfg.drift_window = std::make_pair<std::uint64_t, std::uint64_t>(17500, 25000);
    cfg.evaluation = EvaluationMode::holdout;
    cfg.holdout_n = 1000;
    cfg.holdout_m = 1000;
    for (const auto& a : default_roster())
        if (std::find(names.begin(), names.end(), a.name) != names.end()) cfg.approaches.push_back(a);
    const auto res = run_experiment(cfg);
    Campaign c;
    c.drift_start = cfg.drift_window->first;
    c.drift_end = cfg.drift_window->second;
    c.failures = res.failures.size();
    for (const auto& r : res.records) {
        auto& cur = c.curve[r.approach];
        if (cur.empty()) cur = r.samples;
        else
            for (std::size_t i = 0; i < cur.size(); ++i) cur[i].gmean += r.samples[i].gmean;
        c.stream_average[r.approach] += r.average / 10.0;
    }
    for (auto& [name, cur] : c.curve)
        for (auto& s : cur) s.gmean /= 10.0;
    return c;
}

Outcome trend_reproduction() {
    const auto c = run_campaign("StaticIm1_Move7", {"SMOClust", "Base(d)", "OOB", "UOB", "oUnderOverB", "SMOGauNoise"});
    if (c.failures) return {false, "campaign cells failed"};
    const double smo = c.stream_average.at("SMOClust");
    const double base = c.stream_average.at("Base(d)");
    std::string best_name;
    double best = -1.0;
    for (const char* n : {"OOB", "UOB", "oUnderOverB", "SMOGauNoise"})
        if (c.stream_average.at(n) > best) {
            best = c.stream_average.at(n);
            best_name = n;
        }
    std::string detail = fmt("SMOClust %.4f, Base(d) %.4f, best competitor %.4f", smo, base, best) + " (" + best_name + ")";
    return {smo >= base + 0.10 && smo >= best - 0.05, detail};
}

Outcome weakness_reproduction() {
    std::vector<std::string> names;
    for (const auto& a : default_roster()) names.push_back(a.name);
    const auto c = run_campaign("StaticIm10_Rare100", names);
    if (c.failures) return {false, "campaign cells failed"};
    bool all_drop = true;
    std::string detail;
    std::map<std::string, double> post;
    for (const auto& [name, cur] : c.curve) {
        double pre = 0.0, post_sum = 0.0, dip = 1.0;
        std::size_t n_pre = 0, n_post = 0;
        for (const auto& s : cur) {
            if (s.step <= c.drift_start) {
                pre += s.gmean;
                ++n_pre;
            } else if (s.step <= c.drift_end) {
                dip = std::min(dip, s.gmean);
            } else {
                post_sum += s.gmean;
                ++n_post;
            }
        }
        pre /= static_cast<double>(n_pre);
        post[name] = post_sum / static_cast<double>(n_post);
        const double drop = pre - dip;
        all_drop = all_drop && drop >= 0.15;
        detail += " " + name + fmt(" pre %.3f dip %.3f post %.3f;", pre, dip, post[name]);
    }
    const double gap = std::abs(post.at("SMOClust") - post.at("OOB"));
    const bool close = gap <= 0.10;
    return {all_drop && close, std::string("all drop >= 0.15: ") + (all_drop ? "yes" : "no") +
                                   fmt(", |post SMOClust - post OOB| = %.3f;", gap) + detail};
}

// Logs predict/train calls so the prequential order can be checked.
class Instrumented final : public Strategy {
public:
    std::string name() const override { return "probe"; }
    void train(const Example& e) override { log.push_back(2 * e.timestamp + 1); }
    Prediction predict(const Example& e) const override {
        log.push_back(2 * e.timestamp);
        return Prediction::from_scores(1.0, 0.0);
    }
    void reset() override {}
    std::uint64_t state_hash() const override { return 0; }
    mutable std::vector<std::uint64_t> log;
};

std::string experiment_fingerprint(const ExperimentConfig& cfg) {
    const auto res = run_experiment(cfg);
    std::ostringstream os;
    write_results_csv(os, res.records);
    write_summary_csv(os, summarize(res.records));
    const auto m = ResultMatrix::from_records(res.records);
    const auto f = friedman_nemenyi(friedman_table(m, RankUnit::run));
    write_ranks_csv(os, m.approaches, f);
    return os.str();
}

Outcome evaluation_harness() {
    // Test-then-train order.
    auto src = ArtificialStream::from_name("StaticIm10", 2, 2000, 12);
    Instrumented probe;
    prequential_run(probe, src, 100);
    bool ordered = probe.log.size() == 4000;
    for (std::size_t i = 0; ordered && i < probe.log.size(); ++i) ordered = probe.log[i] == i;

    // Friedman ranks against a brute-force pairwise count on a fixed table with ties.
    const std::vector<std::vector<double>> table = {
        {0.91, 0.82, 0.76, 0.80}, {0.70, 0.70, 0.65, 0.72}, {0.55, 0.60, 0.60, 0.50}, {0.88, 0.81, 0.79, 0.88},
        {0.40, 0.42, 0.38, 0.41}, {0.66, 0.61, 0.61, 0.61}, {0.93, 0.90, 0.85, 0.87}, {0.75, 0.77, 0.70, 0.74},
        {0.50, 0.50, 0.50, 0.50}, {0.84, 0.79, 0.80, 0.78}};
    std::vector<double> brute(4, 0.0);
    for (const auto& row : table)
        for (std::size_t j = 0; j < 4; ++j) {
            double r = 1.0;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != j) r += row[i] > row[j] ? 1.0 : row[i] == row[j] ? 0.5 : 0.0;
            brute[j] += r;
        }
    for (auto& r : brute) r /= 10.0;
    const bool ranks_equal = friedman_nemenyi(table).average_ranks == brute;

    // Two runs of the same config, different thread counts.
    ExperimentConfig cfg;
    cfg.streams = {"StaticIm10_Split5", "StaticIm1_Move7"};
    cfg.seeds = {1, 2};
    cfg.length = 4000;
    cfg.holdout_n = 1000;
    cfg.holdout_m = 200;
    for (const auto& a : default_roster())
        if (a.name == "SMOClust" || a.name == "OOB" || a.name == "SMOGauNoise") cfg.approaches.push_back(a);
    cfg.threads = 1;
    const auto first = experiment_fingerprint(cfg);
    cfg.threads = 3;
    const auto second = experiment_fingerprint(cfg);
    const bool reproducible = first == second;

    return {ordered && ranks_equal && reproducible,
            std::string("test-then-train: ") + (ordered ? "yes" : "no") + ", ranks match brute force: " +
                (ranks_equal ? "yes" : "no") + ", bit-reproducible: " + (reproducible ? "yes" : "no")};
}

}  // namespace
}  // namespace smoclust

int main() {
    using namespace smoclust;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"geometry identity", geometry_identity},
        {"hand-derived intercept", hand_intercept},
        {"sampling containment", containment},
        {"class-size estimator oracle", estimator_oracle},
        {"combine containment", combine_containment},
        {"OOB resampling rate", resampling_lambda},
        {"drift detector", drift_detector},
        {"degenerate equivalence with oOS", degenerate_equivalence},
        {"drift reset scope", drift_reset_scope},
        {"trend reproduction StaticIm1_Move7", trend_reproduction},
        {"weakness reproduction StaticIm10_Rare100", weakness_reproduction},
        {"evaluation harness", evaluation_harness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %zu: %s %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
