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

// Experiment matrices: config parsing, the approach factory and a cell
// runner that is deterministic regardless of thread count.
//
// Config format, one `key = value` per line, `#` comments:
//
//   [experiment]
//   streams = StaticIm1_Move7, data/elec.csv
//   seeds = 1-10
//   length = 50000
//   dims = 2
//   drift_start = 17500          # optional, both or neither
//   drift_end = 25000
//   evaluation = holdout         # or prequential
//   holdout_n = 1000
//   holdout_m = 1000
//   sample_every = 500
//   fading = 0.999
//   output = results
//   threads = 0                  # 0 = hardware concurrency
//
//   [approach SMOClust]
//   type = smoclust              # base | oob | uob | uoob | oos | smogaunoise | smoclust
//   theta = 0.9
//   v = 0.1
//   pc = 0.1
//   k = 3
//   detector = on
//
// Without approach sections the default roster is used.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/csv.hpp"
#include "smoclust/drift.hpp"
#include "smoclust/eval.hpp"
#include "smoclust/learners.hpp"
#include "smoclust/resampling.hpp"
#include "smoclust/smoclust.hpp"
#include "smoclust/strategy.hpp"
#include "smoclust/streams.hpp"

namespace smoclust {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ApproachType { base, oob, uob, under_over, oos, smogaunoise, smoclust };

inline std::optional<ApproachType> parse_approach_type(std::string_view s) {
    static const std::map<std::string, ApproachType, std::less<>> names{
        {"base", ApproachType::base},       {"oob", ApproachType::oob},
        {"uob", ApproachType::uob},         {"uoob", ApproachType::under_over},
        {"oos", ApproachType::oos},         {"smogaunoise", ApproachType::smogaunoise},
        {"smoclust", ApproachType::smoclust}};
    const auto it = names.find(s);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

struct ApproachSpec {
    std::string name;
    ApproachType type = ApproachType::smoclust;
    double theta = 0.9;
    std::size_t members = 10;
    GauNoiseConfig noise;
    std::size_t k = 3;
    bool detector = true;
    DDMConfig ddm;
    ClusteringConfig clustering;
    unsigned max_boost = SyntheticOversampler::kDefaultMaxBoost;

    void validate() const {
        if (name.empty()) throw ConfigError("approach name must not be empty");
        if (!(theta > 0.0 && theta < 1.0)) throw ConfigError(name + ": theta must lie in (0, 1)");
        if (members == 0) throw ConfigError(name + ": ensemble size m must be positive");
        if (!(noise.scale >= 0.0)) throw ConfigError(name + ": v must be non-negative");
        if (!(noise.category_change >= 0.0 && noise.category_change <= 1.0))
            throw ConfigError(name + ": pc must lie in [0, 1]");
        if (k == 0) throw ConfigError(name + ": k must be positive");
        if (!(clustering.radius.factor > 0.0)) throw ConfigError(name + ": radius_factor must be positive");
        if (!(clustering.recency_decay > 0.0 && clustering.recency_decay < 1.0))
            throw ConfigError(name + ": recency_decay must lie in (0, 1)");
    }
};

/// The comparator set: bagging baselines and oOS with and without the drift
/// wrapper, SMOGauNoise, SMOClust, and a drift-wrapped plain learner.
inline std::vector<ApproachSpec> default_roster() {
    std::vector<ApproachSpec> out;
    auto add = [&](std::string name, ApproachType t, bool detector) {
        ApproachSpec a;
        a.name = std::move(name);
        a.type = t;
        a.detector = detector;
        out.push_back(std::move(a));
    };
    add("OOB", ApproachType::oob, false);
    add("UOB", ApproachType::uob, false);
    add("oUnderOverB", ApproachType::under_over, false);
    add("oOS", ApproachType::oos, false);
    add("OOB(d)", ApproachType::oob, true);
    add("UOB(d)", ApproachType::uob, true);
    add("oUnderOverB(d)", ApproachType::under_over, true);
    add("oOS(d)", ApproachType::oos, true);
    add("SMOGauNoise", ApproachType::smogaunoise, true);
    add("SMOClust", ApproachType::smoclust, true);
    add("Base(d)", ApproachType::base, true);
    return out;
}

/// Builds a fresh strategy for one run. The detector flag wraps the bagging
/// baselines, oOS and the plain learner externally; SMOGauNoise and SMOClust
/// consult their detector internally.
inline std::unique_ptr<Strategy> make_strategy(const ApproachSpec& spec, const Schema& schema, std::uint64_t seed) {
    spec.validate();
    auto detector = [&]() -> std::unique_ptr<DriftDetector> {
        if (!spec.detector) return nullptr;
        return std::make_unique<DDMDetector>(spec.ddm);
    };
    auto wrap = [&](std::unique_ptr<Strategy> s) -> std::unique_ptr<Strategy> {
        if (!spec.detector) return s;
        return std::make_unique<DriftWrapped>(std::move(s), detector());
    };
    const GaussianNB prototype(schema);
    switch (spec.type) {
        case ApproachType::base: return wrap(std::make_unique<PlainLearner>(prototype.clone()));
        case ApproachType::oob:
            return wrap(std::make_unique<ImbalanceBagging>(BaggingMode::oversampling, prototype, spec.members, spec.theta, seed));
        case ApproachType::uob:
            return wrap(std::make_unique<ImbalanceBagging>(BaggingMode::undersampling, prototype, spec.members, spec.theta, seed));
        case ApproachType::under_over:
            return wrap(std::make_unique<ImbalanceBagging>(BaggingMode::under_over, prototype, spec.members, spec.theta, seed));
        case ApproachType::oos:
            return wrap(std::make_unique<OnlineOversampling>(prototype.clone(), spec.theta, spec.max_boost));
        case ApproachType::smogaunoise:
            return std::make_unique<SMOGauNoise>(prototype.clone(), schema, spec.theta, spec.noise, seed, detector(),
                                                 spec.max_boost);
        case ApproachType::smoclust: {
            SmoClustConfig cfg;
            cfg.theta = spec.theta;
            cfg.noise = spec.noise;
            cfg.k = spec.k;
            cfg.clustering = spec.clustering;
            cfg.max_boost = spec.max_boost;
            return std::make_unique<SmoClust>(prototype.clone(), schema, cfg, seed, detector());
        }
    }
    throw InternalError("unhandled approach type");
}

enum class EvaluationMode { holdout, prequential };

struct ExperimentConfig {
    std::vector<std::string> streams;
    std::vector<ApproachSpec> approaches;
    std::vector<std::uint64_t> seeds;
    std::uint64_t length = 50000;
    std::size_t dims = 2;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> drift_window;
    EvaluationMode evaluation = EvaluationMode::holdout;
    std::uint64_t holdout_n = 1000;
    std::size_t holdout_m = 1000;
    std::uint64_t sample_every = 500;
    double fading = 0.999;
    std::string output = "results";
    unsigned threads = 0;

    static bool is_csv_stream(const std::string& s) {
        return s.size() > 4 && s.compare(s.size() - 4, 4, ".csv") == 0;
    }

    void validate() const {
        if (streams.empty()) throw ConfigError("no streams configured");
        if (approaches.empty()) throw ConfigError("no approaches configured");
        if (seeds.empty()) throw ConfigError("no seeds configured");
        std::set<std::string> names;
        for (const auto& a : approaches) {
            a.validate();
            if (!names.insert(a.name).second) throw ConfigError("duplicate approach name '" + a.name + "'");
        }
        if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
            throw ConfigError("duplicate seeds");
        for (const auto& s : streams) {
            if (is_csv_stream(s)) {
                if (evaluation == EvaluationMode::holdout)
                    throw ConfigError("stream '" + s + "': holdout evaluation needs a generated stream; use prequential");
                continue;
            }
            try {
                (void)parse_stream_name(s);
            } catch (const StreamNameError& e) {
                throw ConfigError(e.what());
            }
        }
        if (length == 0) throw ConfigError("length must be positive");
        if (dims == 0) throw ConfigError("dims must be positive");
        if (drift_window && !(drift_window->first <= drift_window->second && drift_window->second <= length))
            throw ConfigError("drift window must satisfy start <= end <= length");
        if (holdout_n == 0 || holdout_m == 0 || holdout_m % 2 != 0)
            throw ConfigError("holdout_n must be positive and holdout_m positive and even");
        if (sample_every == 0) throw ConfigError("sample_every must be positive");
        if (!(fading > 0.0 && fading <= 1.0)) throw ConfigError("fading must lie in (0, 1]");
    }
};

namespace detail {

inline std::string trim_copy(std::string_view s) { return std::string(csv::trim(s)); }

inline std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    for (auto part : csv::split(v, ',')) {
        auto t = trim_copy(part);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

template <typename T>
T parse_number(std::string_view v, const std::string& where) {
    v = csv::trim(v);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(where + ": '" + std::string(v) + "' is not a number");
    return out;
}

inline bool parse_bool(std::string_view v, const std::string& where) {
    v = csv::trim(v);
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(where + ": expected on/off, found '" + std::string(v) + "'");
}

/// "1-10" or "1, 2, 5".
inline std::vector<std::uint64_t> parse_seeds(std::string_view v, const std::string& where) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(v)) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_number<std::uint64_t>(item, where));
            continue;
        }
        const auto lo = parse_number<std::uint64_t>(std::string_view(item).substr(0, dash), where);
        const auto hi = parse_number<std::uint64_t>(std::string_view(item).substr(dash + 1), where);
        if (hi < lo) throw ConfigError(where + ": empty seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

inline void set_approach_key(ApproachSpec& a, const std::string& key, const std::string& value, const std::string& where) {
    if (key == "type") {
        const auto t = parse_approach_type(value);
        if (!t) throw ConfigError(where + ": unknown approach type '" + value + "'");
        a.type = *t;
    } else if (key == "theta") {
        a.theta = parse_number<double>(value, where);
    } else if (key == "m") {
        a.members = parse_number<std::size_t>(value, where);
    } else if (key == "v") {
        a.noise.scale = parse_number<double>(value, where);
    } else if (key == "pc") {
        a.noise.category_change = parse_number<double>(value, where);
    } else if (key == "k") {
        a.k = parse_number<std::size_t>(value, where);
    } else if (key == "detector") {
        a.detector = parse_bool(value, where);
    } else if (key == "q") {
        a.clustering.capacity = parse_number<std::size_t>(value, where);
    } else if (key == "radius_factor") {
        a.clustering.radius.factor = parse_number<double>(value, where);
    } else if (key == "horizon") {
        a.clustering.horizon = parse_number<std::uint64_t>(value, where);
    } else if (key == "recency_decay") {
        a.clustering.recency_decay = parse_number<double>(value, where);
    } else if (key == "anchor_weighting") {
        if (value == "real_arrivals") a.clustering.anchor_weighting = AnchorWeighting::real_arrivals;
        else if (value == "all_points") a.clustering.anchor_weighting = AnchorWeighting::all_points;
        else throw ConfigError(where + ": anchor_weighting is real_arrivals or all_points");
    } else if (key == "max_boost") {
        a.max_boost = parse_number<unsigned>(value, where);
    } else {
        throw ConfigError(where + ": unknown approach key '" + key + "'");
    }
}

inline void set_experiment_key(ExperimentConfig& c, const std::string& key, const std::string& value,
                               const std::string& where, std::optional<std::uint64_t>& ds,
                               std::optional<std::uint64_t>& de) {
    if (key == "streams") c.streams = split_list(value);
    else if (key == "seeds") c.seeds = parse_seeds(value, where);
    else if (key == "length") c.length = parse_number<std::uint64_t>(value, where);
    else if (key == "dims") c.dims = parse_number<std::size_t>(value, where);
    else if (key == "drift_start") ds = parse_number<std::uint64_t>(value, where);
    else if (key == "drift_end") de = parse_number<std::uint64_t>(value, where);
    else if (key == "evaluation") {
        if (value == "holdout") c.evaluation = EvaluationMode::holdout;
        else if (value == "prequential") c.evaluation = EvaluationMode::prequential;
        else throw ConfigError(where + ": evaluation is holdout or prequential");
    } else if (key == "holdout_n") c.holdout_n = parse_number<std::uint64_t>(value, where);
    else if (key == "holdout_m") c.holdout_m = parse_number<std::size_t>(value, where);
    else if (key == "sample_every") c.sample_every = parse_number<std::uint64_t>(value, where);
    else if (key == "fading") c.fading = parse_number<double>(value, where);
    else if (key == "output") c.output = value;
    else if (key == "threads") c.threads = parse_number<unsigned>(value, where);
    else throw ConfigError(where + ": unknown experiment key '" + key + "'");
}

}  // namespace detail

/// Parses and validates a config. `origin` prefixes error messages.
inline ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin = "config") {
    ExperimentConfig cfg;
    std::optional<std::uint64_t> drift_start, drift_end;
    enum class Section { none, experiment, approach } section = Section::none;
    std::vector<ApproachSpec> approaches;
    std::vector<bool> typed;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim_copy(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
            const std::string body = detail::trim_copy(std::string_view(t).substr(1, t.size() - 2));
            if (body == "experiment") {
                section = Section::experiment;
            } else if (body.rfind("approach", 0) == 0 && body.size() > 8 && (body[8] == ' ' || body[8] == '\t')) {
                section = Section::approach;
                ApproachSpec a;
                a.name = detail::trim_copy(std::string_view(body).substr(8));
                approaches.push_back(std::move(a));
                typed.push_back(false);
            } else {
                throw ConfigError(where + ": unknown section '" + body + "'");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = detail::trim_copy(std::string_view(t).substr(0, eq));
        const std::string value = detail::trim_copy(std::string_view(t).substr(eq + 1));
        switch (section) {
            case Section::none: throw ConfigError(where + ": key outside any section");
            case Section::experiment: detail::set_experiment_key(cfg, key, value, where, drift_start, drift_end); break;
            case Section::approach:
                detail::set_approach_key(approaches.back(), key, value, where);
                if (key == "type") typed.back() = true;
                break;
        }
    }
    for (std::size_t i = 0; i < approaches.size(); ++i)
        if (!typed[i]) throw ConfigError(origin + ": approach '" + approaches[i].name + "' has no type");
    if (drift_start.has_value() != drift_end.has_value())
        throw ConfigError(origin + ": drift_start and drift_end go together");
    if (drift_start) cfg.drift_window = std::make_pair(*drift_start, *drift_end);
    cfg.approaches = approaches.empty() ? default_roster() : std::move(approaches);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    return parse_experiment_config(f, path);
}

struct Cell {
    std::size_t approach = 0;
    std::size_t stream = 0;
    std::uint64_t seed = 0;
};

struct CellFailure {
    std::string approach;
    std::string stream;
    std::uint64_t seed = 0;
    std::string message;
};

struct ExperimentResult {
    std::vector<RunRecord> records;   ///< cell order: approach-major, then stream, then seed
    std::vector<CellFailure> failures;

    bool ok() const { return failures.empty(); }
};

/// Opens the source for one cell. Generated streams depend on (name, seed)
/// only, so every approach sees the same examples for a given seed.
inline std::unique_ptr<StreamSource> open_stream(const ExperimentConfig& cfg, const std::string& stream,
                                                 std::uint64_t seed) {
    if (ExperimentConfig::is_csv_stream(stream)) return std::make_unique<CsvStream>(CsvStream::open(stream));
    return std::make_unique<ArtificialStream>(ArtificialStream::from_name(stream, cfg.dims, cfg.length, seed, cfg.drift_window));
}

inline RunRecord run_cell(const ExperimentConfig& cfg, const ApproachSpec& approach, const std::string& stream,
                          std::uint64_t seed) {
    auto source = open_stream(cfg, stream, seed);
    auto strategy = make_strategy(approach, source->schema(), mix_seed(seed, 17));
    RunRecord rec = cfg.evaluation == EvaluationMode::holdout
                        ? holdout_run(*strategy, *source, cfg.holdout_n, cfg.holdout_m, seed)
                        : prequential_run(*strategy, *source, cfg.sample_every, cfg.fading, seed);
    rec.approach = approach.name;
    rec.stream = stream;
    rec.seed = seed;
    return rec;
}

/// Runs every (approach, stream, seed) cell on a fixed pool. Each cell owns
/// its stream, strategy and RNGs and writes only its own result slot, so the
/// output is identical for any thread count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::function<void(const Cell&, bool)>& on_done = {}) {
    cfg.validate();
    std::vector<Cell> cells;
    for (std::size_t a = 0; a < cfg.approaches.size(); ++a)
        for (std::size_t s = 0; s < cfg.streams.size(); ++s)
            for (auto seed : cfg.seeds) cells.push_back({a, s, seed});

    std::vector<std::optional<RunRecord>> done(cells.size());
    std::vector<std::optional<std::string>> errors(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex report;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            try {
                done[i] = run_cell(cfg, cfg.approaches[c.approach], cfg.streams[c.stream], c.seed);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
            if (on_done) {
                std::lock_guard lock(report);
                on_done(c, !errors[i].has_value());
            }
        }
    };
    unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, cells.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ExperimentResult out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (done[i]) {
            out.records.push_back(std::move(*done[i]));
        } else {
            const Cell& c = cells[i];
            out.failures.push_back({cfg.approaches[c.approach].name, cfg.streams[c.stream], c.seed, *errors[i]});
        }
    }
    return out;
}

/// Writes results.csv, summary.csv and, when cells failed, failures.csv.
inline void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("results.csv");
        write_results_csv(f, result.records);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(f, summarize(result.records));
    }
    if (!result.failures.empty()) {
        auto f = open("failures.csv");
        f << "approach,stream,seed,message\n";
        for (const auto& x : result.failures) {
            std::string msg = x.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            f << x.approach << ',' << x.stream << ',' << x.seed << ',' << msg << '\n';
        }
    }
}

/// Reads results.csv back into run records; the stream average is the mean
/// of each run's samples.
inline std::vector<RunRecord> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "approach,stream,seed,step,gmean")
        throw CsvError(1, "expected header approach,stream,seed,step,gmean");
    std::map<std::tuple<std::string, std::string, std::uint64_t>, RunRecord> runs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(csv::trim(line), ',');
        if (f.size() != 5) throw CsvError(line_no, "expected 5 fields");
        const std::string approach(csv::trim(f[0])), stream(csv::trim(f[1]));
        std::uint64_t seed = 0, step = 0;
        const auto s2 = csv::trim(f[2]), s3 = csv::trim(f[3]);
        if (std::from_chars(s2.data(), s2.data() + s2.size(), seed).ptr != s2.data() + s2.size() || s2.empty())
            throw CsvError(line_no, "bad seed");
        if (std::from_chars(s3.data(), s3.data() + s3.size(), step).ptr != s3.data() + s3.size() || s3.empty())
            throw CsvError(line_no, "bad step");
        const auto g = csv::parse_double(f[4]);
        if (!g) throw CsvError(line_no, "bad gmean");
        auto& rec = runs[{approach, stream, seed}];
        rec.approach = approach;
        rec.stream = stream;
        rec.seed = seed;
        rec.samples.push_back({step, *g});
    }
    std::vector<RunRecord> out;
    for (auto& [key, rec] : runs) {
        std::sort(rec.samples.begin(), rec.samples.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
        rec.finish();
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace smoclust
