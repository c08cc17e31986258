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

// smoclust: generate streams, run experiment matrices, rank results and
// export decision grids. Exit codes: 0 ok, 1 validation error, 2 a run failed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smoclust/csv.hpp"
#include "smoclust/eval.hpp"
#include "smoclust/experiment.hpp"
#include "smoclust/streams.hpp"

namespace fs = std::filesystem;
using namespace smoclust;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kCellFailure = 2;

constexpr const char* kOutputEnv = "SMOCLUST_OUTPUT_DIR";

struct GenerateArgs {
    std::string name;
    std::uint64_t seed = 1;
    std::uint64_t length = 50000;
    std::size_t dims = 2;
    std::optional<std::uint64_t> drift_start, drift_end;
    std::string out;
};

int cmd_generate(const GenerateArgs& a) {
    if (a.drift_start.has_value() != a.drift_end.has_value()) {
        std::cerr << "error: --drift-start and --drift-end go together\n";
        return kValidation;
    }
    std::optional<std::pair<std::uint64_t, std::uint64_t>> window;
    if (a.drift_start) window = std::make_pair(*a.drift_start, *a.drift_end);
    std::optional<ArtificialStream> stream;
    try {
        stream.emplace(ArtificialStream::from_name(a.name, a.dims, a.length, a.seed, window));
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    std::ofstream out(a.out, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write '" << a.out << "'\n";
        return kValidation;
    }
    std::uint64_t counts[2] = {0, 0};
    out << format_csv_header(stream->schema()) << '\n';
    while (auto e = stream->next()) {
        ++counts[e->class_label()];
        out << format_csv_row(stream->schema(), *e) << '\n';
    }
    out.close();
    if (!out) {
        std::cerr << "error: write to '" << a.out << "' failed\n";
        return kValidation;
    }
    std::cout << "stream " << stream->name() << " seed " << a.seed << " length " << a.length << '\n'
              << "class 0: " << counts[0] << '\n'
              << "class 1: " << counts[1] << '\n';
    return kOk;
}

struct RunArgs {
    std::string config;
    std::optional<std::string> output;
    std::optional<unsigned> threads;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(a.config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    if (const char* env = std::getenv(kOutputEnv); env && *env) cfg.output = env;
    if (a.output) cfg.output = *a.output;
    if (a.threads) cfg.threads = *a.threads;

    const std::size_t total = cfg.approaches.size() * cfg.streams.size() * cfg.seeds.size();
    std::size_t finished = 0;
    auto progress = [&](const Cell& c, bool ok) {
        ++finished;
        if (a.quiet) return;
        std::cerr << '[' << finished << '/' << total << "] " << cfg.approaches[c.approach].name << ' '
                  << cfg.streams[c.stream] << " seed " << c.seed << (ok ? "" : " FAILED") << '\n';
    };
    const ExperimentResult result = run_experiment(cfg, progress);
    try {
        write_experiment_outputs(cfg.output, result);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    for (const auto& row : summarize(result.records))
        std::cout << row.approach << ' ' << row.stream << " mean " << row.mean << " std " << row.std << '\n';
    if (!result.ok()) {
        for (const auto& f : result.failures)
            std::cerr << "cell failed: " << f.approach << ' ' << f.stream << " seed " << f.seed << ": " << f.message
                      << '\n';
        return kCellFailure;
    }
    return kOk;
}

struct RankArgs {
    std::string results;
    double alpha = 0.05;
    std::string unit = "stream";
    std::string reference = "SMOClust";
};

int cmd_rank(const RankArgs& a) {
    const fs::path dir(a.results);
    std::ifstream in(dir / "results.csv");
    if (!in) {
        std::cerr << "error: no results.csv in '" << a.results << "'\n";
        return kValidation;
    }
    ResultMatrix m;
    try {
        m = ResultMatrix::from_records(read_results_csv(in));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    if (m.approaches.size() < 2) {
        std::cerr << "error: ranking needs at least 2 approaches, found " << m.approaches.size() << '\n';
        return kValidation;
    }
    if (!m.complete()) {
        std::cerr << "error: incomplete result matrix, missing cells:\n";
        for (const auto& c : m.missing)
            std::cerr << "  " << c.approach << ' ' << c.stream << (c.seed ? " seed " + std::to_string(*c.seed) : " (all seeds)")
                      << '\n';
        return kValidation;
    }
    const RankUnit unit = a.unit == "run" ? RankUnit::run : RankUnit::stream;
    FriedmanResult f;
    try {
        f = friedman_nemenyi(friedman_table(m, unit), a.alpha);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    {
        std::ofstream r(dir / "ranks.csv");
        write_ranks_csv(r, m.approaches, f);
        std::ofstream s(dir / "friedman.csv");
        s << "approaches,observations,chi_squared,p_value,alpha,critical_difference\n"
          << f.approaches << ',' << f.observations << ',' << csv::format_double(f.chi_squared) << ','
          << csv::format_double(f.p_value) << ',' << csv::format_double(f.alpha) << ','
          << csv::format_double(f.critical_difference) << '\n';
    }
    std::cout << "average ranks (1 = best), " << f.observations << " observations by " << a.unit << ":\n";
    for (std::size_t j = 0; j < m.approaches.size(); ++j)
        std::cout << "  " << m.approaches[j] << ' ' << f.average_ranks[j] << '\n';
    std::cout << "Friedman chi2 " << f.chi_squared << " p " << f.p_value << '\n'
              << "Nemenyi CD (alpha " << f.alpha << ", k " << f.approaches << ", N " << f.observations << ") "
              << f.critical_difference << '\n';
    if (std::find(m.approaches.begin(), m.approaches.end(), a.reference) != m.approaches.end()) {
        std::ofstream d(dir / "differences.csv");
        difference_table(m, a.reference).write_csv(d);
        std::cout << "difference table against " << a.reference << " written to " << (dir / "differences.csv").string()
                  << '\n';
    } else {
        std::cout << "no '" << a.reference << "' results; difference table skipped\n";
    }
    return kOk;
}

struct GridArgs {
    std::string config;
    std::string approach;
    std::string stream;
    std::uint64_t seed = 1;
    std::uint64_t steps = 0;
    std::size_t resolution = 100;
    std::string out;
};

int cmd_grid(const GridArgs& a) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(a.config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    const auto it = std::find_if(cfg.approaches.begin(), cfg.approaches.end(),
                                 [&](const ApproachSpec& s) { return s.name == a.approach; });
    if (it == cfg.approaches.end()) {
        std::cerr << "error: approach '" << a.approach << "' not in config\n";
        return kValidation;
    }
    try {
        auto source = open_stream(cfg, a.stream, a.seed);
        const Schema& schema = source->schema();
        if (schema.size() != 2 || !schema.all_numeric()) {
            std::cerr << "error: decision grids need a two-attribute numeric stream\n";
            return kValidation;
        }
        auto strategy = make_strategy(*it, schema, mix_seed(a.seed, 17));
        const std::uint64_t steps = a.steps ? a.steps : cfg.length;
        for (std::uint64_t t = 0; t < steps; ++t) {
            auto e = source->next();
            if (!e) break;
            strategy->train(*e);
        }
        const GridBounds b{schema.attributes[0].lo, schema.attributes[0].hi, schema.attributes[1].lo,
                           schema.attributes[1].hi};
        std::ofstream out(a.out);
        if (!out) {
            std::cerr << "error: cannot write '" << a.out << "'\n";
            return kValidation;
        }
        write_grid_csv(out, export_decision_grid(*strategy, schema, b, a.resolution));
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCellFailure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMOClust stream experiments"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write an artificial stream as CSV and print its class counts");
    g->add_option("--name", gen.name, "Stream name, e.g. StaticIm10_Split5")->required();
    g->add_option("--seed", gen.seed, "Stream seed")->capture_default_str();
    g->add_option("--length", gen.length, "Number of examples")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--dims", gen.dims, "Numeric attributes")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--drift-start", gen.drift_start, "First drift step (default 0.35 * length)");
    g->add_option("--drift-end", gen.drift_end, "Last drift step (default 0.5 * length)");
    g->add_option("--out", gen.out, "Output CSV path")->required();

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run every (approach, stream, seed) cell of a config");
    r->add_option("--config", run.config, "Experiment config file")->required();
    r->add_option("--output", run.output, std::string("Output directory (overrides ") + kOutputEnv + " and the config)");
    r->add_option("--threads", run.threads, "Worker threads (0 = hardware concurrency)");
    r->add_flag("--quiet", run.quiet, "No per-cell progress on stderr");

    RankArgs rank;
    auto* k = app.add_subcommand("rank", "Friedman/Nemenyi ranks and the difference table for a results directory");
    k->add_option("--results", rank.results, "Directory holding results.csv")->required();
    k->add_option("--alpha", rank.alpha, "Significance level (0.05 or 0.10)")->capture_default_str();
    k->add_option("--unit", rank.unit, "Observation unit: stream (seed-averaged) or run")
        ->capture_default_str()
        ->check(CLI::IsMember({"stream", "run"}));
    k->add_option("--reference", rank.reference, "Reference approach of the difference table")->capture_default_str();

    GridArgs grid;
    auto* d = app.add_subcommand("grid", "Train one approach and export its 2-D decision grid");
    d->add_option("--config", grid.config, "Experiment config file")->required();
    d->add_option("--approach", grid.approach, "Approach name from the config")->required();
    d->add_option("--stream", grid.stream, "Stream name or CSV path")->required();
    d->add_option("--seed", grid.seed, "Seed")->capture_default_str();
    d->add_option("--steps", grid.steps, "Training steps before export (default: config length)");
    d->add_option("--resolution", grid.resolution, "Cells per axis")->capture_default_str()->check(CLI::PositiveNumber);
    d->add_option("--out", grid.out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }
    if (g->parsed()) return cmd_generate(gen);
    if (r->parsed()) return cmd_run(run);
    if (k->parsed()) return cmd_rank(rank);
    return cmd_grid(grid);
}
