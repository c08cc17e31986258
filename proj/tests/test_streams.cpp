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

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "smoclust/streams.hpp"

namespace smoclust {
namespace {

TEST(StreamName, PercentDigits) {
    EXPECT_EQ(percent_from_digits("10"), 10.0);
    EXPECT_NEAR(percent_from_digits("07"), 0.7, 1e-15);
    EXPECT_NEAR(percent_from_digits("005"), 0.05, 1e-15);
    EXPECT_EQ(percent_from_digits("100"), 100.0);
}

TEST(StreamName, CanonicalRoundTrip) {
    for (const char* name : {"StaticIm1_Move7", "StaticIm10_Rare100", "Im1+Borderline100", "Split5", "Merge3+Im10",
                             "StaticIm07_Split3+Rare20+Borderline40", "StaticIm10"}) {
        const auto parsed = parse_stream_name(name);
        EXPECT_EQ(parsed.canonical(), name);
        EXPECT_EQ(parse_stream_name(parsed.canonical()), parsed);
    }
}

TEST(StreamName, RejectsMalformed) {
    for (const char* bad : {"", "Foo", "Split0", "Split5+Move3", "Rare60+Borderline50", "StaticIm0_Move3",
                            "StaticIm100", "Split5+", "Split5Move3", "StaticIm10_", "Move03", "Im5+Im7", "Im100"}) {
        EXPECT_THROW(parse_stream_name(bad), StreamNameError) << bad;
    }
}

TEST(DriftScript, StaticMoveStream) {
    Rng rng(1);
    const auto s = make_drift_script(parse_stream_name("StaticIm1_Move7"), 2, 100, 200, rng);
    EXPECT_EQ(s.initial.minority_prior, 0.01);
    EXPECT_EQ(s.target.minority_prior, 0.01);
    EXPECT_EQ(s.initial.clusters.size(), 7u);
    EXPECT_EQ(s.target.clusters.size(), 7u);
    EXPECT_NE(s.initial.clusters, s.target.clusters);
    EXPECT_EQ(s.target.mix, ExampleMix{});
}

TEST(DriftScript, RareMixDrift) {
    Rng rng(2);
    const auto s = make_drift_script(parse_stream_name("StaticIm10_Rare100"), 2, 100, 200, rng);
    EXPECT_EQ(s.initial.minority_prior, 0.1);
    EXPECT_EQ(s.initial.mix, (ExampleMix{100.0, 0.0, 0.0}));
    EXPECT_EQ(s.target.mix, (ExampleMix{0.0, 0.0, 100.0}));
    EXPECT_EQ(s.initial.clusters, s.target.clusters);
}

TEST(DriftScript, SimultaneousFactors) {
    Rng rng(3);
    const auto s = make_drift_script(parse_stream_name("Im1+Borderline100"), 2, 100, 200, rng);
    EXPECT_EQ(s.initial.minority_prior, 0.5);
    EXPECT_EQ(s.target.minority_prior, 0.01);
    EXPECT_EQ(s.target.mix, (ExampleMix{0.0, 100.0, 0.0}));
}

TEST(DriftScript, SplitAndMergeShapes) {
    Rng rng(4);
    const auto split = make_drift_script(parse_stream_name("Split5"), 3, 0, 10, rng);
    EXPECT_EQ(split.initial.clusters.size(), 1u);
    EXPECT_EQ(split.target.clusters.size(), 5u);
    const auto merge = make_drift_script(parse_stream_name("Merge3"), 3, 0, 10, rng);
    EXPECT_EQ(merge.initial.clusters.size(), 3u);
    EXPECT_EQ(merge.target.clusters.size(), 1u);
}

TEST(DriftScript, InterpolationEndpointsAndMidpoint) {
    Rng rng(5);
    const auto s = make_drift_script(parse_stream_name("Move3+Im5"), 2, 100, 200, rng);
    EXPECT_EQ(s.concept_at(0), s.initial);
    EXPECT_EQ(s.concept_at(100), s.initial);
    EXPECT_EQ(s.concept_at(200), s.target);
    EXPECT_EQ(s.concept_at(5000), s.target);
    const auto mid = s.concept_at(150);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t d = 0; d < 2; ++d)
            EXPECT_NEAR(mid.clusters[i].centre[d],
                        0.5 * (s.initial.clusters[i].centre[d] + s.target.clusters[i].centre[d]), 1e-12);
    EXPECT_NEAR(mid.minority_prior, 0.5 * (0.5 + 0.05), 1e-12);
}

TEST(DriftScript, DefaultWindowScales) {
    EXPECT_EQ(default_drift_window(200000), (std::pair<std::uint64_t, std::uint64_t>{70000, 100000}));
    EXPECT_EQ(default_drift_window(50000), (std::pair<std::uint64_t, std::uint64_t>{17500, 25000}));
}

ConceptSpec concept_with(ExampleMix mix, double prior = 0.5) {
    ConceptSpec c;
    c.dims = 2;
    c.clusters = {{{-0.4, -0.4}, 0.2}, {{0.4, 0.4}, 0.2}};
    c.minority_prior = prior;
    c.mix = mix;
    c.validate();
    return c;
}

double nearest_centre(const ConceptSpec& c, const Point& p) {
    double best = 1e9;
    for (const auto& s : c.clusters) best = std::min(best, distance(p, s.centre));
    return best;
}

TEST(ConceptSampler, SafeMinorityInsideSubClusters) {
    const auto c = concept_with({100.0, 0.0, 0.0});
    ConceptSampler sampler;
    Rng rng(6);
    for (int i = 0; i < 10000; ++i) EXPECT_LE(nearest_centre(c, sampler.sample_class(c, 1, rng).values), 0.2);
}

TEST(ConceptSampler, RareMinorityOutsideBorders) {
    const auto c = concept_with({0.0, 0.0, 100.0});
    ConceptSampler sampler;
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const auto p = sampler.sample_class(c, 1, rng).values;
        EXPECT_GT(nearest_centre(c, p), 1.3 * 0.2);
        for (double x : p) EXPECT_LT(std::abs(x), 1.0);
    }
}

TEST(ConceptSampler, BorderlineInShell) {
    const auto c = concept_with({0.0, 100.0, 0.0});
    ConceptSampler sampler;
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        const double d = nearest_centre(c, sampler.sample_class(c, 1, rng).values);
        EXPECT_GE(d, 0.7 * 0.2 - 1e-12);
        EXPECT_LE(d, 1.3 * 0.2 + 1e-12);
    }
}

TEST(ConceptSampler, MajorityStaysClearOfClusters) {
    const auto c = concept_with({100.0, 0.0, 0.0});
    ConceptSampler sampler;
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) EXPECT_GT(nearest_centre(c, sampler.sample_class(c, 0, rng).values), 1.3 * 0.2);
}

TEST(ConceptSampler, PriorMatchesBinomial) {
    const auto c = concept_with({100.0, 0.0, 0.0}, 0.01);
    ConceptSampler sampler;
    Rng rng(10);
    int ones = 0;
    for (int i = 0; i < 100000; ++i) ones += sampler.sample(c, rng).class_label();
    EXPECT_NEAR(ones / 100000.0, 0.01, 0.002);
}

TEST(BalancedHoldout, ExactHalvesAndDeterminism) {
    const auto c = concept_with({100.0, 0.0, 0.0}, 0.05);
    Rng a(11), b(11);
    const auto x = balanced_holdout(c, 1000, a);
    const auto y = balanced_holdout(c, 1000, b);
    EXPECT_EQ(x, y);
    int ones = 0;
    for (const auto& e : x) {
        ones += e.class_label();
        if (e.class_label() == 1) {
            EXPECT_LE(nearest_centre(c, e.values), 0.2);
        }
    }
    EXPECT_EQ(ones, 500);
    Rng r(1);
    EXPECT_THROW(balanced_holdout(c, 3, r), PreconditionError);
}

TEST(ArtificialStream, DeterministicAndFinite) {
    auto a = ArtificialStream::from_name("StaticIm10_Split5", 2, 3000, 12);
    auto b = ArtificialStream::from_name("StaticIm10_Split5", 2, 3000, 12);
    auto c = ArtificialStream::from_name("StaticIm10_Split5", 2, 3000, 13);
    std::size_t n = 0;
    bool differs = false;
    while (auto e = a.next()) {
        const auto f = b.next();
        const auto g = c.next();
        ASSERT_TRUE(f && g);
        ASSERT_EQ(*e, *f);
        differs = differs || e->values != g->values;
        EXPECT_EQ(e->timestamp, n);
        ++n;
    }
    EXPECT_EQ(n, 3000u);
    EXPECT_FALSE(b.next().has_value());
    EXPECT_TRUE(differs);
    EXPECT_EQ(a.name(), "StaticIm10_Split5");
    EXPECT_EQ(a.concept_at(0), a.script().initial);
}

TEST(ArtificialStream, PriorWithinThreeSigmaPerWindow) {
    auto s = ArtificialStream::from_name("StaticIm10_Move3", 2, 50000, 14);
    const double p = 0.1, w = 10000.0, sigma = std::sqrt(w * p * (1 - p));
    for (int win = 0; win < 5; ++win) {
        int ones = 0;
        for (int i = 0; i < 10000; ++i) ones += s.next()->class_label();
        EXPECT_NEAR(ones, w * p, 3.0 * sigma) << "window " << win;
    }
}

TEST(ArtificialStream, ExplicitWindowAndDims) {
    auto s = ArtificialStream::from_name("Move3", 5, 1000, 15, std::make_pair<std::uint64_t, std::uint64_t>(10, 20));
    EXPECT_EQ(s.schema().size(), 5u);
    EXPECT_EQ(s.script().start, 10u);
    EXPECT_EQ(s.script().end, 20u);
}

}  // namespace
}  // namespace smoclust
