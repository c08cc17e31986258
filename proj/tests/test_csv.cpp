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

#include <memory>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "smoclust/csv.hpp"

namespace smoclust {
namespace {

CsvStream from_text(const std::string& text) { return CsvStream(std::make_unique<std::istringstream>(text)); }

// Line of the CsvError raised while draining the stream, or 0 if none.
std::size_t error_line(const std::string& text) {
    try {
        auto s = from_text(text);
        while (s.next()) {
        }
    } catch (const CsvError& e) {
        return e.line();
    }
    return 0;
}

TEST(Csv, ParsesHeaderAndRows) {
    auto s = from_text("a:num(-1..1),b:cat(red|green),label:class\n0.5,green,1\n-0.25,red,0\n\n1e-3 , red ,0\r\n");
    ASSERT_EQ(s.schema().size(), 2u);
    EXPECT_TRUE(s.schema().attributes[0].is_numeric());
    EXPECT_EQ(s.schema().attributes[1].categories, (std::vector<std::string>{"red", "green"}));
    EXPECT_EQ(*s.next(), (Example{{0.5, 1.0}, 1, 0}));
    EXPECT_EQ(*s.next(), (Example{{-0.25, 0.0}, 0, 1}));
    EXPECT_EQ(*s.next(), (Example{{1e-3, 0.0}, 0, 2}));
    EXPECT_FALSE(s.next().has_value());
}

TEST(Csv, HeaderOnlyIsExhausted) {
    auto s = from_text("x:num(0..1),y:class\n");
    EXPECT_FALSE(s.next().has_value());
}

TEST(Csv, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("x:num(0..1),y:class\n0.5,1\nabc,0\n"), 3u);
    EXPECT_EQ(error_line("x:cat(a|b),y:class\na,0\nb,1\nc,0\n"), 4u);
    EXPECT_EQ(error_line("x:num(0..1),y:class\n0.5,2\n"), 2u);
    EXPECT_EQ(error_line("x:num(0..1),y:class\n0.5,1,7\n"), 2u);
    EXPECT_EQ(error_line("x:num(0..1),y:class\ninf,1\n"), 2u);
}

TEST(Csv, RejectsMalformedHeaders) {
    for (const char* h : {"", "x:num(0..1)", "y:class,x:num(0..1)", "x:num(1..0),y:class", "x:cat(a|a),y:class",
                          "x:real,y:class", "x,y:class", "x:num(0;1),y:class"}) {
        EXPECT_THROW(from_text(std::string(h) + "\n"), CsvError) << h;
    }
}

TEST(Csv, FormatRoundTrip) {
    Schema s = Schema::numeric_box(2, -2.5, 3.0);
    s.attributes.push_back(AttributeSpec::categorical("colour", {"red", "green", "blue"}));
    const std::vector<Example> rows = {{{0.1, -1.0 / 3.0, 2.0}, 1, 0}, {{2.9999999, 1e-300, 0.0}, 0, 1}};
    std::string text = format_csv_header(s) + "\n";
    for (const auto& e : rows) text += format_csv_row(s, e) + "\n";
    auto in = from_text(text);
    EXPECT_EQ(in.schema(), s);
    for (const auto& e : rows) EXPECT_EQ(*in.next(), e);
    EXPECT_FALSE(in.next().has_value());
}

TEST(Csv, ParseDoubleIsStrict) {
    EXPECT_EQ(csv::parse_double(" +2.5 "), 2.5);
    EXPECT_FALSE(csv::parse_double("2.5x"));
    EXPECT_FALSE(csv::parse_double(""));
    EXPECT_FALSE(csv::parse_double("nan"));
}

TEST(Csv, OpenMissingFileThrows) { EXPECT_THROW(CsvStream::open("/nonexistent/stream.csv"), std::runtime_error); }

}  // namespace
}  // namespace smoclust
