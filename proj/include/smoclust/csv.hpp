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

// Stream CSV format. The header names every column as `name:kind` with kind
// one of `num(lo..hi)`, `cat(a|b|...)` or `class`; the class column comes
// last and holds 0 or 1. Fields are comma separated, UTF-8, no quoting.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/streams.hpp"

namespace smoclust {

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace csv {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Whole-field strict parse; rejects trailing junk and non-finite values.
inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace csv

struct CsvHeader {
    Schema schema;
    std::string class_name = "class";
};

inline CsvHeader parse_csv_header(std::string_view line, std::size_t line_no = 1) {
    CsvHeader h;
    const auto cols = csv::split(csv::trim(line), ',');
    if (cols.size() < 2) throw CsvError(line_no, "header needs at least one attribute and a class column");
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto col = csv::trim(cols[i]);
        const auto colon = col.find(':');
        if (colon == std::string_view::npos) throw CsvError(line_no, "column '" + std::string(col) + "' lacks ':kind'");
        const std::string name(csv::trim(col.substr(0, colon)));
        const auto kind = csv::trim(col.substr(colon + 1));
        const bool last = i + 1 == cols.size();
        if (kind == "class") {
            if (!last) throw CsvError(line_no, "class column must be last");
            h.class_name = name;
            continue;
        }
        if (last) throw CsvError(line_no, "last column must be the class column");
        try {
            if (kind.starts_with("num(") && kind.ends_with(")")) {
                const auto body = kind.substr(4, kind.size() - 5);
                const auto dots = body.find("..");
                if (dots == std::string_view::npos) throw CsvError(line_no, "numeric range needs 'lo..hi'");
                const auto lo = csv::parse_double(body.substr(0, dots));
                const auto hi = csv::parse_double(body.substr(dots + 2));
                if (!lo || !hi) throw CsvError(line_no, "bad numeric range in column '" + name + "'");
                h.schema.attributes.push_back(AttributeSpec::numeric(name, *lo, *hi));
            } else if (kind.starts_with("cat(") && kind.ends_with(")")) {
                std::vector<std::string> cats;
                for (auto c : csv::split(kind.substr(4, kind.size() - 5), '|')) cats.emplace_back(csv::trim(c));
                h.schema.attributes.push_back(AttributeSpec::categorical(name, std::move(cats)));
            } else {
                throw CsvError(line_no, "unknown kind '" + std::string(kind) + "' in column '" + name + "'");
            }
        } catch (const PreconditionError& e) {
            throw CsvError(line_no, e.what());
        }
    }
    return h;
}

inline std::string format_csv_header(const Schema& schema, const std::string& class_name = "class") {
    std::string out;
    for (const auto& a : schema.attributes) {
        out += a.name + ':';
        if (a.is_numeric()) {
            out += "num(" + csv::format_double(a.lo) + ".." + csv::format_double(a.hi) + ")";
        } else {
            out += "cat(";
            for (std::size_t i = 0; i < a.categories.size(); ++i) out += (i ? "|" : "") + a.categories[i];
            out += ")";
        }
        out += ',';
    }
    return out + class_name + ":class";
}

inline std::string format_csv_row(const Schema& schema, const Example& e) {
    std::string out;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& a = schema.attributes[i];
        out += a.is_numeric() ? csv::format_double(e.values[i]) : a.categories[static_cast<std::size_t>(e.values[i])];
        out += ',';
    }
    out += std::to_string(e.class_label());
    return out;
}

/// Reads a labelled stream from CSV, one row per example, in file order.
class CsvStream final : public StreamSource {
public:
    /// Takes ownership of the input; the header is parsed immediately.
    explicit CsvStream(std::unique_ptr<std::istream> in, std::string name = "csv") : in_(std::move(in)), name_(std::move(name)) {
        std::string line;
        if (!std::getline(*in_, line)) throw CsvError(1, "missing header");
        line_no_ = 1;
        header_ = parse_csv_header(line, 1);
        for (const auto& a : header_.schema.attributes) {
            std::map<std::string, double, std::less<>> idx;
            for (std::size_t c = 0; c < a.categories.size(); ++c) idx.emplace(a.categories[c], static_cast<double>(c));
            category_index_.push_back(std::move(idx));
        }
    }

    static CsvStream open(const std::string& path) {
        auto f = std::make_unique<std::ifstream>(path);
        if (!*f) throw std::runtime_error("cannot open stream file '" + path + "'");
        return CsvStream(std::move(f), path);
    }

    const Schema& schema() const override { return header_.schema; }
    std::string name() const override { return name_; }

    std::optional<Example> next() override {
        std::string line;
        while (std::getline(*in_, line)) {
            ++line_no_;
            if (csv::trim(line).empty()) continue;
            return parse_row(line);
        }
        return std::nullopt;
    }

private:
    Example parse_row(std::string_view line) const {
        const auto fields = csv::split(line, ',');
        const auto& attrs = header_.schema.attributes;
        if (fields.size() != attrs.size() + 1)
            throw CsvError(line_no_, "expected " + std::to_string(attrs.size() + 1) + " fields, found " +
                                         std::to_string(fields.size()));
        Example e;
        e.timestamp = produced_++;
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            const auto f = csv::trim(fields[i]);
            if (attrs[i].is_numeric()) {
                const auto v = csv::parse_double(f);
                if (!v) throw CsvError(line_no_, "non-numeric value '" + std::string(f) + "' in column '" + attrs[i].name + "'");
                e.values.push_back(*v);
            } else {
                const auto it = category_index_[i].find(f);
                if (it == category_index_[i].end())
                    throw CsvError(line_no_, "unknown category '" + std::string(f) + "' in column '" + attrs[i].name + "'");
                e.values.push_back(it->second);
            }
        }
        const auto cls = csv::trim(fields.back());
        if (cls == "0") e.label = 0;
        else if (cls == "1") e.label = 1;
        else throw CsvError(line_no_, "class value must be 0 or 1, found '" + std::string(cls) + "'");
        return e;
    }

    std::unique_ptr<std::istream> in_;
    std::string name_;
    CsvHeader header_;
    std::vector<std::map<std::string, double, std::less<>>> category_index_;
    std::size_t line_no_ = 0;
    mutable std::uint64_t produced_ = 0;
};

}  // namespace smoclust
