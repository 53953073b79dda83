/*
 * Copyright 2026 The treedetect Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.

*/
#pragma once

#include <treedetect/errors.hpp>
#include <treedetect/montecarlo.hpp>

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace treedetect {

inline constexpr std::string_view kCsvHeader =
    "detector,snr_db,ser,ser_stderr,avg_muldiv,max_muldiv,avg_nodes,max_nodes,avg_cmps,max_cmps,trials";

namespace detail {

/// Shortest representation that parses back to the same double; locale independent.
inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

} // namespace detail

inline void write_csv(const SweepResult& result, std::ostream& os) {
    os << kCsvHeader << '\n';
    for (const auto& p : result.rows) {
        using detail::format_real;
        os << p.detector << ',' << format_real(p.snr_db) << ',' << format_real(p.ser) << ','
           << format_real(p.ser_stderr) << ',' << format_real(p.muldiv.avg) << ',' << p.muldiv.max << ','
           << format_real(p.nodes.avg) << ',' << p.nodes.max << ',' << format_real(p.cmps.avg) << ','
           << p.cmps.max << ',' << p.trials << '\n';
    }
}

inline std::string to_csv(const SweepResult& result) {
    std::ostringstream os;
    write_csv(result, os);
    return os.str();
}

inline void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path + " for writing");
    }
    write_csv(result, f);
    if (!f.flush()) {
        throw IoError("write failed: " + path);
    }
}

/// Inverse of write_csv. symbol_errors is not part of the schema and is left at zero.
inline std::vector<SweepPoint> parse_csv(std::string_view text) {
    std::vector<SweepPoint> rows;
    std::size_t             line_no = 0;
    bool                    header  = true;
    while (!text.empty()) {
        ++line_no;
        const auto       eol  = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text                  = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (line.empty()) {
            continue;
        }
        if (header) {
            if (line != kCsvHeader) {
                throw ParseError(line_no, "unexpected CSV header");
            }
            header = false;
            continue;
        }
        std::vector<std::string_view> f;
        for (;;) {
            const auto comma = line.find(',');
            f.push_back(line.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            line = line.substr(comma + 1);
        }
        if (f.size() != 11) {
            throw ParseError(line_no, "expected 11 fields");
        }
        auto real = [&](std::string_view s) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size()) {
                throw ParseError(line_no, "bad number '" + std::string(s) + "'");
            }
            return v;
        };
        auto count = [&](std::string_view s) {
            std::uint64_t v = 0;
            auto [ptr, ec]  = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size()) {
                throw ParseError(line_no, "bad count '" + std::string(s) + "'");
            }
            return v;
        };
        SweepPoint p;
        p.detector   = std::string(f[0]);
        p.snr_db     = real(f[1]);
        p.ser        = real(f[2]);
        p.ser_stderr = real(f[3]);
        p.muldiv     = {real(f[4]), count(f[5])};
        p.nodes      = {real(f[6]), count(f[7])};
        p.cmps       = {real(f[8]), count(f[9])};
        p.trials     = count(f[10]);
        rows.push_back(std::move(p));
    }
    return rows;
}

/**
 * gnuplot data file: one index block per detector (separated by two blank
 * lines), columns snr ser ser_stderr avg_muldiv max_muldiv avg_nodes
 * max_nodes avg_cmps max_cmps.
 */
inline void write_gnuplot(const SweepResult& result, std::ostream& os) {
    std::string current;
    bool        first = true;
    for (const auto& p : result.rows) {
        if (first || p.detector != current) {
            if (!first) {
                os << "\n\n";
            }
            os << "# " << p.detector << "\n# snr_db ser ser_stderr avg_muldiv max_muldiv avg_nodes max_nodes "
               << "avg_cmps max_cmps\n";
            current = p.detector;
            first   = false;
        }
        using detail::format_real;
        os << format_real(p.snr_db) << ' ' << format_real(p.ser) << ' ' << format_real(p.ser_stderr) << ' '
           << format_real(p.muldiv.avg) << ' ' << p.muldiv.max << ' ' << format_real(p.nodes.avg) << ' '
           << p.nodes.max << ' ' << format_real(p.cmps.avg) << ' ' << p.cmps.max << '\n';
    }
}

} // namespace treedetect
