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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treedetect {

/*
 * Experiment configuration, one `key = value` per line. `#` starts a
 * comment. Later assignments override earlier ones. Keys:
 *
 *   t, r            antenna counts (default 4, 4)
 *   qam             constellation order 4 | 16 | 64 (default 16)
 *   snr             comma-separated SNR grid in dB (default 10,15,20,25,30)
 *   signals         signals per SNR point (default 100000)
 *   fading_block    signals per channel draw (default 100)
 *   seed, workers   RNG seed (default 1); worker threads, 0 = all cores (default 1)
 *   M, X            QRD-MLD breadth and threshold factor (default 16, 2)
 *   L               comma-separated list bounds, one Dijkstra detector each (default 16,5)
 *   N               outputs per detection (default 1)
 *   detectors       comma-separated subset of ml, qrd, qrd_improved, dijkstra,
 *                   dijkstra_unbounded. Default: all of qrd, qrd_improved and
 *                   dijkstra, plus ml when |S|^t <= 2^16.
 */
class ConfigBuilder {
public:
    /// Applies one assignment. `line` is used in diagnostics; 0 means a command-line flag.
    void apply(std::string_view key, std::string_view value, std::size_t line = 0) {
        const std::string k(trim(key));
        const auto        v = trim(value);
        if (v.empty()) {
            throw ParseError(line, "empty value for '" + k + "'");
        }
        if (k == "t") {
            cfg_.t = parse_count(v, k, line);
        } else if (k == "r") {
            cfg_.r = parse_count(v, k, line);
        } else if (k == "qam") {
            cfg_.qam_order = static_cast<std::uint32_t>(parse_count(v, k, line));
        } else if (k == "snr") {
            cfg_.snr_db.clear();
            for (auto item : split(v)) {
                cfg_.snr_db.push_back(parse_real(item, k, line));
            }
        } else if (k == "signals") {
            cfg_.signals_total = parse_count(v, k, line);
        } else if (k == "fading_block") {
            cfg_.fading_block = parse_count(v, k, line);
        } else if (k == "seed") {
            cfg_.seed = parse_count(v, k, line);
        } else if (k == "workers") {
            cfg_.workers = parse_count(v, k, line);
        } else if (k == "M") {
            m_ = parse_count(v, k, line);
        } else if (k == "X") {
            x_ = parse_real(v, k, line);
        } else if (k == "N") {
            n_ = parse_count(v, k, line);
        } else if (k == "L") {
            l_.clear();
            for (auto item : split(v)) {
                l_.push_back(parse_count(item, k, line));
            }
        } else if (k == "detectors") {
            families_.emplace();
            for (auto item : split(v)) {
                const std::string name(item);
                if (name != "ml" && name != "qrd" && name != "qrd_improved" && name != "dijkstra" &&
                    name != "dijkstra_unbounded") {
                    throw ParseError(line, "unknown detector '" + name + "'");
                }
                families_->push_back(name);
            }
        } else {
            throw ParseError(line, "unknown key '" + k + "'");
        }
    }

    /// Parses a whole configuration text.
    void apply_text(std::string_view text) {
        std::size_t line_no = 0;
        while (!text.empty()) {
            ++line_no;
            const auto       eol  = text.find('\n');
            std::string_view line = text.substr(0, eol);
            text                  = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
            if (const auto hash = line.find('#'); hash != std::string_view::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ParseError(line_no, "expected 'key = value'");
            }
            apply(line.substr(0, eq), line.substr(eq + 1), line_no);
        }
    }

    /// Expands detector families and validates the result.
    ExperimentConfig finish() const {
        ExperimentConfig cfg = cfg_;
        std::vector<std::string> families;
        if (families_) {
            families = *families_;
        } else {
            std::uint64_t space = 1;
            for (std::size_t k = 0; k < cfg.t && space <= (1u << 16); ++k) {
                space *= cfg.qam_order;
            }
            if (space <= (1u << 16)) {
                families.push_back("ml");
            }
            families.insert(families.end(), {"qrd", "qrd_improved", "dijkstra"});
        }
        cfg.detectors.clear();
        for (const auto& f : families) {
            DetectorConfig d;
            d.M = m_;
            d.X = x_;
            d.N = n_;
            if (f == "ml") {
                d.algorithm = Algorithm::BruteForceML;
            } else if (f == "qrd") {
                d.algorithm = Algorithm::QrdMld;
            } else if (f == "qrd_improved") {
                d.algorithm = Algorithm::QrdMldImproved;
            } else if (f == "dijkstra_unbounded") {
                d.algorithm = Algorithm::DijkstraUnbounded;
            } else {
                for (auto l : l_) {
                    d.algorithm = Algorithm::DijkstraBounded;
                    d.L         = l;
                    cfg.detectors.push_back(d);
                }
                continue;
            }
            cfg.detectors.push_back(d);
        }
        cfg.validate();
        return cfg;
    }

private:
    static std::string_view trim(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) {
            return {};
        }
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string_view> split(std::string_view s) {
        std::vector<std::string_view> out;
        for (;;) {
            const auto comma = s.find(',');
            out.push_back(trim(s.substr(0, comma)));
            if (comma == std::string_view::npos) {
                break;
            }
            s = s.substr(comma + 1);
        }
        return out;
    }

    static std::uint64_t parse_count(std::string_view v, const std::string& key, std::size_t line) {
        std::uint64_t out   = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ParseError(line, "'" + key + "' expects a non-negative integer, got '" + std::string(v) + "'");
        }
        return out;
    }

    static double parse_real(std::string_view v, const std::string& key, std::size_t line) {
        double     out    = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ParseError(line, "'" + key + "' expects a number, got '" + std::string(v) + "'");
        }
        return out;
    }

    ExperimentConfig                        cfg_;
    std::size_t                             m_ = 16;
    double                                  x_ = 2.0;
    std::size_t                             n_ = 1;
    std::vector<std::size_t>                l_ = {16, 5};
    std::optional<std::vector<std::string>> families_;
};

inline ExperimentConfig parse_config(std::string_view text) {
    ConfigBuilder b;
    b.apply_text(text);
    return b.finish();
}

} // namespace treedetect
