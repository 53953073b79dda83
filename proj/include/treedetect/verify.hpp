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

#include <treedetect/channel.hpp>
#include <treedetect/constellation.hpp>
#include <treedetect/detectors.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace treedetect {

struct VerifyOptions {
    std::size_t   instances = 1000;
    std::uint64_t seed      = 2024;
    double        snr_db    = 10.0;
    /// Negative control: perturbs the metric reported by one detector so the check must fail.
    bool          corrupt_metric = false;
};

struct VerifyCase {
    std::string name;          ///< e.g. "2x2 4-QAM"
    std::size_t instances = 0;
    std::size_t exact     = 0; ///< instances where every exact detector matched the oracle
    std::size_t heuristic_agree = 0; ///< instances where Dijkstra L=1 matched the oracle (informational)
};

struct VerifyReport {
    std::vector<VerifyCase> cases;

    bool passed() const {
        for (const auto& c : cases) {
            if (c.exact != c.instances) {
                return false;
            }
        }
        return true;
    }
};

namespace detail {

/// argmin ||y - Hx||^2 by enumeration on the unfactored channel; indices in antenna order.
inline std::vector<std::uint8_t> direct_ml(const ComplexMatrix& h, std::span<const Complex> y, const Constellation& c) {
    const std::size_t         t = h.cols();
    std::vector<std::uint8_t> idx(t, 0), best(t, 0);
    double                    best_d = std::numeric_limits<double>::infinity();
    for (;;) {
        const auto hx = multiply(h, symbols_of(c, idx));
        double     d  = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            d += std::norm(y[i] - hx[i]);
        }
        if (d < best_d) {
            best_d = d;
            best   = idx;
        }
        std::size_t k = 0;
        while (k < t && ++idx[k] == c.size()) {
            idx[k++] = 0;
        }
        if (k == t) {
            return best;
        }
    }
}

inline bool metric_consistent(const DetectionProblem& p, const DetectionResult& r) {
    for (std::size_t k = 0; k < r.indices.size(); ++k) {
        const double ref = objective(p, r.indices[k]);
        if (std::abs(ref - r.metrics[k]) > 1e-9 * std::max(1.0, std::abs(ref))) {
            return false;
        }
    }
    return true;
}

} // namespace detail

/**
 * Desk-scale exactness check: on random 2x2 and 4x4 QPSK instances, the
 * unbounded Dijkstra search, the bounded one with L = |S|^t and QRD-MLD with
 * M = |S|^(t-1) must all return the direct ML vector with self-consistent
 * metrics. Dijkstra with L = 1 is run as well and reported, not judged.
 */
inline VerifyReport run_verification(const VerifyOptions& opt) {
    VerifyReport        report;
    const Constellation c = make_qam(4);
    for (std::size_t t : {std::size_t{2}, std::size_t{4}}) {
        VerifyCase vc;
        vc.name      = std::to_string(t) + "x" + std::to_string(t) + " " + c.name;
        vc.instances = opt.instances;
        std::mt19937_64 rng(opt.seed + t);
        const double    var = noise_variance(opt.snr_db, t, c.energy);

        std::uint64_t space = 1;
        for (std::size_t k = 0; k < t; ++k) {
            space *= c.size();
        }
        DetectorConfig bounded{.algorithm = Algorithm::DijkstraBounded, .L = space};
        DetectorConfig qrd{.algorithm = Algorithm::QrdMld, .M = space / c.size()};
        DetectorConfig greedy{.algorithm = Algorithm::DijkstraBounded, .L = 1};

        for (std::size_t n = 0; n < opt.instances; ++n) {
            const auto ch = draw_usable_channel(rng, t, t);
            const auto x  = draw_uniform(c, rng, t);
            const auto z  = draw_noise(rng, t, var);
            const auto y  = transmit(ch, x, z);
            const auto ml = detail::direct_ml(ch.h, y, c);

            OpCounters             rot;
            const DetectionProblem p(ch.r, rotate_received(ch.q, y, rot), c);

            std::vector<DetectionResult> exact;
            OpCounters                   c1, c2, c3, c4;
            exact.push_back(detect_dijkstra_unbounded(p, c1));
            exact.push_back(detect_dijkstra_bounded(p, bounded, c2));
            exact.push_back(detect_qrd_mld(p, qrd, c3));
            if (opt.corrupt_metric) {
                exact[1].metrics[0] *= 1.0 + 1e-6;
                exact[1].metrics[0] += 1e-6;
            }
            bool ok = true;
            for (const auto& r : exact) {
                ok = ok && r.indices.front() == ml && detail::metric_consistent(p, r);
            }
            vc.exact += ok ? 1 : 0;
            vc.heuristic_agree += detect_dijkstra_bounded(p, greedy, c4).indices.front() == ml ? 1 : 0;
        }
        report.cases.push_back(vc);
    }
    return report;
}

} // namespace treedetect
