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
#include <treedetect/errors.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace treedetect {

struct ExperimentConfig {
    std::size_t                 t              = 4;
    std::size_t                 r              = 4;
    std::uint32_t               qam_order      = 16;
    std::vector<double>         snr_db         = {10, 15, 20, 25, 30};
    std::size_t                 signals_total  = 100000;
    std::size_t                 fading_block   = 100;
    std::vector<DetectorConfig> detectors;
    std::uint64_t               seed    = 1;
    std::size_t                 workers = 1; ///< 0 selects hardware concurrency; never changes results

    void validate() const {
        if (t < 1 || t > kMaxAntennas) {
            throw RangeError("t must be in [1, " + std::to_string(kMaxAntennas) + "]");
        }
        if (r < t) {
            throw RangeError("r must be >= t (got r=" + std::to_string(r) + ", t=" + std::to_string(t) + ")");
        }
        if (qam_order != 4 && qam_order != 16 && qam_order != 64) {
            throw RangeError("qam must be 4, 16 or 64");
        }
        if (snr_db.empty()) {
            throw RangeError("snr grid must not be empty");
        }
        for (double s : snr_db) {
            if (!std::isfinite(s)) {
                throw RangeError("snr values must be finite");
            }
        }
        if (signals_total < 1) {
            throw RangeError("signals must be >= 1");
        }
        if (fading_block < 1) {
            throw RangeError("fading_block must be >= 1");
        }
        if (detectors.empty()) {
            throw RangeError("at least one detector is required");
        }
        const std::uint64_t space = [&] {
            std::uint64_t n = 1;
            for (std::size_t k = 0; k < t && n <= kMaxEnumerable; ++k) {
                n *= qam_order;
            }
            return n;
        }();
        for (std::size_t i = 0; i < detectors.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (detectors[i].label() == detectors[j].label()) {
                    throw RangeError("duplicate detector " + detectors[i].label());
                }
            }
        }
        for (const auto& d : detectors) {
            DetectorConfig probe = d;
            probe.noise_variance = 1.0;
            probe.validate();
            const bool exhaustive =
                d.algorithm == Algorithm::BruteForceML || d.algorithm == Algorithm::DijkstraUnbounded;
            if (exhaustive && space > kMaxEnumerable) {
                throw RangeError(d.label() + " needs |S|^t <= 2^24");
            }
        }
    }
};

/// Running sum and maximum of one counter.
struct CounterStats {
    std::uint64_t n   = 0;
    std::uint64_t sum = 0;
    std::uint64_t max = 0;

    void add(std::uint64_t v) noexcept {
        ++n;
        sum += v;
        max = std::max(max, v);
    }
    void merge(const CounterStats& o) noexcept {
        n += o.n;
        sum += o.sum;
        max = std::max(max, o.max);
    }
    double mean() const noexcept { return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n); }
};

struct Summary {
    double        avg = 0.0;
    std::uint64_t max = 0;
};

inline Summary aggregate_stats(std::span<const std::uint64_t> values) {
    if (values.empty()) {
        throw EmptyInput("aggregate_stats: empty input");
    }
    CounterStats s;
    for (auto v : values) {
        s.add(v);
    }
    return {s.mean(), s.max};
}

struct TrialOutcome {
    std::vector<std::uint8_t> estimate; ///< best estimate, symbol indices in antenna order
    OpCounters                counters;
    std::size_t               symbol_errors = 0;
    std::uint64_t             input_digest  = 0;
};

/**
 * One received signal through every detector. All detectors see the same
 * (R, xi); xi = Q^H y is metered once and its cost is charged to each
 * detector. Symbol errors are counted per antenna position.
 */
inline std::vector<TrialOutcome> run_trial(const ChannelInstance& ch, const Constellation& c,
                                           std::span<const std::uint8_t> x_idx, std::span<const Complex> z,
                                           std::span<const DetectorConfig> detectors, double noise_var) {
    if (x_idx.size() != ch.h.cols()) {
        throw DimensionMismatch("run_trial: x length does not match transmit antennas");
    }
    const auto x = symbols_of(c, x_idx);
    const auto y = transmit(ch, x, z);

    OpCounters rotation;
    auto       xi = rotate_received(ch.q, y, rotation);
    const DetectionProblem problem(ch.r, std::move(xi), c);

    std::vector<TrialOutcome> out;
    out.reserve(detectors.size());
    for (const auto& d : detectors) {
        DetectorConfig cfg = d;
        cfg.noise_variance = noise_var;
        OpCounters ctx     = rotation;
        auto       res     = detect(problem, cfg, ctx);

        TrialOutcome o;
        o.estimate     = std::move(res.indices.front());
        o.counters     = res.counters;
        o.input_digest = digest(problem);
        for (std::size_t k = 0; k < x_idx.size(); ++k) {
            o.symbol_errors += o.estimate[k] != x_idx[k] ? 1 : 0;
        }
        out.push_back(std::move(o));
    }
    return out;
}

struct SweepPoint {
    std::string   detector;
    double        snr_db        = 0.0;
    std::uint64_t trials        = 0;
    std::uint64_t symbol_errors = 0;
    double        ser           = 0.0;
    double        ser_stderr    = 0.0;
    Summary       muldiv;
    Summary       nodes;
    Summary       cmps;
};

/// Rows ordered detector-major (configuration order), then by SNR grid order.
struct SweepResult {
    std::size_t             t = 0;
    std::vector<SweepPoint> rows;

    const SweepPoint* find(const std::string& detector, double snr_db) const {
        for (const auto& p : rows) {
            if (p.detector == detector && p.snr_db == snr_db) {
                return &p;
            }
        }
        return nullptr;
    }
};

/// Called once per (signal, snr, detector). Must be thread-safe when workers > 1.
using TrialObserver =
    std::function<void(std::size_t signal, std::size_t snr_index, std::size_t detector, const TrialOutcome&)>;

namespace detail {

struct PointAccumulator {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    CounterStats  muldiv, nodes, cmps;

    void add(const TrialOutcome& o) {
        ++trials;
        errors += o.symbol_errors;
        muldiv.add(o.counters.complex_mul_div);
        nodes.add(o.counters.detection_nodes);
        cmps.add(o.counters.real_comparisons);
    }
    void merge(const PointAccumulator& o) {
        trials += o.trials;
        errors += o.errors;
        muldiv.merge(o.muldiv);
        nodes.merge(o.nodes);
        cmps.merge(o.cmps);
    }
};

/// Independent, reproducible stream per fading block.
inline std::mt19937_64 block_stream(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

} // namespace detail

/**
 * Monte Carlo sweep. Signals are grouped into fading blocks; each block owns
 * a random stream seeded from (seed, block index), so results do not depend
 * on the worker count and a longer run extends a shorter one. Every SNR point
 * reuses the same channels, symbols and unit-variance noise, scaled to phi^2.
 */
inline SweepResult run_sweep(const ExperimentConfig& cfg, const TrialObserver& observer = {}) {
    cfg.validate();
    const Constellation c        = make_qam(cfg.qam_order);
    const std::size_t   n_snr    = cfg.snr_db.size();
    const std::size_t   n_det    = cfg.detectors.size();
    const std::size_t   n_blocks = (cfg.signals_total + cfg.fading_block - 1) / cfg.fading_block;

    std::vector<double> sigma(n_snr);
    for (std::size_t k = 0; k < n_snr; ++k) {
        sigma[k] = std::sqrt(noise_variance(cfg.snr_db[k], cfg.t, c.energy));
    }

    using BlockStats = std::vector<detail::PointAccumulator>; // [snr * n_det + det]
    std::vector<BlockStats> per_block(n_blocks, BlockStats(n_snr * n_det));

    auto run_block = [&](std::size_t b) {
        auto              rng   = detail::block_stream(cfg.seed, b);
        const auto        ch    = draw_usable_channel(rng, cfg.t, cfg.r, cfg.fading_block);
        const std::size_t first = b * cfg.fading_block;
        const std::size_t last  = std::min(cfg.signals_total, first + cfg.fading_block);
        auto&             stats = per_block[b];
        for (std::size_t s = first; s < last; ++s) {
            const auto x  = draw_indices(c, rng, cfg.t);
            const auto z0 = draw_noise(rng, cfg.r, 1.0);
            ComplexVector z(cfg.r);
            for (std::size_t k = 0; k < n_snr; ++k) {
                for (std::size_t i = 0; i < cfg.r; ++i) {
                    z[i] = sigma[k] * z0[i];
                }
                const double var      = sigma[k] * sigma[k];
                const auto   outcomes = run_trial(ch, c, x, z, cfg.detectors, var);
                for (std::size_t d = 0; d < n_det; ++d) {
                    stats[k * n_det + d].add(outcomes[d]);
                    if (observer) {
                        observer(s, k, d, outcomes[d]);
                    }
                }
            }
        }
    };

    std::size_t workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
    workers             = std::min(workers, n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            run_block(b);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr       failure;
        std::mutex               failure_mu;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    try {
                        for (std::size_t b = next++; b < n_blocks; b = next++) {
                            run_block(b);
                        }
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                        next = n_blocks;
                    }
                });
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    SweepResult result;
    result.t = cfg.t;
    for (std::size_t d = 0; d < n_det; ++d) {
        for (std::size_t k = 0; k < n_snr; ++k) {
            detail::PointAccumulator acc;
            for (const auto& blk : per_block) {
                acc.merge(blk[k * n_det + d]);
            }
            SweepPoint p;
            p.detector        = cfg.detectors[d].label();
            p.snr_db          = cfg.snr_db[k];
            p.trials          = acc.trials;
            p.symbol_errors   = acc.errors;
            const double syms = static_cast<double>(acc.trials * cfg.t);
            p.ser             = static_cast<double>(acc.errors) / syms;
            p.ser_stderr      = std::sqrt(p.ser * (1.0 - p.ser) / syms);
            p.muldiv          = {acc.muldiv.mean(), acc.muldiv.max};
            p.nodes           = {acc.nodes.mean(), acc.nodes.max};
            p.cmps            = {acc.cmps.mean(), acc.cmps.max};
            result.rows.push_back(std::move(p));
        }
    }
    return result;
}

} // namespace treedetect
