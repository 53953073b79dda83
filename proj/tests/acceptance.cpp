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
// Acceptance suite. Each criterion prints one PASS/FAIL line; the exit
// status is non-zero if any criterion fails.

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace treedetect;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool        pass = false;
    std::string detail;
};

int         failures = 0;
std::string determinism_csv;

void criterion(const char* id, const char* title, const std::function<Verdict()>& body) {
    const auto start = Clock::now();
    Verdict    v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    while (v.detail.ends_with("; ")) {
        v.detail.resize(v.detail.size() - 2);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("[%s] %s %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
}

/// Standard error of the difference of two independent binomial proportions over n trials each.
double diff_stderr(double p, double q, double n) {
    return std::sqrt((p * (1 - p) + q * (1 - q)) / n);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Verdict exactness_oracle() {
    struct Case {
        std::size_t   t;
        std::uint32_t order;
    };
    constexpr std::size_t kInstances = 1000;
    std::mt19937_64       rng(1001);
    std::size_t           mismatches = 0, total = 0;
    std::string           detail;
    const auto            start = Clock::now();
    for (const Case cs : {Case{2, 4}, Case{3, 4}, Case{2, 16}}) {
        const auto    c     = make_qam(cs.order);
        std::uint64_t space = 1;
        for (std::size_t k = 0; k < cs.t; ++k) {
            space *= c.size();
        }
        const DetectorConfig bounded{.algorithm = Algorithm::DijkstraBounded, .L = space};
        const DetectorConfig qrd{.algorithm = Algorithm::QrdMld, .M = space / c.size()};
        std::size_t          bad = 0;
        for (std::size_t n = 0; n < kInstances; ++n) {
            const double snr  = std::array{0.0, 10.0, 20.0}[n % 3];
            const auto   inst = oracle::random_instance(rng, cs.t, cs.t, c, noise_variance(snr, cs.t, c.energy));
            const auto   ml   = oracle::direct_ml(inst.channel.h, inst.y, c);
            OpCounters   a, b, q;
            const bool   ok = detect_dijkstra_unbounded(inst.problem, a).indices.front() == ml &&
                            detect_dijkstra_bounded(inst.problem, bounded, b).indices.front() == ml &&
                            detect_qrd_mld(inst.problem, qrd, q).indices.front() == ml;
            bad += ok ? 0 : 1;
        }
        mismatches += bad;
        total += kInstances;
        detail += fmt("%zux%zu %s %zu/%zu; ", cs.t, cs.t, c.name.c_str(), kInstances - bad, kInstances);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    detail += fmt("%zu mismatches, runtime %.2f s (limit 30 s)", mismatches, secs);
    return {mismatches == 0 && secs < 30.0, detail};
}

Verdict reduction_identities() {
    const auto      c = make_qam(16);
    std::mt19937_64 rng(2002);
    std::size_t     survivor_mismatch = 0;
    for (int n = 0; n < 100; ++n) {
        const double var  = noise_variance(std::array{10.0, 15.0, 20.0, 25.0}[n % 4], 4, c.energy);
        const auto   inst = oracle::random_instance(rng, 4, 4, c, var);
        DetectorConfig plain{.algorithm = Algorithm::QrdMld, .M = 16, .record_survivors = true};
        DetectorConfig thr{.algorithm        = Algorithm::QrdMldImproved,
                           .M                = 16,
                           .X                = 1e18,
                           .noise_variance   = var,
                           .record_survivors = true};
        OpCounters a, b;
        const auto ra = detect_qrd_mld(inst.problem, plain, a);
        const auto rb = detect_qrd_mld_improved(inst.problem, thr, b);
        bool       same = ra.indices == rb.indices && ra.survivors.size() == rb.survivors.size();
        for (std::size_t d = 0; same && d < ra.survivors.size(); ++d) {
            same = ra.survivors[d].size() == rb.survivors[d].size();
            for (std::size_t i = 0; same && i < ra.survivors[d].size(); ++i) {
                same = ra.survivors[d][i].path == rb.survivors[d][i].path &&
                       ra.survivors[d][i].metric == rb.survivors[d][i].metric;
            }
        }
        survivor_mismatch += same ? 0 : 1;
    }
    std::size_t greedy_mismatch = 0;
    for (int n = 0; n < 1000; ++n) {
        const double var  = noise_variance(std::array{5.0, 15.0, 25.0}[n % 3], 4, c.energy);
        const auto   inst = oracle::random_instance(rng, 4, 4, c, var);
        OpCounters   ctx;
        const DetectorConfig one{.algorithm = Algorithm::DijkstraBounded, .L = 1};
        greedy_mismatch +=
            detect_dijkstra_bounded(inst.problem, one, ctx).indices.front() == oracle::greedy_decision_feedback(inst.problem)
                ? 0
                : 1;
    }
    return {survivor_mismatch == 0 && greedy_mismatch == 0,
            fmt("X=1e18 vs QRD-MLD survivor mismatches %zu/100; L=1 vs decision feedback mismatches %zu/1000",
                survivor_mismatch, greedy_mismatch)};
}

Verdict qrd_structure() {
    std::string detail;
    bool        pass = true;
    for (auto [t, expected, signals] : {std::tuple{4u, 49u, 3000u}, std::tuple{6u, 81u, 1500u}}) {
        ExperimentConfig cfg;
        cfg.t             = t;
        cfg.r             = t;
        cfg.snr_db        = {10, 20, 30};
        cfg.signals_total = signals;
        cfg.seed          = 3003;
        cfg.detectors     = {{.algorithm = Algorithm::QrdMld, .M = 16}};
        std::size_t trials = 0, off = 0;
        run_sweep(cfg, [&](std::size_t, std::size_t, std::size_t, const TrialOutcome& o) {
            ++trials;
            off += o.counters.detection_nodes == expected ? 0 : 1;
        });
        pass = pass && off == 0 && trials == 3u * signals;
        detail += fmt("t=%u: %zu/%zu trials with exactly %u nodes; ", t, trials - off, trials, expected);
    }
    return {pass, detail};
}

/// The shared 4x4 16-QAM run behind the SER and complexity criteria.
struct ReferenceRun {
    SweepResult result;
    std::string csv;
};

const ReferenceRun& reference_run() {
    static const ReferenceRun run = [] {
        ExperimentConfig cfg;
        cfg.t             = 4;
        cfg.r             = 4;
        cfg.qam_order     = 16;
        cfg.snr_db        = {15, 20, 25};
        cfg.signals_total = 10000;
        cfg.fading_block  = 100;
        cfg.seed          = 4004;
        cfg.workers       = 0;
        cfg.detectors     = {{.algorithm = Algorithm::BruteForceML},
                             {.algorithm = Algorithm::QrdMld, .M = 16},
                             {.algorithm = Algorithm::QrdMldImproved, .M = 16, .X = 2},
                             {.algorithm = Algorithm::DijkstraBounded, .L = 16},
                             {.algorithm = Algorithm::DijkstraBounded, .L = 5}};
        auto result = run_sweep(cfg);
        auto csv    = to_csv(result);
        return ReferenceRun{std::move(result), std::move(csv)};
    }();
    return run;
}

Verdict ser_equivalence() {
    const auto& res  = reference_run().result;
    bool        pass = true;
    std::string detail;
    for (double snr : {15.0, 20.0, 25.0}) {
        const auto*  ml  = res.find("ml", snr);
        const auto*  l16 = res.find("dijkstra_L16", snr);
        const double n   = static_cast<double>(ml->trials * res.t);
        const double se  = diff_stderr(ml->ser, l16->ser, n);
        const bool   ok  = std::abs(ml->ser - l16->ser) <= 3 * se;
        pass             = pass && ok;
        detail += fmt("%g dB: ML %.5f vs L16 %.5f (3se %.5f)%s; ", snr, ml->ser, l16->ser, 3 * se, ok ? "" : " X");
    }
    return {pass, detail};
}

Verdict complexity_ordering() {
    const auto& res  = reference_run().result;
    bool        pass = true;
    std::string detail;
    for (double snr : {15.0, 20.0, 25.0}) {
        const auto* q  = res.find("qrd_M16", snr);
        const auto* d  = res.find("dijkstra_L16", snr);
        const bool  ok = d->muldiv.avg < q->muldiv.avg && d->nodes.avg < q->nodes.avg && d->cmps.avg < q->cmps.avg;
        pass           = pass && ok;
        detail += fmt("%g dB: muldiv %.1f<%.1f nodes %.2f<%.2f cmps %.1f<%.1f%s; ", snr, d->muldiv.avg,
                      q->muldiv.avg, d->nodes.avg, q->nodes.avg, d->cmps.avg, q->cmps.avg, ok ? "" : " X");
    }
    return {pass, detail};
}

Verdict threshold_variant_ordering() {
    const auto& res    = reference_run().result;
    const auto* l5_lo  = res.find("dijkstra_L5", 15.0);
    const auto* imp_lo = res.find("qrd_improved_M16_X2", 15.0);
    const bool  nodes_ok = l5_lo->nodes.avg <= imp_lo->nodes.avg * 1.01;

    const auto*  l5_hi  = res.find("dijkstra_L5", 25.0);
    const auto*  imp_hi = res.find("qrd_improved_M16_X2", 25.0);
    const double se     = diff_stderr(l5_hi->ser, imp_hi->ser, static_cast<double>(l5_hi->trials * res.t));
    const bool   ser_ok = l5_hi->ser <= imp_hi->ser + 3 * se;
    return {nodes_ok && ser_ok,
            fmt("15 dB nodes L5 %.3f vs improved %.3f (limit x1.01); 25 dB SER L5 %.6f vs improved %.6f + 3se %.6f",
                l5_lo->nodes.avg, imp_lo->nodes.avg, l5_hi->ser, imp_hi->ser, 3 * se)};
}

Verdict noise_calibration() {
    const bool      exact = noise_variance(0.0, 4, 10.0) == 40.0;
    const auto      c     = make_qam(16);
    std::mt19937_64 rng(7007);
    bool            pass = exact;
    std::string     detail = fmt("noise_variance(0 dB, 4, 10) = %g; ", noise_variance(0.0, 4, 10.0));
    for (double snr : {0.0, 10.0, 20.0}) {
        const double var = noise_variance(snr, 4, c.energy);
        double       ps = 0, pn = 0;
        for (int s = 0; s < 25000; ++s) { // 25000 signals x 4 receive antennas = 1e5 symbols
            const auto ch = draw_channel(rng, 4, 4);
            const auto hx = multiply(ch.h, draw_uniform(c, rng, 4));
            const auto z  = draw_noise(rng, 4, var);
            for (std::size_t i = 0; i < 4; ++i) {
                ps += std::norm(hx[i]);
                pn += std::norm(z[i]);
            }
        }
        const double measured = 10 * std::log10(ps / pn);
        const bool   ok       = std::abs(measured - snr) <= 0.1;
        pass                  = pass && ok;
        detail += fmt("%g dB measured %.4f dB%s; ", snr, measured, ok ? "" : " X");
    }
    return {pass, detail};
}

Verdict determinism() {
    ExperimentConfig cfg = parse_config("snr = 10, 15, 20, 25, 30\nsignals = 600\nseed = 8008\n");
    cfg.workers          = 1;
    const auto serial    = to_csv(run_sweep(cfg));
    const auto again     = to_csv(run_sweep(cfg));
    cfg.workers          = 3;
    const auto parallel  = to_csv(run_sweep(cfg));
    const bool pass      = serial == again && serial == parallel;
    determinism_csv      = serial;
    return {pass, fmt("%zu-byte CSV; repeat %s, 1 vs 3 workers %s", serial.size(), serial == again ? "identical" : "DIFFERS",
                      serial == parallel ? "identical" : "DIFFERS")};
}

Verdict metric_consistency() {
    const auto      c = make_qam(16);
    std::mt19937_64 rng(9009);
    std::size_t     checked = 0, bad = 0;
    double          worst   = 0;
    std::size_t     n       = 0;
    while (checked < 10000) {
        const double snr  = std::array{5.0, 15.0, 25.0}[n++ % 3];
        const double var  = noise_variance(snr, 4, c.energy);
        const auto   inst = oracle::random_instance(rng, 4, 4, c, var);
        for (const DetectorConfig& cfg :
             {DetectorConfig{.algorithm = Algorithm::QrdMld, .M = 16, .N = 2},
              DetectorConfig{.algorithm = Algorithm::QrdMldImproved, .M = 16, .X = 2, .noise_variance = var},
              DetectorConfig{.algorithm = Algorithm::DijkstraBounded, .L = 16, .N = 4},
              DetectorConfig{.algorithm = Algorithm::DijkstraBounded, .L = 5}}) {
            OpCounters ctx;
            const auto res = detect(inst.problem, cfg, ctx);
            for (std::size_t k = 0; k < res.indices.size(); ++k) {
                const double ref = oracle::triangular_objective(inst.problem, res.indices[k]);
                const double rel = std::abs(ref - res.metrics[k]) / std::max(ref, 1e-300);
                worst            = std::max(worst, rel);
                bad += rel <= 1e-9 ? 0 : 1;
                ++checked;
            }
        }
    }
    std::size_t rows = 0, violations = 0;
    for (const std::string* csv : {&reference_run().csv, static_cast<const std::string*>(&determinism_csv)}) {
        for (const auto& row : parse_csv(*csv)) {
            ++rows;
            violations += (static_cast<double>(row.muldiv.max) >= row.muldiv.avg &&
                           static_cast<double>(row.nodes.max) >= row.nodes.avg &&
                           static_cast<double>(row.cmps.max) >= row.cmps.avg)
                              ? 0
                              : 1;
        }
    }
    return {bad == 0 && violations == 0 && rows > 0,
            fmt("%zu estimates rescored, %zu beyond 1e-9 (worst rel %.2e); %zu CSV rows, %zu with max < avg", checked,
                bad, worst, rows, violations)};
}

} // namespace

int main() {
    criterion("C1", "exactness oracle", exactness_oracle);
    criterion("C2", "reduction identities", reduction_identities);
    criterion("C3", "deterministic QRD-MLD structure", qrd_structure);
    criterion("C4", "SER of L=16 matches ML", ser_equivalence);
    criterion("C5", "L=16 cheaper than QRD-MLD M=16", complexity_ordering);
    criterion("C6", "L=5 vs improved QRD-MLD", threshold_variant_ordering);
    criterion("C7", "noise calibration", noise_calibration);
    criterion("C8", "determinism", determinism);
    criterion("C9", "metric consistency", metric_consistency);
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
