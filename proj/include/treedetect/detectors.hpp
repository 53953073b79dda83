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

#include <treedetect/detection_tree.hpp>
#include <treedetect/errors.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

namespace treedetect {

enum class Algorithm { BruteForceML, QrdMld, QrdMldImproved, DijkstraBounded, DijkstraUnbounded };

/// Exhaustive search refuses instances with more than this many candidate vectors.
inline constexpr std::uint64_t kMaxEnumerable = std::uint64_t{1} << 24;

struct DetectorConfig {
    Algorithm   algorithm = Algorithm::DijkstraBounded;
    std::size_t M         = 16;   ///< QRD-MLD breadth
    double      X         = 2.0;  ///< threshold factor of the improved QRD-MLD
    std::size_t L         = 16;   ///< candidate list bound
    std::size_t N         = 1;    ///< number of most likely vectors to return
    double      noise_variance = 0.0; ///< phi^2, only read by the improved QRD-MLD
    bool        record_survivors = false;

    void validate() const {
        if (M < 1 || L < 1 || N < 1) {
            throw RangeError("DetectorConfig: M, L and N must be >= 1");
        }
        if (!(X >= 0.0)) {
            throw RangeError("DetectorConfig: X must be >= 0");
        }
        if (algorithm == Algorithm::QrdMldImproved && !(noise_variance > 0.0)) {
            throw RangeError("DetectorConfig: improved QRD-MLD needs noise_variance > 0");
        }
    }

    /// Short stable name, also used as the CSV detector column.
    std::string label() const {
        switch (algorithm) {
        case Algorithm::BruteForceML: return "ml";
        case Algorithm::QrdMld: return "qrd_M" + std::to_string(M);
        case Algorithm::QrdMldImproved: {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, X);
            return "qrd_improved_M" + std::to_string(M) + "_X" + std::string(buf, res.ptr);
        }
        case Algorithm::DijkstraBounded: return "dijkstra_L" + std::to_string(L);
        case Algorithm::DijkstraUnbounded: return "dijkstra_unbounded";
        }
        return "unknown";
    }
};

struct DetectionResult {
    std::vector<ComplexVector>             estimates; ///< best first
    std::vector<std::vector<std::uint8_t>> indices;   ///< symbol indices in antenna order
    std::vector<double>                    metrics;   ///< non-decreasing
    OpCounters                             counters;
    /// Per depth 1..t, the nodes kept after pruning (QRD-MLD family, when requested).
    std::vector<std::vector<SearchNode>> survivors;
};

namespace detail {

inline void emit(const DetectionProblem& p, const SearchNode& n, DetectionResult& out) {
    auto idx = n.antenna_indices(p.t());
    out.estimates.push_back(symbols_of(p.constellation(), idx));
    out.indices.push_back(std::move(idx));
    out.metrics.push_back(n.metric);
}

inline void require_enumerable(const DetectionProblem& p, const char* who) {
    if (p.search_space_size() > kMaxEnumerable) {
        throw InstanceTooLarge(std::string(who) + ": |S|^t exceeds 2^24");
    }
}

/// Depth-first enumeration of the whole tree, keeping the n best leaves.
class Exhaustive {
public:
    Exhaustive(const DetectionProblem& p, OpCounters& ctx, std::size_t n)
        : factory_(p, ctx), ctx_(ctx), n_(n), buffers_(p.t()) {}

    std::vector<SearchNode> run() {
        visit(factory_.root());
        return std::move(best_);
    }

private:
    void visit(const SearchNode& node) {
        auto& children = buffers_[node.depth];
        children.clear();
        factory_.expand(node, children);
        const bool leaves = node.depth + 1u == factory_.problem().t();
        // Recursion below reuses deeper buffers only, so iterating by index is safe.
        for (std::size_t c = 0; c < children.size(); ++c) {
            if (leaves) {
                offer(children[c]);
            } else {
                visit(buffers_[node.depth][c]);
            }
        }
    }

    void offer(const SearchNode& leaf) {
        if (best_.size() == n_) {
            ++ctx_.real_comparisons;
            if (!node_less(leaf, best_.back())) {
                return;
            }
            best_.pop_back();
        }
        auto pos = best_.end();
        while (pos != best_.begin()) {
            ++ctx_.real_comparisons;
            if (!node_less(leaf, *(pos - 1))) {
                break;
            }
            --pos;
        }
        best_.insert(pos, leaf);
    }

    NodeFactory                          factory_;
    OpCounters&                          ctx_;
    std::size_t                          n_;
    std::vector<std::vector<SearchNode>> buffers_;
    std::vector<SearchNode>              best_;
};

/// Shared breadth-first sweep of QRD-MLD and its threshold variant.
inline DetectionResult breadth_first(const DetectionProblem& p, const DetectorConfig& cfg, OpCounters& ctx,
                                     bool thresholded) {
    cfg.validate();
    const std::size_t t = p.t();
    NodeFactory       factory(p, ctx);
    DetectionResult   out;

    std::vector<SearchNode> population;
    std::vector<SearchNode> next;
    factory.expand(factory.root(), population);

    for (std::size_t depth = 1; depth <= t; ++depth) {
        if (thresholded) {
            double e_min = population.front().metric;
            for (std::size_t k = 1; k < population.size(); ++k) {
                ++ctx.real_comparisons;
                e_min = std::min(e_min, population[k].metric);
            }
            const double delta = e_min + cfg.X * cfg.noise_variance;
            std::erase_if(population, [&](const SearchNode& n) {
                ++ctx.real_comparisons;
                return !(n.metric <= delta);
            });
        }
        const bool bottom = depth == t;
        if (population.size() > cfg.M || bottom) {
            sort_nodes(population, ctx);
        }
        if (bottom) {
            if (population.size() < cfg.N) {
                throw SearchExhausted("QRD-MLD: fewer than N complete candidates survived");
            }
            for (std::size_t k = 0; k < cfg.N; ++k) {
                emit(p, population[k], out);
            }
        }
        if (population.size() > cfg.M) {
            population.resize(cfg.M);
        }
        if (cfg.record_survivors) {
            out.survivors.push_back(population);
        }
        if (!bottom) {
            next.clear();
            for (const auto& n : population) {
                factory.expand(n, next);
            }
            population.swap(next);
        }
    }
    out.counters = ctx;
    return out;
}

/// Best-first search over a list sorted after every expansion; bound == 0 means unbounded.
inline DetectionResult best_first(const DetectionProblem& p, std::size_t bound, std::size_t n_out, OpCounters& ctx) {
    const std::size_t t = p.t();
    NodeFactory       factory(p, ctx);
    DetectionResult   out;

    // The root counts as a detection node; its children enter the list as any other expansion's do.
    std::vector<SearchNode> list{factory.root()};
    while (out.estimates.size() < n_out) {
        if (list.empty()) {
            throw SearchExhausted("bounded Dijkstra: list emptied after " + std::to_string(out.estimates.size()) +
                                  " of " + std::to_string(n_out) + " outputs; increase L");
        }
        const SearchNode a = list.front(); // the list is sorted, so the minimum is in front
        list.erase(list.begin());
        if (a.depth == t) {
            emit(p, a, out);
            continue;
        }
        factory.expand(a, list);
        sort_nodes(list, ctx);
        if (bound != 0 && list.size() > bound) {
            list.resize(bound);
        }
    }
    out.counters = ctx;
    return out;
}

} // namespace detail

/**
 * Exhaustive ML search. Enumerates every leaf of the tree depth first;
 * ties go to the first leaf in enumeration order, i.e. lexicographic in the
 * symbol indices of antennas t-1, t-2, ..., 0.
 */
inline DetectionResult detect_bruteforce(const DetectionProblem& p, OpCounters& ctx, std::size_t n_out = 1) {
    detail::require_enumerable(p, "detect_bruteforce");
    if (n_out < 1) {
        throw RangeError("detect_bruteforce: N must be >= 1");
    }
    if (n_out > p.search_space_size()) {
        throw SearchExhausted("detect_bruteforce: N exceeds |S|^t");
    }
    detail::Exhaustive search(p, ctx, n_out);
    DetectionResult    out;
    for (const auto& leaf : search.run()) {
        detail::emit(p, leaf, out);
    }
    out.counters = ctx;
    return out;
}

/// QRD-MLD: keeps the M best nodes at every depth, chosen by quick sort.
inline DetectionResult detect_qrd_mld(const DetectionProblem& p, const DetectorConfig& cfg, OpCounters& ctx) {
    return detail::breadth_first(p, cfg, ctx, false);
}

/**
 * QRD-MLD with a per-depth threshold E_min + X * phi^2, where E_min is the
 * smallest metric among all children generated at that depth. Nodes above
 * the threshold are dropped before the M-best selection. The threshold is
 * applied at every depth including the last, and both the minimum search and
 * the threshold tests count as real comparisons.
 */
inline DetectionResult detect_qrd_mld_improved(const DetectionProblem& p, const DetectorConfig& cfg,
                                               OpCounters& ctx) {
    return detail::breadth_first(p, cfg, ctx, true);
}

/**
 * Dijkstra search whose candidate list keeps only the L nodes of smallest
 * metric. The list minimum is removed; a complete node is output, otherwise
 * its children are appended, the list is quick sorted and truncated to L.
 * Runs until N complete nodes have been output.
 */
inline DetectionResult detect_dijkstra_bounded(const DetectionProblem& p, const DetectorConfig& cfg,
                                               OpCounters& ctx) {
    cfg.validate();
    return detail::best_first(p, cfg.L, cfg.N, ctx);
}

/// Dijkstra search with an unlimited list. Returns the exact N best vectors.
inline DetectionResult detect_dijkstra_unbounded(const DetectionProblem& p, OpCounters& ctx, std::size_t n_out = 1) {
    detail::require_enumerable(p, "detect_dijkstra_unbounded");
    if (n_out < 1) {
        throw RangeError("detect_dijkstra_unbounded: N must be >= 1");
    }
    if (n_out > p.search_space_size()) {
        throw SearchExhausted("detect_dijkstra_unbounded: N exceeds |S|^t");
    }
    return detail::best_first(p, 0, n_out, ctx);
}

inline DetectionResult detect(const DetectionProblem& p, const DetectorConfig& cfg, OpCounters& ctx) {
    switch (cfg.algorithm) {
    case Algorithm::BruteForceML: cfg.validate(); return detect_bruteforce(p, ctx, cfg.N);
    case Algorithm::QrdMld: return detect_qrd_mld(p, cfg, ctx);
    case Algorithm::QrdMldImproved: return detect_qrd_mld_improved(p, cfg, ctx);
    case Algorithm::DijkstraBounded: return detect_dijkstra_bounded(p, cfg, ctx);
    case Algorithm::DijkstraUnbounded: cfg.validate(); return detect_dijkstra_unbounded(p, ctx, cfg.N);
    }
    throw RangeError("detect: unknown algorithm");
}

} // namespace treedetect
