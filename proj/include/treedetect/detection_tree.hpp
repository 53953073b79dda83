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

#include <treedetect/constellation.hpp>
#include <treedetect/errors.hpp>
#include <treedetect/linalg.hpp>

#include <array>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <iterator>
#include <utility>
#include <vector>

namespace treedetect {

inline constexpr std::size_t kMaxAntennas = 16;

/**
 * The reformulated ML objective: minimize ||xi - R x||^2 over x in S^t with
 * R upper triangular. Antenna t-1 is decided first (tree depth 1), antenna 0
 * last (depth t).
 */
class DetectionProblem {
public:
    DetectionProblem(ComplexMatrix r, ComplexVector xi, Constellation constellation)
        : r_(std::move(r)), xi_(std::move(xi)), constellation_(std::move(constellation)) {
        const std::size_t t = r_.cols();
        if (r_.rows() != t || xi_.size() != t) {
            throw DimensionMismatch("DetectionProblem: R must be t x t and xi length t");
        }
        if (t == 0 || t > kMaxAntennas) {
            throw RangeError("DetectionProblem: t must be in [1, " + std::to_string(kMaxAntennas) + "]");
        }
        if (constellation_.size() == 0 || constellation_.size() > 256) {
            throw RangeError("DetectionProblem: constellation size must be in [1, 256]");
        }
        for (std::size_t i = 1; i < t; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (r_(i, j) != Complex(0.0, 0.0)) {
                    throw RangeError("DetectionProblem: R is not upper triangular");
                }
            }
        }
    }

    std::size_t          t() const noexcept { return r_.cols(); }
    const ComplexMatrix& r() const noexcept { return r_; }
    const ComplexVector& xi() const noexcept { return xi_; }
    const Constellation& constellation() const noexcept { return constellation_; }

    /// |S|^t, saturating at 2^64-1.
    std::uint64_t search_space_size() const noexcept {
        std::uint64_t n = 1;
        for (std::size_t k = 0; k < t(); ++k) {
            if (n > UINT64_MAX / constellation_.size()) {
                return UINT64_MAX;
            }
            n *= constellation_.size();
        }
        return n;
    }

private:
    ComplexMatrix r_;
    ComplexVector xi_;
    Constellation constellation_;
};

/**
 * Partial decision. path[k] is the symbol index chosen for antenna t-1-k, for
 * k < depth. seq is the creation order inside one search and breaks metric ties.
 */
struct SearchNode {
    double                                  metric = 0.0;
    std::uint32_t                           seq    = 0;
    std::uint8_t                            depth  = 0;
    std::array<std::uint8_t, kMaxAntennas> path{};

    /// Symbol indices in antenna order; valid for complete (depth t) nodes.
    std::vector<std::uint8_t> antenna_indices(std::size_t t) const {
        std::vector<std::uint8_t> idx(t);
        for (std::size_t k = 0; k < depth; ++k) {
            idx[t - 1 - k] = path[k];
        }
        return idx;
    }
};

/// Strict total order used by every sort and min-selection: (metric, seq).
inline bool node_less(const SearchNode& a, const SearchNode& b) noexcept {
    return a.metric < b.metric || (a.metric == b.metric && a.seq < b.seq);
}

namespace detail {

/// Ancestor interference sum_{j>i} R(i,j) x_j for the row decided below `parent`.
inline Complex interference(const DetectionProblem& p, const SearchNode& parent, std::size_t row, OpCounters& ctx) {
    const std::size_t t   = p.t();
    const auto&       pts = p.constellation().points;
    Complex           s   = 0.0;
    for (std::size_t k = 0; k < parent.depth; ++k) {
        s += counted_mul(ctx, p.r()(row, t - 1 - k), pts[parent.path[k]]);
    }
    return s;
}

} // namespace detail

/**
 * Branch weight |xi_i - R(i,i) s - sum_{j>i} R(i,j) x_j|^2 for extending
 * `parent` with symbol index `candidate`. Costs parent.depth + 2 multiplies.
 */
inline double branch_metric(const DetectionProblem& p, const SearchNode& parent, std::size_t candidate,
                            OpCounters& ctx) {
    const std::size_t row = p.t() - 1 - parent.depth;
    const Complex     ic  = detail::interference(p, parent, row, ctx);
    const Complex     e   = p.xi()[row] - ic - counted_mul(ctx, p.r()(row, row), p.constellation().points[candidate]);
    return counted_norm(ctx, e);
}

/// Creates nodes for one search and numbers them in creation order.
class NodeFactory {
public:
    NodeFactory(const DetectionProblem& p, OpCounters& ctx) : p_(p), ctx_(ctx) {}

    SearchNode root() {
        SearchNode n;
        n.seq = next_seq_++;
        return n;
    }

    /**
     * Appends one child per constellation point to `out` and counts `node` as
     * a detection node. The interference term is shared by all children, so
     * the cost is depth + 2|S| multiplies.
     */
    void expand(const SearchNode& node, std::vector<SearchNode>& out) {
        const std::size_t row = p_.t() - 1 - node.depth;
        const Complex     r_ii = p_.r()(row, row);
        const Complex     base = p_.xi()[row] - detail::interference(p_, node, row, ctx_);
        const auto&       pts  = p_.constellation().points;

        ++ctx_.detection_nodes;
        for (std::size_t s = 0; s < pts.size(); ++s) {
            SearchNode child = node;
            child.depth      = static_cast<std::uint8_t>(node.depth + 1);
            child.path[node.depth] = static_cast<std::uint8_t>(s);
            child.seq              = next_seq_++;
            child.metric           = node.metric + counted_norm(ctx_, base - counted_mul(ctx_, r_ii, pts[s]));
            out.push_back(child);
        }
    }

    const DetectionProblem& problem() const noexcept { return p_; }
    OpCounters&             counters() noexcept { return ctx_; }

private:
    const DetectionProblem& p_;
    OpCounters&             ctx_;
    std::uint32_t           next_seq_ = 0;
};

/// Children of `node`, numbered from zero. Prefer NodeFactory inside a search.
inline std::vector<SearchNode> expand_node(const DetectionProblem& p, const SearchNode& node, OpCounters& ctx) {
    if (node.depth >= p.t()) {
        throw RangeError("expand_node: node is already complete");
    }
    NodeFactory f(p, ctx);
    std::vector<SearchNode> out;
    out.reserve(p.constellation().size());
    f.expand(node, out);
    return out;
}

/**
 * Quick sort with Hoare partitioning around the last element. Every call of
 * `less` adds one to `comparisons`. Recurses on the smaller part so stack
 * depth stays logarithmic. `less` must be a strict weak ordering.
 */
template <std::random_access_iterator It, class Less>
void counted_quick_sort(It first, It last, Less less, std::uint64_t& comparisons) {
    auto counted = [&](const auto& a, const auto& b) {
        ++comparisons;
        return less(a, b);
    };
    while (last - first > 1) {
        const auto pivot = *(last - 1);
        It         i     = first - 1;
        It         j     = last;
        for (;;) {
            do {
                ++i;
            } while (counted(*i, pivot));
            do {
                --j;
            } while (counted(pivot, *j));
            if (i >= j) {
                break;
            }
            std::iter_swap(i, j);
        }
        // [first, i) <= pivot <= [i, last), and first < i < last holds for a last-element pivot.
        if (i - first < last - i) {
            counted_quick_sort(first, i, less, comparisons);
            first = i;
        } else {
            counted_quick_sort(i, last, less, comparisons);
            last = i;
        }
    }
}

inline void sort_nodes(std::vector<SearchNode>& nodes, OpCounters& ctx) {
    counted_quick_sort(nodes.begin(), nodes.end(), node_less, ctx.real_comparisons);
}

/// Unmetered ||xi - R x||^2 for a full symbol-index vector in antenna order.
inline double objective(const DetectionProblem& p, std::span<const std::uint8_t> antenna_indices) {
    const std::size_t t   = p.t();
    const auto&       pts = p.constellation().points;
    double            sum = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
        Complex e = p.xi()[j];
        for (std::size_t i = j; i < t; ++i) {
            e -= p.r()(j, i) * pts[antenna_indices[i]];
        }
        sum += std::norm(e);
    }
    return sum;
}

/// FNV-1a over the bytes of R and xi; identifies the input a detector saw.
inline std::uint64_t digest(const DetectionProblem& p) noexcept {
    std::uint64_t h    = 1469598103934665603ull;
    auto          feed = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (const auto& v : p.r().data()) {
        feed(v.real());
        feed(v.imag());
    }
    for (const auto& v : p.xi()) {
        feed(v.real());
        feed(v.imag());
    }
    return h;
}

} // namespace treedetect
