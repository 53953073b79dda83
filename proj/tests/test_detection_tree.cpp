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
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace treedetect;

namespace {

Constellation custom(std::vector<Complex> pts) {
    double e = 0;
    for (auto p : pts) {
        e += std::norm(p);
    }
    return {pts, e / static_cast<double>(pts.size()), "custom"};
}

SearchNode node_with(std::uint8_t depth, std::initializer_list<std::uint8_t> path) {
    SearchNode n;
    n.depth = depth;
    std::copy(path.begin(), path.end(), n.path.begin());
    return n;
}

} // namespace

TEST(DetectionProblem, ValidatesShape) {
    const auto c = make_qam(4);
    EXPECT_THROW(DetectionProblem(ComplexMatrix(2, 3), ComplexVector(3), c), DimensionMismatch);
    EXPECT_THROW(DetectionProblem(ComplexMatrix::identity(2), ComplexVector(3), c), DimensionMismatch);
    ComplexMatrix lower = ComplexMatrix::identity(2);
    lower(1, 0)         = 0.5;
    EXPECT_THROW(DetectionProblem(lower, ComplexVector(2), c), RangeError);
    EXPECT_THROW(DetectionProblem(ComplexMatrix::identity(17), ComplexVector(17), c), RangeError);
    EXPECT_EQ(DetectionProblem(ComplexMatrix::identity(4), ComplexVector(4), make_qam(16)).search_space_size(), 65536u);
}

TEST(BranchMetric, ScalarNoAncestors) {
    const DetectionProblem p(ComplexMatrix::identity(1), {Complex(2, 0)}, custom({{1, 0}, {-1, 0}}));
    OpCounters ctx;
    EXPECT_EQ(branch_metric(p, SearchNode{}, 0, ctx), 1.0);
    EXPECT_EQ(ctx.complex_mul_div, 2u); // R_ii * x and |.|^2
}

TEST(BranchMetric, WithOneAncestor) {
    ComplexMatrix r(2, 2, {Complex(1), Complex(2), Complex(0), Complex(1)});
    const DetectionProblem p(r, {Complex(5), Complex(0)}, custom({{1, 0}, {2, 0}}));
    OpCounters ctx;
    // parent fixed x_1 = 2 (index 1); candidate x_0 = 1: |5 - 1 - 2*2|^2 = 0
    EXPECT_EQ(branch_metric(p, node_with(1, {1}), 0, ctx), 0.0);
    EXPECT_EQ(ctx.complex_mul_div, 3u); // one ancestor term + 2
}

TEST(BranchMetric, ZeroNoiseCorrectPathIsZero) {
    std::mt19937_64 rng(4);
    const auto      c = make_qam(16);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = oracle::random_instance(rng, 4, 4, c, 0.0);
        SearchNode node;
        OpCounters ctx;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto sym = inst.x[3 - k];
            EXPECT_NEAR(branch_metric(inst.problem, node, sym, ctx), 0.0, 1e-20);
            node.path[node.depth++] = sym;
        }
    }
}

TEST(ExpandNode, RootOf16Qam) {
    std::mt19937_64 rng(8);
    const auto      inst = oracle::random_instance(rng, 4, 4, make_qam(16), 1.0);
    OpCounters      ctx;
    const auto      kids = expand_node(inst.problem, SearchNode{}, ctx);
    ASSERT_EQ(kids.size(), 16u);
    EXPECT_EQ(ctx.detection_nodes, 1u);
    EXPECT_EQ(ctx.complex_mul_div, 32u);
    for (std::size_t s = 0; s < kids.size(); ++s) {
        EXPECT_EQ(kids[s].depth, 1);
        EXPECT_EQ(kids[s].path[0], s);
        EXPECT_GE(kids[s].metric, 0.0);
    }
}

TEST(ExpandNode, CostAndMonotoneMetrics) {
    std::mt19937_64 rng(12);
    const auto      inst = oracle::random_instance(rng, 4, 4, make_qam(16), 2.0);
    OpCounters      scratch;
    SearchNode      node = expand_node(inst.problem, SearchNode{}, scratch)[5];
    for (std::uint8_t depth = 1; depth < 4; ++depth) {
        OpCounters ctx;
        const auto kids = expand_node(inst.problem, node, ctx);
        EXPECT_EQ(ctx.complex_mul_div, depth + 2u * 16u);
        EXPECT_EQ(ctx.detection_nodes, 1u);
        for (const auto& k : kids) {
            EXPECT_GE(k.metric, node.metric);
            OpCounters bm;
            EXPECT_NEAR(k.metric - node.metric, branch_metric(inst.problem, node, k.path[depth], bm), 1e-12);
        }
        node = kids[depth % 16];
    }
    EXPECT_THROW(expand_node(inst.problem, node, scratch), RangeError);
}

// Zero noise: among the children of a node on the transmitted path exactly one has metric 0.
TEST(ExpandNode, ZeroNoiseSingleZeroChild) {
    std::mt19937_64 rng(13);
    const auto      c = make_qam(16);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = oracle::random_instance(rng, 3, 3, c, 0.0);
        SearchNode node;
        for (std::size_t k = 0; k < 3; ++k) {
            OpCounters ctx;
            const auto kids  = expand_node(inst.problem, node, ctx);
            int        zeros = 0;
            for (const auto& ch : kids) {
                zeros += ch.metric < 1e-18 ? 1 : 0;
            }
            EXPECT_EQ(zeros, 1);
            node = kids[inst.x[2 - k]];
        }
    }
}

TEST(CountedQuickSort, HandTracedComparisonCounts) {
    auto count = [](std::vector<int> v) {
        std::uint64_t cmps = 0;
        counted_quick_sort(v.begin(), v.end(), std::less<>{}, cmps);
        EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
        return cmps;
    };
    EXPECT_EQ(count({}), 0u);
    EXPECT_EQ(count({7}), 0u);
    EXPECT_EQ(count({2, 1}), 4u);
    EXPECT_EQ(count({1, 2}), 3u);
    EXPECT_EQ(count({3, 1, 2}), 9u);
}

TEST(CountedQuickSort, SortsLikeStdSort) {
    std::mt19937_64                    rng(99);
    std::uniform_int_distribution<int> len(0, 300), val(0, 20);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> v(len(rng));
        for (auto& x : v) {
            x = val(rng); // many duplicates
        }
        auto          ref  = v;
        std::uint64_t cmps = 0;
        counted_quick_sort(v.begin(), v.end(), std::less<>{}, cmps);
        std::sort(ref.begin(), ref.end());
        ASSERT_EQ(v, ref);
    }
}

TEST(CountedQuickSort, NodesOrderedByMetricThenSeq) {
    std::mt19937_64                    rng(5);
    std::uniform_int_distribution<int> val(0, 5);
    std::vector<SearchNode>            nodes(200);
    for (std::uint32_t k = 0; k < nodes.size(); ++k) {
        nodes[k].metric = val(rng);
        nodes[k].seq    = k;
    }
    std::shuffle(nodes.begin(), nodes.end(), rng);
    OpCounters ctx;
    sort_nodes(nodes, ctx);
    EXPECT_GT(ctx.real_comparisons, 0u);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        ASSERT_TRUE(node_less(nodes[k - 1], nodes[k]));
    }
}

TEST(Digest, DistinguishesInputs) {
    const auto       c = make_qam(4);
    DetectionProblem a(ComplexMatrix::identity(2), {Complex(1, 0), Complex(0, 0)}, c);
    DetectionProblem b(ComplexMatrix::identity(2), {Complex(1, 0), Complex(0, 1e-300)}, c);
    EXPECT_EQ(digest(a), digest(a));
    EXPECT_NE(digest(a), digest(b));
}
