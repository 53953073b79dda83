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
#include <treedetect/linalg.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace treedetect {

/// Finite symbol alphabet. The index of a point is its Gray bit label.
struct Constellation {
    std::vector<Complex> points;
    double               energy = 0.0; ///< E_s, mean of |s|^2 over points
    std::string          name;

    std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

/// Gray-labelled PAM level on {-(m-1), ..., -1, 1, ..., m-1}.
inline double gray_pam_level(std::uint32_t label, std::uint32_t m) {
    std::uint32_t rank = label; // inverse Gray: position of this label along the axis
    for (std::uint32_t shift = label >> 1; shift != 0; shift >>= 1) {
        rank ^= shift;
    }
    return 2.0 * static_cast<double>(rank) - static_cast<double>(m - 1);
}

} // namespace detail

/**
 * Square QAM on the odd-integer grid, unnormalized, Gray labelled per axis.
 * The high half of the label selects the in-phase level.
 */
inline Constellation make_qam(std::uint32_t order) {
    if (order != 4 && order != 16 && order != 64) {
        throw UnsupportedOrder("make_qam: order must be 4, 16 or 64, got " + std::to_string(order));
    }
    std::uint32_t bits_per_axis = 0;
    while ((1u << (2 * bits_per_axis)) < order) {
        ++bits_per_axis;
    }
    const std::uint32_t m    = 1u << bits_per_axis;
    const std::uint32_t mask = m - 1;

    Constellation c;
    c.name = std::to_string(order) + "-QAM";
    c.points.reserve(order);
    double sum = 0.0;
    for (std::uint32_t label = 0; label < order; ++label) {
        const Complex s(detail::gray_pam_level(label >> bits_per_axis, m), detail::gray_pam_level(label & mask, m));
        sum += std::norm(s);
        c.points.push_back(s);
    }
    c.energy = sum / static_cast<double>(order);
    return c;
}

/// t i.i.d. uniform symbol indices.
template <class Urbg>
std::vector<std::uint8_t> draw_indices(const Constellation& c, Urbg& rng, std::size_t t) {
    std::uniform_int_distribution<unsigned> pick(0, static_cast<unsigned>(c.size() - 1));
    std::vector<std::uint8_t> idx(t);
    for (auto& i : idx) {
        i = static_cast<std::uint8_t>(pick(rng));
    }
    return idx;
}

inline ComplexVector symbols_of(const Constellation& c, std::span<const std::uint8_t> idx) {
    ComplexVector x(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        x[i] = c.points[idx[i]];
    }
    return x;
}

template <class Urbg>
ComplexVector draw_uniform(const Constellation& c, Urbg& rng, std::size_t t) {
    const auto idx = draw_indices(c, rng, t);
    return symbols_of(c, idx);
}

} // namespace treedetect
