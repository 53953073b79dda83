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

#include <cmath>
#include <random>

namespace treedetect {

/// Block-fading channel draw with its (unmetered) QR factors.
struct ChannelInstance {
    ComplexMatrix h; ///< r x t
    ComplexMatrix q; ///< r x t
    ComplexMatrix r; ///< t x t
    std::size_t   block_remaining = 0;
};

/// Noise variance phi^2 = t * Es * 10^(-snr/10), per complex receive entry.
inline double noise_variance(double snr_db, std::size_t t, double es) {
    if (!(es > 0.0) || t == 0) {
        throw RangeError("noise_variance: need Es > 0 and t >= 1");
    }
    return static_cast<double>(t) * es * std::pow(10.0, -snr_db / 10.0);
}

struct NoiseModel {
    double      snr_db   = 0.0;
    std::size_t t        = 1;
    double      es       = 1.0;
    double      variance = 0.0;

    static NoiseModel at(double snr_db, std::size_t t, double es) {
        return {snr_db, t, es, noise_variance(snr_db, t, es)};
    }
};

/// Circularly-symmetric complex Gaussian entries with E|z|^2 = variance.
template <class Urbg>
ComplexVector draw_noise(Urbg& rng, std::size_t r, double variance) {
    if (!(variance > 0.0)) {
        throw RangeError("draw_noise: variance must be positive");
    }
    std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
    ComplexVector z(r);
    for (auto& v : z) {
        const double re = g(rng);
        const double im = g(rng);
        v               = {re, im};
    }
    return z;
}

/**
 * r x t matrix of i.i.d. CN(0,1) entries, factored once. A rank-deficient
 * draw surfaces as RankDeficient; callers redraw.
 */
template <class Urbg>
ChannelInstance draw_channel(Urbg& rng, std::size_t t, std::size_t r, std::size_t block_len = 0) {
    if (t == 0 || r < t) {
        throw RangeError("draw_channel: need r >= t >= 1");
    }
    ComplexMatrix h(r, t);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (auto& v : h.data()) {
        const double re = g(rng);
        const double im = g(rng);
        v               = {re, im};
    }
    auto qr = qr_decompose(h);
    return {std::move(h), std::move(qr.q), std::move(qr.r), block_len};
}

/// Redraws until the factorization succeeds.
template <class Urbg>
ChannelInstance draw_usable_channel(Urbg& rng, std::size_t t, std::size_t r, std::size_t block_len = 0) {
    for (;;) {
        try {
            return draw_channel(rng, t, r, block_len);
        } catch (const RankDeficient&) {
        }
    }
}

/// y = Hx + z, unmetered.
inline ComplexVector transmit(const ChannelInstance& ch, std::span<const Complex> x, std::span<const Complex> z) {
    if (z.size() != ch.h.rows()) {
        throw DimensionMismatch("transmit: noise length does not match receive antennas");
    }
    auto y = multiply(ch.h, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += z[i];
    }
    return y;
}

} // namespace treedetect
