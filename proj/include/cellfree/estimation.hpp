// SPDX-License-Identifier: Apache-2.0
//
// cellfree-tpc: uplink transmit power control for cell-free massive MIMO
// Copyright (C) 2026 The cellfree-tpc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <string>

#include "cellfree/rng.hpp"
#include "cellfree/types.hpp"

namespace cellfree {

struct PilotConfig {
    int tau_p = 0;
    double rho_p = 0.0; // pilot SNR
    CMat pilots;        // tau_p x K, unit-norm columns
};

struct ChannelSet {
    CMat h_true;
    CMat h_est;
    CMat h_err;
};

struct EstimationStats {
    Mat gamma;     // mean-square of the estimate
    Mat error_var; // beta - gamma
};

/// Unit-norm DFT columns; orthonormal whenever tau_p >= K.
inline CMat make_orthogonal_pilots(int num_ues, int tau_p)
{
    if (num_ues < 1)
        throw ConfigError("pilots: num_ues must be at least 1");
    if (tau_p < num_ues)
        throw ConfigError("pilots: orthogonality impossible with tau_p=" + std::to_string(tau_p)
                          + " < K=" + std::to_string(num_ues));
    CMat phi(tau_p, num_ues);
    const double scale = 1.0 / std::sqrt(static_cast<double>(tau_p));
    for (int t = 0; t < tau_p; ++t)
        for (int k = 0; k < num_ues; ++k) {
            // Reduce the index product first so large tau_p keeps full phase precision.
            const auto idx = static_cast<double>((static_cast<long long>(t) * k) % tau_p);
            phi(t, k) = std::polar(scale, -2.0 * pi * idx / static_cast<double>(tau_p));
        }
    return phi;
}

inline PilotConfig make_pilot_config(int num_ues, int tau_p, double rho_p)
{
    if (!(rho_p >= 0.0))
        throw ConfigError("pilots: pilot SNR must be non-negative");
    return {tau_p, rho_p, make_orthogonal_pilots(num_ues, tau_p)};
}

/// MMSE estimate from a given pilot-phase noise realization (M x tau_p).
///
/// The general contaminated form is applied: the denominator sums
/// beta_{m,k'} |phi_k^H phi_k'|^2 over all k'. The stored true channel is
/// rebuilt as estimate + error so the decomposition holds exactly.
inline ChannelSet mmse_estimate(const CMat& h, const PilotConfig& pilots, const Mat& beta, const CMat& noise)
{
    const double rt = pilots.rho_p * static_cast<double>(pilots.tau_p);
    const double srt = std::sqrt(rt);
    const CMat& phi = pilots.pilots;
    // y_m = sqrt(rho tau) sum_k h_{m,k} phi_k + z_m, stacked as rows.
    const CMat y = srt * h * phi.transpose() + noise;
    const CMat projected = y * phi.conjugate(); // (m, k) -> phi_k^H y_m
    const Mat overlap = (phi.adjoint() * phi).cwiseAbs2();
    const Mat denom = (rt * (beta * overlap.transpose())).array() + 1.0;

    ChannelSet cs;
    cs.h_est = (srt * beta.array() / denom.array()).cast<cdouble>() * projected.array();
    cs.h_err = h - cs.h_est;
    cs.h_true = cs.h_est + cs.h_err;
    return cs;
}

inline ChannelSet mmse_estimate(const CMat& h, const PilotConfig& pilots, const Mat& beta, Rng& rng)
{
    return mmse_estimate(h, pilots, beta, complex_normal_matrix(h.rows(), pilots.tau_p, rng));
}

/// Closed-form second moments under orthogonal pilots.
inline EstimationStats estimation_stats(const Mat& beta, const PilotConfig& pilots)
{
    const double rt = pilots.rho_p * static_cast<double>(pilots.tau_p);
    EstimationStats s;
    s.gamma = (rt * beta.array().square() / (rt * beta.array() + 1.0)).matrix();
    s.error_var = beta - s.gamma;
    return s;
}

} // namespace cellfree
