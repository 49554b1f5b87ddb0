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
#include <optional>

#include "cellfree/types.hpp"

namespace cellfree {

/// Transmit power coefficients, one per UE, each in [0, 1].
using PowerAllocation = Vec;

/// Everything the power-control solvers need from one drop:
/// SINR_k(q) = rho q_k / (rho sum_{k' != k} b(k, k') q_k' + n_k).
struct SinrCoefficients {
    double rho = 1.0;
    Mat b; // K x K, zero diagonal
    Vec n; // K

    int size() const { return static_cast<int>(n.size()); }

    double interference(int k, const Vec& q) const { return rho * b.row(k).dot(q) + n(k); }

    double sinr(int k, const Vec& q) const { return rho * q(k) / interference(k, q); }

    Vec sinr(const Vec& q) const
    {
        Vec s(size());
        for (int k = 0; k < size(); ++k)
            s(k) = sinr(k, q);
        return s;
    }
};

inline constexpr double default_condition_limit = 1e12;

/// ZF combiner W = (H^H H)^{-1} H^H via a thin QR of the estimate.
/// Returns nullopt when the estimate is rank deficient (M < K or condition
/// number above the limit).
inline std::optional<CMat> zf_weights(const CMat& h_est, double condition_limit = default_condition_limit)
{
    const Eigen::Index m = h_est.rows();
    const Eigen::Index k = h_est.cols();
    if (m < k || k == 0)
        return std::nullopt;
    Eigen::HouseholderQR<CMat> qr(h_est);
    const CMat r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Vec sv = Eigen::JacobiSVD<CMat>(r).singularValues();
    const double smax = sv(0);
    const double smin = sv(k - 1);
    if (!(smin > 0.0) || !std::isfinite(smax) || smax / smin > condition_limit)
        return std::nullopt;
    const CMat q = qr.householderQ() * CMat::Identity(m, k);
    // W = R^{-1} Q^H
    return CMat(r.triangularView<Eigen::Upper>().solve(q.adjoint()));
}

/// Interference coupling from the realized estimation error and noise gain per UE.
inline SinrCoefficients sinr_coefficients(const CMat& w, const CMat& h_err, double rho)
{
    SinrCoefficients c;
    c.rho = rho;
    c.b = (w * h_err).cwiseAbs2();
    c.b.diagonal().setZero();
    c.n = w.rowwise().squaredNorm();
    return c;
}

/// Variant that replaces the realized error cross-terms with their expectation
/// E|w_k^H h~_k'|^2 = sum_m |w_{k,m}|^2 var(h~_{m,k'}) (per-antenna independent errors).
inline SinrCoefficients sinr_coefficients_statistical(const CMat& w, const Mat& error_var, double rho)
{
    SinrCoefficients c;
    c.rho = rho;
    c.b = w.cwiseAbs2() * error_var;
    c.b.diagonal().setZero();
    c.n = w.rowwise().squaredNorm();
    return c;
}

/// Per-UE spectral efficiency in bit/s/Hz.
inline Vec spectral_efficiency(const SinrCoefficients& coeffs, const PowerAllocation& q)
{
    return coeffs.sinr(q).unaryExpr([](double s) { return std::log2(1.0 + s); });
}

/// Maximum transmit power over noise power (noise given in dBm).
inline double transmit_snr(double pbar_w, double noise_dbm)
{
    return pbar_w / std::pow(10.0, (noise_dbm - 30.0) / 10.0);
}

} // namespace cellfree
