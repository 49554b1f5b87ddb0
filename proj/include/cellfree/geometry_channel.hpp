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

// Network drops, large-scale fading and correlated Rician small-scale fading.
//
// Antenna index m = l*N + n (0-based) for AP l and antenna n, so the rows of
// every M x K matrix are grouped per AP.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cellfree/rng.hpp"
#include "cellfree/types.hpp"

namespace cellfree {

struct SimGeometry {
    double area_side_m = 1000.0;
    int num_aps = 256;
    int antennas_per_ap = 1;
    int num_ues = 8;
    double carrier_hz = 3.5e9;
    double antenna_spacing = 0.5; // in wavelengths

    int total_antennas() const { return num_aps * antennas_per_ap; }
    double wavelength() const { return speed_of_light / carrier_hz; }

    void validate() const
    {
        if (!(area_side_m > 0.0))
            throw ConfigError("area_side_m must be positive");
        if (num_aps < 1)
            throw ConfigError("num_aps must be at least 1");
        if (antennas_per_ap < 1)
            throw ConfigError("antennas_per_ap must be at least 1");
        if (num_ues < 1)
            throw ConfigError("num_ues must be at least 1");
        if (!(carrier_hz > 0.0))
            throw ConfigError("carrier_hz must be positive");
        if (!(antenna_spacing > 0.0))
            throw ConfigError("antenna_spacing must be positive");
    }
};

/// How sigma_w enters the shadowing term: Squared scales the two normalized
/// contributions by sigma_w^2 / sqrt(2), StdDev by sigma_w / sqrt(2).
enum class ShadowingConvention { Squared, StdDev };

struct PropagationParams {
    double g0_db = -43.3;             // median gain at the reference distance
    double pathloss_exponent = 2.0;
    double ref_distance_m = 1.0;      // also the minimum AP-UE distance
    double sigma_w_db = 4.0;
    ShadowingConvention shadowing = ShadowingConvention::Squared;
    double kfactor_intercept_db = 13.0;
    double kfactor_slope_db_per_m = 0.03;
    double sigma_phi_rad = 20.0 * pi / 180.0;

    void validate() const
    {
        if (!(ref_distance_m > 0.0))
            throw ConfigError("ref_distance_m must be positive");
        if (!(sigma_w_db >= 0.0))
            throw ConfigError("sigma_w_db must be non-negative");
        if (!(sigma_phi_rad >= 0.0))
            throw ConfigError("sigma_phi_deg must be non-negative");
        if (!(pathloss_exponent >= 0.0))
            throw ConfigError("pathloss_exponent must be non-negative");
    }

    /// Standard deviation of the per-link shadow term in dB.
    double shadow_link_std_db() const
    {
        return shadowing == ShadowingConvention::Squared ? sigma_w_db * sigma_w_db : sigma_w_db;
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct NetworkDrop {
    std::vector<Point> aps;
    std::vector<Point> ues;
    Mat distances; // L x K, clamped below by the minimum distance
};

struct ShadowingDraw {
    Vec ap; // one standard normal per AP
    Vec ue; // one standard normal per UE
    Mat db; // L x K shadow term in dB
};

struct LargeScaleModel {
    int antennas_per_ap = 1;
    Mat beta_db;     // M x K
    Mat beta_linear; // M x K
    Mat kfactor;     // L x K, linear
    Mat azimuth;     // L x K, radians from array broadside (x-axis)
    Vec shadow_ap;
    Vec shadow_ue;
    // Per (l, k), stored at l * K + k.
    std::vector<CMat> correlation;
    // A with A A^H = R, used to colour the NLOS draw.
    std::vector<CMat> correlation_factor;

    int num_aps() const { return static_cast<int>(kfactor.rows()); }
    int num_ues() const { return static_cast<int>(kfactor.cols()); }
    const CMat& correlation_at(int l, int k) const { return correlation[static_cast<std::size_t>(l * num_ues() + k)]; }
};

inline NetworkDrop drop_network(const SimGeometry& geometry, Rng& rng, double min_distance_m = 1.0)
{
    geometry.validate();
    std::uniform_real_distribution<double> u(0.0, geometry.area_side_m);
    NetworkDrop drop;
    drop.aps.resize(static_cast<std::size_t>(geometry.num_aps));
    drop.ues.resize(static_cast<std::size_t>(geometry.num_ues));
    for (auto& p : drop.aps) {
        p.x = u(rng);
        p.y = u(rng);
    }
    for (auto& p : drop.ues) {
        p.x = u(rng);
        p.y = u(rng);
    }
    drop.distances.resize(geometry.num_aps, geometry.num_ues);
    for (int l = 0; l < geometry.num_aps; ++l)
        for (int k = 0; k < geometry.num_ues; ++k) {
            const auto& a = drop.aps[static_cast<std::size_t>(l)];
            const auto& b = drop.ues[static_cast<std::size_t>(k)];
            drop.distances(l, k) = std::max(std::hypot(b.x - a.x, b.y - a.y), min_distance_m);
        }
    return drop;
}

/// Log-distance path loss in dB; distances below d0 are clamped to d0.
inline double pathloss_db(double d, double g0_db, double gamma, double d0)
{
    return g0_db - 10.0 * gamma * std::log10(std::max(d, d0) / d0);
}

/// Shadowing split into one AP and one UE contribution, each scaled by
/// link_std_db / sqrt(2).
inline ShadowingDraw shadowing_db(const NetworkDrop& drop, double link_std_db, Rng& rng)
{
    const auto L = static_cast<Eigen::Index>(drop.aps.size());
    const auto K = static_cast<Eigen::Index>(drop.ues.size());
    std::normal_distribution<double> n(0.0, 1.0);
    ShadowingDraw s;
    s.ap.resize(L);
    s.ue.resize(K);
    for (Eigen::Index l = 0; l < L; ++l)
        s.ap(l) = n(rng);
    for (Eigen::Index k = 0; k < K; ++k)
        s.ue(k) = n(rng);
    const double scale = link_std_db / std::sqrt(2.0);
    s.db.resize(L, K);
    for (Eigen::Index l = 0; l < L; ++l)
        for (Eigen::Index k = 0; k < K; ++k)
            s.db(l, k) = scale * (s.ap(l) + s.ue(k));
    return s;
}

/// Distance-dependent Rician K-factor in dB (distance in meters).
inline double kfactor_db(double d, double intercept_db = 13.0, double slope_db_per_m = 0.03)
{
    return intercept_db - slope_db_per_m * d;
}

namespace detail {

struct PsdResult {
    CMat matrix;
    CMat factor;
};

// Clip negative eigenvalues, rescale to unit diagonal and return a square-root factor.
inline PsdResult project_unit_diagonal_psd(const CMat& r)
{
    const Eigen::Index n = r.rows();
    if (n == 1)
        return {CMat::Ones(1, 1), CMat::Ones(1, 1)};
    const CMat herm = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(herm);
    Vec ev = es.eigenvalues().cwiseMax(0.0);
    CMat factor = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    CMat psd = factor * factor.adjoint();
    Vec d = psd.diagonal().real();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
        factor.row(i) *= s;
    }
    psd = factor * factor.adjoint();
    for (Eigen::Index i = 0; i < n; ++i)
        psd(i, i) = 1.0;
    return {psd, factor};
}

inline CMat local_scattering(double azimuth, double sigma_phi, int n, double spacing)
{
    CMat r(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double delta = 2.0 * pi * spacing * static_cast<double>(a - b);
            const double spread = delta * std::cos(azimuth) * sigma_phi;
            r(a, b) = std::polar(std::exp(-0.5 * spread * spread), delta * std::sin(azimuth));
        }
    return r;
}

} // namespace detail

/// Local-scattering spatial correlation of a ULA under a Gaussian angular spread.
///
/// Entry (a, b) is exp(j 2 pi D (a-b) sin(phi)) * exp(-sigma^2 (2 pi D (a-b) cos(phi))^2 / 2)
/// with D the element spacing in wavelengths. The result is projected onto the
/// Hermitian PSD cone with unit diagonal.
inline CMat correlation_matrix(double azimuth, double sigma_phi, int n, double spacing = 0.5)
{
    if (n < 1)
        throw ConfigError("correlation_matrix: antenna count must be at least 1");
    return detail::project_unit_diagonal_psd(detail::local_scattering(azimuth, sigma_phi, n, spacing)).matrix;
}

inline LargeScaleModel build_large_scale(const NetworkDrop& drop, const SimGeometry& geometry,
                                         const PropagationParams& params, Rng& shadow_rng)
{
    params.validate();
    const int L = geometry.num_aps;
    const int K = geometry.num_ues;
    const int N = geometry.antennas_per_ap;
    const int M = L * N;

    LargeScaleModel ls;
    ls.antennas_per_ap = N;
    const ShadowingDraw shadow = shadowing_db(drop, params.shadow_link_std_db(), shadow_rng);
    ls.shadow_ap = shadow.ap;
    ls.shadow_ue = shadow.ue;
    ls.beta_db.resize(M, K);
    ls.kfactor.resize(L, K);
    ls.azimuth.resize(L, K);
    ls.correlation.reserve(static_cast<std::size_t>(L * K));
    ls.correlation_factor.reserve(static_cast<std::size_t>(L * K));
    for (int l = 0; l < L; ++l) {
        const Point& ap = drop.aps[static_cast<std::size_t>(l)];
        for (int k = 0; k < K; ++k) {
            const Point& ue = drop.ues[static_cast<std::size_t>(k)];
            const double d = drop.distances(l, k);
            const double b_db = pathloss_db(d, params.g0_db, params.pathloss_exponent, params.ref_distance_m)
                                + shadow.db(l, k);
            for (int n = 0; n < N; ++n)
                ls.beta_db(l * N + n, k) = b_db;
            ls.kfactor(l, k) = db_to_linear(kfactor_db(d, params.kfactor_intercept_db, params.kfactor_slope_db_per_m));
            const double phi = std::atan2(ue.y - ap.y, ue.x - ap.x);
            ls.azimuth(l, k) = phi;
            if (N == 1) {
                ls.correlation.emplace_back(CMat::Ones(1, 1));
                ls.correlation_factor.emplace_back(CMat::Ones(1, 1));
                continue;
            }
            auto psd = detail::project_unit_diagonal_psd(
                detail::local_scattering(phi, params.sigma_phi_rad, N, geometry.antenna_spacing));
            ls.correlation.push_back(std::move(psd.matrix));
            ls.correlation_factor.push_back(std::move(psd.factor));
        }
    }
    ls.beta_linear = ls.beta_db.unaryExpr([](double v) { return db_to_linear(v); });
    return ls;
}

/// Plane-wave ULA response with the common propagation phase -2 pi d / lambda.
inline CVec los_steering(double azimuth, double distance_m, int n, double spacing, double wavelength)
{
    CVec a(n);
    const double common = -2.0 * pi * distance_m / wavelength;
    for (int i = 0; i < n; ++i)
        a(i) = std::polar(1.0, 2.0 * pi * spacing * static_cast<double>(i) * std::sin(azimuth) + common);
    return a;
}

/// Draw one realization of the M x K channel matrix.
inline CMat realize_channel(const LargeScaleModel& ls, const NetworkDrop& drop, const SimGeometry& geometry,
                            Rng& rng)
{
    const int L = ls.num_aps();
    const int K = ls.num_ues();
    const int N = ls.antennas_per_ap;
    CMat h(L * N, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l) {
            const double kappa = ls.kfactor(l, k);
            double w_los = 0.0;
            double w_nlos = 1.0;
            if (std::isinf(kappa)) {
                w_los = 1.0;
                w_nlos = 0.0;
            } else {
                w_los = std::sqrt(kappa / (1.0 + kappa));
                w_nlos = std::sqrt(1.0 / (1.0 + kappa));
            }
            const CVec a = los_steering(ls.azimuth(l, k), drop.distances(l, k), N, geometry.antenna_spacing,
                                        geometry.wavelength());
            CVec z(N);
            for (int i = 0; i < N; ++i)
                z(i) = complex_normal(rng);
            const CVec p = ls.correlation_factor[static_cast<std::size_t>(l * K + k)] * z;
            for (int n = 0; n < N; ++n)
                h(l * N + n, k) = std::sqrt(ls.beta_linear(l * N + n, k)) * (w_los * a(n) + w_nlos * p(n));
        }
    return h;
}

} // namespace cellfree
