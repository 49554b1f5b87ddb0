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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cellfree/geometry_channel.hpp"

using namespace cellfree;
using Catch::Approx;

namespace {

SimGeometry small_geometry(int L, int N, int K, double side = 1000.0)
{
    SimGeometry g;
    g.area_side_m = side;
    g.num_aps = L;
    g.antennas_per_ap = N;
    g.num_ues = K;
    return g;
}

} // namespace

TEST_CASE("drop_network places points inside the square with consistent distances", "[geometry]")
{
    const SimGeometry g = small_geometry(256, 1, 8);
    Rng rng(7);
    const NetworkDrop d = drop_network(g, rng);
    REQUIRE(d.aps.size() == 256);
    REQUIRE(d.ues.size() == 8);
    for (const auto* set : {&d.aps, &d.ues})
        for (const auto& p : *set) {
            CHECK(p.x >= 0.0);
            CHECK(p.x <= 1000.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= 1000.0);
        }
    for (int l = 0; l < 256; ++l)
        for (int k = 0; k < 8; ++k) {
            const double e = std::hypot(d.aps[l].x - d.ues[k].x, d.aps[l].y - d.ues[k].y);
            CHECK(d.distances(l, k) == std::max(e, 1.0));
        }
}

TEST_CASE("drop_network is deterministic and rejects degenerate geometry", "[geometry]")
{
    const SimGeometry g = small_geometry(16, 1, 4);
    Rng a(11), b(11);
    const auto da = drop_network(g, a);
    const auto db = drop_network(g, b);
    CHECK(da.distances == db.distances);

    SimGeometry bad = g;
    bad.area_side_m = 0.0;
    Rng r(1);
    CHECK_THROWS_AS(drop_network(bad, r), ConfigError);
    bad = g;
    bad.num_ues = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("pathloss_db follows the log-distance law", "[geometry]")
{
    CHECK(pathloss_db(1.0, -43.3, 2.0, 1.0) == -43.3);
    CHECK(pathloss_db(100.0, -43.3, 2.0, 1.0) == Approx(-83.3).epsilon(1e-12));
    // below d0 clamps to d0
    CHECK(pathloss_db(0.2, -43.3, 2.0, 1.0) == -43.3);
    CHECK(pathloss_db(5.0, -30.0, 3.0, 5.0) == -30.0);
}

TEST_CASE("kfactor_db is linear in distance", "[geometry]")
{
    CHECK(kfactor_db(100.0) == Approx(10.0));
    CHECK(kfactor_db(0.0) == 13.0);
    CHECK(kfactor_db(1000.0) == Approx(-17.0));
    CHECK(db_to_linear(kfactor_db(1000.0)) == Approx(0.01995).epsilon(1e-3));
}

TEST_CASE("shadowing splits into shared AP and UE terms", "[geometry][shadowing]")
{
    const SimGeometry g = small_geometry(5, 1, 3);
    Rng rng(3);
    const auto drop = drop_network(g, rng);

    SECTION("zero deviation gives zeros")
    {
        const auto s = shadowing_db(drop, 0.0, rng);
        CHECK(s.db.isZero(0.0));
    }
    SECTION("links of one AP share its draw")
    {
        const auto s = shadowing_db(drop, 4.0, rng);
        const double scale = 4.0 / std::sqrt(2.0);
        for (int l = 0; l < 5; ++l)
            for (int k = 0; k < 3; ++k)
                CHECK(s.db(l, k) == Approx(scale * (s.ap(l) + s.ue(k))));
        CHECK(s.db(2, 0) - scale * s.ue(0) == Approx(s.db(2, 1) - scale * s.ue(1)));
    }
}

TEST_CASE("shadowing convention maps sigma_w to the per-link deviation", "[geometry][shadowing]")
{
    PropagationParams p;
    p.sigma_w_db = 4.0;
    CHECK(p.shadow_link_std_db() == 16.0);
    p.shadowing = ShadowingConvention::StdDev;
    CHECK(p.shadow_link_std_db() == 4.0);
}

TEST_CASE("shadowing per-link variance and cross-link correlation", "[geometry][shadowing][statistical]")
{
    // One AP with two UEs, 10^5 independent drops.
    const SimGeometry g = small_geometry(1, 1, 2);
    Rng rng(2024);
    const auto drop = drop_network(g, rng);
    const double sigma = 4.0;
    const int trials = 100000;
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (int i = 0; i < trials; ++i) {
        const auto s = shadowing_db(drop, sigma, rng);
        const double a = s.db(0, 0), b = s.db(0, 1);
        s1 += a;
        s2 += b;
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    const double m1 = s1 / trials, m2 = s2 / trials;
    const double v1 = s11 / trials - m1 * m1;
    const double v2 = s22 / trials - m2 * m2;
    const double cov = s12 / trials - m1 * m2;
    CHECK(std::abs(v1 / (sigma * sigma) - 1.0) < 0.03);
    CHECK(std::abs(v2 / (sigma * sigma) - 1.0) < 0.03);
    CHECK(std::abs(cov / std::sqrt(v1 * v2) - 0.5) < 0.05);
}

TEST_CASE("correlation_matrix is Hermitian PSD with unit diagonal", "[geometry][correlation]")
{
    CHECK(correlation_matrix(0.3, 0.35, 1)(0, 0) == cdouble(1.0, 0.0));

    const CMat r = correlation_matrix(30.0 * pi / 180.0, 20.0 * pi / 180.0, 4, 0.5);
    CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(r(i, i) - 1.0) < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> es(r);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);

    // Raw closed form away from the projection: compare one entry by hand.
    const double phi = 30.0 * pi / 180.0, sig = 20.0 * pi / 180.0;
    const double delta = 2.0 * pi * 0.5;
    const cdouble r01 = std::polar(std::exp(-0.5 * std::pow(delta * std::cos(phi) * sig, 2)), delta * std::sin(phi));
    CHECK(std::abs(r(1, 0) - r01) < 1e-6);

    // Large angular spread decorrelates the elements.
    const CMat wide = correlation_matrix(0.2, 50.0, 3);
    CHECK(std::abs(wide(0, 1)) < 1e-10);
    CHECK(std::abs(wide(1, 2)) < 1e-10);
}

TEST_CASE("build_large_scale combines path loss, shadowing and K-factor", "[geometry][large_scale]")
{
    SimGeometry g = small_geometry(3, 2, 2, 200.0);
    PropagationParams prm;
    Rng rng(5);
    const auto drop = drop_network(g, rng);

    SECTION("beta replicated over the antennas of each AP and linear values consistent")
    {
        const auto ls = build_large_scale(drop, g, prm, rng);
        REQUIRE(ls.beta_db.rows() == 6);
        for (int l = 0; l < 3; ++l)
            for (int k = 0; k < 2; ++k) {
                CHECK(ls.beta_db(2 * l, k) == ls.beta_db(2 * l + 1, k));
                CHECK(ls.kfactor(l, k) == Approx(db_to_linear(13.0 - 0.03 * drop.distances(l, k))));
            }
        for (int m = 0; m < 6; ++m)
            for (int k = 0; k < 2; ++k)
                CHECK(ls.beta_linear(m, k) == Approx(std::pow(10.0, ls.beta_db(m, k) / 10.0)).epsilon(1e-12));
    }
    SECTION("no shadowing at the reference distance gives g0")
    {
        prm.sigma_w_db = 0.0;
        NetworkDrop close = drop;
        close.distances.setConstant(1.0);
        const auto ls = build_large_scale(close, g, prm, rng);
        CHECK(ls.beta_db(0, 0) == Approx(-43.3).epsilon(1e-14));
        CHECK(ls.beta_db(5, 1) == Approx(-43.3).epsilon(1e-14));
    }
}

namespace {

// Single-link fixture with a controllable K-factor.
struct Link {
    SimGeometry g;
    NetworkDrop drop;
    LargeScaleModel ls;

    Link(int N, double kappa, double beta_db)
    {
        g = small_geometry(1, N, 1, 100.0);
        PropagationParams p;
        p.sigma_w_db = 0.0;
        Rng rng(9);
        drop = drop_network(g, rng);
        ls = build_large_scale(drop, g, p, rng);
        ls.kfactor.setConstant(kappa);
        ls.beta_db.setConstant(beta_db);
        ls.beta_linear.setConstant(db_to_linear(beta_db));
    }
};

} // namespace

TEST_CASE("pure line of sight has deterministic amplitude sqrt(beta)", "[geometry][channel]")
{
    Link link(4, std::numeric_limits<double>::infinity(), -60.0);
    Rng rng(1);
    const CMat h = realize_channel(link.ls, link.drop, link.g, rng);
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(h(m, 0)) == Approx(std::sqrt(db_to_linear(-60.0))).epsilon(1e-12));
}

TEST_CASE("channel second moment equals beta", "[geometry][channel][statistical]")
{
    const int trials = 100000;
    for (double kappa : {0.0, 5.0}) {
        Link link(1, kappa, -70.0);
        Rng rng(17);
        double acc = 0.0;
        for (int i = 0; i < trials; ++i)
            acc += std::norm(realize_channel(link.ls, link.drop, link.g, rng)(0, 0));
        CHECK(std::abs(acc / trials / db_to_linear(-70.0) - 1.0) < 0.03);
    }
}

TEST_CASE("NLOS sample covariance matches beta R at N = 4", "[geometry][channel][statistical]")
{
    Link link(4, 0.0, 0.0);
    const CMat r = link.ls.correlation_at(0, 0);
    Rng rng(23);
    const int trials = 100000;
    CMat acc = CMat::Zero(4, 4);
    for (int i = 0; i < trials; ++i) {
        const CVec h = realize_channel(link.ls, link.drop, link.g, rng).col(0);
        acc += h * h.adjoint();
    }
    acc /= static_cast<double>(trials);
    CHECK((acc - r).norm() / r.norm() < 0.05);
}

TEST_CASE("identical seeds give bit-identical channels", "[geometry][channel]")
{
    const SimGeometry g = small_geometry(8, 2, 3);
    PropagationParams p;
    auto make = [&](std::uint64_t seed) {
        Rng rng(seed);
        const auto d = drop_network(g, rng);
        const auto ls = build_large_scale(d, g, p, rng);
        return realize_channel(ls, d, g, rng);
    };
    CHECK(make(99) == make(99));
    CHECK(make(99) != make(100));
}
