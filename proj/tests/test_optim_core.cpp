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
#include <limits>

#include "cellfree/optim/bisection.hpp"
#include "cellfree/optim/gp_product_sinr.hpp"
#include "cellfree/optim/grid_oracle.hpp"
#include "cellfree/optim/hill_climb.hpp"
#include "cellfree/optim/yates.hpp"
#include "support/instances.hpp"

using namespace cellfree;
using namespace cellfree::optim;
using Catch::Approx;

namespace {

SinrCoefficients make(double rho, Mat b, Vec n)
{
    SinrCoefficients c;
    c.rho = rho;
    c.b = std::move(b);
    c.n = std::move(n);
    return c;
}

double min_sinr(const SinrCoefficients& c, const Vec& q) { return c.sinr(q).minCoeff(); }

} // namespace

TEST_CASE("yates_min_power closed-form cases", "[optim][yates]")
{
    SECTION("single UE inversion")
    {
        const auto c = make(10.0, Mat::Zero(1, 1), Vec::Constant(1, 2.0));
        const auto q = yates_min_power(c, Vec::Ones(1), Vec::Ones(1));
        REQUIRE(q);
        CHECK((*q)(0) == Approx(0.2).epsilon(1e-12));
    }
    SECTION("symmetric pair: 10 q = q + 1")
    {
        Mat b(2, 2);
        b << 0, 0.1, 0.1, 0;
        const auto c = make(10.0, b, Vec::Ones(2));
        const auto q = yates_min_power(c, Vec::Ones(2), Vec::Ones(2));
        REQUIRE(q);
        CHECK((*q)(0) == Approx(1.0 / 9.0).epsilon(1e-12));
        CHECK((*q)(1) == Approx(1.0 / 9.0).epsilon(1e-12));
    }
    SECTION("zero targets")
    {
        Rng rng(1);
        const auto c = testing::random_coefficients(3, rng);
        const auto q = yates_min_power(c, Vec::Zero(3), Vec::Ones(3));
        REQUIRE(q);
        CHECK(q->isZero(0.0));
    }
    SECTION("unreachable target")
    {
        const auto c = make(10.0, Mat::Zero(1, 1), Vec::Constant(1, 2.0));
        CHECK_FALSE(yates_min_power(c, Vec::Constant(1, 5.1), Vec::Ones(1)));
        CHECK(yates_min_power(c, Vec::Constant(1, 5.0), Vec::Ones(1)));
    }
    SECTION("interference-limited divergence")
    {
        Mat b(2, 2);
        b << 0, 1, 1, 0;
        const auto c = make(10.0, b, Vec::Ones(2));
        // gamma * b >= 1 has no finite fixed point.
        CHECK_FALSE(yates_min_power(c, Vec::Constant(2, 1.5), Vec::Ones(2)));
    }
}

TEST_CASE("yates solution meets targets and is componentwise minimal", "[optim][yates][property]")
{
    Rng rng(2023);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    testing::InstanceShape shape;
    shape.rho = 10.0;
    shape.b_max = 0.1;
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = testing::random_coefficients(4, rng, shape);
        Vec gamma(4);
        for (int k = 0; k < 4; ++k)
            gamma(k) = 0.2 + 0.8 * u(rng);
        const auto q = yates_min_power(c, gamma, Vec::Ones(4));
        REQUIRE(q);
        const Vec s = c.sinr(*q);
        for (int k = 0; k < 4; ++k)
            CHECK(std::abs(s(k) - gamma(k)) <= 1e-8 * gamma(k));
        int found = 0;
        for (int attempt = 0; attempt < 200000 && found < 100; ++attempt) {
            Vec cand(4);
            for (int k = 0; k < 4; ++k)
                cand(k) = u(rng);
            if (((c.sinr(cand) - gamma).array() < 0.0).any())
                continue;
            ++found;
            CHECK(((*q - cand).array() <= 1e-12).all());
        }
        checked += found;
    }
    CHECK(checked == 5000);
}

TEST_CASE("maxmin bisection closed-form cases", "[optim][bisection]")
{
    SECTION("no interference: the weakest UE sets the level")
    {
        const double rho = 37.0;
        const auto c = make(rho, Mat::Zero(3, 3), Vec((Vec(3) << 1.0, 2.0, 4.0).finished()));
        const auto sol = maxmin_sinr_bisection(c, Vec::Ones(3), Vec::Zero(3));
        REQUIRE(sol);
        CHECK(sol->level == Approx(rho / 4.0).epsilon(1e-12));
        CHECK(sol->q(0) == Approx(0.25).epsilon(1e-10));
        CHECK(sol->q(1) == Approx(0.5).epsilon(1e-10));
        CHECK(sol->q(2) == Approx(1.0).epsilon(1e-10));
    }
    SECTION("single UE transmits at its cap")
    {
        const auto c = make(20.0, Mat::Zero(1, 1), Vec::Constant(1, 4.0));
        const auto sol = maxmin_sinr_bisection(c, Vec::Constant(1, 0.6), Vec::Zero(1));
        REQUIRE(sol);
        CHECK(sol->q(0) == Approx(0.6).epsilon(1e-12));
        CHECK(sol->level == Approx(20.0 * 0.6 / 4.0).epsilon(1e-12));
    }
    SECTION("infeasible floor")
    {
        const auto c = make(20.0, Mat::Zero(1, 1), Vec::Constant(1, 4.0));
        CHECK_FALSE(maxmin_sinr_bisection(c, Vec::Ones(1), Vec::Constant(1, 6.0)));
    }
}

TEST_CASE("maxmin bisection equalizes SINR and matches the grid oracle", "[optim][bisection][oracle]")
{
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = testing::random_coefficients(2, rng);
        const auto sol = maxmin_sinr_bisection(c, Vec::Ones(2), Vec::Zero(2));
        REQUIRE(sol);
        const Vec s = c.sinr(sol->q);
        CHECK((s.maxCoeff() - s.minCoeff()) / sol->level <= 1e-5);
        CHECK(sol->q.maxCoeff() >= 1.0 - 1e-6);

        const auto grid = grid_oracle(2, 0.001, [&](const Vec& q) -> std::optional<double> { return min_sinr(c, q); });
        REQUIRE(grid);
        CHECK(grid->value <= sol->level * (1.0 + 1e-9));
        CHECK(std::abs(sol->level - grid->value) <= 1e-3 * sol->level);
    }
}

TEST_CASE("weighted bisection equalizes weighted spectral efficiency", "[optim][bisection]")
{
    Rng rng(8);
    const auto c = testing::random_coefficients(3, rng);
    const Vec w = (Vec(3) << 1.0, 2.0, 0.5).finished();
    const auto sol = maxmin_sinr_bisection(c, Vec::Ones(3), Vec::Zero(3), w);
    REQUIRE(sol);
    const Vec se = spectral_efficiency(c, sol->q);
    const Vec wse = w.cwiseProduct(se);
    CHECK((wse.maxCoeff() - wse.minCoeff()) / wse.minCoeff() < 1e-8);
    CHECK(sol->q.maxCoeff() >= 1.0 - 1e-6);
}

TEST_CASE("gp_max_product_sinr boundary and infeasible cases", "[optim][gp]")
{
    const auto c = make(30.0, Mat::Zero(1, 1), Vec::Constant(1, 1.5));
    for (double upsilon : {0.3, 0.75, 1.0}) {
        const auto sol = gp_max_product_sinr(c, Vec::Zero(1), upsilon * 1.0);
        REQUIRE(sol);
        CHECK(sol->q(0) == Approx(std::min(1.0, upsilon)).epsilon(1e-5));
        CHECK(sol->converged);
    }
    Rng rng(5);
    const auto c2 = testing::random_coefficients(2, rng);
    const Vec full = c2.sinr(Vec::Ones(2));
    CHECK_FALSE(gp_max_product_sinr(c2, Vec::Constant(2, full.maxCoeff() * 1.5), 2.0));
}

TEST_CASE("gp_max_product_sinr against the grid oracle", "[optim][gp][oracle]")
{
    Rng rng(77);
    for (int K : {2, 3}) {
        for (int trial = 0; trial < (K == 2 ? 10 : 3); ++trial) {
            const auto c = testing::random_coefficients(K, rng);
            const auto sol = gp_max_product_sinr(c, Vec::Zero(K), static_cast<double>(K));
            REQUIRE(sol);
            const auto grid = grid_oracle(K, 0.01, [&](const Vec& q) -> std::optional<double> {
                return c.sinr(q).array().log().sum();
            });
            REQUIRE(grid);
            CHECK(sol->objective >= grid->value - 1e-3);
            CHECK(sol->q.maxCoeff() <= 1.0 + 1e-8);
            CHECK(((sol->t - c.sinr(sol->q)).array() <= 1e-8).all());
        }
    }
}

TEST_CASE("gp respects the SE floor and the sum cap", "[optim][gp]")
{
    Rng rng(91);
    const auto c = testing::random_coefficients(3, rng);
    const Vec floor = Vec::Constant(3, 5.0);
    const auto q_min = yates_min_power(c, floor, Vec::Ones(3));
    REQUIRE(q_min);
    const double cap = 0.5 * (q_min->sum() + 3.0);
    const auto sol = gp_max_product_sinr(c, floor, cap);
    REQUIRE(sol);
    CHECK(sol->q.sum() <= cap + 1e-8);
    CHECK((c.sinr(sol->q).array() >= floor.array() * (1.0 - 1e-8)).all());

    // At the minimal budget the only feasible point is the minimal-power one.
    const auto tight = gp_max_product_sinr(c, floor, q_min->sum());
    REQUIRE(tight);
    CHECK((tight->q - *q_min).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("hill_climb", "[optim][hill_climb]")
{
    SECTION("concave quadratic")
    {
        int evals = 0;
        double lo_seen = 1.0, hi_seen = 0.0;
        const auto r = hill_climb(
            [&](double x) {
                ++evals;
                lo_seen = std::min(lo_seen, x);
                hi_seen = std::max(hi_seen, x);
                return -(x - 0.55) * (x - 0.55);
            },
            0.0, 1.0, 0.0);
        CHECK(std::abs(r.argmax - 0.55) < 5e-4);
        CHECK(std::abs(r.final_step) < 1e-4);
        CHECK(r.evaluations == evals);
        CHECK(evals < 200);
        CHECK(lo_seen >= 0.0);
        CHECK(hi_seen <= 1.0);
    }
    SECTION("monotone objective reaches the upper bound")
    {
        const auto r = hill_climb([](double x) { return x; }, 0.0, 1.0, 0.0);
        CHECK(r.argmax == Approx(1.0).margin(1e-4));
    }
    SECTION("constant objective stays at the start")
    {
        const auto r = hill_climb([](double) { return 3.0; }, 0.0, 1.0, 0.4);
        CHECK(r.argmax == 0.4);
        CHECK(r.value == 3.0);
        CHECK(r.evaluations < 200);
    }
    SECTION("degenerate interval")
    {
        const auto r = hill_climb([](double x) { return x; }, 0.7, 0.7, 0.7);
        CHECK(r.argmax == 0.7);
        CHECK(r.evaluations == 1);
    }
}

TEST_CASE("hill_climb never loses ground and stays in bounds", "[optim][hill_climb][property]")
{
    Rng rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = u(rng), b = u(rng), peak = u(rng), lo = 0.5 * u(rng), hi = lo + 0.5 * u(rng) + 1e-3;
        const double init = lo + (hi - lo) * u(rng);
        auto f = [&](double x) { return std::sin(7.0 * a * x) + b * -(x - peak) * (x - peak); };
        bool inside = true;
        const auto r = hill_climb(
            [&](double x) {
                inside = inside && x >= lo && x <= hi;
                return f(x);
            },
            lo, hi, init);
        CHECK(inside);
        CHECK(r.value >= f(init));
    }
}

TEST_CASE("grid_oracle", "[optim][grid]")
{
    const auto best = grid_oracle(1, 0.5, [](const Vec& q) -> std::optional<double> { return q(0); });
    REQUIRE(best);
    CHECK(best->q(0) == 1.0);

    int count = 0;
    grid_oracle(3, 0.25, [&](const Vec&) -> std::optional<double> {
        ++count;
        return 0.0;
    });
    CHECK(count == 125);

    CHECK_FALSE(grid_oracle(2, 0.1, [](const Vec&) -> std::optional<double> { return std::nullopt; }));
    CHECK_THROWS_AS(grid_oracle(4, 0.5, [](const Vec&) -> std::optional<double> { return 0.0; }), ConfigError);
}

TEST_CASE("solvers are invariant under joint scaling of rho and noise", "[optim][property]")
{
    Rng rng(303);
    for (int trial = 0; trial < 10; ++trial) {
        const int K = 2 + trial % 2;
        const auto c = testing::random_coefficients(K, rng);
        SinrCoefficients s = c;
        const double scale = 7.25;
        s.rho *= scale;
        s.n *= scale;
        const Vec floor = Vec::Constant(K, 2.0);

        const auto y1 = yates_min_power(c, floor, Vec::Ones(K));
        const auto y2 = yates_min_power(s, floor, Vec::Ones(K));
        REQUIRE(y1);
        REQUIRE(y2);
        CHECK((*y1 - *y2).cwiseAbs().maxCoeff() < 1e-9);

        const auto b1 = maxmin_sinr_bisection(c, Vec::Ones(K), floor);
        const auto b2 = maxmin_sinr_bisection(s, Vec::Ones(K), floor);
        CHECK((b1->q - b2->q).cwiseAbs().maxCoeff() < 1e-9);

        const auto g1 = gp_max_product_sinr(c, floor, 0.8 * K);
        const auto g2 = gp_max_product_sinr(s, floor, 0.8 * K);
        CHECK((g1->q - g2->q).cwiseAbs().maxCoeff() < 1e-9);
    }
}
