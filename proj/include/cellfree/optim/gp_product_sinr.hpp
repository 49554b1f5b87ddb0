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

// Maximize prod_k t_k^{w_k} subject to
//   t_k <= SINR_k(q),  SINR_k(q) >= gamma_k,  sum_k q_k <= sum_cap,  0 < q_k <= q_cap.
//
// With x = ln q and u = ln t every constraint is a log-sum-exp of affine
// functions bounded by zero, so the problem is convex in (x, u). It is solved
// with a log-barrier method and damped Newton steps.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cellfree/optim/yates.hpp"

namespace cellfree::optim {

struct GpOptions {
    double barrier_start = 1.0;
    double barrier_growth = 10.0;
    double gap_tol = 1e-6;      // m / barrier weight
    double newton_tol = 1e-9;   // half squared Newton decrement
    double armijo = 1e-4;
    int max_newton = 200;       // per barrier round
    YatesOptions yates;
};

struct GpSolution {
    PowerAllocation q;
    Vec t;                       // SINR lower bounds at the solution
    double objective = 0.0;      // sum_k w_k ln t_k
    double sum_log1p_sinr = 0.0; // sum_k log2(1 + SINR_k(q)), for comparison only
    int newton_iterations = 0;
    bool converged = false;
};

namespace detail {

struct Term {
    double c = 0.0;
    // At most three non-zero exponent coefficients.
    int idx[3] = {0, 0, 0};
    double coef[3] = {0.0, 0.0, 0.0};
    int nnz = 0;

    void add(int i, double a)
    {
        for (int j = 0; j < nnz; ++j)
            if (idx[j] == i) {
                coef[j] += a;
                return;
            }
        idx[nnz] = i;
        coef[nnz] = a;
        ++nnz;
    }

    double eval(const Vec& z) const
    {
        double s = c;
        for (int j = 0; j < nnz; ++j)
            s += coef[j] * z(idx[j]);
        return s;
    }
};

// g(z) = log sum_j exp(a_j . z + c_j) <= 0 ; a single term is affine.
struct LseConstraint {
    std::vector<Term> terms;
};

class GpBarrier {
public:
    GpBarrier(const SinrCoefficients& c, const SinrTargets& floor, double sum_cap, double q_cap, const Vec& weights)
        : K_(c.size()), weights_(weights)
    {
        const int K = K_;
        for (int k = 0; k < K; ++k) {
            // t_k (rho sum b q + n) / (rho q_k) <= 1
            LseConstraint g;
            for (int j = 0; j < K; ++j) {
                if (j == k || !(c.b(k, j) > 0.0))
                    continue;
                Term t;
                t.c = std::log(c.b(k, j));
                t.add(K + k, 1.0);
                t.add(j, 1.0);
                t.add(k, -1.0);
                g.terms.push_back(t);
            }
            Term tn;
            tn.c = std::log(c.n(k) / c.rho);
            tn.add(K + k, 1.0);
            tn.add(k, -1.0);
            g.terms.push_back(tn);
            cons_.push_back(std::move(g));
        }
        {
            LseConstraint g;
            for (int k = 0; k < K; ++k) {
                Term t;
                t.c = -std::log(sum_cap);
                t.add(k, 1.0);
                g.terms.push_back(t);
            }
            cons_.push_back(std::move(g));
        }
        for (int k = 0; k < K; ++k) {
            Term t;
            t.c = -std::log(q_cap);
            t.add(k, 1.0);
            cons_.push_back({{t}});
        }
        for (int k = 0; k < K; ++k) {
            if (!(floor(k) > 0.0))
                continue;
            Term t;
            t.c = std::log(floor(k));
            t.add(K + k, -1.0);
            cons_.push_back({{t}});
        }
    }

    int num_constraints() const { return static_cast<int>(cons_.size()); }

    // Returns +inf outside the strict interior.
    double value(const Vec& z, double weight) const
    {
        double f = -weight * weights_.dot(z.tail(K_));
        for (const auto& g : cons_) {
            const double gv = lse(g, z);
            if (!(gv < 0.0))
                return std::numeric_limits<double>::infinity();
            f -= std::log(-gv);
        }
        return f;
    }

    void derivatives(const Vec& z, double weight, Vec& grad, Mat& hess) const
    {
        const int n = 2 * K_;
        grad.setZero(n);
        hess.setZero(n, n);
        grad.tail(K_) = -weight * weights_;
        Vec gg(n);
        std::vector<double> e;
        for (const auto& g : cons_) {
            gg.setZero();
            double gv = 0.0;
            if (g.terms.size() == 1) {
                const Term& t = g.terms[0];
                gv = t.eval(z);
                for (int j = 0; j < t.nnz; ++j)
                    gg(t.idx[j]) = t.coef[j];
            } else {
                e.resize(g.terms.size());
                double mx = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < g.terms.size(); ++i) {
                    e[i] = g.terms[i].eval(z);
                    mx = std::max(mx, e[i]);
                }
                double s = 0.0;
                for (double& v : e) {
                    v = std::exp(v - mx);
                    s += v;
                }
                gv = mx + std::log(s);
                const double inv_neg = -1.0 / gv;
                // Hessian of the LSE: sum p a a^T - grad grad^T, scaled by 1/(-g).
                for (std::size_t i = 0; i < g.terms.size(); ++i) {
                    const Term& t = g.terms[i];
                    const double p = e[i] / s;
                    for (int a = 0; a < t.nnz; ++a) {
                        gg(t.idx[a]) += p * t.coef[a];
                        for (int b = 0; b < t.nnz; ++b)
                            hess(t.idx[a], t.idx[b]) += inv_neg * p * t.coef[a] * t.coef[b];
                    }
                }
                hess.noalias() -= inv_neg * gg * gg.transpose();
            }
            // Barrier -log(-g): grad g / (-g), hessian adds grad g grad g^T / g^2.
            grad += gg / (-gv);
            hess.noalias() += gg * gg.transpose() / (gv * gv);
        }
    }

private:
    static double lse(const LseConstraint& g, const Vec& z)
    {
        if (g.terms.size() == 1)
            return g.terms[0].eval(z);
        double mx = -std::numeric_limits<double>::infinity();
        for (const auto& t : g.terms)
            mx = std::max(mx, t.eval(z));
        double s = 0.0;
        for (const auto& t : g.terms)
            s += std::exp(t.eval(z) - mx);
        return mx + std::log(s);
    }

    int K_;
    Vec weights_;
    std::vector<LseConstraint> cons_;
};

inline GpSolution finish(const SinrCoefficients& c, const Vec& q, const Vec& t, const Vec& w, int iters, bool ok)
{
    GpSolution s;
    s.q = q;
    s.t = t;
    s.objective = w.dot(t.array().log().matrix());
    s.sum_log1p_sinr = spectral_efficiency(c, q).sum();
    s.newton_iterations = iters;
    s.converged = ok;
    return s;
}

} // namespace detail

/// Solve the product-of-SINR program. `weights` empty means unit exponents.
/// Returns nullopt when the SINR floor is infeasible under the caps.
inline std::optional<GpSolution> gp_max_product_sinr(const SinrCoefficients& c, const SinrTargets& floor,
                                                     double sum_cap, double q_cap = 1.0, const Vec& weights = {},
                                                     const GpOptions& opt = {})
{
    const int K = c.size();
    const Vec w = weights.size() == 0 ? Vec::Ones(K) : weights;
    const Vec cap = Vec::Constant(K, q_cap);

    const auto q_min = yates_min_power(c, floor, cap, opt.yates);
    if (!q_min || q_min->sum() > sum_cap * (1.0 + 1e-12))
        return std::nullopt;

    // Strictly feasible start: meet slightly inflated targets, shrinking the
    // inflation until the caps have slack.
    std::optional<Vec> start;
    for (double delta = 1.0; delta > 1e-13 && !start; delta *= 0.5) {
        const SinrTargets inflated = floor * (1.0 + delta) + Vec::Constant(K, delta);
        auto q = yates_min_power(c, inflated, cap, opt.yates);
        if (q && q->maxCoeff() < q_cap && q->sum() < sum_cap && (q->array() > 0.0).all())
            start = std::move(q);
    }
    if (!start) {
        // No interior: the minimal-power point is the only feasible allocation.
        return detail::finish(c, *q_min, c.sinr(*q_min), w, 0, false);
    }

    Vec z(2 * K);
    {
        const Vec s = c.sinr(*start);
        for (int k = 0; k < K; ++k) {
            z(k) = std::log((*start)(k));
            z(K + k) = std::log(floor(k) + 0.5 * (s(k) - floor(k)));
        }
    }

    const detail::GpBarrier barrier(c, floor, sum_cap, q_cap, w);
    const double m = barrier.num_constraints();
    double weight = opt.barrier_start;
    int total = 0;
    bool converged = false;
    Vec grad;
    Mat hess;
    while (true) {
        for (int it = 0; it < opt.max_newton; ++it) {
            barrier.derivatives(z, weight, grad, hess);
            Eigen::LDLT<Mat> ldlt(hess);
            Vec dz = ldlt.solve(-grad);
            if (ldlt.info() != Eigen::Success || !dz.allFinite())
                dz = hess.completeOrthogonalDecomposition().solve(-grad);
            const double decrement = -grad.dot(dz);
            ++total;
            if (!(decrement > 0.0) || 0.5 * decrement <= opt.newton_tol)
                break;
            const double f0 = barrier.value(z, weight);
            double step = 1.0;
            while (step > 1e-20) {
                const Vec zn = z + step * dz;
                if (barrier.value(zn, weight) <= f0 - opt.armijo * step * decrement) {
                    z = zn;
                    break;
                }
                step *= 0.5;
            }
            if (step <= 1e-20)
                break;
        }
        if (m / weight < opt.gap_tol) {
            converged = true;
            break;
        }
        weight *= opt.barrier_growth;
    }

    const Vec q = z.head(K).array().exp().matrix().cwiseMin(q_cap);
    const Vec t = z.tail(K).array().exp().matrix().cwiseMin(c.sinr(q));
    return detail::finish(c, q, t, w, total, converged);
}

} // namespace cellfree::optim
