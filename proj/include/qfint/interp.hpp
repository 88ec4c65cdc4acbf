#pragma once

#include <cfloat>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qfint/cluster.hpp"
#include "qfint/compensated.hpp"
#include "qfint/model.hpp"

namespace qfint {

struct InterpPlan {
    double beta = 0.0;     // disk ratio, > 1
    double epsilon = 0.0;  // target relative error
    std::size_t k = 0;     // truncation order
    double bound = 0.0;    // truncation bound at k
};

/// m / ((k+1)·β^k·(β−1)): the error of the degree-k Taylor polynomial of ln p at z = 1
/// when p has degree ≤ m and no zeros in |z| < β.
inline double truncation_bound(std::size_t m, std::size_t k, double beta) {
    return static_cast<double>(m) /
           (static_cast<double>(k + 1) * std::pow(beta, static_cast<double>(k)) * (beta - 1.0));
}

/// Smallest k whose truncation bound is ≤ ln(1+ε).
inline InterpPlan choose_order(std::size_t m, double epsilon, double beta) {
    if (!(beta > 1.0)) throw std::invalid_argument("choose_order: beta must exceed 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("choose_order: epsilon must be positive");
    const double target = std::log1p(epsilon);
    InterpPlan plan{beta, epsilon, 0, truncation_bound(m, 0, beta)};
    while (plan.bound > target) {
        ++plan.k;
        plan.bound = truncation_bound(m, plan.k, beta);
    }
    return plan;
}

/**
 * Taylor coefficients of f = ln p at 0, from those of p (c[0] must be 1).
 * Returns f[0..k] with f[0] = 0; coefficients of p past c.size() are taken
 * as zero.  Solves s·c_s = Σ_{j=1}^{s} j·f_j·c_{s−j} forward in s.
 */
inline std::vector<double> log_taylor(std::span<const double> c, std::size_t k) {
    if (c.empty() || c[0] != 1.0) throw std::invalid_argument("log_taylor: c_0 must equal 1");
    auto coef = [&](std::size_t i) { return i < c.size() ? c[i] : 0.0; };
    std::vector<double> f(k + 1, 0.0);
    for (std::size_t s = 1; s <= k; ++s) {
        CompensatedSum acc;
        acc.add(static_cast<double>(s) * coef(s));
        for (std::size_t j = 1; j < s; ++j) acc.add(-static_cast<double>(j) * f[j] * coef(s - j));
        f[s] = acc.value() / static_cast<double>(s);
    }
    return f;
}

struct Estimate {
    double value = 1.0;      // exp(log_value)
    double log_value = 0.0;  // T_k(1)
    /// Truncation-only certificate: |ln p(1) − log_value| ≤ this.
    double additive_log_error_bound = 0.0;
    /// Heuristic scale of accumulated roundoff; not part of the certificate.
    double roundoff_indicator = 0.0;
    InterpPlan plan;
    CoeffVector coeffs;
    std::vector<double> f;
    AdmissibilityReport admissibility;
};

/// Approximates p(1) = E ∏(1 + q_k) within relative error epsilon.
inline Estimate integrate(const Instance& inst, const ToleranceConfig& cfg, double epsilon,
                          const ClusterOptions& opts = {}) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("integrate: epsilon must lie in (0, 1)");
    Estimate est;
    est.admissibility = check_admissible(inst, cfg);
    if (!est.admissibility.pass) throw AdmissibilityError(est.admissibility);

    est.plan = choose_order(inst.m(), epsilon, cfg.beta());
    est.coeffs = coeff_vector(inst, std::min(est.plan.k, inst.m()), opts);
    est.f = log_taylor(est.coeffs.c, est.plan.k);

    CompensatedSum t;
    for (std::size_t j = 1; j <= est.plan.k; ++j) t.add(est.f[j]);
    est.log_value = t.value();
    est.value = std::exp(est.log_value);
    est.additive_log_error_bound = est.plan.bound;

    double scale = 0.0;
    for (std::size_t s = 1; s < est.coeffs.abs_sum.size(); ++s) scale += est.coeffs.abs_sum[s];
    for (std::size_t j = 1; j <= est.plan.k; ++j) scale += static_cast<double>(j) * std::abs(est.f[j]);
    est.roundoff_indicator = DBL_EPSILON * scale + t.residual();

    if (!std::isfinite(est.log_value)) throw NonFiniteError("log estimate is not finite");
    return est;
}

}  // namespace qfint
