#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "corpus.hpp"
#include "qfint/apps.hpp"
#include "qfint/cluster.hpp"
#include "qfint/oracle.hpp"

using namespace qfint;
using qfint::testing::Rng;

namespace {

Instance selberg_instance(std::size_t points) {
    return apps::build_potential_instance({1, points, apps::complete_edges(points), 1.0, {}});
}

const Instance& two_forms() {
    static const Instance inst = build_instance(2, {SymMatrix::identity(2, 0.2), SymMatrix::identity(2, 0.2)});
    return inst;
}

// Random orthogonal matrix: Gram–Schmidt on a Gaussian matrix.
std::vector<double> random_orthogonal(Rng& rng, std::size_t n) {
    std::vector<double> q(n * n);
    for (auto& v : q) v = rng.normal();
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            double dot = 0.0;
            for (std::size_t r = 0; r < n; ++r) dot += q[r * n + c] * q[r * n + p];
            for (std::size_t r = 0; r < n; ++r) q[r * n + c] -= dot * q[r * n + p];
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < n; ++r) nrm += q[r * n + c] * q[r * n + c];
        nrm = std::sqrt(nrm);
        for (std::size_t r = 0; r < n; ++r) q[r * n + c] /= nrm;
    }
    return q;
}

SymMatrix conjugate(const SymMatrix& a, const std::vector<double>& r) {
    const std::size_t n = a.n();
    std::vector<double> t(n * n, 0.0), out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t j = 0; j < n; ++j) t[i * n + j] += r[l * n + i] * a(l, j);  // Rᵀ A
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += t[i * n + l] * r[l * n + j];
    return SymMatrix::from_dense(n, out);
}

}  // namespace

TEST(ExactMoment, SingleAndPair) {
    Rng rng(101);
    const auto inst = qfint::testing::random_instance(rng, 4, 2, 4);
    EXPECT_NEAR(oracle::exact_moment(inst, {0}), 0.5 * inst.matrix(0).trace(), 1e-14);
    const double t0 = inst.matrix(0).trace(), t1 = inst.matrix(1).trace();
    const double expect = 0.25 * t0 * t1 + 0.5 * trace_product({&inst.matrix(0), &inst.matrix(1)});
    EXPECT_NEAR(oracle::exact_moment(inst, {0, 1}), expect, 1e-12 * std::max(1.0, std::abs(expect)));
    EXPECT_EQ(oracle::exact_moment(inst, std::vector<std::size_t>{}), 1.0);
}

TEST(ExactMoment, SelbergFamily) {
    const double expect[] = {0.0, 1.0, 2.0, 12.0, 288.0, 34560.0};
    for (std::size_t pts = 2; pts <= 5; ++pts) {
        const auto inst = selberg_instance(pts);
        std::vector<std::size_t> all(inst.m());
        for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
        const double v = oracle::exact_moment(inst, all);
        EXPECT_NEAR(v, expect[pts], 1e-9 * expect[pts]) << pts << " points";
        EXPECT_NEAR(oracle::selberg_reference(pts), expect[pts], 1e-12 * expect[pts]);
    }
}

TEST(ExactMoment, GuardsAndBadIndices) {
    const auto inst = selberg_instance(6);  // 15 forms
    std::vector<std::size_t> eleven(11);
    for (std::size_t k = 0; k < 11; ++k) eleven[k] = k;
    EXPECT_THROW(oracle::exact_moment(inst, eleven), GuardError);
    EXPECT_THROW(oracle::exact_moment(inst, {0, 0}), std::invalid_argument);
    EXPECT_THROW(oracle::exact_moment(inst, {15}), std::out_of_range);
}

TEST(ExactMoment, InvariantUnderPermutationAndRotation) {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = rng.between(2, 5);
        const auto inst = qfint::testing::random_instance(rng, n, rng.between(2, 4), n);
        std::vector<std::size_t> s(inst.m()), rev(inst.m());
        for (std::size_t k = 0; k < inst.m(); ++k) s[k] = rev[inst.m() - 1 - k] = k;
        const double base = oracle::exact_moment(inst, s);
        EXPECT_NEAR(oracle::exact_moment(inst, rev), base, 1e-12 * std::max(1.0, std::abs(base)));

        const auto r = random_orthogonal(rng, n);
        std::vector<SymMatrix> rotated;
        for (const auto& f : inst.forms()) rotated.push_back(conjugate(f.matrix, r));
        const double rot = oracle::exact_moment(build_instance(n, rotated), s);
        double scale = 1.0;
        for (const auto& f : inst.forms()) scale *= std::max(1.0, f.norm * static_cast<double>(n));
        EXPECT_NEAR(rot, base, 1e-9 * scale);
    }
}

TEST(ExactValue, Examples) {
    EXPECT_EQ(oracle::exact_value(two_forms(), 0.0), std::complex<double>(1.0, 0.0));
    const auto v = oracle::exact_value(two_forms(), 1.0);
    EXPECT_NEAR(v.real(), 1.48, 1e-15);
    EXPECT_EQ(v.imag(), 0.0);

    const auto one = build_instance(2, {SymMatrix::identity(2, 0.2)});
    for (std::complex<double> w : {std::complex<double>(0.5, 0.0), {-1.3, 2.0}, {0.0, -4.0}}) {
        const auto p = oracle::exact_value(one, w);
        EXPECT_NEAR(std::abs(p - (1.0 + 0.2 * w)), 0.0, 1e-15);
    }
    EXPECT_NO_THROW(oracle::exact_value(selberg_instance(4), 1.0));  // m = 6
    EXPECT_THROW(oracle::exact_value(selberg_instance(5), 1.0), GuardError);
}

TEST(ExactValue, GuardAtSeven) {
    std::vector<SymMatrix> forms(7, SymMatrix::identity(2, 0.01));
    EXPECT_THROW(oracle::exact_value(build_instance(2, forms), 1.0), GuardError);
    forms.pop_back();
    EXPECT_NO_THROW(oracle::exact_value(build_instance(2, forms), 1.0));
}

TEST(ExactValue, InterpolationRecoversClusterCoefficients) {
    Rng rng(107);
    for (int trial = 0; trial < 30; ++trial) {
        const auto inst = qfint::testing::random_instance(rng, rng.between(1, 5), rng.between(1, 4), 3);
        const std::size_t m = inst.m();
        // Vandermonde solve at m+1 distinct real points
        std::vector<double> xs(m + 1), ys(m + 1);
        for (std::size_t i = 0; i <= m; ++i) {
            xs[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m);
            ys[i] = oracle::exact_value(inst, xs[i]).real();
        }
        std::vector<double> a((m + 1) * (m + 1));
        for (std::size_t i = 0; i <= m; ++i)
            for (std::size_t j = 0; j <= m; ++j) a[i * (m + 1) + j] = std::pow(xs[i], static_cast<double>(j));
        // Gaussian elimination with partial pivoting
        const std::size_t d = m + 1;
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < d; ++r)
                if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
            for (std::size_t j = 0; j < d; ++j) std::swap(a[c * d + j], a[piv * d + j]);
            std::swap(ys[c], ys[piv]);
            for (std::size_t r = c + 1; r < d; ++r) {
                const double f = a[r * d + c] / a[c * d + c];
                for (std::size_t j = c; j < d; ++j) a[r * d + j] -= f * a[c * d + j];
                ys[r] -= f * ys[c];
            }
        }
        std::vector<double> coef(d);
        for (std::size_t c = d; c-- > 0;) {
            double s = ys[c];
            for (std::size_t j = c + 1; j < d; ++j) s -= a[c * d + j] * coef[j];
            coef[c] = s / a[c * d + c];
        }
        const auto cv = coeff_vector(inst, m);
        double scale = 1.0;
        for (double v : cv.abs_sum) scale = std::max(scale, v);
        for (std::size_t s = 0; s <= m; ++s) EXPECT_NEAR(coef[s], cv.c[s], 1e-9 * scale) << "trial " << trial;
    }
}

TEST(MonteCarlo, EmptyInstanceExact) {
    const auto r = oracle::mc_estimate(build_instance(3, {}), 1000, 5);
    EXPECT_EQ(r.mean, 1.0);
    EXPECT_EQ(r.std_error, 0.0);
    EXPECT_EQ(r.samples, 1000u);
    EXPECT_EQ(r.seed, 5u);
    EXPECT_THROW(oracle::mc_estimate(build_instance(3, {}), 1, 5), std::invalid_argument);
}

TEST(MonteCarlo, TwoFormsWithinFourSigma) {
    const auto r = oracle::mc_estimate(two_forms(), 1'000'000, 12345);
    EXPECT_LE(std::abs(r.mean - 1.48), 4.0 * r.std_error);
    EXPECT_GT(r.std_error, 0.0);
}

TEST(MonteCarlo, SelbergProductOnly) {
    oracle::MCOptions opts;
    opts.product_only = true;
    const auto r = oracle::mc_estimate(selberg_instance(3), 1'000'000, 777, opts);
    EXPECT_LE(std::abs(r.mean - 12.0), 4.0 * r.std_error);
}

TEST(MonteCarlo, ReproducibleAcrossThreads) {
    oracle::MCOptions one, four;
    four.threads = 4;
    const auto a = oracle::mc_estimate(two_forms(), 100'003, 9, one);
    const auto b = oracle::mc_estimate(two_forms(), 100'003, 9, four);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    const auto c = oracle::mc_estimate(two_forms(), 100'003, 10, one);
    EXPECT_NE(a.mean, c.mean);
}

TEST(MonteCarlo, SamplerMoments) {
    // first two moments of the counter-based normals
    std::vector<double> x(5);
    double s1 = 0.0, s2 = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        oracle::gaussian_sample(42, static_cast<std::uint64_t>(i), x);
        for (double v : x) {
            s1 += v;
            s2 += v * v;
        }
    }
    const double count = 5.0 * n;
    EXPECT_NEAR(s1 / count, 0.0, 5e-3);
    EXPECT_NEAR(s2 / count, 1.0, 5e-3);
}

TEST(ZeroScan, AdmissibleHasNoZeros) {
    const auto z = oracle::zero_scan(two_forms(), 0.151, 64);
    const double lower = 1.0 - 0.151 * 0.4 - 0.151 * 0.151 * 0.08;
    EXPECT_GE(z.min_modulus, lower - 1e-15);
    EXPECT_EQ(z.points, 1u + 64u * 64u);
}

TEST(ZeroScan, FindsLinearRoot) {
    // p(ω) = 1 + ω·½trQ with trQ = 20: root at −0.1
    const auto inst = build_instance(2, {SymMatrix::identity(2, 10.0)});
    const double radius = 0.25;
    const std::size_t grid = 64;
    const auto z = oracle::zero_scan(inst, radius, grid);
    const double cell = radius / static_cast<double>(grid) + 0.1 * 2.0 * std::numbers::pi / static_cast<double>(grid);
    EXPECT_LE(std::abs(z.argmin - std::complex<double>(-0.1, 0.0)), cell);
    EXPECT_LE(z.min_modulus, 10.0 * cell);
}

TEST(MonteCarlo, RadialProductMatchesPlain) {
    // q = ½‖x‖² on ℝ³: the angular factor is the constant ½, so the radial estimate is exact
    const auto one = build_instance(3, {SymMatrix::identity(3, 1.0)});
    oracle::MCOptions opts;
    opts.product_only = true;
    const auto r = oracle::mc_estimate(one, 1000, 3, opts);
    EXPECT_NEAR(r.mean, 1.5, 1e-13);
    EXPECT_LE(r.std_error, 1e-13);

    const auto inst = selberg_instance(4);
    const auto radial = oracle::mc_estimate(inst, 400'000, 11, opts);
    opts.radial = false;
    const auto plain = oracle::mc_estimate(inst, 400'000, 11, opts);
    EXPECT_LE(std::abs(radial.mean - 288.0), 4.0 * radial.std_error);
    EXPECT_LT(radial.std_error, plain.std_error);
}
