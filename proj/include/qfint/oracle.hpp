#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qfint/compensated.hpp"
#include "qfint/errors.hpp"
#include "qfint/model.hpp"
#include "qfint/symmat.hpp"

// Ground-truth evaluators for small instances.  Nothing in here goes through
// the cluster enumeration; the exact engines work on dense blocks and plain
// set-partition sums so they can be used to check it.

namespace qfint::oracle {

inline constexpr std::size_t kMaxMomentForms = 10;
inline constexpr std::size_t kMaxValueForms = 6;

namespace detail {

// Dense |U|×|U| copies of the forms in S, U the union of their supports.
struct DenseBlocks {
    std::size_t dim = 0;
    std::vector<std::vector<double>> mats;
};

inline DenseBlocks dense_blocks(const Instance& inst, std::span<const std::size_t> subset) {
    std::vector<std::size_t> vars;
    for (std::size_t k : subset) {
        const auto& sup = inst.matrix(k).support();
        vars.insert(vars.end(), sup.begin(), sup.end());
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());

    DenseBlocks out;
    out.dim = vars.size();
    for (std::size_t k : subset) {
        const SymMatrix& q = inst.matrix(k);
        std::vector<double> b(out.dim * out.dim);
        for (std::size_t a = 0; a < out.dim; ++a)
            for (std::size_t c = 0; c < out.dim; ++c) b[a * out.dim + c] = q(vars[a], vars[c]);
        out.mats.push_back(std::move(b));
    }
    return out;
}

// For every nonempty B ⊆ S (as a bitmask over positions in S), the sum over
// all orderings (k1..kb) of B of trace(Q_k1⋯Q_kb)/(2b).
class ArrangementSums {
public:
    explicit ArrangementSums(const DenseBlocks& blocks)
        : b_(blocks), size_(blocks.mats.size()), acc_(std::size_t{1} << size_) {}

    std::vector<double> run() {
        const std::size_t d = b_.dim;
        for (std::size_t a = 0; a < size_; ++a) {
            stack_.assign(1, b_.mats[a]);
            visit(std::size_t{1} << a, 1, trace(stack_.back(), d));
            descend(std::size_t{1} << a, 1);
        }
        std::vector<double> w(acc_.size());
        for (std::size_t i = 0; i < acc_.size(); ++i) w[i] = acc_[i].value();
        return w;
    }

private:
    static double trace(const std::vector<double>& p, std::size_t d) {
        double t = 0.0;
        for (std::size_t i = 0; i < d; ++i) t += p[i * d + i];
        return t;
    }

    void visit(std::size_t mask, std::size_t len, double tr) {
        acc_[mask].add(tr / (2.0 * static_cast<double>(len)));
    }

    void descend(std::size_t mask, std::size_t len) {
        const std::size_t d = b_.dim;
        for (std::size_t a = 0; a < size_; ++a) {
            if (mask & (std::size_t{1} << a)) continue;
            const auto& p = stack_.back();
            const auto& q = b_.mats[a];
            const std::size_t next = mask | (std::size_t{1} << a);
            if (len + 1 == size_) {
                // leaf: trace(P·Q) = Σ_ij P_ij Q_ji
                double t = 0.0;
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) t += p[i * d + j] * q[j * d + i];
                visit(next, len + 1, t);
                continue;
            }
            std::vector<double> r(d * d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t l = 0; l < d; ++l) {
                    const double pil = p[i * d + l];
                    if (pil == 0.0) continue;
                    for (std::size_t j = 0; j < d; ++j) r[i * d + j] += pil * q[l * d + j];
                }
            stack_.push_back(std::move(r));
            visit(next, len + 1, trace(stack_.back(), d));
            descend(next, len + 1);
            stack_.pop_back();
        }
    }

    const DenseBlocks& b_;
    std::size_t size_;
    std::vector<CompensatedSum> acc_;
    std::vector<std::vector<double>> stack_;
};

// E ∏_{k∈B} q_k for every B ⊆ S: a sum over set partitions of B, each block
// contributing its arrangement sum.  Recursion peels off the block holding
// the lowest element.
inline std::vector<double> subset_moments(const Instance& inst, std::span<const std::size_t> subset) {
    const std::size_t full = (std::size_t{1} << subset.size()) - 1;
    std::vector<double> e(full + 1, 0.0);
    e[0] = 1.0;
    if (subset.empty()) return e;
    const auto w = ArrangementSums(dense_blocks(inst, subset)).run();
    for (std::size_t mask = 1; mask <= full; ++mask) {
        const std::size_t low = mask & (~mask + 1);
        const std::size_t rest = mask ^ low;
        CompensatedSum acc;
        // blocks B = low ∪ T for every T ⊆ rest
        for (std::size_t t = rest;; t = (t - 1) & rest) {
            acc.add(w[low | t] * e[rest ^ t]);
            if (t == 0) break;
        }
        e[mask] = acc.value();
    }
    return e;
}

inline void check_subset(const Instance& inst, std::span<const std::size_t> subset) {
    if (subset.size() > kMaxMomentForms)
        throw GuardError("exact_moment supports at most " + std::to_string(kMaxMomentForms) + " forms, got " +
                         std::to_string(subset.size()));
    std::vector<std::size_t> sorted(subset.begin(), subset.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("exact_moment: repeated form index");
    if (!sorted.empty() && sorted.back() >= inst.m())
        throw std::out_of_range("exact_moment: form index " + std::to_string(sorted.back()) + " out of range");
}

inline std::vector<std::size_t> all_forms(const Instance& inst) {
    std::vector<std::size_t> all(inst.m());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    return all;
}

inline void check_value_guard(const Instance& inst) {
    if (inst.m() > kMaxValueForms)
        throw GuardError("exact evaluation supports at most " + std::to_string(kMaxValueForms) + " forms, got m=" +
                         std::to_string(inst.m()));
}

}  // namespace detail

/// E ∏_{k∈S} q_k(x) for x standard Gaussian.
inline double exact_moment(const Instance& inst, std::span<const std::size_t> subset) {
    detail::check_subset(inst, subset);
    return detail::subset_moments(inst, subset).back();
}

inline double exact_moment(const Instance& inst, std::initializer_list<std::size_t> subset) {
    return exact_moment(inst, std::span<const std::size_t>(subset.begin(), subset.size()));
}

/// Coefficients a_s = Σ_{|S|=s} E ∏_{k∈S} q_k of p(z), s = 0..m.
inline std::vector<double> exact_polynomial(const Instance& inst) {
    detail::check_value_guard(inst);
    const auto all = detail::all_forms(inst);
    const auto e = detail::subset_moments(inst, all);
    std::vector<CompensatedSum> acc(inst.m() + 1);
    for (std::size_t mask = 0; mask < e.size(); ++mask) acc[std::popcount(mask)].add(e[mask]);
    std::vector<double> a(inst.m() + 1);
    for (std::size_t s = 0; s <= inst.m(); ++s) a[s] = acc[s].value();
    return a;
}

/// p(ω) = Σ_S ω^{|S|} E ∏_{k∈S} q_k.
inline std::complex<double> exact_value(const Instance& inst, std::complex<double> omega) {
    detail::check_value_guard(inst);
    const auto all = detail::all_forms(inst);
    const auto e = detail::subset_moments(inst, all);
    std::vector<std::complex<double>> powers(inst.m() + 1, 1.0);
    for (std::size_t s = 1; s <= inst.m(); ++s) powers[s] = powers[s - 1] * omega;
    std::complex<double> p = 0.0;
    for (std::size_t mask = 0; mask < e.size(); ++mask) p += powers[std::popcount(mask)] * e[mask];
    return p;
}

struct MCResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

struct MCOptions {
    unsigned threads = 1;
    /// Average ∏ q_k instead of ∏ (1 + q_k).
    bool product_only = false;
    /// With product_only: ∏ q_k(x) = ‖x‖^{2m} ∏ q_k(x/‖x‖), and the radius is
    /// independent of the direction, so E‖x‖^{2m} is applied exactly and only
    /// the bounded angular factor is sampled.  Off gives the plain average.
    bool radial = true;
};

/// Counter-based source of uniforms: the SplitMix64 output at position `counter` for state `seed`.
inline std::uint64_t counter_word(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform on (0, 1].
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>((counter_word(seed, counter) >> 11) + 1) * 0x1.0p-53;
}

/// Fills x with the standard normal vector for sample `index` (Box–Muller, two normals per counter pair).
inline void gaussian_sample(std::uint64_t seed, std::uint64_t index, std::span<double> x) {
    const std::uint64_t pairs = (x.size() + 1) / 2;
    const std::uint64_t base = index * pairs;
    for (std::uint64_t p = 0; p < pairs; ++p) {
        const double u1 = counter_uniform(seed, 2 * (base + p));
        const double u2 = counter_uniform(seed, 2 * (base + p) + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        x[2 * p] = r * std::cos(th);
        if (2 * p + 1 < x.size()) x[2 * p + 1] = r * std::sin(th);
    }
}

namespace detail {

struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double v) {
        ++count;
        const double d = v - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (v - mean);
    }

    // Chan et al. pairwise combination
    void merge(const Moments& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
        const double d = o.mean - mean;
        const double n = na + nb;
        mean += d * nb / n;
        m2 += o.m2 + d * d * na * nb / n;
        count += o.count;
    }
};

inline constexpr std::uint64_t kMcBlocks = 64;

}  // namespace detail

/**
 * Monte Carlo estimate of E ∏(1 + q_k).  The counter space is cut into a
 * fixed number of blocks whose moments are merged in block order, so the
 * output is bit-identical for any thread count.
 */
inline MCResult mc_estimate(const Instance& inst, std::uint64_t samples, std::uint64_t seed,
                            const MCOptions& opts = {}) {
    if (samples < 2) throw std::invalid_argument("mc_estimate: need at least 2 samples");
    const std::uint64_t nblocks = std::min<std::uint64_t>(detail::kMcBlocks, samples);
    std::vector<detail::Moments> blocks(nblocks);
    std::atomic<std::uint64_t> next{0};
    const bool radial = opts.product_only && opts.radial && inst.m() > 0;

    auto worker = [&] {
        std::vector<double> x(inst.n());
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            const std::uint64_t lo = b * samples / nblocks;
            const std::uint64_t hi = (b + 1) * samples / nblocks;
            detail::Moments mo;
            for (std::uint64_t i = lo; i < hi; ++i) {
                gaussian_sample(seed, i, x);
                if (radial) {
                    double r2 = 0.0;
                    for (double v : x) r2 += v * v;
                    const double inv = 1.0 / std::sqrt(r2);
                    for (double& v : x) v *= inv;
                }
                double prod = 1.0;
                for (const auto& f : inst.forms()) {
                    const double q = eval_form(f.matrix, x);
                    prod *= opts.product_only ? q : 1.0 + q;
                }
                mo.push(prod);
            }
            blocks[b] = mo;
        }
    };

    const unsigned threads = std::max(1u, opts.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    detail::Moments total;
    for (const auto& b : blocks) total.merge(b);
    MCResult r;
    r.samples = samples;
    r.seed = seed;
    const double var = total.m2 / static_cast<double>(samples - 1);
    // E‖x‖^{2m} = 2^m Γ(n/2 + m) / Γ(n/2) for the χ²_n radius
    const double scale = radial ? std::exp(static_cast<double>(inst.m()) * std::log(2.0) +
                                           std::lgamma(0.5 * static_cast<double>(inst.n()) + static_cast<double>(inst.m())) -
                                           std::lgamma(0.5 * static_cast<double>(inst.n())))
                                : 1.0;
    r.mean = scale * total.mean;
    r.std_error = scale * std::sqrt(var / static_cast<double>(samples));
    return r;
}

struct ZeroScanResult {
    double min_modulus = 0.0;
    std::complex<double> argmin;
    std::size_t points = 0;
};

/// min |p(ω)| over the polar grid radius·(i/grid)·e^{2πij/grid}, i = 0..grid, j = 0..grid−1.
/// A falsification harness: a positive minimum proves nothing off the grid.
inline ZeroScanResult zero_scan(const Instance& inst, double radius, std::size_t grid) {
    if (!(radius > 0.0) || grid == 0) throw std::invalid_argument("zero_scan: radius and grid must be positive");
    const auto a = exact_polynomial(inst);
    ZeroScanResult out;
    out.min_modulus = std::abs(a[0]);
    out.argmin = 0.0;
    for (std::size_t i = 0; i <= grid; ++i) {
        const double rho = radius * static_cast<double>(i) / static_cast<double>(grid);
        for (std::size_t j = 0; j < grid; ++j) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid);
            const std::complex<double> w = std::polar(rho, th);
            std::complex<double> p = 0.0;
            for (std::size_t s = a.size(); s-- > 0;) p = p * w + a[s];
            ++out.points;
            if (std::abs(p) < out.min_modulus) {
                out.min_modulus = std::abs(p);
                out.argmin = w;
            }
            if (i == 0) break;  // the centre is a single point
        }
    }
    return out;
}

/// Closed form for E ∏_{i<j} (x_i − x_j)² over `points` standard Gaussians in ℝ¹:
/// ∏_{j=1}^{points} Γ(1+j)/Γ(2) = ∏ j!.
inline double selberg_reference(std::size_t points) {
    double v = 1.0;
    for (std::size_t j = 1; j <= points; ++j) v *= std::tgamma(1.0 + static_cast<double>(j)) / std::tgamma(2.0);
    return v;
}

}  // namespace qfint::oracle
