#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfint/errors.hpp"

namespace qfint {

/// (i, j, v) entry of a symmetric matrix; v lands at both (i, j) and (j, i).
struct Triplet {
    std::size_t i;
    std::size_t j;
    double v;
};

/**
 * Dense real symmetric matrix that also tracks its support, the set of
 * variables whose row (equivalently column) holds a nonzero entry.
 *
 * Entries are stored dense, but the products used by the cluster expansion
 * only ever touch rows and columns in the support.  A zero entry is the only
 * thing treated as zero; no thresholding is applied.
 */
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

    /// Symmetrizes a row-major n×n array as (A + Aᵀ)/2.
    static SymMatrix from_dense(std::size_t n, std::span<const double> rowmajor) {
        if (rowmajor.size() != n * n)
            throw DimensionError("from_dense: expected " + std::to_string(n * n) + " entries, got " +
                                 std::to_string(rowmajor.size()));
        SymMatrix q(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double aij = rowmajor[i * n + j];
                const double aji = rowmajor[j * n + i];
                const double s = i == j ? aij : 0.5 * (aij + aji);
                if (std::abs(s - aij) > 1e-12 || std::abs(s - aji) > 1e-12) q.symmetrized_ = true;
                q.a_[i * n + j] = s;
                q.a_[j * n + i] = s;
            }
        }
        q.refresh_support();
        return q;
    }

    static SymMatrix from_triplets(std::size_t n, std::span<const Triplet> entries) {
        SymMatrix q(n);
        for (const auto& t : entries) {
            if (t.i >= n || t.j >= n)
                throw DimensionError("triplet index (" + std::to_string(t.i) + "," + std::to_string(t.j) +
                                     ") out of range for n=" + std::to_string(n));
            q.a_[t.i * n + t.j] += t.v;
            if (t.i != t.j) q.a_[t.j * n + t.i] += t.v;
        }
        q.refresh_support();
        return q;
    }

    static SymMatrix identity(std::size_t n, double scale = 1.0) {
        SymMatrix q(n);
        for (std::size_t i = 0; i < n; ++i) q.a_[i * n + i] = scale;
        q.refresh_support();
        return q;
    }

    static SymMatrix diagonal(std::span<const double> d) {
        SymMatrix q(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) q.a_[i * d.size() + i] = d[i];
        q.refresh_support();
        return q;
    }

    std::size_t n() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
    std::span<const double> data() const noexcept { return a_; }
    const std::vector<std::size_t>& support() const noexcept { return support_; }
    bool is_zero() const noexcept { return support_.empty(); }
    /// True when from_dense had to move some entry by more than 1e-12.
    bool was_symmetrized() const noexcept { return symmetrized_; }

    SymMatrix scaled(double c) const {
        SymMatrix q = *this;
        for (double& v : q.a_) v *= c;
        q.refresh_support();
        return q;
    }

    double trace() const noexcept {
        double t = 0.0;
        for (std::size_t i : support_) t += a_[i * n_ + i];
        return t;
    }

    /// Nonzero upper-triangle entries in row-major order.
    std::vector<Triplet> triplets() const {
        std::vector<Triplet> out;
        for (std::size_t i : support_)
            for (std::size_t j : support_)
                if (j >= i && a_[i * n_ + j] != 0.0) out.push_back({i, j, a_[i * n_ + j]});
        return out;
    }

    friend bool operator==(const SymMatrix& x, const SymMatrix& y) { return x.n_ == y.n_ && x.a_ == y.a_; }

private:
    void refresh_support() {
        support_.clear();
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (a_[i * n_ + j] != 0.0) {
                    support_.push_back(i);
                    break;
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<double> a_;
    std::vector<std::size_t> support_;
    bool symmetrized_ = false;
};

/// q(x) = ½⟨Qx, x⟩, summed over the support only.
inline double eval_form(const SymMatrix& q, std::span<const double> x) {
    if (x.size() != q.n())
        throw DimensionError("eval_form: vector length " + std::to_string(x.size()) + " != n=" +
                             std::to_string(q.n()));
    double acc = 0.0;
    const auto& sup = q.support();
    for (std::size_t i : sup) {
        double row = 0.0;
        for (std::size_t j : sup) row += q(i, j) * x[j];
        acc += x[i] * row;
    }
    return 0.5 * acc;
}

struct EigenDecomposition {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column k (row-major n×n, entry [i*n+k]) is the vector for values[k]
};

namespace detail {

// Cyclic Jacobi on a dense row-major k×k symmetric block.  Deterministic:
// fixed sweep order, stops when the off-diagonal mass falls below
// a tenth of tol·‖A‖_F or after 100 sweeps.
inline EigenDecomposition jacobi(std::vector<double> a, std::size_t k, double tol, bool want_vectors) {
    std::vector<double> v;
    if (want_vectors) {
        v.assign(k * k, 0.0);
        for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 1.0;
    }
    double frob = 0.0;
    for (double x : a) frob += x * x;
    frob = std::sqrt(frob);
    const double target = tol * frob * 0.1;

    for (int sweep = 0; sweep < 100 && frob > 0.0; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) off += 2.0 * a[p * k + q] * a[p * k + q];
        if (std::sqrt(off) <= target) break;

        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = a[p * k + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < k; ++r) {
                    const double arp = a[r * k + p];
                    const double arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double apr = a[p * k + r];
                    const double aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
                a[p * k + q] = 0.0;
                a[q * k + p] = 0.0;
                if (want_vectors) {
                    for (std::size_t r = 0; r < k; ++r) {
                        const double vrp = v[r * k + p];
                        const double vrq = v[r * k + q];
                        v[r * k + p] = c * vrp - s * vrq;
                        v[r * k + q] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }

    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a[x * k + x] < a[y * k + y]; });
    EigenDecomposition out;
    out.values.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.values[i] = a[order[i] * k + order[i]];
    if (want_vectors) {
        out.vectors.resize(k * k);
        for (std::size_t col = 0; col < k; ++col)
            for (std::size_t r = 0; r < k; ++r) out.vectors[r * k + col] = v[r * k + order[col]];
    }
    return out;
}

}  // namespace detail

/// Full eigendecomposition (cyclic Jacobi).
inline EigenDecomposition symmetric_eigen(const SymMatrix& q, double tol = 1e-12) {
    return detail::jacobi(std::vector<double>(q.data().begin(), q.data().end()), q.n(), tol, true);
}

/// max |λ(Q)|.  Only the support block is diagonalized; everything off it is a zero eigenvalue.
inline double op_norm(const SymMatrix& q, double tol = 1e-10) {
    const auto& sup = q.support();
    const std::size_t k = sup.size();
    if (k == 0) return 0.0;
    std::vector<double> block(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) block[a * k + b] = q(sup[a], sup[b]);
    const auto eig = detail::jacobi(std::move(block), k, tol, false);
    return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

/**
 * Running product Q_{k1}·Q_{k2}⋯Q_{kj} kept as the block whose rows are
 * support(Q_{k1}) and whose columns are support(Q_{kj}); every other entry of
 * the n×n product is zero.  Extending by one factor costs
 * |rows|·|cols|·|support(next)|.
 */
class SupportProduct {
public:
    explicit SupportProduct(const SymMatrix& first)
        : n_(first.n()), rows_(first.support()), cols_(first.support()) {
        block_.resize(rows_.size() * cols_.size());
        for (std::size_t a = 0; a < rows_.size(); ++a)
            for (std::size_t b = 0; b < cols_.size(); ++b) block_[a * cols_.size() + b] = first(rows_[a], cols_[b]);
    }

    /// this ← this · next
    void multiply(const SymMatrix& next) {
        if (next.n() != n_)
            throw DimensionError("trace_product: mixed dimensions " + std::to_string(n_) + " and " +
                                 std::to_string(next.n()));
        const auto& ncols = next.support();
        std::vector<double> out(rows_.size() * ncols.size(), 0.0);
        for (std::size_t l = 0; l < cols_.size(); ++l) {
            const std::size_t var = cols_[l];
            for (std::size_t a = 0; a < rows_.size(); ++a) {
                const double pal = block_[a * cols_.size() + l];
                if (pal == 0.0) continue;
                double* orow = out.data() + a * ncols.size();
                for (std::size_t b = 0; b < ncols.size(); ++b) orow[b] += pal * next(var, ncols[b]);
            }
        }
        cols_ = ncols;
        block_ = std::move(out);
    }

    /// Σ_i P[i,i] over rows ∩ cols.
    double trace() const noexcept {
        double t = 0.0;
        std::size_t a = 0, b = 0;
        while (a < rows_.size() && b < cols_.size()) {
            if (rows_[a] < cols_[b]) {
                ++a;
            } else if (cols_[b] < rows_[a]) {
                ++b;
            } else {
                t += block_[a * cols_.size() + b];
                ++a;
                ++b;
            }
        }
        return t;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> cols_;
    std::vector<double> block_;
};

/// trace(Q_{k1} Q_{k2} ⋯ Q_{ks}), computed on supports only.
inline double trace_product(std::span<const SymMatrix* const> tuple) {
    if (tuple.empty()) throw DimensionError("trace_product: empty tuple");
    SupportProduct p(*tuple.front());
    for (std::size_t i = 1; i < tuple.size(); ++i) p.multiply(*tuple[i]);
    return p.trace();
}

inline double trace_product(std::initializer_list<const SymMatrix*> tuple) {
    return trace_product(std::span<const SymMatrix* const>(tuple.begin(), tuple.size()));
}

}  // namespace qfint
