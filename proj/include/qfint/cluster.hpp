#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "qfint/compensated.hpp"
#include "qfint/errors.hpp"
#include "qfint/model.hpp"
#include "qfint/symmat.hpp"

namespace qfint {

/// Ordered tuple of distinct form indices with weight trace(Q_{k1}⋯Q_{ks})/(2s).
struct ClusterTerm {
    std::vector<std::size_t> tuple;
    double weight = 0.0;

    std::size_t level() const noexcept { return tuple.size(); }
};

/// Taylor coefficients c_0..c_kmax of p(z), plus enumeration counters.
struct CoeffVector {
    std::vector<double> c{1.0};
    /// Number of collections of total length s that were visited, per s.
    std::vector<std::uint64_t> collections{0};
    /// Σ |term| per level; with DBL_EPSILON it gives a rough roundoff scale.
    std::vector<double> abs_sum{1.0};
    std::uint64_t polymers = 0;

    std::size_t k_max() const noexcept { return c.size() - 1; }
    std::uint64_t total_collections() const noexcept {
        std::uint64_t t = 0;
        for (auto x : collections) t += x;
        return t;
    }
};

struct ClusterOptions {
    std::uint64_t max_collections = 100'000'000;
    unsigned threads = 1;
};

namespace detail {

/**
 * Depth-first search over closed walks with pairwise distinct vertices that
 * start at `start`.  A walk (k1..kL) is reported when every consecutive pair
 * and the closing pair (kL, k1) are adjacent; any other tuple has zero trace.
 * With `above_start` only vertices > start are used, which yields exactly one
 * representative per rotation class (the one beginning with its minimum).
 */
template <class Visit>
class ClosedWalker {
public:
    ClosedWalker(const Instance& inst, std::size_t max_len, bool above_start, Visit& visit)
        : inst_(inst), max_len_(max_len), above_start_(above_start), visit_(visit), used_(inst.m(), 0) {}

    void run(std::size_t start) {
        if (max_len_ == 0) return;
        path_.assign(1, start);
        used_[start] = 1;
        prefix_.clear();
        prefix_.emplace_back(inst_.matrix(start));
        visit_(path_, prefix_.back().trace());
        extend(start);
        used_[start] = 0;
    }

private:
    void extend(std::size_t last) {
        if (path_.size() >= max_len_) return;
        const std::size_t start = path_.front();
        for (std::size_t next : inst_.neighbors(last)) {
            if (used_[next] || (above_start_ && next < start)) continue;
            path_.push_back(next);
            used_[next] = 1;
            prefix_.push_back(prefix_.back());
            prefix_.back().multiply(inst_.matrix(next));
            if (inst_.adjacent(next, start)) visit_(path_, prefix_.back().trace());
            extend(next);
            prefix_.pop_back();
            used_[next] = 0;
            path_.pop_back();
        }
    }

    const Instance& inst_;
    std::size_t max_len_;
    bool above_start_;
    Visit& visit_;
    std::vector<char> used_;
    std::vector<std::size_t> path_;
    std::vector<SupportProduct> prefix_;
};

template <class Visit>
void for_each_closed_walk(const Instance& inst, std::size_t start, std::size_t max_len, bool above_start,
                          Visit&& visit) {
    ClosedWalker<std::remove_reference_t<Visit>> w(inst, max_len, above_start, visit);
    w.run(start);
}

// One rotation class: the canonical tuple (starting at its minimum) with
// weight ½·trace, the sum of trace/(2s) over its s rotations.
struct Polymer {
    std::vector<std::size_t> members;
    double weight;
};

struct PartitionTotals {
    std::vector<CompensatedSum> sums;
    std::vector<double> abs_sum;
    std::vector<std::uint64_t> count;
};

class CollectionEnumerator {
public:
    CollectionEnumerator(const std::vector<std::vector<Polymer>>& groups, std::size_t k_max, std::size_t m,
                         std::atomic<std::uint64_t>& budget_used, std::uint64_t cap, std::atomic<bool>& stop)
        : groups_(groups), k_max_(k_max), used_(m, 0), budget_used_(budget_used), cap_(cap), stop_(stop) {
        totals_.sums.resize(k_max + 1);
        totals_.abs_sum.assign(k_max + 1, 0.0);
        totals_.count.assign(k_max + 1, 0);
    }

    /// All collections whose first (smallest-minimum) polymer starts at v0.
    PartitionTotals run(std::size_t v0) {
        for (const Polymer& p : groups_[v0]) {
            if (p.members.size() > k_max_) continue;
            take(p, 1.0, 0, v0);
        }
        flush_budget();
        return std::move(totals_);
    }

private:
    void take(const Polymer& p, double product, std::size_t size, std::size_t v) {
        for (std::size_t i : p.members) used_[i] = 1;
        const double w = product * p.weight;
        const std::size_t s = size + p.members.size();
        record(s, w);
        descend(v + 1, s, w);
        for (std::size_t i : p.members) used_[i] = 0;
    }

    void descend(std::size_t from, std::size_t size, double product) {
        if (size >= k_max_ || stop_.load(std::memory_order_relaxed)) return;
        const std::size_t room = k_max_ - size;
        for (std::size_t v = from; v < groups_.size(); ++v) {
            if (used_[v]) continue;
            for (const Polymer& p : groups_[v]) {
                if (p.members.size() > room) continue;
                bool free = true;
                for (std::size_t i : p.members) {
                    if (used_[i]) {
                        free = false;
                        break;
                    }
                }
                if (free) take(p, product, size, v);
            }
        }
    }

    void record(std::size_t s, double w) {
        totals_.sums[s].add(w);
        totals_.abs_sum[s] += std::abs(w);
        ++totals_.count[s];
        if (budget_used_.load(std::memory_order_relaxed) + ++pending_ > cap_) {
            stop_.store(true);
            throw BudgetError(s, cap_);
        }
        if (pending_ >= 4096) flush_budget();
    }

    void flush_budget() {
        budget_used_.fetch_add(pending_, std::memory_order_relaxed);
        pending_ = 0;
    }

    const std::vector<std::vector<Polymer>>& groups_;
    std::size_t k_max_;
    std::vector<char> used_;
    std::atomic<std::uint64_t>& budget_used_;
    std::uint64_t cap_;
    std::atomic<bool>& stop_;
    std::uint64_t pending_ = 0;
    PartitionTotals totals_;
};

}  // namespace detail

/// Every ordered tuple of s distinct indices whose trace can be nonzero (closed walks in the interaction graph).
inline std::vector<ClusterTerm> enumerate_tuples(const Instance& inst, std::size_t s) {
    std::vector<ClusterTerm> out;
    if (s == 0 || s > inst.m()) return out;
    for (std::size_t v = 0; v < inst.m(); ++v) {
        detail::for_each_closed_walk(inst, v, s, false, [&](const std::vector<std::size_t>& path, double tr) {
            if (path.size() == s) out.push_back({path, tr / (2.0 * static_cast<double>(s))});
        });
    }
    return out;
}

/**
 * Coefficients c_0..c_kmax of p(z) = E ∏(1 + z q_k).
 *
 * c_s sums, over unordered collections of pairwise disjoint tuples with total
 * length s, the product of the tuple weights.  Tuples are handled per
 * rotation class with weight ½·trace, and collections are generated with
 * their classes sorted by minimum index so each is visited once.  The work
 * is split by the minimum index of the first class; partition subtotals are
 * reduced in index order, so the result does not depend on `threads`.
 */
inline CoeffVector coeff_vector(const Instance& inst, std::size_t k_max, const ClusterOptions& opts = {}) {
    const std::size_t m = inst.m();
    CoeffVector out;
    out.c.assign(k_max + 1, 0.0);
    out.c[0] = 1.0;
    out.collections.assign(k_max + 1, 0);
    out.abs_sum.assign(k_max + 1, 0.0);
    out.abs_sum[0] = 1.0;
    const std::size_t depth = std::min(k_max, m);
    if (depth == 0) return out;

    std::vector<std::vector<detail::Polymer>> groups(m);
    std::uint64_t polymers = 0;
    for (std::size_t v = 0; v < m; ++v) {
        detail::for_each_closed_walk(inst, v, depth, true, [&](const std::vector<std::size_t>& path, double tr) {
            if (++polymers > opts.max_collections) throw BudgetError(path.size(), opts.max_collections);
            if (tr != 0.0) groups[v].push_back({path, 0.5 * tr});
        });
    }
    out.polymers = polymers;

    std::vector<detail::PartitionTotals> parts(m);
    std::atomic<std::uint64_t> budget_used{0};
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t v = next.fetch_add(1);
            if (v >= m || stop.load()) return;
            try {
                detail::CollectionEnumerator e(groups, depth, m, budget_used, opts.max_collections, stop);
                parts[v] = e.run(v);
            } catch (...) {
                stop.store(true);
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(m)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t s = 1; s <= depth; ++s) {
        CompensatedSum total;
        for (const auto& p : parts) {
            if (p.sums.empty()) continue;
            total.add(p.sums[s]);
            out.abs_sum[s] += p.abs_sum[s];
            out.collections[s] += p.count[s];
        }
        out.c[s] = total.value();
        if (!std::isfinite(out.c[s]))
            throw NonFiniteError("coefficient c_" + std::to_string(s) + " is not finite");
    }
    return out;
}

/// c_s alone.  c_0 = 1 and c_s = 0 for s > m.
inline double taylor_coeff(const Instance& inst, std::size_t s, const ClusterOptions& opts = {}) {
    if (s == 0) return 1.0;
    if (s > inst.m()) return 0.0;
    return coeff_vector(inst, s, opts).c[s];
}

}  // namespace qfint
