#pragma once

// Lower bounds for x given omega(x^n - 1): the trivial product bound, the
// composition min-max bound over residue classes, its refinement by
// divisibility of a ramified prime, and the power-of-two specialisation.
// All arithmetic is exact; no bound value ever passes through a float.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "omb/cyclotomic.hpp"
#include "omb/primes.hpp"

namespace omb {

// Smallest integer r with r^d >= v.
inline mpz_class ceil_nth_root(const mpz_class& v, unsigned long d) {
    if (v < 1 || d < 1) throw std::invalid_argument("ceil_nth_root: v >= 1 and d >= 1 required");
    mpz_class r;
    const int exact = mpz_root(r.get_mpz_t(), v.get_mpz_t(), d);
    if (!exact) r += 1;
    return r;
}

// Largest integer r with r^d <= v.
inline mpz_class floor_nth_root(const mpz_class& v, unsigned long d) {
    if (v < 1 || d < 1) throw std::invalid_argument("floor_nth_root: v >= 1 and d >= 1 required");
    mpz_class r;
    mpz_root(r.get_mpz_t(), v.get_mpz_t(), d);
    return r;
}

struct Composition {
    std::vector<size_t> counts;  // (k_0, ..., k_m)
};

enum class BoundVariant { trivial, hybrid, ram_divides, ram_not_divides, pow2 };

inline const char* to_string(BoundVariant v) {
    switch (v) {
        case BoundVariant::trivial: return "trivial";
        case BoundVariant::hybrid: return "hybrid";
        case BoundVariant::ram_divides: return "ramification-divides";
        case BoundVariant::ram_not_divides: return "ramification-not-divides";
        case BoundVariant::pow2: return "pow2";
    }
    return "?";
}

struct BoundReport {
    mpz_class bound;
    Composition witness_composition;
    size_t witness_level = 0;  // the t attaining the inner max for the witness
    BoundVariant variant = BoundVariant::trivial;
    size_t omega = 0;
    NFactorization n_fact;
};

// Position of the chosen ramified prime phi_alpha inside the partition.
struct RamificationContext {
    size_t alpha;        // 1-based index of phi_alpha among the bases
    unsigned tau;        // class with phi_alpha in Pi_n^tau
    size_t rank_b;       // phi_alpha = r_{b,tau}
    uint64_t phi_alpha;
    bool divides;        // whether phi_alpha | x^n - 1
};

inline RamificationContext make_ramification_context(PrimePartition& part, uint64_t phi_alpha, bool divides) {
    const auto& nf = part.n_fact();
    size_t alpha = 0;
    for (size_t i = 0; i < nf.m(); ++i)
        if (nf.bases[i] == phi_alpha) alpha = i + 1;
    if (alpha == 0) throw std::invalid_argument("ramification: phi_alpha is not a prime factor of n");
    RamificationContext ctx;
    ctx.alpha = alpha;
    ctx.phi_alpha = phi_alpha;
    ctx.tau = classify_prime(phi_alpha, nf);
    ctx.rank_b = part.rank_in_class(ctx.tau, phi_alpha);
    ctx.divides = divides;
    return ctx;
}

struct HybridOptions {
    // Skip compositions that place every prime in class 0 (the k != omega
    // side constraint of the prime-case formulation).  Off by default; the
    // unconstrained minimum is never larger.
    bool prop32_constraint = false;
};

inline mpz_class primorial_range(size_t first, size_t last) {  // s_first * ... * s_last
    mpz_class r = 1;
    for (size_t i = first; i <= last; ++i) r *= mpz_class(nth_prime(i));
    return r;
}

inline BoundReport trivial_bound(uint64_t n, size_t omega) {
    if (n < 1 || omega < 1) throw std::invalid_argument("trivial_bound: n >= 1 and omega >= 1 required");
    BoundReport rep;
    rep.variant = BoundVariant::trivial;
    rep.omega = omega;
    rep.n_fact = NFactorization::of(n);
    rep.bound = ceil_nth_root(1 + primorial(omega), n);
    return rep;
}

namespace detail {

// Shared min-max search over compositions (k_0,...,k_m) summing to omega.
// `ram` augments class tau with a forced/excluded member and multiplies every
// level t >= alpha by phi_alpha^{a_alpha} in the divides case.
inline BoundReport composition_min_max(PrimePartition& part, size_t omega,
                                       const std::optional<RamificationContext>& ram,
                                       const HybridOptions& opt) {
    const NFactorization& nf = part.n_fact();
    const size_t m = nf.m();

    // Exponents 1/T(t): level t compares x^{prod_{k<=t} phi_k^{a_k}}.
    std::vector<uint64_t> level_exp(m + 1);
    level_exp[0] = 1;
    for (size_t t = 1; t <= m; ++t)
        level_exp[t] = level_exp[t - 1] * pow_u64_checked(nf.bases[t - 1], nf.exps[t - 1]);

    mpz_class ram_extra = 1;  // phi_alpha^{a_alpha}, applied at levels t >= alpha
    if (ram && ram->divides)
        mpz_pow_ui(ram_extra.get_mpz_t(), mpz_class(static_cast<unsigned long>(ram->phi_alpha)).get_mpz_t(),
                   nf.exps[ram->alpha - 1]);

    auto class_prod = [&](unsigned j, size_t k) -> mpz_class {
        if (ram && j == ram->tau) {
            if (ram->divides) return part.class_product(j, k, 0, ram->phi_alpha);
            return part.class_product(j, k, ram->phi_alpha, 0);
        }
        return part.class_product(j, k);
    };
    auto class_cap = [&](unsigned j, size_t want) -> size_t {
        uint64_t excl = (ram && !ram->divides && j == ram->tau) ? ram->phi_alpha : 0;
        return part.capacity(j, want, excl);
    };
    auto min_count = [&](unsigned j) -> size_t {
        return (ram && ram->divides && j == ram->tau) ? 1 : 0;
    };

    mpz_class best;
    bool have_best = false;
    std::vector<size_t> counts(m + 1, 0), best_counts;
    size_t best_level = 0;

    std::function<void(size_t, size_t, const mpz_class&, const mpz_class&, size_t)> rec =
        [&](size_t j, size_t rem, const mpz_class& prod_so_far, const mpz_class& max_so_far, size_t argmax) {
            if (have_best && j > 0 && max_so_far >= best) return;  // inner max only grows
            const bool last = (j == m);
            const size_t lo = last ? rem : min_count(static_cast<unsigned>(j));
            const size_t hi = rem;
            if (last && rem < min_count(static_cast<unsigned>(j))) return;
            for (size_t k = lo; k <= hi; ++k) {
                if (class_cap(static_cast<unsigned>(j), k) < k) break;  // class exhausted
                if (opt.prop32_constraint && j == 0 && m >= 1 && k == omega) continue;
                mpz_class prod = prod_so_far * class_prod(static_cast<unsigned>(j), k);
                const bool extra_here = ram && ram->divides && j >= ram->alpha;
                mpz_class term = 1 + (extra_here ? mpz_class(prod * ram_extra) : prod);
                mpz_class v = (j == 0) ? term : ceil_nth_root(term, static_cast<unsigned long>(level_exp[j]));
                // v grows with k, so once it reaches the incumbent no larger k helps.
                if (have_best && v >= best) break;
                mpz_class new_max = (j == 0 || v > max_so_far) ? v : max_so_far;
                size_t new_argmax = (j == 0 || v > max_so_far) ? j : argmax;
                if (last) {
                    if (!have_best || new_max < best) {
                        best = new_max;
                        have_best = true;
                        best_counts = counts;
                        best_counts[j] = k;
                        best_level = new_argmax;
                    }
                    continue;
                }
                counts[j] = k;
                rec(j + 1, rem - k, prod, new_max, new_argmax);
            }
        };

    rec(0, omega, mpz_class(1), mpz_class(0), 0);

    if (!have_best) throw std::runtime_error("composition search found no feasible composition");
    BoundReport rep;
    rep.bound = best;
    rep.witness_composition.counts = best_counts;
    rep.witness_level = best_level;
    rep.omega = omega;
    rep.n_fact = nf;
    rep.variant = !ram ? BoundVariant::hybrid
                       : (ram->divides ? BoundVariant::ram_divides : BoundVariant::ram_not_divides);
    return rep;
}

}  // namespace detail

inline BoundReport hybrid_bound(PrimePartition& part, size_t omega, const HybridOptions& opt = {}) {
    if (omega < 1) throw std::invalid_argument("hybrid_bound: omega >= 1 required");
    return detail::composition_min_max(part, omega, std::nullopt, opt);
}

inline BoundReport hybrid_bound(const NFactorization& nf, size_t omega, const HybridOptions& opt = {}) {
    PrimePartition part(nf);
    return hybrid_bound(part, omega, opt);
}

inline BoundReport ramification_bound(PrimePartition& part, size_t omega, const RamificationContext& ctx,
                                      const HybridOptions& opt = {}) {
    if (omega < 1) throw std::invalid_argument("ramification_bound: omega >= 1 required");
    return detail::composition_min_max(part, omega, ctx, opt);
}

enum class Pow2Strength { strong, weak };  // extra factor 2n vs n

inline BoundReport pow2_bound(unsigned a, size_t omega, Pow2Strength strength = Pow2Strength::strong) {
    if (a < 1 || omega < 1) throw std::invalid_argument("pow2_bound: a >= 1 and omega >= 1 required");
    if (a > 62) throw std::overflow_error("pow2_bound: 2^a overflows");
    const uint64_t n = uint64_t{1} << a;
    const uint64_t extra = (strength == Pow2Strength::strong) ? 2 * n : n;
    mpz_class even_branch = ceil_nth_root(1 + mpz_class(static_cast<unsigned long>(extra)) * primorial(omega), n);
    mpz_class odd_branch = ceil_nth_root(1 + primorial_range(2, omega + 1), n);

    BoundReport rep;
    rep.variant = BoundVariant::pow2;
    rep.omega = omega;
    rep.n_fact = NFactorization::of(n);
    if (even_branch <= odd_branch) {
        rep.bound = even_branch;
        rep.witness_level = 0;  // 2 | x^n - 1 branch
    } else {
        rep.bound = odd_branch;
        rep.witness_level = 1;  // 2 not a factor
    }
    return rep;
}

// The convention used by the applications: for n = 2^a the specialised
// power-of-two bound replaces the composition bound.
inline mpz_class hybrid_or_pow2(uint64_t n, size_t omega) {
    if (n >= 2 && (n & (n - 1)) == 0) {
        unsigned a = 0;
        for (uint64_t v = n; v > 1; v >>= 1) ++a;
        return pow2_bound(a, omega).bound;
    }
    return hybrid_bound(NFactorization::of(n), omega).bound;
}

}  // namespace omb
