#pragma once

// Membership criteria for the line problem: prime sieve, modified prime
// sieve, general prime sieve.  Thresholds are exact rationals and the pass
// decision is an exact comparison; nothing here touches a float.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "omb/factor.hpp"
#include "omb/primes.hpp"

namespace omb {

enum class SieveKind { prime, modified, general };

inline const char* to_string(SieveKind k) {
    switch (k) {
        case SieveKind::prime: return "prime";
        case SieveKind::modified: return "modified";
        case SieveKind::general: return "general";
    }
    return "?";
}

// The modified sieve's totient term as transcribed is phi(k); the lineage of
// the criterion suggests phi(k)/k.  Both are available and the pipeline pins
// whichever reproduces the published survivor count.
enum class TotientTerm { phi_k, phi_k_over_k };

// Partition of the radical's primes into k-part, phi-part, l-part, with every
// k-prime below every phi_i below every l_j.
struct SieveSplit {
    std::vector<mpz_class> k_primes;
    std::vector<mpz_class> phis;
    std::vector<mpz_class> ls;

    size_t s() const { return phis.size(); }
    size_t r() const { return ls.size(); }

    mpq_class delta() const {
        mpq_class d(1);
        for (const auto& p : phis) d -= mpq_class(1) / mpq_class(p);
        return d;
    }
    mpq_class epsilon() const {
        mpq_class e(0);
        for (const auto& l : ls) e += mpq_class(1) / mpq_class(l);
        return e;
    }
    mpz_class k_value() const {
        mpz_class k = 1;
        for (const auto& p : k_primes) k *= p;
        return k;
    }
    mpz_class phi_of_k() const {  // k is squarefree by construction
        mpz_class f = 1;
        for (const auto& p : k_primes) f *= p - 1;
        return f;
    }
    mpq_class m_ratio() const { return mpq_class(phi_of_k()) / mpq_class(k_value()); }
};

struct SieveOutcome {
    bool applicable = false;    // false means the +infinity sentinel
    mpq_class threshold;        // meaningful only when applicable
    bool passes = false;        // q > threshold, exact
    SieveSplit split;
    SieveKind kind = SieveKind::prime;
};

namespace detail {
inline mpq_class pow2_q(long e) {  // 2^e for possibly negative e
    mpq_class r(1);
    if (e >= 0)
        mpz_ui_pow_ui(r.get_num_mpz_t(), 2, static_cast<unsigned long>(e));
    else
        mpz_ui_pow_ui(r.get_den_mpz_t(), 2, static_cast<unsigned long>(-e));
    r.canonicalize();
    return r;
}
}  // namespace detail

// Prop-6.1 threshold R_G = (n-1)^2 * 2^{2(w-s)} * ((s-1)/delta + 2)^2.
inline mpq_class prime_sieve_threshold(uint64_t n, size_t omega, const mpq_class& delta, size_t s) {
    if (s > omega) throw std::invalid_argument("prime_sieve_threshold: s <= omega required");
    if (delta <= 0) throw std::invalid_argument("prime_sieve_threshold: delta > 0 required");
    mpq_class base = mpq_class(static_cast<long>(s) - 1) / delta + 2;
    mpq_class r = mpq_class(static_cast<unsigned long>(n - 1)) * mpq_class(static_cast<unsigned long>(n - 1));
    r *= detail::pow2_q(2 * (static_cast<long>(omega) - static_cast<long>(s)));
    r *= base * base;
    return r;
}

// Presumed mode: phi_i are the (omega+1-s)-th through omega-th primes.
inline mpq_class presumed_delta(size_t omega, size_t s) {
    mpq_class d(1);
    for (size_t i = omega + 1 - s; i <= omega; ++i)
        d -= mpq_class(1) / mpq_class(static_cast<unsigned long>(nth_prime(i)));
    return d;
}

// Minimum presumed-mode prime-sieve threshold over admissible s.
inline mpq_class presumed_prime_sieve_min(uint64_t n, size_t omega) {
    std::optional<mpq_class> best;
    for (size_t s = 0; s <= omega; ++s) {
        mpq_class d = presumed_delta(omega, s);
        if (d <= 0) break;  // delta only shrinks as s grows
        mpq_class t = prime_sieve_threshold(n, omega, d, s);
        if (!best || t < *best) best = t;
    }
    return *best;  // s = 0 always admissible
}

// Prop-6.3 threshold with r = 1.
inline std::optional<mpq_class> modified_sieve_threshold(uint64_t n, size_t omega, const SieveSplit& split,
                                                         TotientTerm tt) {
    if (split.r() != 1) throw std::invalid_argument("modified_sieve_threshold: exactly one l required");
    const mpq_class delta = split.delta();
    const mpq_class inv_l = mpq_class(1) / mpq_class(split.ls[0]);
    const mpq_class F = (tt == TotientTerm::phi_k) ? mpq_class(split.phi_of_k()) : split.m_ratio();
    const mpq_class denom = F * delta - inv_l;
    if (denom <= 0) return std::nullopt;  // criterion inapplicable for this split
    const size_t s = split.s();
    mpq_class num = detail::pow2_q(static_cast<long>(omega) - static_cast<long>(s) - 1) * F *
                        (mpq_class(static_cast<long>(s) - 1) + 2 * delta) +
                    1 - inv_l;
    mpq_class inner = num / denom - 1;
    mpq_class nn = mpq_class(static_cast<unsigned long>(n - 1));
    return nn * nn * inner * inner;
}

// Prop-6.4 threshold.
inline std::optional<mpq_class> general_sieve_threshold(uint64_t n, size_t omega, const SieveSplit& split) {
    const mpq_class delta = split.delta();
    const mpq_class eps = split.epsilon();
    const mpq_class m = split.m_ratio();
    const mpq_class denom = delta * m - eps;
    if (denom <= 0) return std::nullopt;
    const long s = static_cast<long>(split.s());
    const long r = static_cast<long>(split.r());
    mpq_class num = detail::pow2_q(static_cast<long>(omega) - s - r) * m * (mpq_class(s - 1) + 2 * delta) -
                    delta * m + r - eps;
    mpq_class inner = num / denom;
    mpq_class nn = mpq_class(static_cast<unsigned long>(n - 1));
    return nn * nn * inner * inner;
}

// Best split for a concrete q: the radical's primes are sorted ascending and
// cut into contiguous blocks k | phi | l, so only the block sizes vary.
inline SieveOutcome best_sieve(const mpz_class& q, uint64_t n, const FactorMultiset& fm, SieveKind kind,
                               TotientTerm tt = TotientTerm::phi_k) {
    std::vector<mpz_class> rad;
    for (const auto& [p, e] : fm.entries) rad.push_back(p);
    const size_t omega = rad.size();

    SieveOutcome out;
    out.kind = kind;
    auto consider = [&](const mpq_class& t, SieveSplit&& sp) {
        if (!out.applicable || t < out.threshold) {
            out.applicable = true;
            out.threshold = t;
            out.split = std::move(sp);
        }
    };
    auto make_split = [&](size_t s, size_t r) {
        SieveSplit sp;
        sp.k_primes.assign(rad.begin(), rad.begin() + (omega - s - r));
        sp.phis.assign(rad.begin() + (omega - s - r), rad.begin() + (omega - r));
        sp.ls.assign(rad.begin() + (omega - r), rad.end());
        return sp;
    };

    switch (kind) {
        case SieveKind::prime:
            for (size_t s = 0; s <= omega; ++s) {
                SieveSplit sp = make_split(s, 0);
                mpq_class d = sp.delta();
                if (d <= 0) break;  // adding smaller phis only shrinks delta
                consider(prime_sieve_threshold(n, omega, d, s), std::move(sp));
            }
            break;
        case SieveKind::modified:
            if (omega >= 2) {
                for (size_t s = 0; s + 1 <= omega; ++s) {
                    SieveSplit sp = make_split(s, 1);
                    if (auto t = modified_sieve_threshold(n, omega, sp, tt)) consider(*t, std::move(sp));
                }
            }
            break;
        case SieveKind::general:
            for (size_t r = 0; r <= omega; ++r) {
                for (size_t s = 0; s + r <= omega; ++s) {
                    SieveSplit sp = make_split(s, r);
                    if (auto t = general_sieve_threshold(n, omega, sp)) consider(*t, std::move(sp));
                }
            }
            break;
    }
    if (out.applicable) out.passes = mpq_class(q) > out.threshold;
    return out;
}

}  // namespace omb
