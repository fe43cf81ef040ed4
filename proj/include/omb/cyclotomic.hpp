#pragma once

// Prime-index cyclotomic polynomials and the Z[x]-factorisation of x^n - 1
// into (x - 1) and a tower of Phi_{phi_i} evaluations.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "omb/primes.hpp"

namespace omb {

// Phi_phi(y) = 1 + y + ... + y^{phi-1} for prime phi.
inline mpz_class phi_eval(uint64_t phi, const mpz_class& y) {
    if (y < 1) throw std::invalid_argument("phi_eval: y must be >= 1");
    if (y == 1) return mpz_class(static_cast<unsigned long>(phi));
    mpz_class num;
    mpz_pow_ui(num.get_mpz_t(), y.get_mpz_t(), static_cast<unsigned long>(phi));
    num -= 1;
    mpz_class den = y - 1;
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

struct CyclotomicSplit {
    mpz_class base_value;            // x
    NFactorization n_fact;
    std::vector<mpz_class> tower;    // x_1 = x, ..., x_{m+1} = x^n
    std::vector<mpz_class> factors;  // (x - 1), then Phi_{phi_i}(x_i^{phi_i^{j-1}})

    mpz_class value() const {  // x^n - 1
        return tower.back() - 1;
    }
};

namespace detail {
// phi^e as a machine word, guarding against silent wraparound.
inline uint64_t pow_u64_checked(uint64_t b, unsigned e) {
    uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) {
        if (b != 0 && r > UINT64_MAX / b) throw std::overflow_error("exponent tower overflows a machine word");
        r *= b;
    }
    return r;
}
}  // namespace detail

inline CyclotomicSplit split_xn_minus_1(const mpz_class& x, const NFactorization& nf) {
    if (x < 2) throw std::invalid_argument("split_xn_minus_1: x must be >= 2");
    CyclotomicSplit s;
    s.base_value = x;
    s.n_fact = nf;
    s.tower.push_back(x);
    s.factors.push_back(x - 1);
    for (size_t i = 0; i < nf.m(); ++i) {
        const uint64_t phi = nf.bases[i];
        mpz_class xi = s.tower.back();
        for (unsigned j = 1; j <= nf.exps[i]; ++j) {
            mpz_class arg;
            const uint64_t e = detail::pow_u64_checked(phi, j - 1);
            mpz_pow_ui(arg.get_mpz_t(), xi.get_mpz_t(), static_cast<unsigned long>(e));
            s.factors.push_back(phi_eval(phi, arg));
        }
        mpz_class next;
        const uint64_t step = detail::pow_u64_checked(phi, nf.exps[i]);
        mpz_pow_ui(next.get_mpz_t(), xi.get_mpz_t(), static_cast<unsigned long>(step));
        s.tower.push_back(next);
    }
    return s;
}

// Whether phi | x^n - 1, for phi a prime factor of n.
inline bool ramified_divides(uint64_t phi, const mpz_class& x, const NFactorization& nf) {
    bool found = false;
    for (uint64_t b : nf.bases)
        if (b == phi) { found = true; break; }
    if (!found) throw std::invalid_argument("ramified_divides: phi does not divide n");
    mpz_class mod(static_cast<unsigned long>(phi));
    mpz_class r;
    mpz_powm(r.get_mpz_t(), x.get_mpz_t(), nf.n.get_mpz_t(), mod.get_mpz_t());
    return r == 1;
}

}  // namespace omb
