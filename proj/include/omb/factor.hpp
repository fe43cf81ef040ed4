#pragma once

// Exact factorization: trial division, deterministic Miller-Rabin where a
// fixed witness set suffices, Pollard rho with Brent cycle detection for the
// rest.  q^n - 1 is factorised through its cyclotomic split so each factor
// stays small.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "omb/cyclotomic.hpp"
#include "omb/primes.hpp"

namespace omb {

struct EffortCapExceeded : std::runtime_error {
    explicit EffortCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct FactorConfig {
    uint64_t trial_limit = 100000;     // strip primes below this by division
    uint64_t effort_cap = 100000000;   // rho iterations per cofactor
    uint64_t seed_mix = 0;             // xor-ed into the per-value rho seed
};

inline bool is_prime(const mpz_class& N) {
    if (N < 2) return false;
    if (N.fits_ulong_p() || mpz_sizeinbase(N.get_mpz_t(), 2) <= 64) {
        uint64_t v = 0;
        mpz_class t = N;
        for (int i = 0; i < 64 && t > 0; i += 32) {
            v |= static_cast<uint64_t>(mpz_class(t % 4294967296).get_ui()) << i;
            t /= 4294967296;
        }
        return is_prime_u64(v);
    }
    // First thirteen prime bases: deterministic below 3.317e24.
    static const mpz_class mr_limit("3317044064679887385961981");
    const unsigned long bases13[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
    if (N < mr_limit) {
        mpz_class d = N - 1;
        unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
        d >>= s;
        for (unsigned long a : bases13) {
            mpz_class x;
            mpz_class base(a);
            mpz_powm(x.get_mpz_t(), base.get_mpz_t(), d.get_mpz_t(), N.get_mpz_t());
            if (x == 1 || x == N - 1) continue;
            bool composite = true;
            for (unsigned long i = 1; i < s; ++i) {
                x = (x * x) % N;
                if (x == N - 1) { composite = false; break; }
            }
            if (composite) return false;
        }
        return true;
    }
    // Beyond the deterministic range: BPSW-style probable-prime test.
    return mpz_probab_prime_p(N.get_mpz_t(), 32) > 0;
}

struct FactorMultiset {
    std::vector<std::pair<mpz_class, unsigned>> entries;  // (prime, multiplicity), ascending
    mpz_class value;

    size_t omega() const { return entries.size(); }

    mpz_class radical() const {
        mpz_class r = 1;
        for (const auto& [p, e] : entries) r *= p;
        return r;
    }

    // Sorts, merges duplicates, and asserts the product and primality
    // invariants; an incomplete or bogus split cannot be returned silently.
    static FactorMultiset from_entries(std::vector<std::pair<mpz_class, unsigned>> raw, const mpz_class& value) {
        std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        FactorMultiset fm;
        fm.value = value;
        for (auto& [p, e] : raw) {
            if (!fm.entries.empty() && fm.entries.back().first == p)
                fm.entries.back().second += e;
            else
                fm.entries.emplace_back(p, e);
        }
        mpz_class prod = 1;
        for (const auto& [p, e] : fm.entries) {
            if (e < 1) throw std::logic_error("FactorMultiset: zero multiplicity");
            if (!is_prime(p)) throw std::logic_error("FactorMultiset: non-prime entry " + p.get_str());
            mpz_class pe;
            mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e);
            prod *= pe;
        }
        if (prod != value)
            throw std::logic_error("FactorMultiset: product invariant violated for " + value.get_str());
        return fm;
    }
};

namespace detail {

inline uint64_t brent_rho_u64(uint64_t n, uint64_t c, uint64_t x0) {
    uint64_t y = x0, r = 1, q = 1, g = 1, x = 0, ys = 0;
    const uint64_t batch = 128;
    while (g == 1) {
        x = y;
        for (uint64_t i = 0; i < r; ++i) y = (mulmod_u64(y, y, n) + c) % n;
        uint64_t k = 0;
        while (k < r && g == 1) {
            ys = y;
            const uint64_t lim = std::min(batch, r - k);
            for (uint64_t i = 0; i < lim; ++i) {
                y = (mulmod_u64(y, y, n) + c) % n;
                q = mulmod_u64(q, x > y ? x - y : y - x, n);
            }
            g = std::gcd(q, n);
            k += lim;
        }
        r *= 2;
    }
    if (g == n) {
        g = 1;
        while (g == 1) {
            ys = (mulmod_u64(ys, ys, n) + c) % n;
            g = std::gcd(x > ys ? x - ys : ys - x, n);
        }
    }
    return g;
}

inline void factor_u64_into(uint64_t n, std::map<uint64_t, unsigned>& out) {
    if (n <= 1) return;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        while (n % p == 0) { ++out[p]; n /= p; }
    }
    if (n == 1) return;
    if (is_prime_u64(n)) { ++out[n]; return; }
    // Small composites: finish by trial division.
    if (n < (1ull << 40)) {
        for (uint64_t p = 41; p * p <= n; p += 2) {
            while (n % p == 0) { ++out[p]; n /= p; }
        }
        if (n > 1) ++out[n];
        return;
    }
    uint64_t c = 1 + (n % 1000);
    for (;;) {
        uint64_t g = brent_rho_u64(n, c, 2 + (c % 7));
        if (g != n && g != 1) {
            factor_u64_into(g, out);
            factor_u64_into(n / g, out);
            return;
        }
        ++c;
    }
}

struct RhoBudget {
    uint64_t remaining;
};

inline mpz_class brent_rho_mpz(const mpz_class& n, unsigned long c, unsigned long x0, RhoBudget& budget) {
    mpz_class y(x0), x, ys, q(1), g(1);
    uint64_t r = 1;
    const uint64_t batch = 128;
    auto step = [&](mpz_class& v) {
        v = (v * v + c) % n;
    };
    while (g == 1) {
        x = y;
        for (uint64_t i = 0; i < r; ++i) step(y);
        uint64_t k = 0;
        while (k < r && g == 1) {
            ys = y;
            const uint64_t lim = std::min(batch, r - k);
            if (budget.remaining < lim) throw EffortCapExceeded("rho effort cap exceeded for " + n.get_str());
            budget.remaining -= lim;
            for (uint64_t i = 0; i < lim; ++i) {
                step(y);
                q = (q * abs(x - y)) % n;
            }
            mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            k += lim;
        }
        r *= 2;
    }
    if (g == n) {
        g = 1;
        while (g == 1) {
            if (budget.remaining == 0) throw EffortCapExceeded("rho effort cap exceeded for " + n.get_str());
            --budget.remaining;
            step(ys);
            mpz_class d = abs(x - ys);
            mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
        }
    }
    return g;
}

inline void factor_mpz_into(const mpz_class& n, std::vector<std::pair<mpz_class, unsigned>>& out,
                            unsigned mult, const FactorConfig& cfg, RhoBudget& budget) {
    if (n == 1) return;
    if (is_prime(n)) { out.emplace_back(n, mult); return; }
    // Perfect powers first: rho converges poorly on p^k.
    if (mpz_perfect_power_p(n.get_mpz_t())) {
        for (unsigned long e = 2; e <= mpz_sizeinbase(n.get_mpz_t(), 2); ++e) {
            mpz_class root;
            if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), e)) {
                factor_mpz_into(root, out, mult * static_cast<unsigned>(e), cfg, budget);
                return;
            }
        }
    }
    // Deterministic seed derived from the value itself, for reproducibility.
    uint64_t seed = 0;
    {
        mpz_class t = n;
        for (int i = 0; i < 2; ++i) {
            seed = seed * 4294967296ull + mpz_class(t % 4294967296).get_ui();
            t /= 4294967296;
        }
    }
    seed ^= cfg.seed_mix;
    unsigned long c = 1 + static_cast<unsigned long>(seed % 997);
    for (;;) {
        mpz_class g = brent_rho_mpz(n, c, 2 + (c % 11), budget);
        if (g != 1 && g != n) {
            factor_mpz_into(g, out, mult, cfg, budget);
            factor_mpz_into(n / g, out, mult, cfg, budget);
            return;
        }
        ++c;
    }
}

}  // namespace detail

inline FactorMultiset factorize(const mpz_class& N, const FactorConfig& cfg = {}) {
    if (N < 1) throw std::invalid_argument("factorize: N >= 1 required");
    std::vector<std::pair<mpz_class, unsigned>> entries;
    if (N == 1) return FactorMultiset::from_entries(entries, N);

    if (mpz_sizeinbase(N.get_mpz_t(), 2) <= 63) {
        std::map<uint64_t, unsigned> m;
        detail::factor_u64_into(N.get_ui(), m);
        for (auto [p, e] : m) entries.emplace_back(mpz_class(static_cast<unsigned long>(p)), e);
        return FactorMultiset::from_entries(entries, N);
    }

    mpz_class rest = N;
    for (uint64_t p : PrimeCache::instance().upto(cfg.trial_limit)) {
        if (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
                mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
                ++e;
            }
            entries.emplace_back(mpz_class(static_cast<unsigned long>(p)), e);
        }
        if (rest == 1) break;
    }
    if (rest > 1) {
        detail::RhoBudget budget{cfg.effort_cap};
        detail::factor_mpz_into(rest, entries, 1, cfg, budget);
    }
    return FactorMultiset::from_entries(entries, N);
}

// Factorise q^n - 1 one cyclotomic factor at a time and merge.
inline FactorMultiset factor_qn_minus_1(const mpz_class& q, const NFactorization& nf, const FactorConfig& cfg = {}) {
    const CyclotomicSplit split = split_xn_minus_1(q, nf);
    std::vector<std::pair<mpz_class, unsigned>> entries;
    for (const mpz_class& f : split.factors) {
        if (f == 1) continue;
        FactorMultiset part = factorize(f, cfg);
        for (auto& e : part.entries) entries.push_back(e);
    }
    return FactorMultiset::from_entries(entries, split.value());
}

inline mpz_class euler_phi(const FactorMultiset& fm) {
    mpz_class r = 1;
    for (const auto& [p, e] : fm.entries) {
        mpz_class pe;
        mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e - 1);
        r *= pe * (p - 1);
    }
    return r;
}

}  // namespace omb
