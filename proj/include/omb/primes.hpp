#pragma once

// Prime generation and the residue-class partition of the primes induced by
// the prime factorisation of n.  Classes are indexed 0..m: a prime rho lands
// in class j > 0 when j is the largest base index with rho == 1 (mod phi_j),
// and in class 0 when no base satisfies that congruence.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace omb {

// Simple sieve of Eratosthenes over [2, limit].
inline std::vector<uint64_t> sieve_primes(uint64_t limit) {
    std::vector<uint64_t> out;
    if (limit < 2) return out;
    std::vector<uint8_t> comp(limit + 1, 0);
    for (uint64_t p = 2; p * p <= limit; ++p)
        if (!comp[p])
            for (uint64_t q = p * p; q <= limit; q += p) comp[q] = 1;
    for (uint64_t p = 2; p <= limit; ++p)
        if (!comp[p]) out.push_back(p);
    return out;
}

// Segmented sieve: primes in [lo, hi] inclusive.
inline std::vector<uint64_t> sieve_primes_range(uint64_t lo, uint64_t hi) {
    std::vector<uint64_t> out;
    if (hi < 2 || lo > hi) return out;
    if (lo < 2) lo = 2;
    uint64_t root = 1;
    while ((root + 1) * (root + 1) <= hi) ++root;
    const std::vector<uint64_t> base = sieve_primes(root);
    const uint64_t span = hi - lo + 1;
    std::vector<uint8_t> comp(span, 0);
    for (uint64_t p : base) {
        uint64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
        for (uint64_t q = start; q <= hi; q += p) comp[q - lo] = 1;
    }
    for (uint64_t i = 0; i < span; ++i)
        if (!comp[i] && lo + i >= 2) out.push_back(lo + i);
    return out;
}

// Process-wide cache of the ordered primes s_1, s_2, ...
class PrimeCache {
  public:
    static PrimeCache& instance() {
        static PrimeCache pc;
        return pc;
    }

    // i-th prime, 1-based.
    uint64_t nth(size_t i) {
        if (i == 0) throw std::invalid_argument("nth_prime: index is 1-based");
        std::lock_guard<std::mutex> lock(mu_);
        while (primes_.size() < i) grow();
        return primes_[i - 1];
    }

    // All primes <= limit, ascending.
    std::vector<uint64_t> upto(uint64_t limit) {
        std::lock_guard<std::mutex> lock(mu_);
        while (limit_ < limit) grow();
        auto end = std::upper_bound(primes_.begin(), primes_.end(), limit);
        return std::vector<uint64_t>(primes_.begin(), end);
    }

    uint64_t limit() {
        std::lock_guard<std::mutex> lock(mu_);
        return limit_;
    }

  private:
    PrimeCache() : limit_(1 << 16), primes_(sieve_primes(limit_)) {}

    void grow() {
        uint64_t next = limit_ * 2;
        auto more = sieve_primes_range(limit_ + 1, next);
        primes_.insert(primes_.end(), more.begin(), more.end());
        limit_ = next;
    }

    std::mutex mu_;
    uint64_t limit_;
    std::vector<uint64_t> primes_;
};

inline uint64_t nth_prime(size_t i) { return PrimeCache::instance().nth(i); }

// Product of the first k primes.
inline mpz_class primorial(size_t k) {
    mpz_class r = 1;
    for (size_t i = 1; i <= k; ++i) r *= mpz_class(nth_prime(i));
    return r;
}

// n = prod phi_i^{a_i} with bases ascending.
struct NFactorization {
    std::vector<uint64_t> bases;
    std::vector<unsigned> exps;
    mpz_class n;

    size_t m() const { return bases.size(); }

    static NFactorization of(uint64_t n) {
        if (n == 0) throw std::invalid_argument("NFactorization: n must be positive");
        NFactorization nf;
        nf.n = mpz_class(static_cast<unsigned long>(n));
        uint64_t rest = n;
        for (uint64_t p = 2; p * p <= rest; ++p) {
            if (rest % p == 0) {
                unsigned a = 0;
                while (rest % p == 0) { rest /= p; ++a; }
                nf.bases.push_back(p);
                nf.exps.push_back(a);
            }
        }
        if (rest > 1) {
            nf.bases.push_back(rest);
            nf.exps.push_back(1);
        }
        return nf;
    }

    uint64_t n_u64() const {
        if (!n.fits_ulong_p()) throw std::overflow_error("n does not fit in a machine word");
        return n.get_ui();
    }
};

namespace detail {
inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}
inline uint64_t powmod_u64(uint64_t b, uint64_t e, uint64_t m) {
    uint64_t r = m > 1 ? 1 : 0;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, b, m);
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    return r;
}
}  // namespace detail

// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // Sinclair's 7-witness set, deterministic below 2^64.
    for (uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
        uint64_t x = detail::powmod_u64(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = detail::mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

// Largest base index j with rho == 1 (mod phi_j), else 0.
inline unsigned classify_prime(uint64_t rho, const NFactorization& nf) {
    if (!is_prime_u64(rho)) throw std::invalid_argument("classify_prime: input is not prime");
    for (size_t j = nf.m(); j >= 1; --j)
        if (rho % nf.bases[j - 1] == 1) return static_cast<unsigned>(j);
    return 0;
}

// Ordered class lists Pi_n^j with prefix products, extended on demand.
// Class membership depends only on the bases of n, not the exponents.
class PrimePartition {
  public:
    explicit PrimePartition(NFactorization nf)
        : nf_(std::move(nf)), classes_(nf_.m() + 1), prefix_(nf_.m() + 1), gen_limit_(0) {
        for (auto& pp : prefix_) pp.push_back(mpz_class(1));
        extend_to(1 << 12);
    }

    const NFactorization& n_fact() const { return nf_; }
    size_t class_count() const { return nf_.m() + 1; }

    // When the class is provably finite, its exact size; otherwise nullopt.
    // For even n the congruence rho != 1 (mod 2) only admits rho = 2.
    std::optional<size_t> finite_size(unsigned j) const {
        if (j == 0 && !nf_.bases.empty() && nf_.bases[0] == 2) return 1;
        return std::nullopt;
    }

    // i-th smallest element of Pi_n^j, 1-based.
    uint64_t class_element(unsigned j, size_t i) {
        check_class(j);
        if (i == 0) throw std::invalid_argument("class_element: index is 1-based");
        if (auto fs = finite_size(j); fs && i > *fs)
            throw std::domain_error("class_element: class is finite and exhausted");
        while (classes_[j].size() < i) extend_to(gen_limit_ * 2);
        return classes_[j][i - 1];
    }

    // 1-based rank of p within class j; p must be a member.
    size_t rank_in_class(unsigned j, uint64_t p) {
        check_class(j);
        class_element(j, 1);
        while (classes_[j].empty() || classes_[j].back() < p) {
            if (finite_size(j)) break;
            extend_to(gen_limit_ * 2);
        }
        const auto& cl = classes_[j];
        auto it = std::lower_bound(cl.begin(), cl.end(), p);
        if (it == cl.end() || *it != p)
            throw std::invalid_argument("rank_in_class: prime is not in this class");
        return static_cast<size_t>(it - cl.begin()) + 1;
    }

    // Product of the k smallest members of Pi_n^j.  `exclude` removes one
    // member from the candidate list; `force` makes one member mandatory and
    // takes the k-1 smallest others.
    mpz_class class_product(unsigned j, size_t k, uint64_t exclude = 0, uint64_t force = 0) {
        check_class(j);
        if (exclude && force) throw std::invalid_argument("class_product: exclude and force are mutually exclusive");
        if (force && k == 0) throw std::invalid_argument("class_product: force requires k >= 1");
        if (k == 0) return mpz_class(1);
        if (exclude) {
            size_t b = rank_in_class(j, exclude);
            if (b <= k) return prefix(j, k + 1) / mpz_class(exclude);
            return prefix(j, k);
        }
        if (force) {
            size_t b = rank_in_class(j, force);
            if (b <= k) return prefix(j, k);
            return prefix(j, k - 1) * mpz_class(force);
        }
        return prefix(j, k);
    }

    // Number of elements available without violating a finite class.
    size_t capacity(unsigned j, size_t want, uint64_t exclude = 0) const {
        auto fs = finite_size(j);
        if (!fs) return want;
        size_t cap = *fs;
        if (exclude && cap > 0) --cap;
        return std::min(want, cap);
    }

    uint64_t generation_limit() const { return gen_limit_; }

  private:
    void check_class(unsigned j) const {
        if (j > nf_.m()) throw std::invalid_argument("class index out of range");
    }

    mpz_class prefix(unsigned j, size_t k) {
        class_element(j, k);  // ensure availability
        auto& pp = prefix_[j];
        while (pp.size() <= k) pp.push_back(pp.back() * mpz_class(classes_[j][pp.size() - 1]));
        return pp[k];
    }

    void extend_to(uint64_t new_limit) {
        if (new_limit <= gen_limit_) return;
        auto fresh = sieve_primes_range(gen_limit_ + 1, new_limit);
        for (uint64_t p : fresh) {
            unsigned j = 0;
            for (size_t i = nf_.m(); i >= 1; --i)
                if (p % nf_.bases[i - 1] == 1) { j = static_cast<unsigned>(i); break; }
            classes_[j].push_back(p);
        }
        gen_limit_ = new_limit;
    }

    NFactorization nf_;
    std::vector<std::vector<uint64_t>> classes_;
    std::vector<std::vector<mpz_class>> prefix_;
    uint64_t gen_limit_;
};

}  // namespace omb
