#pragma once

// Degree-5 line problem pipeline: cutoffs, per-omega intervals, prime-power
// enumeration with exact factorisation, and the three-sieve cascade yielding
// the exception set.  The cutoff step also runs for general n.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <gmpxx.h>

#include "omb/bounds.hpp"
#include "omb/factor.hpp"
#include "omb/sieves.hpp"

namespace omb {

struct CutoffRow {
    uint64_t n = 0;
    size_t trivial_cutoff = 0;
    size_t hybrid_cutoff = 0;
    mpq_class trivial_qmax;
    mpq_class hybrid_qmax;

    // Percentage hybrid/trivial search space, rounded to nearest integer.
    long search_pct() const {
        mpq_class ratio = 100 * hybrid_qmax / trivial_qmax;
        mpz_class num = ratio.get_num() * 2 + ratio.get_den();
        mpz_class r = num / (2 * ratio.get_den());
        return r.get_si();
    }
};

namespace detail {

// Largest omega where the lower bound does not exceed the sieve threshold.
// Failures at consecutive omega values are tracked because the bound grows
// like primorial(omega)^{1/n} against the threshold's 4^omega.
inline size_t cutoff_scan(uint64_t n, bool hybrid, mpq_class* qmax_out) {
    size_t last_hit = 0;
    mpq_class last_qmax;
    size_t misses = 0;
    for (size_t omega = 1; misses < 30; ++omega) {
        mpz_class b = hybrid ? hybrid_or_pow2(n, omega) : trivial_bound(n, omega).bound;
        mpq_class s = presumed_prime_sieve_min(n, omega);
        if (mpq_class(b) <= s) {
            last_hit = omega;
            last_qmax = s;
            misses = 0;
        } else {
            ++misses;
        }
    }
    if (qmax_out) *qmax_out = last_qmax;
    return last_hit;
}

}  // namespace detail

inline CutoffRow cutoff_row(uint64_t n) {
    if (n < 2) throw std::invalid_argument("cutoff_row: n >= 2 required");
    CutoffRow row;
    row.n = n;
    row.trivial_cutoff = detail::cutoff_scan(n, false, &row.trivial_qmax);
    row.hybrid_cutoff = detail::cutoff_scan(n, true, &row.hybrid_qmax);
    return row;
}

struct OmegaInterval {
    size_t omega;
    mpz_class lower;  // bound value B(n, omega)
    mpz_class upper;  // floor of the minimized presumed sieve threshold
};

inline std::vector<OmegaInterval> hybrid_intervals(uint64_t n, size_t cutoff) {
    std::vector<OmegaInterval> out;
    for (size_t omega = 1; omega <= cutoff; ++omega) {
        OmegaInterval iv;
        iv.omega = omega;
        iv.lower = hybrid_or_pow2(n, omega);
        mpq_class s = presumed_prime_sieve_min(n, omega);
        iv.upper = s.get_num() / s.get_den();
        out.push_back(std::move(iv));
    }
    return out;
}

// All prime powers p^e in [lo, hi], ascending.
inline std::vector<uint64_t> prime_powers_in(uint64_t lo, uint64_t hi) {
    std::vector<uint64_t> out;
    if (hi < 2 || lo > hi) return out;
    if (lo < 2) lo = 2;
    for (uint64_t p : sieve_primes_range(lo, hi)) out.push_back(p);
    uint64_t root = 1;
    while ((root + 1) * (root + 1) <= hi) ++root;
    for (uint64_t p : sieve_primes(root)) {
        uint64_t v = p * p;
        for (;;) {
            if (v >= lo) out.push_back(v);
            if (v > hi / p) break;
            v *= p;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct Candidate {
    uint64_t q = 0;
    size_t omega = 0;
    FactorMultiset fm;  // of q^n - 1
};

struct CheckpointRecord {
    uint64_t q;
    size_t omega;
    std::vector<std::pair<mpz_class, unsigned>> entries;
};

inline void append_checkpoint(std::ostream& os, uint64_t q, const FactorMultiset& fm) {
    os << q << ' ' << fm.omega();
    for (const auto& [p, e] : fm.entries) os << ' ' << p.get_str() << '^' << e;
    os << '\n';
}

inline std::vector<CheckpointRecord> load_checkpoint(std::istream& is) {
    std::vector<CheckpointRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        CheckpointRecord rec;
        size_t count;
        if (!(ls >> rec.q >> count)) throw std::runtime_error("checkpoint: malformed line: " + line);
        for (size_t i = 0; i < count; ++i) {
            std::string tok;
            if (!(ls >> tok)) throw std::runtime_error("checkpoint: truncated line: " + line);
            auto caret = tok.find('^');
            if (caret == std::string::npos) throw std::runtime_error("checkpoint: bad factor token: " + tok);
            rec.entries.emplace_back(mpz_class(tok.substr(0, caret)),
                                     static_cast<unsigned>(std::stoul(tok.substr(caret + 1))));
        }
        rec.omega = count;
        out.push_back(std::move(rec));
    }
    return out;
}

struct EnumerationResult {
    std::vector<Candidate> candidates;            // ascending q
    std::map<size_t, size_t> bucket_counts;       // omega -> count
};

struct EnumerateConfig {
    size_t workers = 1;
    FactorConfig factor;
    std::string checkpoint_path;                  // empty disables checkpointing
    std::function<void(uint64_t, uint64_t)> progress;  // (done, total)
};

// Single pass over all prime powers up to the largest interval endpoint.  A
// value q belongs to at most one bucket since omega(q^n - 1) is a function of
// q; it qualifies when its omega's interval contains it.
inline EnumerationResult enumerate_candidates(uint64_t n, const std::vector<OmegaInterval>& intervals,
                                              const EnumerateConfig& cfg = {}) {
    const NFactorization nf = NFactorization::of(n);
    uint64_t hi = 0;
    for (const auto& iv : intervals)
        if (iv.upper.fits_ulong_p() && iv.upper.get_ui() > hi) hi = iv.upper.get_ui();

    auto in_bucket = [&](uint64_t q, size_t omega) {
        if (omega == 0 || omega > intervals.size()) return false;
        const auto& iv = intervals[omega - 1];
        return mpz_class(static_cast<unsigned long>(q)) >= iv.lower &&
               mpz_class(static_cast<unsigned long>(q)) <= iv.upper;
    };

    EnumerationResult res;
    // Resume: previously factored q values are reused verbatim.
    uint64_t resume_after = 0;
    std::vector<std::pair<uint64_t, FactorMultiset>> done;
    if (!cfg.checkpoint_path.empty()) {
        std::ifstream in(cfg.checkpoint_path);
        if (in) {
            for (auto& rec : load_checkpoint(in)) {
                mpz_class qn;
                mpz_ui_pow_ui(qn.get_mpz_t(), rec.q, static_cast<unsigned long>(n));
                FactorMultiset fm = FactorMultiset::from_entries(rec.entries, qn - 1);
                if (rec.q > resume_after) resume_after = rec.q;
                done.emplace_back(rec.q, std::move(fm));
            }
        }
    }

    std::vector<uint64_t> qs = prime_powers_in(2, hi);
    std::vector<uint64_t> todo;
    for (uint64_t q : qs)
        if (q > resume_after) todo.push_back(q);

    std::ofstream ckpt;
    if (!cfg.checkpoint_path.empty())
        ckpt.open(cfg.checkpoint_path, std::ios::app);

    const size_t workers = std::max<size_t>(1, cfg.workers);
    const size_t block = 4096;
    uint64_t processed = qs.size() - todo.size();
    for (size_t start = 0; start < todo.size(); start += block) {
        const size_t end = std::min(todo.size(), start + block);
        std::vector<FactorMultiset> fms(end - start);
        auto work = [&](size_t w) {
            for (size_t i = start + w; i < end; i += workers) {
                uint64_t q = todo[i];
                fms[i - start] = factor_qn_minus_1(mpz_class(static_cast<unsigned long>(q)), nf, cfg.factor);
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        for (size_t i = start; i < end; ++i) {
            if (ckpt.is_open()) append_checkpoint(ckpt, todo[i], fms[i - start]);
            done.emplace_back(todo[i], std::move(fms[i - start]));
        }
        if (ckpt.is_open()) ckpt.flush();
        processed += end - start;
        if (cfg.progress) cfg.progress(processed, qs.size());
    }

    std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [q, fm] : done) {
        const size_t omega = fm.omega();
        if (in_bucket(q, omega)) {
            res.bucket_counts[omega] += 1;
            res.candidates.push_back(Candidate{q, omega, std::move(fm)});
        }
    }
    return res;
}

struct CascadeResult {
    std::vector<uint64_t> prime_survivors;
    std::vector<uint64_t> modified_survivors;
    std::vector<uint64_t> general_survivors;  // this is the exception set
    std::map<size_t, std::array<size_t, 3>> per_omega;
};

// Apply the sieves in sequence; each stage only re-examines the previous
// stage's survivors.  A candidate that passes a sieve is a proven member and
// drops out; what is left at the end is the exception set.
inline CascadeResult sieve_cascade(uint64_t n, const std::vector<Candidate>& candidates,
                                   TotientTerm tt = TotientTerm::phi_k) {
    CascadeResult res;
    std::vector<const Candidate*> pool;
    for (const auto& c : candidates) pool.push_back(&c);

    auto stage = [&](SieveKind kind, std::vector<uint64_t>& survivors, size_t col) {
        std::vector<const Candidate*> next;
        for (const Candidate* c : pool) {
            SieveOutcome o = best_sieve(mpz_class(static_cast<unsigned long>(c->q)), n, c->fm, kind, tt);
            if (!(o.applicable && o.passes)) {
                survivors.push_back(c->q);
                res.per_omega[c->omega][col] += 1;
                next.push_back(c);
            }
        }
        pool = std::move(next);
    };
    stage(SieveKind::prime, res.prime_survivors, 0);
    stage(SieveKind::modified, res.modified_survivors, 1);
    stage(SieveKind::general, res.general_survivors, 2);
    return res;
}

}  // namespace omb
