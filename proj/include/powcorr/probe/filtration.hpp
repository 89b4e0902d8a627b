#pragma once

// The dyadic filtration on [A, A+1): mu_k(x) is the integer with
// 2^mu <= x^((k+1/2)K) < 2^(mu+1), and the atoms of F_k are
// [z_i, z_i + 2^-mu_k(z_i)) starting from z_0 = A.
//
// mu_k is non-decreasing in x, so the recurrence is stored run-length
// encoded: each segment is a maximal run of equal step size.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"

namespace powcorr {

/// mu_k(x), decided exactly via 2^(2 mu) <= x^((2k+1)K) < 2^(2 mu + 2).
inline long mu(const DyadicRational& x, long k, long block_len) {
    if (x <= DyadicRational{1}) throw DomainError("mu needs x > 1");
    if (k < 1 || block_len < 1) throw DomainError("mu needs k >= 1 and K >= 1");
    const auto e = static_cast<unsigned long>((2 * k + 1) * block_len);
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), x.numerator().get_mpz_t(), e);
    // floor(log2(x^e)) = bitlen(a^e) - 1 - b e
    const long t = static_cast<long>(mpz_sizeinbase(p.get_mpz_t(), 2)) - 1 -
                   static_cast<long>(x.exponent() * e);
    return t >= 0 ? t / 2 : -((-t + 1) / 2);
}

struct FiltrationSegment {
    DyadicRational start;
    long mu = 0;
    std::uint64_t count = 0;  // atoms [start + i 2^-mu, start + (i+1) 2^-mu), i < count

    DyadicRational step() const { return DyadicRational{1}.ldexp(-mu); }
    DyadicRational end() const { return start + step() * DyadicRational{static_cast<long>(count)}; }
};

inline constexpr std::uint64_t kDefaultAtomCap = std::uint64_t{1} << 40;

class FiltrationPartition {
public:
    FiltrationPartition() = default;

    const DyadicRational& origin() const { return a_; }
    long block() const { return k_; }
    long block_len() const { return block_len_; }
    const std::vector<FiltrationSegment>& segments() const { return segments_; }

    std::uint64_t atom_count() const { return offsets_.empty() ? 0 : offsets_.back(); }

    /// z_i for i = 0..atom_count().
    DyadicRational point(std::uint64_t i) const {
        if (i > atom_count()) throw DomainError("filtration point index out of range");
        if (i == atom_count()) return segments_.back().end();
        const auto s = segment_of(i);
        const auto& seg = segments_[s];
        return seg.start + seg.step() * DyadicRational{static_cast<long>(i - offsets_[s])};
    }

    long mu_of_atom(std::uint64_t i) const { return segments_[segment_of(i)].mu; }

    /// [z_i, z_{i+1})
    std::pair<DyadicRational, DyadicRational> atom(std::uint64_t i) const {
        if (i >= atom_count()) throw DomainError("atom index out of range");
        const auto s = segment_of(i);
        const auto& seg = segments_[s];
        const DyadicRational lo = seg.start + seg.step() * DyadicRational{static_cast<long>(i - offsets_[s])};
        return {lo, lo + seg.step()};
    }

    /// Index of the atom containing x in [A, A+1).
    std::uint64_t atom_index(const DyadicRational& x) const {
        if (x < a_ || x >= a_ + DyadicRational{1}) throw DomainError("point outside [A, A+1)");
        std::size_t s = segments_.size() - 1;
        while (s > 0 && segments_[s].start > x) --s;
        const auto& seg = segments_[s];
        mpz_class q;
        const DyadicRational off = (x - seg.start).ldexp(seg.mu);
        q = off.floor();
        return offsets_[s] + q.get_ui();
    }

    /// Materialized z_0..z_{N_k}; throws past `cap` points.
    std::vector<DyadicRational> points(std::uint64_t cap = 1u << 22) const {
        if (atom_count() + 1 > cap) throw ResourceError("filtration has " + std::to_string(atom_count() + 1) + " points, cap " + std::to_string(cap));
        std::vector<DyadicRational> out;
        out.reserve(atom_count() + 1);
        for (const auto& seg : segments_) {
            DyadicRational z = seg.start;
            const DyadicRational h = seg.step();
            for (std::uint64_t i = 0; i < seg.count; ++i) {
                out.push_back(z);
                z = z + h;
            }
        }
        out.push_back(segments_.back().end());
        return out;
    }

    /// mu along the atoms.
    std::vector<long> mus(std::uint64_t cap = 1u << 22) const {
        if (atom_count() > cap) throw ResourceError("filtration too large to materialize");
        std::vector<long> out;
        for (const auto& seg : segments_) out.insert(out.end(), seg.count, seg.mu);
        return out;
    }

    /// z is one of z_0..z_{N_k}.
    bool contains_point(const DyadicRational& z) const {
        if (z < a_ || z > a_ + DyadicRational{1}) return false;
        for (std::size_t s = segments_.size(); s-- > 0;) {
            const auto& seg = segments_[s];
            if (z < seg.start) continue;
            const DyadicRational off = (z - seg.start).ldexp(seg.mu);
            return off.is_integer() && off.floor() <= static_cast<long>(seg.count);
        }
        return false;
    }

private:
    friend FiltrationPartition filtration(const DyadicRational&, long, long, std::uint64_t);

    std::size_t segment_of(std::uint64_t i) const {
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
        return static_cast<std::size_t>(it - offsets_.begin()) - 1;
    }

    DyadicRational a_;
    long k_ = 0;
    long block_len_ = 0;
    std::vector<FiltrationSegment> segments_;
    std::vector<std::uint64_t> offsets_;  // atoms before each segment, plus the total
};

/// F_k on [A, A+1) for dyadic A > 1.
inline FiltrationPartition filtration(const DyadicRational& a, long k, long block_len,
                                      std::uint64_t atom_cap = kDefaultAtomCap) {
    if (a <= DyadicRational{1}) throw DomainError("filtration needs A > 1");
    FiltrationPartition fp;
    fp.a_ = a;
    fp.k_ = k;
    fp.block_len_ = block_len;
    const DyadicRational end = a + DyadicRational{1};
    DyadicRational z = a;
    std::uint64_t total = 0;
    fp.offsets_.push_back(0);
    while (z < end) {
        const long m = mu(z, k, block_len);
        if (m < 0) throw DomainError("negative mu; the recurrence needs x^((k+1/2)K) >= 1");
        const DyadicRational h = DyadicRational{1}.ldexp(-m);
        // Remaining length in units of h is an integer: earlier steps were
        // coarser powers of two and A + 1 - A = 1.
        const DyadicRational rem_units = (end - z).ldexp(m);
        if (!rem_units.is_integer()) throw DomainError("recurrence does not align with A+1 (A finer than 2^-mu)");
        const mpz_class remaining = rem_units.floor();
        // Largest c in [1, remaining] with mu(z + (c-1) h) == m.
        mpz_class lo = 1, hi = remaining;
        while (lo < hi) {
            mpz_class mid = (lo + hi + 1) / 2;
            const DyadicRational probe = z + h * DyadicRational{mpz_class(mid - 1), 0};
            if (mu(probe, k, block_len) == m) lo = mid;
            else hi = mid - 1;
        }
        const std::uint64_t count = lo.get_ui();
        fp.segments_.push_back({z, m, count});
        total += count;
        if (total > atom_cap)
            throw ResourceError("filtration atom count exceeds cap " + std::to_string(atom_cap));
        fp.offsets_.push_back(total);
        z = z + h * DyadicRational{mpz_class(lo), 0};
    }
    return fp;
}

/// Every point of `coarse` is a point of `fine` (F_coarse is a sub-sigma-algebra of F_fine).
inline bool refines(const FiltrationPartition& coarse, const FiltrationPartition& fine) {
    if (!(coarse.origin() == fine.origin())) return false;
    const auto& fsegs = fine.segments();
    for (const auto& cs : coarse.segments()) {
        const DyadicRational ch = cs.step();
        const DyadicRational cend = cs.end();
        // Walk the fine segments overlapping [cs.start, cend].
        for (const auto& fs : fsegs) {
            const DyadicRational fend = fs.end();
            if (fend < cs.start || fs.start > cend) continue;
            const DyadicRational lo = std::max(cs.start, fs.start);
            const DyadicRational hi = std::min(cend, fend);
            // First coarse point >= lo.
            const DyadicRational units = (lo - cs.start).ldexp(cs.mu);
            mpz_class first = units.floor();
            if (!units.is_integer()) first += 1;
            const DyadicRational z0 = cs.start + ch * DyadicRational{first, 0};
            if (z0 > hi) continue;
            if (!(z0 - fs.start).ldexp(fs.mu).is_integer()) return false;
            if (z0 + ch <= hi && cs.mu > fs.mu) return false;  // coarse step finer than fine step
        }
    }
    return true;
}

}  // namespace powcorr
