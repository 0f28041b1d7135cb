#pragma once

// Exact arithmetic over numbers (a + b*sqrt(d))/c for the two chains whose
// eigendata stay inside one quadratic field: Bernoulli schemes (pure
// rationals) and the unweighted golden-mean chain (d = 5). Used as an
// independent cross-check against the floating-point measure kernel.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "gbc/errors.hpp"
#include "gbc/shift_space.hpp"

namespace gbc::exact {

namespace detail {

inline long long narrow(__int128 v) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
        throw OverflowError("exact arithmetic exceeds 64-bit after reduction");
    return static_cast<long long>(v);
}

inline __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace detail

// (a + b*sqrt(d))/c with c > 0, gcd-reduced. d = 0 encodes a pure rational.
struct Quad {
    long long a = 0;
    long long b = 0;
    long long c = 1;
    long long d = 0;

    Quad() = default;
    Quad(long long a_, long long b_, long long c_, long long d_) { assign(a_, b_, c_, d_); }

    static Quad rational(long long num, long long den) { return Quad(num, 0, den, 0); }
    static Quad integer(long long n) { return Quad(n, 0, 1, 0); }
    static Quad root(long long d_) { return Quad(0, 1, 1, d_); }

    void assign(__int128 na, __int128 nb, __int128 nc, long long nd) {
        if (nc == 0) throw ValidationError("exact value with zero denominator");
        if (nb == 0) nd = 0;
        if (nd < 0) throw ValidationError("negative radicand");
        if (nc < 0) {
            na = -na;
            nb = -nb;
            nc = -nc;
        }
        __int128 g = detail::gcd128(detail::gcd128(na, nb), nc);
        if (g > 1) {
            na /= g;
            nb /= g;
            nc /= g;
        }
        a = detail::narrow(na);
        b = detail::narrow(nb);
        c = detail::narrow(nc);
        d = nd;
    }

    double value() const {
        const double sq = std::sqrt(static_cast<double>(d));
        if (a == 0 || b == 0 || (a > 0) == (b > 0))
            return (static_cast<double>(a) + static_cast<double>(b) * sq) / static_cast<double>(c);
        // a and b*sqrt(d) nearly cancel when the coefficients are large and of
        // opposite sign; (a^2 - b^2 d) is exact in integers, and the conjugate
        // denominator adds magnitudes instead of subtracting them.
        const __int128 norm = static_cast<__int128>(a) * a - static_cast<__int128>(b) * b * d;
        const double denom = (static_cast<double>(a) - static_cast<double>(b) * sq) * static_cast<double>(c);
        return static_cast<double>(norm) / denom;
    }

    bool is_zero() const { return a == 0 && b == 0; }

    friend long long unify_radicand(const Quad& x, const Quad& y) {
        if (x.d == y.d) return x.d;
        if (x.d == 0) return y.d;
        if (y.d == 0) return x.d;
        throw ValidationError("exact arithmetic over mixed radicands");
    }

    friend Quad operator+(const Quad& x, const Quad& y) {
        const long long d = unify_radicand(x, y);
        Quad r;
        r.assign(static_cast<__int128>(x.a) * y.c + static_cast<__int128>(y.a) * x.c,
                 static_cast<__int128>(x.b) * y.c + static_cast<__int128>(y.b) * x.c,
                 static_cast<__int128>(x.c) * y.c, d);
        return r;
    }

    friend Quad operator-(const Quad& x, const Quad& y) {
        const long long d = unify_radicand(x, y);
        Quad r;
        r.assign(static_cast<__int128>(x.a) * y.c - static_cast<__int128>(y.a) * x.c,
                 static_cast<__int128>(x.b) * y.c - static_cast<__int128>(y.b) * x.c,
                 static_cast<__int128>(x.c) * y.c, d);
        return r;
    }

    friend Quad operator*(const Quad& x, const Quad& y) {
        const long long d = unify_radicand(x, y);
        Quad r;
        r.assign(static_cast<__int128>(x.a) * y.a + static_cast<__int128>(x.b) * y.b * d,
                 static_cast<__int128>(x.a) * y.b + static_cast<__int128>(x.b) * y.a,
                 static_cast<__int128>(x.c) * y.c, d);
        return r;
    }

    friend Quad operator/(const Quad& x, const Quad& y) {
        const long long d = unify_radicand(x, y);
        // x/y = x * conj(y) * y.c / (x.c * (a^2 - b^2 d)) with conj(a+b*sqrt(d)) = a-b*sqrt(d)
        const __int128 norm = static_cast<__int128>(y.a) * y.a - static_cast<__int128>(y.b) * y.b * d;
        if (norm == 0) throw ValidationError("exact division by zero");
        Quad r;
        r.assign((static_cast<__int128>(x.a) * y.a - static_cast<__int128>(x.b) * y.b * d) * y.c,
                 (static_cast<__int128>(x.b) * y.a - static_cast<__int128>(x.a) * y.b) * y.c,
                 static_cast<__int128>(x.c) * norm, d);
        return r;
    }

    friend bool operator==(const Quad& x, const Quad& y) {
        if (x.is_zero() && y.is_zero()) return true;
        return static_cast<__int128>(x.a) * y.c == static_cast<__int128>(y.a) * x.c &&
               static_cast<__int128>(x.b) * y.c == static_cast<__int128>(y.b) * x.c &&
               unify_radicand(x, y) >= 0;
    }
};

// A stationary chain with exact entries: stationary vector and one-step
// matrix over the raw alphabet (these two cases never need block recoding).
struct ExactChain {
    std::vector<Quad> p;
    std::vector<std::vector<Quad>> P;
    int size() const { return static_cast<int>(p.size()); }
};

// Maximal-entropy chain of the golden-mean shift [[1,1],[1,0]]:
// P = [[1/L, 1/L^2],[1, 0]], p = ((5+sqrt5)/10, (5-sqrt5)/10), L the golden ratio.
inline ExactChain golden_mean_parry() {
    ExactChain g;
    g.p = {Quad(5, 1, 10, 5), Quad(5, -1, 10, 5)};
    g.P = {{Quad(-1, 1, 2, 5), Quad(3, -1, 2, 5)}, {Quad::integer(1), Quad::integer(0)}};
    return g;
}

// Product measure with rational weights p_i = num_i / den_i (must sum to 1).
inline ExactChain bernoulli(const std::vector<std::pair<long long, long long>>& probs) {
    ExactChain g;
    Quad total = Quad::integer(0);
    for (const auto& [num, den] : probs) {
        g.p.push_back(Quad::rational(num, den));
        total = total + g.p.back();
    }
    if (!(total == Quad::integer(1))) throw ValidationError("Bernoulli weights must sum to 1");
    for (int i = 0; i < g.size(); ++i) g.P.push_back(g.p);
    return g;
}

inline Quad measure(const ExactChain& g, const Word& w) {
    if (w.empty()) throw ValidationError("exact measure of an empty word");
    Quad acc = g.p[static_cast<std::size_t>(w[0])];
    for (std::size_t i = 1; i < w.size(); ++i)
        acc = acc * g.P[static_cast<std::size_t>(w[i - 1])][static_cast<std::size_t>(w[i])];
    return acc;
}

inline std::vector<std::vector<Quad>> matrix_power(const ExactChain& g, int e) {
    if (e < 0) throw ValidationError("negative exact matrix power");
    const int n = g.size();
    std::vector<std::vector<Quad>> acc(static_cast<std::size_t>(n),
                                       std::vector<Quad>(static_cast<std::size_t>(n), Quad::integer(0)));
    for (int i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Quad::integer(1);
    std::vector<std::vector<Quad>> sq = g.P;
    while (e > 0) {
        auto mul = [n](const std::vector<std::vector<Quad>>& x, const std::vector<std::vector<Quad>>& y) {
            std::vector<std::vector<Quad>> z(static_cast<std::size_t>(n),
                                             std::vector<Quad>(static_cast<std::size_t>(n), Quad::integer(0)));
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int j = 0; j < n; ++j)
                        z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                            x[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                                y[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            return z;
        };
        if (e & 1) acc = mul(acc, sq);
        e >>= 1;
        if (e > 0) sq = mul(sq, sq);
    }
    return acc;
}

// mu(word1 at some interval, word2 starting gap positions after word1 ends),
// gap >= 1 meaning adjacent start (one transition apart).
inline Quad joint(const ExactChain& g, const Word& w1, long long gap, const Word& w2) {
    if (gap < 1) throw ValidationError("exact joint expects separated words");
    Quad acc = measure(g, w1);
    const auto hop = matrix_power(g, static_cast<int>(gap));
    acc = acc * hop[static_cast<std::size_t>(w1.back())][static_cast<std::size_t>(w2.front())];
    for (std::size_t i = 1; i < w2.size(); ++i)
        acc = acc * g.P[static_cast<std::size_t>(w2[i - 1])][static_cast<std::size_t>(w2[i])];
    return acc;
}

}  // namespace gbc::exact
