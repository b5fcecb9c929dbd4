#pragma once

// Schoolbook reference arithmetic for small curves: plain int64, extended
// Euclid inverses, affine group law, brute-force square tables. Shares no
// code with the library.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

using i64 = std::int64_t;

inline i64 mod(i64 v, i64 q) {
    v %= q;
    return v < 0 ? v + q : v;
}

inline i64 inv(i64 a, i64 q) {
    i64 t = 0, nt = 1, r = q, nr = mod(a, q);
    while (nr != 0) {
        const i64 k = r / nr;
        t = std::exchange(nt, t - k * nt);
        r = std::exchange(nr, r - k * nr);
    }
    return mod(t, q);
}

struct Pt {
    bool inf = true;
    i64 x = 0;
    i64 y = 0;
    friend bool operator==(const Pt&, const Pt&) = default;
};

struct ToyCurve {
    i64 q, a, b;

    [[nodiscard]] i64 rhs(i64 x) const { return mod(mod(x * x, q) * x + a * x + b, q); }

    [[nodiscard]] Pt add(const Pt& p, const Pt& r) const {
        if (p.inf) return r;
        if (r.inf) return p;
        i64 lambda;
        if (p.x == r.x) {
            if (mod(p.y + r.y, q) == 0) return {};
            lambda = mod((3 * mod(p.x * p.x, q) + a) * inv(2 * p.y, q), q);
        } else {
            lambda = mod((r.y - p.y) * inv(r.x - p.x, q), q);
        }
        const i64 x3 = mod(lambda * lambda - p.x - r.x, q);
        const i64 y3 = mod(lambda * (p.x - x3) - p.y, q);
        return {false, x3, y3};
    }

    [[nodiscard]] Pt neg(const Pt& p) const { return p.inf ? p : Pt{false, p.x, mod(-p.y, q)}; }

    // k*p by repeated addition.
    [[nodiscard]] Pt repeat(std::uint64_t k, const Pt& p) const {
        Pt acc;
        for (std::uint64_t i = 0; i < k; ++i) acc = add(acc, p);
        return acc;
    }

    // orbit[k] = k*g for k in [0, order]; orbit.back() is infinity.
    [[nodiscard]] std::vector<Pt> orbit(const Pt& g) const {
        std::vector<Pt> out{Pt{}, g};
        while (!out.back().inf) out.push_back(add(out.back(), g));
        return out;
    }
};

// roots[v] lists every y in [0, q) with y^2 = v.
inline std::vector<std::vector<i64>> square_roots(i64 q) {
    std::vector<std::vector<i64>> roots(static_cast<std::size_t>(q));
    for (i64 y = 0; y < q; ++y) roots[static_cast<std::size_t>(mod(y * y, q))].push_back(y);
    return roots;
}

}  // namespace oracle
