#pragma once

// Small numeric kit: normal distribution helpers, a symmetric eigensolver,
// Gauss-Legendre quadrature, a seedable counter-stable PRNG and a rank-1
// lattice (Kronecker) sequence. Everything here is deterministic across
// platforms; no std::random distributions are used anywhere.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

namespace syncmark::num {

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse standard normal CDF. Acklam's rational approximation followed by
// one Halley step against erfc, good to ~1 ulp over (0,1).
inline double normal_quantile(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

// -- symmetric eigendecomposition (cyclic Jacobi) --------------------------

struct EigenSym {
    int n = 0;
    std::vector<double> values;  // ascending not guaranteed; raw Jacobi order
    std::vector<double> vectors; // column-major: vectors[j*n+i] = i-th comp of j-th vector
};

// Cyclic Jacobi for dense symmetric matrices, fine for the n <= 20 sizes
// used here. `a` is row-major and is consumed.
inline EigenSym jacobi_eigen(int n, std::vector<double> a) {
    EigenSym out;
    out.n = n;
    out.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) out.vectors[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-26) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cos_r = 1.0 / std::sqrt(t * t + 1.0);
                const double sin_r = t * cos_r;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = cos_r * akp - sin_r * akq;
                    at(k, q) = sin_r * akp + cos_r * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = cos_r * apk - sin_r * aqk;
                    at(q, k) = sin_r * apk + cos_r * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = out.vectors[static_cast<std::size_t>(p) * n + k];
                    const double vkq = out.vectors[static_cast<std::size_t>(q) * n + k];
                    out.vectors[static_cast<std::size_t>(p) * n + k] = cos_r * vkp - sin_r * vkq;
                    out.vectors[static_cast<std::size_t>(q) * n + k] = sin_r * vkp + cos_r * vkq;
                }
            }
        }
    }
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = at(i, i);
    return out;
}

// -- Gauss-Legendre quadrature on [0,1] ------------------------------------

struct Quadrature {
    std::vector<double> x, w;
};

inline Quadrature gauss_legendre01(int points) {
    Quadrature q;
    q.x.resize(points);
    q.w.resize(points);
    for (int i = 0; i < (points + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < points; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = points * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        q.x[i] = 0.5 * (1.0 - z);
        q.x[points - 1 - i] = 0.5 * (1.0 + z);
        q.w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
        q.w[points - 1 - i] = q.w[i];
    }
    return q;
}

// -- deterministic PRNG -----------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Collapses (seed, stream ids...) into one 64-bit stream seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0xA0761D6478BD642FULL;
    for (std::uint64_t p : parts) {
        h ^= p;
        std::uint64_t s = h;
        h = splitmix64(s) + 0x9E3779B97F4A7C15ULL;
    }
    std::uint64_t s = h;
    return splitmix64(s);
}

// xoshiro256** seeded through splitmix64. Output is specified bit-for-bit,
// so seeded runs reproduce everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, bound) via masked rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            const std::uint64_t v = next() & mask;
            if (v < bound) return v;
        }
    }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
            std::swap(p[i], p[j]);
        }
        return p;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

// Rank-1 Kronecker sequence with the generalized golden-ratio generator and
// a Cranley-Patterson shift drawn from the seed. Low-discrepancy enough for
// the orthant-mass estimation it backs.
class KroneckerSequence {
public:
    KroneckerSequence(int dim, std::uint64_t seed) : dim_(dim), alpha_(dim), shift_(dim) {
        double g = 1.6;
        for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (dim + 1));
        double acc = 1.0;
        for (int j = 0; j < dim; ++j) {
            acc /= g;
            alpha_[j] = acc;
        }
        Rng rng(seed);
        for (int j = 0; j < dim; ++j) shift_[j] = rng.uniform();
    }

    void point(std::uint64_t k, std::span<double> out) const {
        for (int j = 0; j < dim_; ++j) {
            const double v = shift_[j] + static_cast<double>(k) * alpha_[j];
            out[j] = v - std::floor(v);
        }
    }

    int dim() const { return dim_; }

private:
    int dim_;
    std::vector<double> alpha_;
    std::vector<double> shift_;
};

} // namespace syncmark::num
