#pragma once

// Single-period multi-security price-formation model: per-security terminal
// moves of +/-delta with equal probability, pairwise-correlated across
// securities; one informative unit order per security; liquidity providers
// quote and transact at the Bayesian fair price of the terminal value.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace syncmark {

inline constexpr int kMaxJointDim = 20; // explicit pmf holds 2^n atoms
inline constexpr double kSumTol = 1e-12;
inline constexpr double kMomentTol = 1e-9;

struct SecuritySpec {
    std::string symbol;
    double mid = 0.0;   // initial midpoint price
    double delta = 0.0; // terminal move magnitude
    double phi = 0.0;   // informed-order probability

    double up() const { return mid + delta; }
    double down() const { return mid - delta; }

    void validate() const {
        if (!(delta > 0.0)) throw ValidationError(symbol + ".delta", "must be > 0");
        if (!(phi >= 0.5 && phi < 1.0))
            throw ValidationError(symbol + ".phi", "must satisfy 0.5 <= phi < 1");
        if (!(mid - delta > 0.0))
            throw ValidationError(symbol + ".mid", "mid - delta must be > 0");
    }
};

inline void validate_specs(std::span<const SecuritySpec> specs) {
    if (specs.empty()) throw ValidationError("securities", "at least one security required");
    for (const auto& s : specs) s.validate();
    for (std::size_t i = 0; i < specs.size(); ++i)
        for (std::size_t j = i + 1; j < specs.size(); ++j)
            if (specs[i].symbol == specs[j].symbol)
                throw ValidationError("securities", "duplicate symbol " + specs[i].symbol);
}

// Symmetric matrix of pairwise terminal-move correlations. set() writes both
// triangles so symmetry is exact by construction.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    explicit CorrelationMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
        for (int i = 0; i < n; ++i) a_[idx(i, i)] = 1.0;
    }

    int size() const { return n_; }

    double operator()(int i, int j) const { return a_[idx(i, j)]; }

    void set(int i, int j, double v) {
        a_[idx(i, j)] = v;
        a_[idx(j, i)] = v;
    }

    void validate() const {
        for (int i = 0; i < n_; ++i) {
            if (a_[idx(i, i)] != 1.0)
                throw ValidationError("rho[" + std::to_string(i) + "][" + std::to_string(i) + "]",
                                      "diagonal must be exactly 1");
            for (int j = i + 1; j < n_; ++j) {
                const double v = a_[idx(i, j)];
                if (v != a_[idx(j, i)])
                    throw ValidationError("rho[" + std::to_string(j) + "][" + std::to_string(i) + "]",
                                          "matrix must be exactly symmetric");
                if (!(std::abs(v) <= 1.0))
                    throw ValidationError("rho[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                          "correlations must lie in [-1, 1]");
            }
        }
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_ = 0;
    std::vector<double> a_;
};

// Probability mass over terminal sign vectors in {+1,-1}^n. Atom index is a
// bitmask; bit i set means security i ends up.
struct JointOutcomePMF {
    int n = 0;
    std::vector<double> prob;

    double marginal_up(int i) const {
        double p = 0.0;
        for (std::size_t s = 0; s < prob.size(); ++s)
            if (s >> i & 1) p += prob[s];
        return p;
    }

    // E[s_i s_j] with s in {+1,-1}.
    double pair_moment(int i, int j) const {
        double m = 0.0;
        for (std::size_t s = 0; s < prob.size(); ++s) {
            const int si = (s >> i & 1) ? 1 : -1;
            const int sj = (s >> j & 1) ? 1 : -1;
            m += prob[s] * si * sj;
        }
        return m;
    }
};

enum class Side : std::uint8_t { Buy, Sell };

inline char side_code(Side s) { return s == Side::Buy ? 'B' : 'S'; }
inline Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }

struct Order {
    int security = 0;
    Side side = Side::Buy;
};

// Liquidity-provider belief over terminal sign vectors.
struct Posterior {
    int n = 0;
    std::vector<double> prob;

    static Posterior from_prior(const JointOutcomePMF& pmf) { return Posterior{pmf.n, pmf.prob}; }

    double prob_up(int i) const {
        double p = 0.0;
        for (std::size_t s = 0; s < prob.size(); ++s)
            if (s >> i & 1) p += prob[s];
        return p;
    }
};

// P(order | sign vector): phi when the side agrees with the security's
// terminal direction, 1 - phi otherwise.
inline double order_likelihood(const Order& order, std::uint32_t signs,
                               std::span<const SecuritySpec> specs) {
    const SecuritySpec& spec = specs[static_cast<std::size_t>(order.security)];
    const bool up = (signs >> order.security) & 1;
    const bool agrees = (order.side == Side::Buy) == up;
    return agrees ? spec.phi : 1.0 - spec.phi;
}

inline Posterior posterior_update(const Posterior& belief, const Order& order,
                                  std::span<const SecuritySpec> specs) {
    Posterior out{belief.n, std::vector<double>(belief.prob.size())};
    const SecuritySpec& spec = specs[static_cast<std::size_t>(order.security)];
    const double agree = spec.phi;
    const double disagree = 1.0 - spec.phi;
    double norm = 0.0;
    for (std::size_t s = 0; s < belief.prob.size(); ++s) {
        const bool up = (s >> order.security) & 1;
        const double lik = ((order.side == Side::Buy) == up) ? agree : disagree;
        out.prob[s] = belief.prob[s] * lik;
        norm += out.prob[s];
    }
    if (norm == 0.0) throw DegenerateBelief("posterior update has zero normalization constant");
    for (auto& p : out.prob) p /= norm;
    return out;
}

// Expected terminal price of security i under the belief:
// mid + delta * (2 P(up) - 1).
inline double fair_price(const Posterior& belief, int security,
                         std::span<const SecuritySpec> specs) {
    const SecuritySpec& spec = specs[static_cast<std::size_t>(security)];
    return spec.mid + spec.delta * (2.0 * belief.prob_up(security) - 1.0);
}

// ---------------------------------------------------------------------------
// Joint-law construction: dichotomized Gaussian. A zero-mean multivariate
// normal with latent correlation sin(pi*rho/2) is thresholded at zero; the
// resulting sign vector has exact 0.5 marginals and pairwise correlation rho.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> latent_matrix(const CorrelationMatrix& rho) {
    const int n = rho.size();
    std::vector<double> lam(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        lam[static_cast<std::size_t>(i) * n + i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = std::sin(0.5 * std::numbers::pi * rho(i, j));
            lam[static_cast<std::size_t>(i) * n + j] = v;
            lam[static_cast<std::size_t>(j) * n + i] = v;
        }
    }
    return lam;
}

// Groups securities whose pairwise correlation is +/-1; each group moves as
// one variable with fixed relative signs.
struct ComonotoneGroups {
    std::vector<int> rep;      // representative index per security
    std::vector<int> sign;     // sign relative to the representative
    std::vector<int> members;  // distinct representatives in index order
};

inline ComonotoneGroups group_comonotone(const CorrelationMatrix& rho) {
    const int n = rho.size();
    ComonotoneGroups g;
    g.rep.resize(n);
    g.sign.assign(n, 1);
    for (int i = 0; i < n; ++i) g.rep[i] = i;

    auto find = [&](int i) {
        while (g.rep[i] != i) i = g.rep[i];
        return i;
    };
    auto sign_to_root = [&](int i) {
        int s = 1;
        while (g.rep[i] != i) {
            s *= g.sign[i];
            i = g.rep[i];
        }
        return s;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = rho(i, j);
            if (std::abs(v) < 1.0) continue;
            const int rel = v > 0.0 ? 1 : -1;
            const int ri = find(i), rj = find(j);
            const int si = sign_to_root(i), sj = sign_to_root(j);
            if (ri == rj) {
                if (si * sj != rel)
                    throw InfeasibleCorrelation("inconsistent unit correlations around a cycle");
                continue;
            }
            g.rep[rj] = ri;
            g.sign[rj] = rel * si * sj;
        }
    }
    // Path-compress into direct (rep, sign) pairs.
    std::vector<int> rep(n), sgn(n);
    for (int i = 0; i < n; ++i) {
        rep[i] = find(i);
        sgn[i] = sign_to_root(i);
    }
    g.rep = std::move(rep);
    g.sign = std::move(sgn);
    for (int i = 0; i < n; ++i)
        if (g.rep[i] == i) g.members.push_back(i);
    return g;
}

// Bivariate orthant probability of a centered unit-variance normal:
// P(X>0, Y>0) = 1/4 + asin(r)/(2 pi).
inline double quadrant_prob(double r) {
    r = std::clamp(r, -1.0, 1.0);
    return 0.25 + std::asin(r) / (2.0 * std::numbers::pi);
}

// Quadrivariate orthant probability P(X_i > 0 for all i) via Plackett's
// identity integrated along the path (1-t) I + t Lambda: the derivative in
// each off-diagonal entry is the bivariate density at zero times the
// conditional quadrant probability of the remaining pair.
inline double orthant4(const double lam[4][4]) {
    static const num::Quadrature quad = num::gauss_legendre01(160);
    double integral = 0.0;
    for (std::size_t q = 0; q < quad.x.size(); ++q) {
        const double t = quad.x[q];
        double m[4][4];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m[i][j] = i == j ? 1.0 : t * lam[i][j];
        double sum = 0.0;
        for (int p = 0; p < 4; ++p) {
            for (int r = p + 1; r < 4; ++r) {
                const double lpr = lam[p][r];
                if (lpr == 0.0) continue;
                int rest[2], k = 0;
                for (int i = 0; i < 4; ++i)
                    if (i != p && i != r) rest[k++] = i;
                const int u = rest[0], v = rest[1];
                // Conditional covariance of (u, v) given (p, r) at zero.
                const double det = m[p][p] * m[r][r] - m[p][r] * m[r][p];
                const double ip[2][2] = {{m[r][r] / det, -m[p][r] / det},
                                         {-m[r][p] / det, m[p][p] / det}};
                auto cond = [&](int a, int b) {
                    const double t0 = m[a][p] * ip[0][0] + m[a][r] * ip[1][0];
                    const double t1 = m[a][p] * ip[0][1] + m[a][r] * ip[1][1];
                    return m[a][b] - (t0 * m[p][b] + t1 * m[r][b]);
                };
                const double cuu = cond(u, u), cvv = cond(v, v), cuv = cond(u, v);
                const double denom = std::sqrt(std::max(cuu * cvv, 1e-300));
                const double rc = std::clamp(cuv / denom, -1.0, 1.0);
                const double density = 1.0 / (2.0 * std::numbers::pi *
                                              std::sqrt(std::max(1.0 - t * t * lpr * lpr, 1e-300)));
                sum += lpr * density * quadrant_prob(rc);
            }
        }
        integral += quad.w[q] * sum;
    }
    return 1.0 / 16.0 + integral;
}

// Symmetrizes under global sign flip (kills all odd moments exactly), then
// alternates moment projection with nonnegativity clipping until the mass,
// marginal and pairwise-correlation constraints hold at tolerance.
inline void polish_moments(int n, std::vector<double>& p, const CorrelationMatrix& target) {
    const std::size_t atoms = p.size();
    const std::size_t full = atoms - 1;
    for (std::size_t s = 0; s < atoms; ++s) {
        const std::size_t t = full ^ s;
        if (s < t) {
            const double avg = 0.5 * (p[s] + p[t]);
            p[s] = avg;
            p[t] = avg;
        }
    }
    const int pairs = n * (n - 1) / 2;
    std::vector<double> want(pairs);
    {
        int k = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) want[k++] = target(i, j);
    }
    const double scale = 1.0 / static_cast<double>(atoms);
    std::vector<double> diff(pairs);
    for (int iter = 0; iter < 4000; ++iter) {
        double mass = 0.0;
        std::fill(diff.begin(), diff.end(), 0.0);
        for (std::size_t s = 0; s < atoms; ++s) {
            mass += p[s];
            int k = 0;
            for (int i = 0; i < n; ++i) {
                const int si = (s >> i & 1) ? 1 : -1;
                for (int j = i + 1; j < n; ++j) {
                    const int sj = (s >> j & 1) ? 1 : -1;
                    diff[k++] += p[s] * si * sj;
                }
            }
        }
        double worst = std::abs(mass - 1.0);
        for (int k = 0; k < pairs; ++k) {
            diff[k] = want[k] - diff[k];
            worst = std::max(worst, std::abs(diff[k]));
        }
        double lowest = 0.0;
        for (std::size_t s = 0; s < atoms; ++s) lowest = std::min(lowest, p[s]);
        if (worst < 1e-13 && lowest >= 0.0) return;

        const double mass_fix = (1.0 - mass) * scale;
        for (std::size_t s = 0; s < atoms; ++s) {
            double adj = mass_fix;
            int k = 0;
            for (int i = 0; i < n; ++i) {
                const int si = (s >> i & 1) ? 1 : -1;
                for (int j = i + 1; j < n; ++j) {
                    const int sj = (s >> j & 1) ? 1 : -1;
                    adj += diff[k++] * si * sj * scale;
                }
            }
            p[s] = std::max(p[s] + adj, 0.0);
        }
    }
    throw InfeasibleCorrelation("moment projection did not converge");
}

// Core pmf on the reduced (representative) dimensions; all remaining
// pairwise correlations are strictly inside (-1, 1).
inline std::vector<double> core_pmf(int m, const CorrelationMatrix& rho,
                                    const std::vector<double>& lam) {
    std::vector<double> p(std::size_t{1} << m, 0.0);
    auto pair_sum = [&](std::size_t s) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const int si = (s >> i & 1) ? 1 : -1;
            for (int j = i + 1; j < m; ++j) {
                const int sj = (s >> j & 1) ? 1 : -1;
                acc += si * sj * rho(i, j);
            }
        }
        return acc;
    };

    if (m == 1) {
        p[0] = p[1] = 0.5;
        return p;
    }
    if (m <= 3) {
        // Orthant probabilities of a 2- or 3-dimensional centered normal have
        // closed forms; with the sin(pi rho/2) latent they collapse to
        // (1 + sum_{i<j} s_i s_j rho_ij) / 2^m.
        const double base = 1.0 / static_cast<double>(std::size_t{1} << m);
        for (std::size_t s = 0; s < p.size(); ++s) p[s] = base * (1.0 + pair_sum(s));
        for (auto& v : p)
            if (v < 0.0) {
                if (v < -1e-9) throw InfeasibleCorrelation("negative orthant probability");
                v = 0.0;
            }
        return p;
    }
    if (m == 4) {
        // Only one unknown beyond the pairwise moments: the fourth-order sign
        // moment, recovered from a single orthant probability.
        double l[4][4];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) l[i][j] = lam[static_cast<std::size_t>(i) * 4 + j];
        const double p4 = orthant4(l);
        double rho_sum = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) rho_sum += rho(i, j);
        const double moment4 = 16.0 * p4 - 1.0 - rho_sum;
        for (std::size_t s = 0; s < p.size(); ++s) {
            const int parity = std::popcount(static_cast<unsigned>(s)) % 2 == 0 ? 1 : -1;
            p[s] = (1.0 + pair_sum(s) + parity * moment4) / 16.0;
        }
        return p;
    }

    // m >= 5: estimate orthant masses by thresholding quasi-random draws of
    // the latent normal (fixed internal seed), then polish the moments.
    num::EigenSym eig = num::jacobi_eigen(m, lam);
    std::vector<double> factor(static_cast<std::size_t>(m) * m, 0.0); // column-major loadings
    for (int j = 0; j < m; ++j) {
        const double ev = std::max(eig.values[j], 0.0);
        const double root = std::sqrt(ev);
        for (int i = 0; i < m; ++i)
            factor[static_cast<std::size_t>(j) * m + i] =
                eig.vectors[static_cast<std::size_t>(j) * m + i] * root;
    }
    const std::uint64_t kPmfSeed = 0x53594E434D4B5031ULL;
    num::KroneckerSequence seq(m, kPmfSeed);
    const std::uint64_t samples =
        std::min<std::uint64_t>(std::max<std::uint64_t>(std::uint64_t{1} << 18,
                                                        (std::uint64_t{1} << m) * 32),
                                std::uint64_t{1} << 21);
    std::vector<double> u(m), z(m);
    const double w = 1.0 / static_cast<double>(samples);
    for (std::uint64_t k = 0; k < samples; ++k) {
        seq.point(k, u);
        for (int j = 0; j < m; ++j) {
            const double clamped = std::clamp(u[j], 1e-15, 1.0 - 1e-15);
            z[j] = num::normal_quantile(clamped);
        }
        std::size_t s = 0;
        for (int i = 0; i < m; ++i) {
            double x = 0.0;
            for (int j = 0; j < m; ++j) x += factor[static_cast<std::size_t>(j) * m + i] * z[j];
            if (x > 0.0) s |= std::size_t{1} << i;
        }
        p[s] += w;
    }
    return p;
}

} // namespace detail

inline JointOutcomePMF build_joint_pmf(int n, const CorrelationMatrix& rho) {
    if (n > kMaxJointDim)
        throw DimensionTooLarge("joint pmf limited to " + std::to_string(kMaxJointDim) +
                                " securities, got " + std::to_string(n));
    if (n < 1) throw ValidationError("n", "dimension must be >= 1");
    if (rho.size() != n) throw ValidationError("rho", "dimension mismatch with n");
    rho.validate();

    // Feasibility: the latent matrix must be positive semidefinite. This also
    // rejects inconsistent patterns of +/-1 entries.
    const std::vector<double> latent = detail::latent_matrix(rho);
    {
        num::EigenSym eig = num::jacobi_eigen(n, latent);
        double lo = 0.0;
        for (double v : eig.values) lo = std::min(lo, v);
        if (lo < -1e-9)
            throw InfeasibleCorrelation("latent correlation matrix is not positive semidefinite");
    }

    const detail::ComonotoneGroups groups = detail::group_comonotone(rho);
    const int m = static_cast<int>(groups.members.size());

    CorrelationMatrix reduced(m);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            reduced.set(a, b, rho(groups.members[a], groups.members[b]));
    std::vector<double> reduced_latent = detail::latent_matrix(reduced);

    std::vector<double> core = detail::core_pmf(m, reduced, reduced_latent);
    detail::polish_moments(m, core, reduced);

    JointOutcomePMF pmf;
    pmf.n = n;
    pmf.prob.assign(std::size_t{1} << n, 0.0);
    std::vector<int> group_of(n);
    for (int a = 0; a < m; ++a) group_of[groups.members[a]] = a;
    for (std::size_t cs = 0; cs < core.size(); ++cs) {
        std::size_t s = 0;
        for (int i = 0; i < n; ++i) {
            const int a = group_of[groups.rep[i]];
            const bool rep_up = (cs >> a) & 1;
            const bool up = groups.sign[i] > 0 ? rep_up : !rep_up;
            if (up) s |= std::size_t{1} << i;
        }
        pmf.prob[s] += core[cs];
    }
    return pmf;
}

} // namespace syncmark
