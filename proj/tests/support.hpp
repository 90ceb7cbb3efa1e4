#ifndef MOBLP_TESTS_SUPPORT_HPP
#define MOBLP_TESTS_SUPPORT_HPP

// Random problem generators and independent oracles shared by the test binaries.

#include "moblp/bnb.hpp"
#include "moblp/instance.hpp"
#include "moblp/rng.hpp"
#include "moblp/simplex.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <vector>

namespace moblp::testing {

inline Sense random_sense(Rng& rng) {
    switch (rng.uniform_int(0, 2)) {
        case 0: return Sense::LE;
        case 1: return Sense::GE;
        default: return Sense::EQ;
    }
}

/// Random integer ILP query with mixed senses; rhs chosen around a random
/// 0-1 point so most queries are feasible.
inline IlpQuery random_query(Rng& rng, Index n, Index m) {
    IlpQuery q;
    q.objective.resize(n);
    for (Index j = 0; j < n; ++j) q.objective[j] = static_cast<double>(rng.uniform_int(-10, 10));
    q.A.resize(m, n);
    q.b.resize(m);
    Eigen::VectorXd anchor(n);
    for (Index j = 0; j < n; ++j) anchor[j] = static_cast<double>(rng.uniform_int(0, 1));
    for (Index k = 0; k < m; ++k) {
        for (Index j = 0; j < n; ++j) q.A(k, j) = static_cast<double>(rng.uniform_int(-4, 6));
        const Sense s = rng.uniform_int(0, 5) == 0 ? Sense::EQ : (rng.uniform_int(0, 1) ? Sense::LE : Sense::GE);
        q.sense.push_back(s);
        const double lhs = q.A.row(k).dot(anchor);
        const double shift = static_cast<double>(rng.uniform_int(0, 3));
        const bool break_it = rng.uniform_int(0, 9) == 0;
        q.b[k] = s == Sense::LE ? lhs + (break_it ? -shift - 30 : shift) : s == Sense::GE ? lhs - (break_it ? -shift - 30 : shift) : lhs;
    }
    return q;
}

/// Random tri-objective test instance: KP with n <= n_max or AP with r <= r_max.
inline MoblpInstance random_small_instance(Rng& rng, Index p, Index kp_n_max, Index ap_r_max) {
    const auto seed = rng.next();
    if (rng.uniform_int(0, 1) == 0) {
        const Index n = static_cast<Index>(rng.uniform_int(4, kp_n_max));
        return generate_kp(n, p, seed, {1, 30});
    }
    const Index r = static_cast<Index>(rng.uniform_int(2, ap_r_max));
    return generate_ap(r, p, seed, {1, 20});
}

/// LP optimum by enumerating every vertex of {x in [0,1]^n : A x (sense) b}:
/// each choice of n tight hyperplanes among the rows and bounds is solved
/// and kept when it is feasible. Returns nullopt for an empty region.
inline std::optional<double> lp_vertex_oracle(const LpProblem<double>& lp, double tol = 1e-9) {
    const Index n = lp.n();
    const Index m = lp.m();
    const Index planes = m + 2 * n;
    Eigen::MatrixXd G(planes, n);
    Eigen::VectorXd h(planes);
    G.topRows(m) = lp.A;
    h.head(m) = lp.b;
    for (Index j = 0; j < n; ++j) {
        G.row(m + 2 * j) = Eigen::RowVectorXd::Unit(n, j);
        h[m + 2 * j] = lp.lower[j];
        G.row(m + 2 * j + 1) = Eigen::RowVectorXd::Unit(n, j);
        h[m + 2 * j + 1] = lp.upper[j];
    }
    std::optional<double> best;
    std::vector<Index> pick(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) pick[static_cast<std::size_t>(k)] = k;
    for (;;) {
        Eigen::MatrixXd M(n, n);
        Eigen::VectorXd r(n);
        for (Index k = 0; k < n; ++k) {
            M.row(k) = G.row(pick[static_cast<std::size_t>(k)]);
            r[k] = h[pick[static_cast<std::size_t>(k)]];
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.rank() == n) {
            const Eigen::VectorXd x = lu.solve(r);
            bool ok = (x.array() >= lp.lower.array() - tol).all() && (x.array() <= lp.upper.array() + tol).all();
            for (Index row = 0; row < m && ok; ++row)
                ok = satisfies(lp.A.row(row).dot(x), lp.sense[static_cast<std::size_t>(row)], lp.b[row], tol);
            if (ok) {
                const double value = lp.objective.dot(x);
                if (!best || value < *best) best = value;
            }
        }
        // next combination
        Index k = n - 1;
        while (k >= 0 && pick[static_cast<std::size_t>(k)] == planes - n + k) --k;
        if (k < 0) break;
        ++pick[static_cast<std::size_t>(k)];
        for (Index t = k + 1; t < n; ++t) pick[static_cast<std::size_t>(t)] = pick[static_cast<std::size_t>(t - 1)] + 1;
    }
    return best;
}

}  // namespace moblp::testing

#endif  // MOBLP_TESTS_SUPPORT_HPP
