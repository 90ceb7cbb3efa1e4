#ifndef MOBLP_BNB_HPP
#define MOBLP_BNB_HPP

#include "moblp/instance.hpp"
#include "moblp/simplex.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace moblp {

struct LinearRow {
    Eigen::VectorXd coeffs;
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

/// min objective^T x over x in {0,1}^n, the base rows A x (sense) b, and any
/// extra rows (KSA appends objective-bound cuts z_i(x) <= u_i there).
struct IlpQuery {
    Eigen::VectorXd objective;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<Sense> sense;
    std::vector<LinearRow> extra;
    /// Pruning hint: nodes whose bound cannot beat it are discarded. A cutoff
    /// below the optimum never changes the answer (the search is redone without it).
    std::optional<double> cutoff;
    /// A known feasible 0-1 point; seeds the incumbent when it checks out.
    std::optional<Eigen::VectorXd> incumbent;

    static IlpQuery over(const MoblpInstance& inst, Eigen::VectorXd objective) {
        return {std::move(objective), inst.A, inst.b, inst.sense, {}, std::nullopt, std::nullopt};
    }

    Index n() const { return objective.size(); }

    /// All rows (base followed by extra) against a 0-1 point.
    bool is_feasible(const Eigen::VectorXd& x, double tol = 1e-9) const;
    void validate() const;
};

struct IlpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
    std::size_t nodes_expanded = 0;
};

struct BnbOptions {
    double integrality_tol = 1e-6;
    double prune_tol = 1e-6;
    SimplexOptions lp;
};

/// Exact 0-1 branch-and-bound over LP relaxations.
///
/// Best-bound node selection with FIFO ties, most-fractional branching with
/// ties to the lowest index. When every objective coefficient is integral the
/// node bound is rounded up to ceil(bound - prune_tol).
IlpResult solve_ilp(const IlpQuery& query, const BnbOptions& options = {});

/// Exhaustive enumeration of all 2^n points (n <= 22); the first minimizer in
/// mask order is returned. `nodes_expanded` is the number of points visited.
IlpResult brute_force_ilp(const IlpQuery& query);

inline constexpr Index kBruteForceMaxVars = 22;

}  // namespace moblp

#endif  // MOBLP_BNB_HPP
