#ifndef MOBLP_SIMPLEX_HPP
#define MOBLP_SIMPLEX_HPP

#include "moblp/error.hpp"
#include "moblp/instance.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace moblp {

template <class Scalar>
struct LpProblem {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector objective;  ///< minimized
    Matrix A;
    Vector b;
    std::vector<Sense> sense;
    Vector lower;  ///< finite; usually 0 unless a branch fixes the variable to 1
    Vector upper;  ///< finite; usually 1 unless a branch fixes the variable to 0

    Index n() const { return objective.size(); }
    Index m() const { return A.rows(); }

    /// Box [0,1]^n over the given rows.
    static LpProblem box(Vector objective, Matrix A, Vector b, std::vector<Sense> sense) {
        const Index n = objective.size();
        return {std::move(objective), std::move(A), std::move(b), std::move(sense), Vector::Zero(n), Vector::Ones(n)};
    }

    void validate() const {
        if (A.cols() != n() || b.size() != m() || static_cast<Index>(sense.size()) != m() || lower.size() != n() ||
            upper.size() != n())
            throw DimensionError("LP dimensions are inconsistent");
        if ((lower.array() > upper.array()).any()) throw InvalidArgument("LP bound with lower > upper");
        if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("LP variable bounds must be finite");
    }
};

enum class LpStatus { Optimal, Infeasible };

template <class Scalar>
struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Scalar objective{};
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    std::size_t iterations = 0;
};

struct SimplexOptions {
    double feasibility_tol = 1e-7;  ///< eps_feas
    double optimality_tol = 1e-7;   ///< eps_obj, also the reduced-cost threshold
    double pivot_tol = 1e-9;
    std::size_t bland_after = 500;  ///< switch from Dantzig pricing to Bland's rule
    std::size_t iteration_cap = 100000;
};

namespace detail {

/// Dense-tableau bounded-variable primal simplex.
///
/// Columns are [structural | slack | artificial]. Row k reads
///   a_k x + s_k + sigma_k t_k = b_k
/// with s_k in [0,inf) for <=, (-inf,0] for >=, {0} for =, and t_k >= 0 an
/// artificial started in the basis. Phase 1 minimizes sum t; phase 2 pins the
/// artificials to 0 and minimizes the real objective.
template <class Scalar>
class BoundedSimplex {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    BoundedSimplex(const LpProblem<Scalar>& lp, const SimplexOptions& options)
        : lp_(lp), opt_(options), n_(lp.n()), m_(lp.m()), cols_(n_ + 2 * m_) {
        const Scalar inf = std::numeric_limits<Scalar>::infinity();
        lo_.resize(cols_);
        up_.resize(cols_);
        lo_.head(n_) = lp.lower;
        up_.head(n_) = lp.upper;
        full_ = Matrix::Zero(m_, cols_);
        full_.leftCols(n_) = lp.A;
        x_ = Vector::Zero(cols_);
        x_.head(n_) = lp.lower;
        const Vector residual = lp.b - lp.A * lp.lower;
        for (Index k = 0; k < m_; ++k) {
            const Index slack = n_ + k;
            const Index art = n_ + m_ + k;
            full_(k, slack) = 1;
            switch (lp.sense[static_cast<std::size_t>(k)]) {
                case Sense::LE: lo_[slack] = 0; up_[slack] = inf; break;
                case Sense::GE: lo_[slack] = -inf; up_[slack] = 0; break;
                case Sense::EQ: lo_[slack] = 0; up_[slack] = 0; break;
            }
            full_(k, art) = residual[k] >= 0 ? Scalar(1) : Scalar(-1);
            lo_[art] = 0;
            up_[art] = inf;
            x_[art] = std::abs(residual[k]);
        }
        basis_.resize(static_cast<std::size_t>(m_));
        in_basis_.assign(static_cast<std::size_t>(cols_), -1);
        for (Index k = 0; k < m_; ++k) {
            basis_[static_cast<std::size_t>(k)] = n_ + m_ + k;
            in_basis_[static_cast<std::size_t>(n_ + m_ + k)] = k;
        }
        tableau_ = full_;
        for (Index k = 0; k < m_; ++k) tableau_.row(k) *= full_(k, n_ + m_ + k);  // B = diag(sigma), B^-1 = B
    }

    LpResult<Scalar> solve() {
        Vector phase1 = Vector::Zero(cols_);
        phase1.tail(m_).setOnes();
        run(phase1);
        refactor();
        const Scalar infeasibility = x_.tail(m_).sum();
        LpResult<Scalar> result;
        result.iterations = iterations_;
        if (infeasibility > Scalar(opt_.feasibility_tol)) return result;

        for (Index k = 0; k < m_; ++k) {
            const Index art = n_ + m_ + k;
            up_[art] = 0;
            x_[art] = in_basis_[static_cast<std::size_t>(art)] >= 0 ? std::max<Scalar>(x_[art], 0) : Scalar(0);
        }
        Vector phase2 = Vector::Zero(cols_);
        phase2.head(n_) = lp_.objective;
        run(phase2);
        refactor();

        result.status = LpStatus::Optimal;
        result.x = x_.head(n_).cwiseMax(lp_.lower).cwiseMin(lp_.upper);
        result.objective = lp_.objective.dot(result.x);
        result.iterations = iterations_;
        return result;
    }

private:
    void run(const Vector& cost) {
        for (;;) {
            if (++iterations_ > opt_.iteration_cap)
                throw NumericalError("simplex iteration cap exceeded (cycling or ill-conditioned LP)");
            const bool bland = iterations_ > opt_.bland_after;

            // reduced costs d = c - c_B^T B^-1 A
            Vector cb(m_);
            for (Index k = 0; k < m_; ++k) cb[k] = cost[basis_[static_cast<std::size_t>(k)]];
            const Vector reduced = cost - (cb.transpose() * tableau_).transpose();

            Index entering = -1;
            int direction = 0;
            Scalar best = 0;
            for (Index j = 0; j < cols_; ++j) {
                if (in_basis_[static_cast<std::size_t>(j)] >= 0 || lo_[j] == up_[j]) continue;
                int dir = 0;
                if (reduced[j] < -Scalar(opt_.optimality_tol) && x_[j] < up_[j]) dir = 1;
                else if (reduced[j] > Scalar(opt_.optimality_tol) && x_[j] > lo_[j]) dir = -1;
                if (dir == 0) continue;
                if (bland) {
                    entering = j;
                    direction = dir;
                    break;
                }
                if (std::abs(reduced[j]) > best) {
                    best = std::abs(reduced[j]);
                    entering = j;
                    direction = dir;
                }
            }
            if (entering < 0) return;

            // ratio test: x_B moves by -direction * t * column
            const Scalar inf = std::numeric_limits<Scalar>::infinity();
            Scalar step = up_[entering] - lo_[entering];  // bound flip
            Index leaving_row = -1;
            bool leaving_to_upper = false;
            for (Index k = 0; k < m_; ++k) {
                const Scalar alpha = tableau_(k, entering) * Scalar(direction);
                const Index var = basis_[static_cast<std::size_t>(k)];
                Scalar limit = inf;
                bool to_upper = false;
                if (alpha > Scalar(opt_.pivot_tol) && lo_[var] > -inf) {
                    limit = std::max<Scalar>(x_[var] - lo_[var], 0) / alpha;
                } else if (alpha < -Scalar(opt_.pivot_tol) && up_[var] < inf) {
                    limit = std::max<Scalar>(up_[var] - x_[var], 0) / -alpha;
                    to_upper = true;
                } else {
                    continue;
                }
                const bool better = limit < step ||
                                    (limit == step && leaving_row >= 0 &&
                                     (bland ? var < basis_[static_cast<std::size_t>(leaving_row)]
                                            : std::abs(alpha) > std::abs(tableau_(leaving_row, entering))));
                if (better) {
                    step = limit;
                    leaving_row = k;
                    leaving_to_upper = to_upper;
                }
            }
            if (!(step < inf)) throw NumericalError("LP reported unbounded despite finite variable bounds");

            x_[entering] += Scalar(direction) * step;
            for (Index k = 0; k < m_; ++k)
                x_[basis_[static_cast<std::size_t>(k)]] -= Scalar(direction) * step * tableau_(k, entering);
            if (leaving_row < 0) {
                x_[entering] = direction > 0 ? up_[entering] : lo_[entering];
                continue;
            }
            const Index leaving = basis_[static_cast<std::size_t>(leaving_row)];
            x_[leaving] = leaving_to_upper ? up_[leaving] : lo_[leaving];
            pivot(leaving_row, entering);
        }
    }

    void pivot(Index row, Index col) {
        const Index leaving = basis_[static_cast<std::size_t>(row)];
        tableau_.row(row) /= tableau_(row, col);
        for (Index k = 0; k < m_; ++k) {
            if (k == row) continue;
            const Scalar factor = tableau_(k, col);
            if (factor != Scalar(0)) tableau_.row(k) -= factor * tableau_.row(row);
        }
        basis_[static_cast<std::size_t>(row)] = col;
        in_basis_[static_cast<std::size_t>(leaving)] = -1;
        in_basis_[static_cast<std::size_t>(col)] = row;
    }

    /// Recomputes B^-1 A and x_B from the original columns to shed drift.
    void refactor() {
        if (m_ == 0) return;
        Matrix basis_cols(m_, m_);
        for (Index k = 0; k < m_; ++k) basis_cols.col(k) = full_.col(basis_[static_cast<std::size_t>(k)]);
        const Eigen::PartialPivLU<Matrix> lu(basis_cols);
        Vector rhs = lp_.b;
        for (Index j = 0; j < cols_; ++j)
            if (in_basis_[static_cast<std::size_t>(j)] < 0 && x_[j] != Scalar(0)) rhs -= full_.col(j) * x_[j];
        const Vector xb = lu.solve(rhs);
        Matrix tableau = lu.solve(full_);
        if (!xb.allFinite() || !tableau.allFinite()) return;  // keep the incrementally updated state
        tableau_ = std::move(tableau);
        for (Index k = 0; k < m_; ++k) x_[basis_[static_cast<std::size_t>(k)]] = xb[k];
    }

    const LpProblem<Scalar>& lp_;
    SimplexOptions opt_;
    Index n_, m_, cols_;
    Matrix full_;
    Matrix tableau_;
    Vector lo_, up_, x_;
    std::vector<Index> basis_;
    std::vector<Index> in_basis_;
    std::size_t iterations_ = 0;
};

}  // namespace detail

/// Solves min c^T x over the rows and finite variable bounds of `lp`.
/// The box bounds rule out unboundedness, so the result is either a vertex
/// optimum or INFEASIBLE.
template <class Scalar>
LpResult<Scalar> solve_lp(const LpProblem<Scalar>& lp, const SimplexOptions& options = {}) {
    lp.validate();
    if (lp.m() == 0) {
        LpResult<Scalar> result;
        result.status = LpStatus::Optimal;
        result.x.resize(lp.n());
        for (Index j = 0; j < lp.n(); ++j) result.x[j] = lp.objective[j] < 0 ? lp.upper[j] : lp.lower[j];
        result.objective = lp.objective.dot(result.x);
        return result;
    }
    return detail::BoundedSimplex<Scalar>(lp, options).solve();
}

/// LP-relaxation bounds (l_i, u_i) of z_i over the instance's rows and [0,1]^n.
/// Throws InfeasibleError when the relaxation is empty.
std::pair<double, double> objective_bounds(const MoblpInstance& inst, Index objective,
                                           const SimplexOptions& options = {});

}  // namespace moblp

#endif  // MOBLP_SIMPLEX_HPP
