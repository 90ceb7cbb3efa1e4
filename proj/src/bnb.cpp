#include "moblp/bnb.hpp"

#include "moblp/error.hpp"

#include <cmath>
#include <cstdint>
#include <queue>

namespace moblp {

void IlpQuery::validate() const {
    if (A.cols() != n() || b.size() != A.rows() || static_cast<Index>(sense.size()) != A.rows())
        throw DimensionError("ILP base constraints do not match the objective length");
    for (const auto& row : extra)
        if (row.coeffs.size() != n()) throw DimensionError("ILP extra row has the wrong length");
}

bool IlpQuery::is_feasible(const Eigen::VectorXd& x, double tol) const {
    if (x.size() != n()) return false;
    const Eigen::VectorXd lhs = A * x;
    for (Index k = 0; k < A.rows(); ++k)
        if (!satisfies(lhs[k], sense[static_cast<std::size_t>(k)], b[k], tol)) return false;
    for (const auto& row : extra)
        if (!satisfies(row.coeffs.dot(x), row.sense, row.rhs, tol)) return false;
    return true;
}

namespace {

bool is_integral(double value) { return std::floor(value) == value; }

struct Node {
    double bound;
    std::uint64_t sequence;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd lp_x;
};

struct WorseNode {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.sequence > b.sequence;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const IlpQuery& query, const BnbOptions& options) : query_(query), opt_(options) {
        const Index base = query.A.rows();
        const Index rows = base + static_cast<Index>(query.extra.size());
        lp_.objective = query.objective;
        lp_.A.resize(rows, query.n());
        lp_.b.resize(rows);
        lp_.sense = query.sense;
        lp_.A.topRows(base) = query.A;
        lp_.b.head(base) = query.b;
        for (std::size_t k = 0; k < query.extra.size(); ++k) {
            const auto row = base + static_cast<Index>(k);
            lp_.A.row(row) = query.extra[k].coeffs.transpose();
            lp_.b[row] = query.extra[k].rhs;
            lp_.sense.push_back(query.extra[k].sense);
        }
        integral_objective_ = query.objective.unaryExpr([](double c) { return is_integral(c) ? 0.0 : 1.0; }).sum() == 0;
        integral_rows_ = lp_.A.unaryExpr([](double a) { return is_integral(a) ? 0.0 : 1.0; }).sum() == 0 &&
                         lp_.b.unaryExpr([](double a) { return is_integral(a) ? 0.0 : 1.0; }).sum() == 0;
    }

    IlpResult run(std::optional<double> cutoff) {
        IlpResult result;
        best_ = cutoff;
        best_x_.reset();
        if (query_.incumbent && query_.is_feasible(*query_.incumbent, row_tol())) {
            const double value = query_.objective.dot(*query_.incumbent);
            if (!best_ || value < *best_) {
                best_ = value;
                best_x_ = *query_.incumbent;
            }
        }

        std::priority_queue<Node, std::vector<Node>, WorseNode> open;
        const Index n = query_.n();
        evaluate(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n), open, result.nodes_expanded);
        while (!open.empty()) {
            Node node = open.top();
            open.pop();
            if (prunable(node.bound)) continue;
            const Index var = branching_variable(node);
            if (var < 0) continue;  // every variable already fixed; evaluate() handled it
            for (const double value : {0.0, 1.0}) {
                Eigen::VectorXd lower = node.lower;
                Eigen::VectorXd upper = node.upper;
                lower[var] = value;
                upper[var] = value;
                evaluate(std::move(lower), std::move(upper), open, result.nodes_expanded);
            }
        }
        if (best_x_) {
            result.status = LpStatus::Optimal;
            result.x = *best_x_;
            result.objective = query_.objective.dot(result.x);
        }
        return result;
    }

private:
    double row_tol() const { return integral_rows_ ? 1e-9 : opt_.lp.feasibility_tol; }

    double effective_bound(double lp_value) const {
        return integral_objective_ ? std::ceil(lp_value - opt_.prune_tol) : lp_value;
    }

    bool prunable(double bound) const {
        if (!best_) return false;
        return integral_objective_ ? bound >= *best_ : bound >= *best_ - opt_.prune_tol;
    }

    Index branching_variable(const Node& node) const {
        Index choice = -1;
        double best_distance = -1.0;
        for (Index j = 0; j < node.lp_x.size(); ++j) {
            if (node.lower[j] == node.upper[j]) continue;
            const double frac = node.lp_x[j] - std::floor(node.lp_x[j]);
            const double distance = std::min(frac, 1.0 - frac);
            if (distance > best_distance) {
                best_distance = distance;
                choice = j;
            }
        }
        return choice;
    }

    void evaluate(Eigen::VectorXd lower, Eigen::VectorXd upper,
                  std::priority_queue<Node, std::vector<Node>, WorseNode>& open, std::size_t& nodes) {
        ++nodes;
        lp_.lower = lower;
        lp_.upper = upper;
        const auto relaxed = solve_lp(lp_, opt_.lp);
        if (relaxed.status == LpStatus::Infeasible) return;
        const double bound = effective_bound(relaxed.objective);
        if (prunable(bound)) return;

        bool integral = true;
        for (Index j = 0; j < relaxed.x.size() && integral; ++j)
            integral = std::abs(relaxed.x[j] - std::round(relaxed.x[j])) <= opt_.integrality_tol;
        if (integral) {
            const Eigen::VectorXd rounded = relaxed.x.array().round().matrix();
            if (query_.is_feasible(rounded, row_tol())) {
                const double value = query_.objective.dot(rounded);
                if (!best_ || value < *best_) {
                    best_ = value;
                    best_x_ = rounded;
                }
                return;  // the subtree's LP optimum is attained by this point
            }
        }
        open.push(Node{bound, sequence_++, std::move(lower), std::move(upper), relaxed.x});
    }

    const IlpQuery& query_;
    BnbOptions opt_;
    LpProblem<double> lp_;
    bool integral_objective_ = false;
    bool integral_rows_ = false;
    std::optional<double> best_;
    std::optional<Eigen::VectorXd> best_x_;
    std::uint64_t sequence_ = 0;
};

}  // namespace

IlpResult solve_ilp(const IlpQuery& query, const BnbOptions& options) {
    query.validate();
    BranchAndBound search(query, options);
    auto result = search.run(query.cutoff);
    if (result.status == LpStatus::Infeasible && query.cutoff) {
        const auto first_pass = result.nodes_expanded;
        result = search.run(std::nullopt);
        result.nodes_expanded += first_pass;
    }
    return result;
}

IlpResult brute_force_ilp(const IlpQuery& query) {
    query.validate();
    const Index n = query.n();
    if (n > kBruteForceMaxVars) throw InvalidArgument("brute_force_ilp is limited to n <= 22");
    IlpResult result;
    Eigen::VectorXd x(n);
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        for (Index j = 0; j < n; ++j) x[j] = static_cast<double>((mask >> j) & 1U);
        ++result.nodes_expanded;
        if (!query.is_feasible(x)) continue;
        const double value = query.objective.dot(x);
        if (result.status == LpStatus::Infeasible || value < result.objective) {
            result.status = LpStatus::Optimal;
            result.objective = value;
            result.x = x;
        }
    }
    return result;
}

}  // namespace moblp
