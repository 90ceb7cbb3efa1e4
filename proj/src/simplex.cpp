#include "moblp/simplex.hpp"

namespace moblp {

std::pair<double, double> objective_bounds(const MoblpInstance& inst, Index objective, const SimplexOptions& options) {
    if (objective < 0 || objective >= inst.p()) throw InvalidArgument("objective index out of range");
    const Eigen::VectorXd c = inst.C.row(objective).transpose();
    auto lp = LpProblem<double>::box(c, inst.A, inst.b, inst.sense);
    const auto low = solve_lp(lp, options);
    if (low.status == LpStatus::Infeasible) throw InfeasibleError("LP relaxation of " + inst.id + " is empty");
    lp.objective = -c;
    const auto high = solve_lp(lp, options);
    if (high.status == LpStatus::Infeasible) throw InfeasibleError("LP relaxation of " + inst.id + " is empty");
    return {low.objective, -high.objective};
}

template struct LpProblem<double>;
template struct LpProblem<long double>;
template LpResult<double> solve_lp(const LpProblem<double>&, const SimplexOptions&);
template LpResult<long double> solve_lp(const LpProblem<long double>&, const SimplexOptions&);

}  // namespace moblp
