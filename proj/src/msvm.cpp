#include "moblp/error.hpp"
#include "moblp/learn.hpp"
#include "moblp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace moblp {

Eigen::VectorXd MsvmModel::restrict(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(k());
    for (Index c = 0; c < k(); ++c) {
        const Index source = active[static_cast<std::size_t>(c)];
        if (source < 0 || source >= full.size()) throw DimensionError("feature vector is shorter than the model expects");
        out[c] = full[source];
    }
    return out;
}

namespace {

/// Exact minimizer of one example's block of the dual.
/// alpha_new[m] = min(bound[m], (beta - B[m]) / a) with beta chosen so the block sums to 0.
void solve_block(double a, Index y, double c, const Eigen::VectorXd& B, Eigen::VectorXd& alpha_new) {
    const Index p = B.size();
    std::vector<double> D(B.begin(), B.end());
    D[static_cast<std::size_t>(y)] += a * c;
    std::sort(D.begin(), D.end(), std::greater<>());
    double beta = D[0] - a * c;
    Index r = 1;
    for (; r < p && beta < static_cast<double>(r) * D[static_cast<std::size_t>(r)]; ++r) beta += D[static_cast<std::size_t>(r)];
    beta /= static_cast<double>(r);
    for (Index m = 0; m < p; ++m) {
        const double bound = m == y ? c : 0.0;
        alpha_new[m] = std::min(bound, (beta - B[m]) / a);
    }
}

}  // namespace

MsvmModel train_msvm(const Eigen::MatrixXd& X_full, const std::vector<Index>& y, Index p, std::vector<Index> active,
                     const MsvmOptions& options, const std::vector<std::string>& names) {
    const Index rows = X_full.rows();
    if (rows == 0) throw InvalidArgument("training set is empty");
    if (static_cast<Index>(y.size()) != rows) throw DimensionError("label count does not match the training rows");
    if (p < 2) throw InvalidArgument("need at least 2 classes");
    if (options.c_reg <= 0 || options.tol <= 0 || options.max_epochs < 1) throw InvalidArgument("bad trainer options");
    for (Index label : y)
        if (label < 0 || label >= p) throw InvalidArgument("label " + std::to_string(label + 1) + " outside 1.." + std::to_string(p));
    if (active.empty()) {
        active.resize(static_cast<std::size_t>(X_full.cols()));
        std::iota(active.begin(), active.end(), Index{0});
    }
    const Index k = static_cast<Index>(active.size());
    Eigen::MatrixXd X(rows, k);
    for (Index c = 0; c < k; ++c) {
        const Index source = active[static_cast<std::size_t>(c)];
        if (source < 0 || source >= X_full.cols()) throw DimensionError("active feature index out of range");
        X.col(c) = X_full.col(source);
    }

    const double C = options.c_reg;
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(p, k);
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(rows, p);
    const Eigen::VectorXd qd = X.rowwise().squaredNorm();
    std::vector<Index> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(options.seed);
    Eigen::VectorXd G(p), B(p), alpha_new(p);

    int epoch = 0;
    while (epoch < options.max_epochs) {
        ++epoch;
        rng.shuffle(std::span<Index>(order));
        double violation = 0.0;
        for (Index i : order) {
            const double a = qd[i];
            if (a <= 0) continue;
            const Index yi = y[static_cast<std::size_t>(i)];
            G.noalias() = W * X.row(i).transpose();
            G.array() += 1.0;
            G[yi] -= 1.0;
            double max_g = -std::numeric_limits<double>::infinity();
            double min_g = std::numeric_limits<double>::infinity();
            for (Index m = 0; m < p; ++m) {
                max_g = std::max(max_g, G[m]);
                const double bound = m == yi ? C : 0.0;
                if (alpha(i, m) < bound) min_g = std::min(min_g, G[m]);
            }
            violation = std::max(violation, max_g - min_g);
            if (max_g - min_g <= 1e-12) continue;
            B = G - a * alpha.row(i).transpose();
            solve_block(a, yi, C, B, alpha_new);
            for (Index m = 0; m < p; ++m) {
                const double d = alpha_new[m] - alpha(i, m);
                if (std::abs(d) > 1e-12) W.row(m) += d * X.row(i);
            }
            alpha.row(i) = alpha_new.transpose();
        }
        if (violation < options.tol) break;
    }

    MsvmModel model;
    model.W = std::move(W);
    model.active = std::move(active);
    if (!names.empty()) {
        for (Index source : model.active) {
            if (source >= static_cast<Index>(names.size())) throw DimensionError("fewer feature names than columns");
            model.names.push_back(names[static_cast<std::size_t>(source)]);
        }
    }
    model.c_reg = options.c_reg;
    model.tol = options.tol;
    model.epochs = epoch;
    return model;
}

Index predict(const Eigen::MatrixXd& W, const Eigen::VectorXd& x) {
    if (W.cols() != x.size()) throw DimensionError("feature vector has " + std::to_string(x.size()) + " entries, model expects " + std::to_string(W.cols()));
    const Eigen::VectorXd scores = W * x;
    Index best = 0;
    for (Index m = 1; m < scores.size(); ++m)
        if (scores[m] > scores[best]) best = m;
    return best;
}

Index predict(const MsvmModel& model, const Eigen::VectorXd& x_active) { return predict(model.W, x_active); }

double training_error(const MsvmModel& model, const Eigen::MatrixXd& X, const std::vector<Index>& y) {
    if (X.rows() == 0) return 0.0;
    Index wrong = 0;
    for (Index r = 0; r < X.rows(); ++r)
        wrong += predict(model, model.restrict(X.row(r).transpose())) != y[static_cast<std::size_t>(r)];
    return static_cast<double>(wrong) / static_cast<double>(X.rows());
}

Index least_important_feature(const Eigen::MatrixXd& W) {
    if (W.size() == 0) throw InvalidArgument("weight matrix is empty");
    const Eigen::RowVectorXd mean = W.colwise().mean();
    const Eigen::RowVectorXd var = (W.rowwise() - mean).array().square().colwise().mean();
    Index best = 0;
    for (Index c = 1; c < var.size(); ++c)
        if (var[c] < var[best]) best = c;
    return best;
}

}  // namespace moblp
