#include "moblp/error.hpp"
#include "moblp/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace moblp {

std::vector<Index> informative_columns(const Eigen::MatrixXd& X) {
    std::vector<Index> out;
    if (X.rows() == 0) return out;
    for (Index c = 0; c < X.cols(); ++c) {
        const double mean = X.col(c).mean();
        const double sd = std::sqrt((X.col(c).array() - mean).square().mean());
        if (sd > 1e-12 * std::max(1.0, std::abs(mean))) out.push_back(c);
    }
    return out;
}

SubsetFrontier subset_frontier(const Eigen::MatrixXd& X, const std::vector<Index>& y, Index p, const MsvmOptions& options,
                               const std::vector<std::string>& names) {
    SubsetFrontier frontier;
    frontier.retained = informative_columns(X);
    if (frontier.retained.size() < 2)
        throw InvalidArgument("need at least 2 informative features, found " + std::to_string(frontier.retained.size()));
    std::vector<Index> active = frontier.retained;
    while (!active.empty()) {
        SubsetPoint point;
        point.k = static_cast<Index>(active.size());
        point.model = train_msvm(X, y, p, active, options, names);
        point.e = training_error(point.model, X, y);
        const Index drop = least_important_feature(point.model.W);
        frontier.points.push_back(std::move(point));
        active.erase(active.begin() + drop);
    }
    return frontier;
}

SelectedModel select_model(const SubsetFrontier& frontier) {
    if (frontier.points.empty()) throw InvalidArgument("subset frontier is empty");
    const auto& pts = frontier.points;
    SelectedModel out;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        bool dominated = false;
        for (std::size_t b = 0; b < pts.size() && !dominated; ++b) {
            if (a == b) continue;
            const bool weakly = pts[b].k <= pts[a].k && pts[b].e <= pts[a].e;
            const bool equal = pts[b].k == pts[a].k && pts[b].e == pts[a].e;
            dominated = weakly && (!equal || b < a);
        }
        if (!dominated) out.filtered.push_back(pts[a]);
    }
    std::sort(out.filtered.begin(), out.filtered.end(), [](const SubsetPoint& l, const SubsetPoint& r) { return l.k < r.k; });

    const auto& few = out.filtered.front();  // (k', e'): fewest features, largest error
    const auto& many = out.filtered.back();  // (k'', e'')
    const double k_span = static_cast<double>(many.k - few.k);
    const double e_span = few.e - many.e;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& point : out.filtered) {
        const double kn = k_span > 0 ? static_cast<double>(point.k - few.k) / k_span : 0.0;
        const double en = e_span > 0 ? (point.e - many.e) / e_span : 0.0;
        const double d = std::hypot(kn, en);
        if (d < best - 1e-12) {  // near-equal distances count as ties
            best = d;
            out.point = point;
        }
    }
    out.distance = best;
    return out;
}

Index TrainedModel::classify(const Eigen::VectorXd& raw_features) const {
    return predict(msvm, msvm.restrict(apply_normalizer(normalizer, raw_features)));
}

}  // namespace moblp
