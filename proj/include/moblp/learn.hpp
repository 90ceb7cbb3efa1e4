#ifndef MOBLP_LEARN_HPP
#define MOBLP_LEARN_HPP

#include "moblp/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace moblp {

// Class labels are 0-based objective indices here; files and the CLI print them 1-based.

struct MsvmOptions {
    double c_reg = 5e4;
    double tol = 0.1;  ///< largest per-example KKT violation allowed at exit
    int max_epochs = 1000;
    std::uint64_t seed = 1;  ///< example order
};

struct MsvmModel {
    Eigen::MatrixXd W;          ///< p x k, one row per class
    std::vector<Index> active;  ///< columns of the full feature vector, in W's column order
    std::vector<std::string> names;
    double c_reg = 0;
    double tol = 0;
    int epochs = 0;  ///< epochs used by the trainer

    Index p() const { return W.rows(); }
    Index k() const { return W.cols(); }
    /// Picks the active entries out of a full (normalized) feature vector.
    Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
};

/// Linear Crammer-Singer machine without bias, trained by dual coordinate
/// ascent one example block at a time. `X` holds one example per row over
/// the columns listed in `active` (all columns when empty). Labels lie in [0, p).
MsvmModel train_msvm(const Eigen::MatrixXd& X, const std::vector<Index>& y, Index p, std::vector<Index> active = {},
                     const MsvmOptions& options = {}, const std::vector<std::string>& names = {});

/// argmax_y w_y . x over an already restricted vector; ties to the smallest class.
Index predict(const Eigen::MatrixXd& W, const Eigen::VectorXd& x);
Index predict(const MsvmModel& model, const Eigen::VectorXd& x_active);

/// Fraction of rows of `X` (full feature columns) that the model mislabels.
double training_error(const MsvmModel& model, const Eigen::MatrixXd& X, const std::vector<Index>& y);

/// Column of W with the smallest population standard deviation; ties to the lowest index.
Index least_important_feature(const Eigen::MatrixXd& W);

/// Columns of `X` that vary across its rows (std above 1e-12 max(1, |mean|)).
std::vector<Index> informative_columns(const Eigen::MatrixXd& X);

struct SubsetPoint {
    Index k = 0;
    double e = 0;
    MsvmModel model;
};

struct SubsetFrontier {
    std::vector<Index> retained;  ///< columns surviving the degenerate filter
    std::vector<SubsetPoint> points;  ///< k = K, K-1, ..., 1
};

/// Backward elimination: train on all retained features, then drop the
/// least important column and retrain until one feature is left.
SubsetFrontier subset_frontier(const Eigen::MatrixXd& X, const std::vector<Index>& y, Index p,
                               const MsvmOptions& options = {}, const std::vector<std::string>& names = {});

struct SelectedModel {
    SubsetPoint point;
    double distance = 0;  ///< to the ideal point after normalization
    std::vector<SubsetPoint> filtered;  ///< nondominated points, ascending k
};

/// Drops dominated (k, e) points, rescales both axes to [0, 1] between the
/// extreme points and returns the point nearest the origin; ties to smaller k.
SelectedModel select_model(const SubsetFrontier& frontier);

/// Everything needed to label a new instance.
struct TrainedModel {
    Index p = 0;
    MsvmModel msvm;
    NormalizationParams normalizer;
    Index selected_k = 0;
    double selected_e = 0;
    double distance = 0;
    std::uint64_t seed = 0;

    /// Label for raw (unnormalized) features of a pre-ordered instance.
    Index classify(const Eigen::VectorXd& raw_features) const;
};

void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel parse_model(std::istream& in);
void write_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel read_model(const std::filesystem::path& path);

}  // namespace moblp

#endif  // MOBLP_LEARN_HPP
