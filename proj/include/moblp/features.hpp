#ifndef MOBLP_FEATURES_HPP
#define MOBLP_FEATURES_HPP

#include "moblp/instance.hpp"
#include "moblp/simplex.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace moblp {

/// Avg, Min, Max, Std (population), Median. The empty set gives zeros.
using Stats5 = std::array<double, 5>;
Stats5 stats5(std::vector<double> values);

inline constexpr std::array<const char*, 5> kStatNames{"avg", "min", "max", "std", "median"};

/// a + 1 for a >= 0, a - 1 otherwise; never smaller than 1 in magnitude.
inline double g(double a) { return a >= 0 ? a + 1.0 : a - 1.0; }

/// Squared column norms of A over their total; 1/n each when A is zero.
Eigen::VectorXd leverage_scores(const Eigen::MatrixXd& A);

/// 5p^2 + 106p - 50.
Index feature_count(Index p);

struct FeatureVector {
    Index p = 0;
    std::vector<std::string> names;  ///< F<k>[_i[_l]][.stat]
    Eigen::VectorXd values;
};

/// Column names for p objectives, family-major, objective index inside.
std::vector<std::string> feature_names(Index p);

/// Family tag of a name, e.g. "F28" for "F28_1_3.max".
std::string feature_family(const std::string& name);

/// Static features of an instance whose objectives are already in canonical
/// order. Throws InfeasibleError when the LP relaxation is empty.
FeatureVector extract_features(const MoblpInstance& inst, const SimplexOptions& lp = {});

struct NormalizationParams {
    std::vector<std::string> names;
    Eigen::VectorXd mean;
    Eigen::VectorXd std;  ///< population; 0 marks a constant feature
    std::vector<std::string> group;

    Index size() const { return mean.size(); }
    bool constant(Index k) const;
};

/// Per-feature moments over the rows of `X` (one instance per row).
NormalizationParams fit_normalizer(const Eigen::MatrixXd& X, std::vector<std::string> names);

/// clamp((x - mean) / (3 std), -1, 1), with constant features sent to 0.
Eigen::VectorXd apply_normalizer(const NormalizationParams& params, const Eigen::VectorXd& x);
Eigen::MatrixXd apply_normalizer_rows(const NormalizationParams& params, const Eigen::MatrixXd& X);

/// Feature matrix file: "id,<names...>" header, one row per instance.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<std::string> ids;
    Eigen::MatrixXd X;
};

void write_feature_table(std::ostream& out, const FeatureTable& table);
FeatureTable parse_feature_table(std::istream& in);
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_table(const std::filesystem::path& path);

}  // namespace moblp

#endif  // MOBLP_FEATURES_HPP
