#ifndef MOBLP_INSTANCE_HPP
#define MOBLP_INSTANCE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace moblp {

using Index = Eigen::Index;

enum class Sense { LE, GE, EQ };
enum class InstanceKind { AP, KP, Generic };

std::string_view to_string(Sense sense);
std::string_view to_string(InstanceKind kind);
InstanceKind parse_kind(std::string_view token);

/// Evaluates `lhs sense rhs` with an absolute tolerance.
bool satisfies(double lhs, Sense sense, double rhs, double tol = 0.0);

/// A linear program with p objectives c_i^T x (all minimized) over x in {0,1}^n
/// subject to m rows A x (sense) b.
struct MoblpInstance {
    Eigen::MatrixXd C;  ///< p x n objective coefficients
    Eigen::MatrixXd A;  ///< m x n constraint matrix
    Eigen::VectorXd b;
    std::vector<Sense> sense;
    InstanceKind kind = InstanceKind::Generic;
    std::string id;
    std::optional<std::uint64_t> seed;

    Index p() const { return C.rows(); }
    Index n() const { return C.cols(); }
    Index m() const { return A.rows(); }

    /// Throws DimensionError / InvalidArgument when a structural invariant fails.
    void validate() const;

    /// z(x) for a 0-1 point.
    Eigen::VectorXd image(const Eigen::VectorXd& x) const { return C * x; }

    bool is_feasible(const Eigen::VectorXd& x, double tol = 1e-9) const;

    /// Coarse subclass key used to group runs, e.g. "KP-n10" or "AP-4x4".
    std::string subclass() const;
};

/// Exact equality of all data and metadata (shapes compared first).
bool operator==(const MoblpInstance& lhs, const MoblpInstance& rhs);

struct PreorderReport {
    std::vector<Index> permutation;  ///< new objective index -> original index
    Eigen::VectorXd scores;          ///< c_i^T x~, in the new order
};

/// x~_j = 1 / (sum_i |c_ij| + 1).
Eigen::VectorXd preorder_point(const Eigen::MatrixXd& C);

/// Reorders objective rows by non-decreasing c_i^T x~; equal scores fall back
/// to lexicographic comparison of the coefficient rows.
std::pair<MoblpInstance, PreorderReport> preorder(const MoblpInstance& inst);

/// Closed integer interval for generated coefficients.
struct CoeffRange {
    std::int64_t lo = 1;
    std::int64_t hi = 100;
};

/// Multi-objective 0-1 knapsack: profits ~ U{range} stored negated,
/// weights ~ U{range}, capacity = ceil(sum(w) / 2).
MoblpInstance generate_kp(Index n, Index p, std::uint64_t seed, CoeffRange range = {1, 100});

/// r x r assignment with costs ~ U{range}. Variable (agent a, task t) is a*r + t;
/// rows 0..r-1 are agent constraints, rows r..2r-1 task constraints.
MoblpInstance generate_ap(Index r, Index p, std::uint64_t seed, CoeffRange range = {1, 20});

// .moblp text format
//   p n m kind
//   p lines of n objective coefficients
//   m lines of n coefficients, a sense token (<=, >=, =) and the rhs
// '#' starts a comment; "# id <x>" and "# seed <n>" are read back as metadata.
MoblpInstance parse_instance(std::istream& in);
void write_instance(std::ostream& out, const MoblpInstance& inst);
MoblpInstance read_instance(const std::filesystem::path& path);
void write_instance(const MoblpInstance& inst, const std::filesystem::path& path);

/// Shortest round-trip decimal rendering of a double.
std::string format_number(double value);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace moblp

#endif  // MOBLP_INSTANCE_HPP
