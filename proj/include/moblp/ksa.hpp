#ifndef MOBLP_KSA_HPP
#define MOBLP_KSA_HPP

#include "moblp/bnb.hpp"
#include "moblp/instance.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace moblp {

using Point = Eigen::VectorXd;

/// Lexicographic order on equal-length points.
bool point_less(const Point& a, const Point& b);

/// a dominates b: a <= b componentwise and a != b.
bool dominates(const Point& a, const Point& b);

struct Frontier {
    Index p = 0;
    Index projection = 0;  ///< 0-based objective used in stage one
    std::vector<Point> points;  ///< lexicographically sorted
    std::size_t ilp_count = 0;
    std::size_t nodes = 0;
    double time_s = 0.0;
    bool complete = true;  ///< false when a time cap stopped the search

    /// Set equality of the point sets.
    bool same_points(const Frontier& other) const;
};

/// Axis-aligned boxes sharing an implicit lower corner; each box is {z : z <= upper}.
class BoxList {
public:
    struct Box {
        Eigen::VectorXd upper;
        std::size_t birth;
    };

    BoxList(Eigen::VectorXd lower, Eigen::VectorXd initial_upper);

    const std::vector<Box>& boxes() const { return boxes_; }
    const Eigen::VectorXd& lower() const { return lower_; }
    bool empty() const { return boxes_.empty(); }
    std::size_t size() const { return boxes_.size(); }

    /// Inserts a box unless its corner has no positive extent or is covered by a live box.
    void add(Eigen::VectorXd upper);

    /// Replaces every box containing `found` by its children u_i' = found_i - 1
    /// and drops children that are empty or covered by another live box.
    void update(const Eigen::VectorXd& found);

    /// Removes boxes for which `pred(box)` holds.
    template <class Pred>
    void remove_if(Pred pred) {
        std::erase_if(boxes_, pred);
    }

private:
    Eigen::VectorXd lower_;
    std::vector<Box> boxes_;
    std::size_t next_birth_ = 0;
};

/// Free-function form of BoxList::update.
BoxList box_update(BoxList boxes, const Eigen::VectorXd& found);

struct KsaOptions {
    std::optional<double> time_limit_s;
    BnbOptions bnb;
};

/// Exact nondominated frontier with objective `projection` (0-based) minimized
/// in stage one and the sum of the others in stage two.
///
/// Boxes live in the full p-dimensional criterion space; the stage-one problem
/// bounds only the non-projected objectives, and a stage-one value above the
/// box's projected bound marks the box empty. Requires integral objective data.
Frontier ksa_solve(const MoblpInstance& inst, Index projection, const KsaOptions& options = {});

/// Enumerates {0,1}^n (n <= 22) and filters the images by Pareto dominance.
Frontier brute_force_frontier(const MoblpInstance& inst);

/// Pareto filter of arbitrary points (duplicates collapsed); result sorted.
std::vector<Point> nondominated_filter(std::vector<Point> points);

// .nd format: header "p count j ilp_count nodes time_s" (j 1-based), then one point per line.
void write_frontier(std::ostream& out, const Frontier& frontier);
Frontier parse_frontier(std::istream& in);

}  // namespace moblp

#endif  // MOBLP_KSA_HPP
