#include "moblp/ksa.hpp"

#include "moblp/error.hpp"
#include "moblp/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace moblp {

bool point_less(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool dominates(const Point& a, const Point& b) {
    return (a.array() <= b.array()).all() && (a.array() != b.array()).any();
}

bool Frontier::same_points(const Frontier& other) const {
    if (points.size() != other.points.size()) return false;
    for (std::size_t k = 0; k < points.size(); ++k)
        if (points[k].size() != other.points[k].size() || points[k] != other.points[k]) return false;
    return true;
}

std::vector<Point> nondominated_filter(std::vector<Point> points) {
    std::sort(points.begin(), points.end(), point_less);
    points.erase(std::unique(points.begin(), points.end(), [](const Point& a, const Point& b) { return a == b; }),
                 points.end());
    std::vector<Point> kept;
    for (const auto& candidate : points) {
        // In lexicographic order only earlier points can dominate later ones.
        const bool dominated = std::any_of(kept.begin(), kept.end(), [&](const Point& k) { return dominates(k, candidate); });
        if (!dominated) kept.push_back(candidate);
    }
    return kept;
}

BoxList::BoxList(Eigen::VectorXd lower, Eigen::VectorXd initial_upper) : lower_(std::move(lower)) {
    if (lower_.size() != initial_upper.size()) throw DimensionError("box corners differ in dimension");
    add(std::move(initial_upper));
}

void BoxList::add(Eigen::VectorXd upper) {
    if (upper.size() != lower_.size()) throw DimensionError("box corner has the wrong dimension");
    if (!(upper.array() > lower_.array()).all()) return;
    const bool covered = std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& box) {
        return (upper.array() <= box.upper.array()).all();
    });
    if (!covered) boxes_.push_back(Box{std::move(upper), next_birth_++});
}

void BoxList::update(const Eigen::VectorXd& found) {
    if (found.size() != lower_.size()) throw DimensionError("found point has the wrong dimension");
    std::vector<Box> kept;
    std::vector<Eigen::VectorXd> children;
    for (auto& box : boxes_) {
        if (!(found.array() <= box.upper.array()).all()) {
            kept.push_back(std::move(box));
            continue;
        }
        for (Index i = 0; i < found.size(); ++i) {
            Eigen::VectorXd child = box.upper;
            child[i] = found[i] - 1.0;
            if (child[i] > lower_[i]) children.push_back(std::move(child));
        }
    }
    // A child survives unless another live corner covers it; among equal
    // corners the first survives.
    const auto covers = [](const Eigen::VectorXd& big, const Eigen::VectorXd& small) {
        return (small.array() <= big.array()).all();
    };
    std::vector<bool> alive(children.size(), true);
    for (std::size_t c = 0; c < children.size(); ++c) {
        if (std::any_of(kept.begin(), kept.end(), [&](const Box& box) { return covers(box.upper, children[c]); })) {
            alive[c] = false;
            continue;
        }
        for (std::size_t d = 0; d < children.size() && alive[c]; ++d) {
            if (d == c || !alive[d] || !covers(children[d], children[c])) continue;
            const bool equal = children[d] == children[c];
            if (!equal || d < c) alive[c] = false;
        }
    }
    boxes_ = std::move(kept);
    for (std::size_t c = 0; c < children.size(); ++c)
        if (alive[c]) boxes_.push_back(Box{std::move(children[c]), next_birth_++});
}

BoxList box_update(BoxList boxes, const Eigen::VectorXd& found) {
    boxes.update(found);
    return boxes;
}

namespace {

LinearRow upper_bound_row(const Eigen::MatrixXd& C, Index objective, double bound) {
    return LinearRow{C.row(objective).transpose(), Sense::LE, bound};
}

/// Non-projected coordinates of a <= those of b.
bool projected_leq(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Index projection) {
    for (Index i = 0; i < a.size(); ++i)
        if (i != projection && a[i] > b[i]) return false;
    return true;
}

}  // namespace

Frontier ksa_solve(const MoblpInstance& inst, Index projection, const KsaOptions& options) {
    inst.validate();
    const Index p = inst.p();
    if (projection < 0 || projection >= p) throw InvalidArgument("projection index out of range");
    if (!(inst.C.array() == inst.C.array().round()).all())
        throw InvalidArgument("ksa_solve requires integral objective coefficients");

    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    Frontier frontier;
    frontier.p = p;
    frontier.projection = projection;

    Eigen::VectorXd lower(p), upper(p);
    for (Index i = 0; i < p; ++i) {
        try {
            const auto [lo, hi] = objective_bounds(inst, i, options.bnb.lp);
            lower[i] = std::floor(lo + 1e-9) - 1.0;
            upper[i] = std::ceil(hi - 1e-9) + 1.0;
        } catch (const InfeasibleError&) {
            // The root stage-one solve below reports the empty region.
            lower[i] = -1.0;
            upper[i] = 1.0;
        }
    }
    BoxList boxes(lower, upper);

    const Eigen::VectorXd stage_two_objective = inst.C.colwise().sum().transpose() - inst.C.row(projection).transpose();

    while (!boxes.empty()) {
        if (options.time_limit_s && elapsed() > *options.time_limit_s) {
            frontier.complete = false;
            break;
        }
        // largest volume over the non-projected coordinates, ties to the oldest box
        const auto& all = boxes.boxes();
        std::size_t pick = 0;
        double best_volume = -1.0;
        for (std::size_t k = 0; k < all.size(); ++k) {
            double volume = 1.0;
            for (Index i = 0; i < p; ++i)
                if (i != projection) volume *= all[k].upper[i] - lower[i];
            if (volume > best_volume || (volume == best_volume && all[k].birth < all[pick].birth)) {
                best_volume = volume;
                pick = k;
            }
        }
        const Eigen::VectorXd box = all[pick].upper;

        IlpQuery stage_one = IlpQuery::over(inst, inst.C.row(projection).transpose());
        for (Index i = 0; i < p; ++i)
            if (i != projection) stage_one.extra.push_back(upper_bound_row(inst.C, i, box[i]));
        const auto first = solve_ilp(stage_one, options.bnb);
        ++frontier.ilp_count;
        frontier.nodes += first.nodes_expanded;

        if (first.status == LpStatus::Infeasible) {
            boxes.remove_if([&](const BoxList::Box& b) { return projected_leq(b.upper, box, projection); });
            continue;
        }
        const double best_projected = std::round(first.objective);
        if (best_projected > box[projection]) {
            boxes.remove_if([&](const BoxList::Box& b) {
                return projected_leq(b.upper, box, projection) && b.upper[projection] < best_projected;
            });
            continue;
        }

        IlpQuery stage_two = std::move(stage_one);
        stage_two.objective = stage_two_objective;
        stage_two.extra.push_back(upper_bound_row(inst.C, projection, best_projected));
        stage_two.incumbent = first.x;
        const auto second = solve_ilp(stage_two, options.bnb);
        ++frontier.ilp_count;
        frontier.nodes += second.nodes_expanded;
        if (second.status == LpStatus::Infeasible)
            throw std::logic_error("KSA stage two infeasible although stage one found a point");

        const Point found = (inst.C * second.x).array().round().matrix();
        frontier.points.push_back(found);
        boxes.update(found);
    }

    std::sort(frontier.points.begin(), frontier.points.end(), point_less);
    frontier.time_s = elapsed();
    return frontier;
}

Frontier brute_force_frontier(const MoblpInstance& inst) {
    inst.validate();
    const Index n = inst.n();
    if (n > kBruteForceMaxVars) throw InvalidArgument("brute_force_frontier is limited to n <= 22");
    std::vector<Point> images;
    Eigen::VectorXd x(n);
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        for (Index j = 0; j < n; ++j) x[j] = static_cast<double>((mask >> j) & 1U);
        if (inst.is_feasible(x)) images.push_back(inst.C * x);
    }
    Frontier frontier;
    frontier.p = inst.p();
    frontier.points = nondominated_filter(std::move(images));
    return frontier;
}

void write_frontier(std::ostream& out, const Frontier& frontier) {
    out << frontier.p << ' ' << frontier.points.size() << ' ' << frontier.projection + 1 << ' ' << frontier.ilp_count
        << ' ' << frontier.nodes << ' ' << format_number(frontier.time_s) << '\n';
    for (const auto& point : frontier.points) {
        for (Index i = 0; i < point.size(); ++i) out << (i ? " " : "") << format_number(point[i]);
        out << '\n';
    }
}

Frontier parse_frontier(std::istream& in) {
    Frontier frontier;
    std::size_t count = 0;
    Index j = 0;
    std::string header;
    if (!std::getline(in, header)) throw ParseError("missing .nd header", 1);
    std::istringstream fields(header);
    if (!(fields >> frontier.p >> count >> j >> frontier.ilp_count >> frontier.nodes >> frontier.time_s))
        throw ParseError("header must be 'p count j ilp_count nodes time_s'", 1);
    frontier.projection = j - 1;
    std::string line;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        std::istringstream values(line);
        std::vector<double> coords;
        for (double v; values >> v;) coords.push_back(v);
        if (coords.empty()) continue;
        if (static_cast<Index>(coords.size()) != frontier.p) throw ParseError("point has the wrong dimension", number);
        frontier.points.push_back(Eigen::Map<Eigen::VectorXd>(coords.data(), frontier.p));
    }
    if (frontier.points.size() != count) throw DimensionError("header point count does not match the file");
    return frontier;
}

}  // namespace moblp
