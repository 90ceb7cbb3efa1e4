#ifndef MOBLP_HARNESS_HPP
#define MOBLP_HARNESS_HPP

#include "moblp/instance.hpp"
#include "moblp/ksa.hpp"
#include "moblp/learn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moblp {

enum class LabelMetric { Nodes, IlpCount, TimeS };
std::string_view to_string(LabelMetric metric);
LabelMetric parse_metric(std::string_view token);

struct ProjectionEffort {
    double time_s = 0;
    std::size_t ilp_count = 0;
    std::size_t nodes = 0;

    double value(LabelMetric metric) const;
};

struct LabelRecord {
    std::string id;
    std::string subclass;
    std::vector<ProjectionEffort> effort;  ///< one entry per projection objective
    std::optional<Index> label;            ///< argmin of the metric; empty when a run hit the time cap
    LabelMetric metric = LabelMetric::Nodes;

    Index p() const { return static_cast<Index>(effort.size()); }
    Eigen::VectorXd values() const;
    /// Best minus worst metric value over the projections.
    double range() const;
};

/// Label with ties to the smallest projection index.
LabelRecord make_record(std::string id, std::string subclass, std::vector<ProjectionEffort> effort,
                        LabelMetric metric);

struct LabelOptions {
    LabelMetric metric = LabelMetric::Nodes;
    std::optional<double> time_cap_s;  ///< for the whole instance, all projections together
    KsaOptions ksa;
};

/// Thrown when two projections of the same instance disagree on the frontier.
struct FrontierMismatch : std::logic_error {
    using std::logic_error::logic_error;
};

/// Solves the instance once per projection, in sequence, and checks that
/// every run found the same frontier.
LabelRecord label_instance(const MoblpInstance& inst, const LabelOptions& options = {},
                           Frontier* frontier_out = nullptr);

/// Keeps, per subclass, the records whose range exceeds min + sample std of
/// the subclass ranges. Subclasses with fewer than 2 records pass through.
std::vector<LabelRecord> reduce_set(const std::vector<LabelRecord>& records);

struct GroupReport {
    std::string subclass;
    std::size_t count = 0;
    double accuracy = 0;         ///< prediction inside the argmin set
    double strict_accuracy = 0;  ///< prediction equals the recorded label
    double t_rand = 0, t_ml = 0, t_best = 0;
    double ml_vs_rand = 0;    ///< percent
    double best_vs_rand = 0;  ///< percent
    double ratio = 0;         ///< ml_vs_rand / best_vs_rand
};

struct EvaluationReport {
    std::vector<GroupReport> groups;  ///< sorted by subclass
    GroupReport overall;
    std::size_t before_reduction = 0;
    std::size_t after_reduction = 0;
    LabelMetric metric = LabelMetric::Nodes;
};

/// Scores predictions (0-based projections) against labeled records.
EvaluationReport evaluate(const std::vector<LabelRecord>& records, const std::vector<Index>& predictions);

/// Plain-text table of an evaluation.
std::string render_report(const EvaluationReport& report, std::string_view title = {});
void write_report_json(std::ostream& out, const EvaluationReport& report, const std::string& extra_json = "{}");
EvaluationReport parse_report_json(std::istream& in);

// Labels file: "# seed <s> metric <m>" comment, then
// id,subclass,time_1,ilps_1,nodes_1,...,time_p,ilps_p,nodes_p,label
// with 1-based labels and NA for unlabeled records.
void write_labels(std::ostream& out, const std::vector<LabelRecord>& records, std::uint64_t seed);
std::vector<LabelRecord> parse_labels(std::istream& in);
void write_labels(const std::vector<LabelRecord>& records, std::uint64_t seed, const std::filesystem::path& path);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);

}  // namespace moblp

#endif  // MOBLP_HARNESS_HPP
