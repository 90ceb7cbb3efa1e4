#include "moblp/harness.hpp"

#include "moblp/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace moblp {

std::string_view to_string(LabelMetric metric) {
    switch (metric) {
        case LabelMetric::Nodes: return "nodes";
        case LabelMetric::IlpCount: return "ilp_count";
        case LabelMetric::TimeS: return "time_s";
    }
    return "?";
}

LabelMetric parse_metric(std::string_view token) {
    if (token == "nodes") return LabelMetric::Nodes;
    if (token == "ilp_count" || token == "ilps") return LabelMetric::IlpCount;
    if (token == "time_s" || token == "time") return LabelMetric::TimeS;
    throw InvalidArgument("unknown label metric '" + std::string(token) + "' (nodes, ilp_count, time_s)");
}

double ProjectionEffort::value(LabelMetric metric) const {
    switch (metric) {
        case LabelMetric::Nodes: return static_cast<double>(nodes);
        case LabelMetric::IlpCount: return static_cast<double>(ilp_count);
        case LabelMetric::TimeS: return time_s;
    }
    return 0;
}

Eigen::VectorXd LabelRecord::values() const {
    Eigen::VectorXd out(p());
    for (Index j = 0; j < p(); ++j) out[j] = effort[static_cast<std::size_t>(j)].value(metric);
    return out;
}

double LabelRecord::range() const {
    const Eigen::VectorXd v = values();
    return v.size() ? v.maxCoeff() - v.minCoeff() : 0.0;
}

LabelRecord make_record(std::string id, std::string subclass, std::vector<ProjectionEffort> effort, LabelMetric metric) {
    LabelRecord record;
    record.id = std::move(id);
    record.subclass = std::move(subclass);
    record.effort = std::move(effort);
    record.metric = metric;
    if (!record.effort.empty()) {
        const Eigen::VectorXd v = record.values();
        Index best = 0;
        for (Index j = 1; j < v.size(); ++j)
            if (v[j] < v[best]) best = j;
        record.label = best;
    }
    return record;
}

LabelRecord label_instance(const MoblpInstance& inst, const LabelOptions& options, Frontier* frontier_out) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    std::vector<ProjectionEffort> effort;
    std::optional<Frontier> reference;
    bool complete = true;
    for (Index j = 0; j < inst.p(); ++j) {
        KsaOptions ksa = options.ksa;
        if (options.time_cap_s) {
            const double used = std::chrono::duration<double>(Clock::now() - start).count();
            ksa.time_limit_s = std::max(0.0, *options.time_cap_s - used);
        }
        const Frontier f = ksa_solve(inst, j, ksa);
        effort.push_back(ProjectionEffort{f.time_s, f.ilp_count, f.nodes});
        if (!f.complete) {
            complete = false;
            break;
        }
        if (!reference) reference = f;
        else if (!reference->same_points(f))
            throw FrontierMismatch("projections 1 and " + std::to_string(j + 1) + " disagree on the frontier of " + inst.id);
    }
    if (!complete) {
        LabelRecord record;
        record.id = inst.id;
        record.subclass = inst.subclass();
        record.effort = std::move(effort);
        record.effort.resize(static_cast<std::size_t>(inst.p()));
        record.metric = options.metric;
        return record;
    }
    if (frontier_out) *frontier_out = *reference;
    return make_record(inst.id, inst.subclass(), std::move(effort), options.metric);
}

std::vector<LabelRecord> reduce_set(const std::vector<LabelRecord>& records) {
    std::map<std::string, std::vector<double>> ranges;
    for (const auto& r : records) ranges[r.subclass].push_back(r.range());
    std::map<std::string, double> threshold;
    for (const auto& [subclass, values] : ranges) {
        if (values.size() < 2) continue;
        const double count = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        threshold[subclass] = *std::min_element(values.begin(), values.end()) + std::sqrt(ss / (count - 1.0));
    }
    std::vector<LabelRecord> kept;
    for (const auto& r : records) {
        const auto it = threshold.find(r.subclass);
        if (it == threshold.end() || r.range() > it->second) kept.push_back(r);
    }
    return kept;
}

namespace {

struct Totals {
    std::size_t count = 0, correct = 0, strict = 0;
    double t_rand = 0, t_ml = 0, t_best = 0;

    void add(const LabelRecord& r, Index predicted) {
        const Eigen::VectorXd v = r.values();
        ++count;
        correct += v[predicted] == v.minCoeff();
        strict += r.label && *r.label == predicted;
        t_rand += v.mean();
        t_ml += v[predicted];
        t_best += v.minCoeff();
    }

    GroupReport finish(std::string subclass) const {
        GroupReport g;
        g.subclass = std::move(subclass);
        g.count = count;
        g.accuracy = count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0;
        g.strict_accuracy = count ? static_cast<double>(strict) / static_cast<double>(count) : 0.0;
        g.t_rand = t_rand;
        g.t_ml = t_ml;
        g.t_best = t_best;
        g.ml_vs_rand = t_rand > 0 ? 100.0 * (t_rand - t_ml) / t_rand : 0.0;
        g.best_vs_rand = t_rand > 0 ? 100.0 * (t_rand - t_best) / t_rand : 0.0;
        g.ratio = g.best_vs_rand != 0 ? g.ml_vs_rand / g.best_vs_rand : 0.0;
        return g;
    }
};

}  // namespace

EvaluationReport evaluate(const std::vector<LabelRecord>& records, const std::vector<Index>& predictions) {
    if (records.empty()) throw InvalidArgument("evaluation needs at least one test record");
    if (records.size() != predictions.size()) throw DimensionError("one prediction per record is required");
    EvaluationReport report;
    report.metric = records.front().metric;
    report.before_reduction = report.after_reduction = records.size();
    std::map<std::string, Totals> groups;
    Totals overall;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        if (!r.label) throw InvalidArgument("record " + r.id + " is unlabeled");
        if (predictions[k] < 0 || predictions[k] >= r.p()) throw InvalidArgument("prediction out of range for " + r.id);
        groups[r.subclass].add(r, predictions[k]);
        overall.add(r, predictions[k]);
    }
    for (const auto& [subclass, totals] : groups) report.groups.push_back(totals.finish(subclass));
    report.overall = overall.finish("all");
    return report;
}

std::string render_report(const EvaluationReport& report, std::string_view title) {
    std::ostringstream out;
    if (!title.empty()) out << title << '\n';
    out << "metric: " << to_string(report.metric) << "   records: " << report.after_reduction;
    if (report.before_reduction != report.after_reduction) out << " (of " << report.before_reduction << " before reduction)";
    out << "\n\n";
    out << std::left << std::setw(14) << "subclass" << std::right << std::setw(7) << "count" << std::setw(11) << "accuracy"
        << std::setw(9) << "strict" << std::setw(14) << "ML vs Rand" << std::setw(16) << "Best vs Rand" << std::setw(9)
        << "ratio" << '\n';
    const auto row = [&](const GroupReport& g) {
        out << std::left << std::setw(14) << g.subclass << std::right << std::setw(7) << g.count << std::fixed
            << std::setprecision(1) << std::setw(10) << 100.0 * g.accuracy << '%' << std::setw(8)
            << 100.0 * g.strict_accuracy << '%' << std::setw(13) << g.ml_vs_rand << '%' << std::setw(15)
            << g.best_vs_rand << '%' << std::setw(8) << 100.0 * g.ratio << '%' << '\n';
        out.unsetf(std::ios::floatfield);
    };
    for (const auto& g : report.groups) row(g);
    out << std::string(80, '-') << '\n';
    row(report.overall);
    return out.str();
}

namespace {

using nlohmann::json;

json group_json(const GroupReport& g) {
    return json{{"subclass", g.subclass},     {"count", g.count},         {"accuracy", g.accuracy},
                {"strict_accuracy", g.strict_accuracy}, {"t_rand", g.t_rand}, {"t_ml", g.t_ml},
                {"t_best", g.t_best},         {"ml_vs_rand", g.ml_vs_rand}, {"best_vs_rand", g.best_vs_rand},
                {"ratio", g.ratio}};
}

GroupReport group_from(const json& j) {
    GroupReport g;
    g.subclass = j.at("subclass").get<std::string>();
    g.count = j.at("count").get<std::size_t>();
    g.accuracy = j.at("accuracy").get<double>();
    g.strict_accuracy = j.at("strict_accuracy").get<double>();
    g.t_rand = j.at("t_rand").get<double>();
    g.t_ml = j.at("t_ml").get<double>();
    g.t_best = j.at("t_best").get<double>();
    g.ml_vs_rand = j.at("ml_vs_rand").get<double>();
    g.best_vs_rand = j.at("best_vs_rand").get<double>();
    g.ratio = j.at("ratio").get<double>();
    return g;
}

}  // namespace

void write_report_json(std::ostream& out, const EvaluationReport& report, const std::string& extra_json) {
    json doc{{"metric", std::string(to_string(report.metric))},
             {"before_reduction", report.before_reduction},
             {"after_reduction", report.after_reduction},
             {"overall", group_json(report.overall)},
             {"groups", json::array()},
             {"run", json::parse(extra_json)}};
    for (const auto& g : report.groups) doc["groups"].push_back(group_json(g));
    out << doc.dump(1) << '\n';
}

EvaluationReport parse_report_json(std::istream& in) {
    try {
        json doc;
        in >> doc;
        EvaluationReport report;
        report.metric = parse_metric(doc.at("metric").get<std::string>());
        report.before_reduction = doc.at("before_reduction").get<std::size_t>();
        report.after_reduction = doc.at("after_reduction").get<std::size_t>();
        report.overall = group_from(doc.at("overall"));
        for (const auto& g : doc.at("groups")) report.groups.push_back(group_from(g));
        return report;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report file: ") + e.what(), 0);
    }
}

void write_labels(std::ostream& out, const std::vector<LabelRecord>& records, std::uint64_t seed) {
    const Index p = records.empty() ? 0 : records.front().p();
    const LabelMetric metric = records.empty() ? LabelMetric::Nodes : records.front().metric;
    out << "# seed " << seed << " metric " << to_string(metric) << '\n';
    out << "id,subclass";
    for (Index j = 1; j <= p; ++j) out << ",time_" << j << ",ilps_" << j << ",nodes_" << j;
    out << ",label\n";
    for (const auto& r : records) {
        if (r.p() != p) throw DimensionError("records differ in objective count");
        out << r.id << ',' << r.subclass;
        for (const auto& e : r.effort) out << ',' << format_number(e.time_s) << ',' << e.ilp_count << ',' << e.nodes;
        out << ',';
        if (r.label) out << *r.label + 1;
        else out << "NA";
        out << '\n';
    }
}

std::vector<LabelRecord> parse_labels(std::istream& in) {
    std::vector<LabelRecord> records;
    LabelMetric metric = LabelMetric::Nodes;
    std::string line;
    std::size_t number = 0;
    Index p = -1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            for (std::string key, value; meta >> key >> value;)
                if (key == "metric") metric = parse_metric(value);
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (p < 0) {
            if (cells.size() < 6 || cells[0] != "id" || (cells.size() - 3) % 3 != 0)
                throw ParseError("labels header must be id,subclass,(time,ilps,nodes)...,label", number);
            p = static_cast<Index>((cells.size() - 3) / 3);
            continue;
        }
        if (static_cast<Index>(cells.size()) != 3 * p + 3) throw ParseError("labels row has the wrong number of cells", number);
        LabelRecord r;
        r.id = cells[0];
        r.subclass = cells[1];
        r.metric = metric;
        try {
            for (Index j = 0; j < p; ++j) {
                const auto base = static_cast<std::size_t>(2 + 3 * j);
                r.effort.push_back(ProjectionEffort{std::stod(cells[base]), std::stoul(cells[base + 1]), std::stoul(cells[base + 2])});
            }
            const auto& label = cells.back();
            if (label != "NA") {
                const long value = std::stol(label);
                if (value < 1 || value > p) throw ParseError("label out of range", number);
                r.label = static_cast<Index>(value - 1);
            }
        } catch (const std::logic_error&) {
            throw ParseError("bad number in labels row", number);
        }
        records.push_back(std::move(r));
    }
    if (p < 0) throw ParseError("labels file has no header", number);
    return records;
}

void write_labels(const std::vector<LabelRecord>& records, std::uint64_t seed, const std::filesystem::path& path) {
    std::ostringstream out;
    write_labels(out, records, seed);
    write_file_atomic(path, out.str());
}

std::vector<LabelRecord> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_labels(in);
}

}  // namespace moblp
