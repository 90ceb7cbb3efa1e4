#include "moblp/error.hpp"
#include "moblp/experiment.hpp"
#include "moblp/features.hpp"
#include "moblp/harness.hpp"
#include "moblp/instance.hpp"
#include "moblp/ksa.hpp"
#include "moblp/learn.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace moblp;
namespace fs = std::filesystem;

namespace {

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") std::cout << text;
    else write_file_atomic(path, text);
}

std::vector<MoblpInstance> load_all(const std::vector<std::string>& paths) {
    std::vector<MoblpInstance> out;
    for (const auto& p : paths) out.push_back(preorder(read_instance(p)).first);
    return out;
}

/// Feature rows in the order of `records`, matched by id.
Eigen::MatrixXd rows_for(const std::vector<LabelRecord>& records, const FeatureTable& table) {
    std::map<std::string, Index> row_of;
    for (std::size_t k = 0; k < table.ids.size(); ++k) row_of[table.ids[k]] = static_cast<Index>(k);
    Eigen::MatrixXd X(static_cast<Index>(records.size()), table.X.cols());
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto it = row_of.find(records[k].id);
        if (it == row_of.end()) throw InvalidArgument("no features for " + records[k].id);
        X.row(static_cast<Index>(k)) = table.X.row(it->second);
    }
    return X;
}

std::vector<LabelRecord> labeled_only(std::vector<LabelRecord> records) {
    std::erase_if(records, [](const LabelRecord& r) { return !r.label; });
    return records;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projection selection for multi-objective binary linear programs"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a random instance");
    std::string gen_kind = "kp", gen_out;
    Index gen_size = 10, gen_p = 3;
    std::uint64_t gen_seed = 1;
    gen->add_option("--kind", gen_kind, "kp, ap or planted")->capture_default_str();
    gen->add_option("--size", gen_size, "items (kp, planted) or agents (ap)")->capture_default_str();
    gen->add_option("-p,--objectives", gen_p)->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("-o,--output", gen_out, "output file, stdout by default");

    // solve
    auto* solve = app.add_subcommand("solve", "Compute the nondominated frontier of an instance");
    std::string solve_in, solve_out;
    Index solve_j = 1;
    bool solve_pre = false;
    std::optional<double> solve_limit;
    solve->add_option("instance", solve_in)->required()->check(CLI::ExistingFile);
    solve->add_option("-j,--projection", solve_j, "1-based projection objective")->capture_default_str();
    solve->add_flag("--preorder", solve_pre, "reorder objectives first");
    solve->add_option("--time-limit", solve_limit, "seconds");
    solve->add_option("-o,--output", solve_out, ".nd output file, stdout by default");

    // label
    auto* label = app.add_subcommand("label", "Solve every projection of each instance and record the effort");
    std::vector<std::string> label_in;
    std::string label_out, label_metric = "nodes";
    std::optional<double> label_cap;
    std::uint64_t label_seed = 0;
    label->add_option("instances", label_in)->required()->check(CLI::ExistingFile);
    label->add_option("--metric", label_metric, "nodes, ilp_count or time_s")->capture_default_str();
    label->add_option("--time-cap", label_cap, "seconds per instance");
    label->add_option("--seed", label_seed, "recorded in the file header")->capture_default_str();
    label->add_option("-o,--output", label_out);

    // features
    auto* feat = app.add_subcommand("features", "Extract instance features");
    std::vector<std::string> feat_in;
    std::string feat_out;
    feat->add_option("instances", feat_in)->required()->check(CLI::ExistingFile);
    feat->add_option("-o,--output", feat_out);

    // train
    auto* train = app.add_subcommand("train", "Select features and train a projection classifier");
    std::string train_labels, train_features, train_out, train_setting = "complete";
    MsvmOptions train_msvm;
    train->add_option("--labels", train_labels)->required()->check(CLI::ExistingFile);
    train->add_option("--features", train_features)->required()->check(CLI::ExistingFile);
    train->add_option("--setting", train_setting, "complete or reduced-both (reduced-test trains on everything)")
        ->capture_default_str();
    train->add_option("--c-reg", train_msvm.c_reg)->capture_default_str();
    train->add_option("--tol", train_msvm.tol)->capture_default_str();
    train->add_option("--max-epochs", train_msvm.max_epochs)->capture_default_str();
    train->add_option("--seed", train_msvm.seed)->capture_default_str();
    train->add_option("-o,--output", train_out)->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score a trained model on labeled instances");
    std::string eval_model, eval_labels, eval_features, eval_json;
    bool eval_reduce = false;
    eval->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
    eval->add_option("--labels", eval_labels)->required()->check(CLI::ExistingFile);
    eval->add_option("--features", eval_features)->required()->check(CLI::ExistingFile);
    eval->add_flag("--reduce", eval_reduce, "evaluate on the reduced set");
    eval->add_option("--json", eval_json, "also write the report as JSON");

    // report
    auto* report = app.add_subcommand("report", "Print a saved JSON report");
    std::string report_in;
    report->add_option("report", report_in)->required()->check(CLI::ExistingFile);

    // run
    auto* run = app.add_subcommand("run", "Generate, label, train and evaluate from a config file");
    std::string run_config;
    std::vector<std::uint64_t> run_splits;
    std::vector<std::string> run_settings;
    run->add_option("config", run_config)->required()->check(CLI::ExistingFile);
    run->add_option("--split-seeds", run_splits, "overrides split_seed")->delimiter(',');
    run->add_option("--settings", run_settings, "overrides setting")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            MoblpInstance inst;
            switch (parse_corpus_kind(gen_kind)) {
                case CorpusKind::KP: inst = generate_kp(gen_size, gen_p, gen_seed); break;
                case CorpusKind::AP: inst = generate_ap(gen_size, gen_p, gen_seed); break;
                case CorpusKind::Planted: inst = generate_planted(gen_size, gen_p, gen_seed); break;
            }
            std::ostringstream out;
            write_instance(out, inst);
            emit(out.str(), gen_out);
        } else if (*solve) {
            MoblpInstance inst = read_instance(solve_in);
            if (solve_pre) inst = preorder(inst).first;
            if (solve_j < 1 || solve_j > inst.p()) throw InvalidArgument("projection out of range");
            KsaOptions options;
            options.time_limit_s = solve_limit;
            const Frontier frontier = ksa_solve(inst, solve_j - 1, options);
            std::ostringstream out;
            write_frontier(out, frontier);
            emit(out.str(), solve_out);
            std::cerr << frontier.points.size() << " points, " << frontier.ilp_count << " ILPs, " << frontier.nodes
                      << " nodes, " << frontier.time_s << " s" << (frontier.complete ? "" : " (incomplete)") << '\n';
        } else if (*label) {
            LabelOptions options;
            options.metric = parse_metric(label_metric);
            options.time_cap_s = label_cap;
            std::vector<LabelRecord> records;
            for (const auto& inst : load_all(label_in)) records.push_back(label_instance(inst, options));
            std::ostringstream out;
            write_labels(out, records, label_seed);
            emit(out.str(), label_out);
        } else if (*feat) {
            const auto instances = load_all(feat_in);
            FeatureTable table;
            table.names = feature_names(instances.front().p());
            table.X.resize(static_cast<Index>(instances.size()), static_cast<Index>(table.names.size()));
            for (std::size_t k = 0; k < instances.size(); ++k) {
                const auto fv = extract_features(instances[k]);
                if (fv.values.size() != table.X.cols()) throw DimensionError("instances differ in objective count");
                table.ids.push_back(instances[k].id);
                table.X.row(static_cast<Index>(k)) = fv.values.transpose();
            }
            std::ostringstream out;
            write_feature_table(out, table);
            emit(out.str(), feat_out);
        } else if (*train) {
            auto records = labeled_only(read_labels(train_labels));
            if (parse_setting(train_setting) == Setting::ReducedBoth) records = reduce_set(records);
            if (records.size() < 2) throw InvalidArgument("fewer than 2 labeled records");
            const FeatureTable table = read_feature_table(train_features);
            const Eigen::MatrixXd X = rows_for(records, table);
            std::vector<Index> y;
            for (const auto& r : records) y.push_back(*r.label);
            TrainedModel model;
            model.p = records.front().p();
            model.normalizer = fit_normalizer(X, table.names);
            const auto frontier = subset_frontier(apply_normalizer_rows(model.normalizer, X), y, model.p, train_msvm, table.names);
            const auto chosen = select_model(frontier);
            model.msvm = chosen.point.model;
            model.selected_k = chosen.point.k;
            model.selected_e = chosen.point.e;
            model.distance = chosen.distance;
            model.seed = train_msvm.seed;
            write_model(model, train_out);
            std::cerr << "trained on " << records.size() << " records, " << model.selected_k << " features, training error "
                      << model.selected_e << '\n';
        } else if (*eval) {
            const TrainedModel model = read_model(eval_model);
            auto records = labeled_only(read_labels(eval_labels));
            const std::size_t before = records.size();
            if (eval_reduce) records = reduce_set(records);
            const Eigen::MatrixXd X = rows_for(records, read_feature_table(eval_features));
            std::vector<Index> predictions;
            for (Index r = 0; r < X.rows(); ++r) predictions.push_back(model.classify(X.row(r).transpose()));
            EvaluationReport rep = evaluate(records, predictions);
            rep.before_reduction = before;
            rep.after_reduction = records.size();
            std::cout << render_report(rep, "evaluation of " + eval_model);
            if (!eval_json.empty()) {
                std::ostringstream out;
                write_report_json(out, rep);
                write_file_atomic(eval_json, out.str());
            }
        } else if (*report) {
            std::ifstream in(report_in);
            std::cout << render_report(parse_report_json(in), report_in);
        } else if (*run) {
            const ExperimentConfig base = read_config(run_config);
            if (run_splits.empty()) run_splits.push_back(base.split_seed);
            std::vector<Setting> settings;
            for (const auto& s : run_settings) settings.push_back(parse_setting(s));
            if (settings.empty()) settings.push_back(base.setting);
            for (Setting setting : settings) {
                for (std::uint64_t seed : run_splits) {
                    ExperimentConfig config = base;
                    config.setting = setting;
                    config.split_seed = seed;
                    run_experiment(config, &std::cout);
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
