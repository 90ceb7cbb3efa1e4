#ifndef MOBLP_EXPERIMENT_HPP
#define MOBLP_EXPERIMENT_HPP

#include "moblp/features.hpp"
#include "moblp/harness.hpp"
#include "moblp/learn.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace moblp {

enum class Setting { Complete, ReducedTest, ReducedBoth };
std::string_view to_string(Setting setting);
Setting parse_setting(std::string_view token);

enum class CorpusKind { KP, AP, Planted };
std::string_view to_string(CorpusKind kind);
CorpusKind parse_corpus_kind(std::string_view token);

// Config file: one "key = value" per line, '#' comments. Keys match the
// field names below; `sizes` is a comma-separated list.
struct ExperimentConfig {
    CorpusKind kind = CorpusKind::KP;
    std::vector<Index> sizes{10, 12, 14, 16};  ///< n for KP and planted, r for AP
    Index instances_per_subclass = 100;
    Index p = 3;
    std::uint64_t corpus_seed = 1;
    std::uint64_t split_seed = 1;
    Setting setting = Setting::Complete;
    LabelMetric metric = LabelMetric::Nodes;
    MsvmOptions msvm;
    double train_fraction = 0.8;
    std::optional<double> time_cap_s = 60.0;
    std::filesystem::path output_dir = "moblp_run";
    int threads = 0;  ///< 0 = hardware concurrency
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig read_config(const std::filesystem::path& path);
std::string format_config(const ExperimentConfig& config);

/// KP instance whose last objective is a rounded multiple (factor in [2,5]) of
/// a randomly drawn earlier objective; every other objective is replaced by
/// coefficients in {-3,-2,-1}. Coefficients stay integral.
MoblpInstance generate_planted(Index n, Index p, std::uint64_t seed);

/// All instances of the corpus, pre-ordered, in subclass-major order.
std::vector<MoblpInstance> build_corpus(const ExperimentConfig& config);

struct LabeledCorpus {
    std::vector<LabelRecord> records;
    FeatureTable features;  ///< raw features, same row order as records
};

/// Labels and featurizes every instance, in parallel unless the metric is wall time.
LabeledCorpus label_corpus(const std::vector<MoblpInstance>& corpus, const LabelOptions& options, int threads,
                           const std::function<void(std::size_t, std::size_t)>& progress = {});

struct Split {
    std::vector<std::size_t> train, test;  ///< row indices
};

/// Per-subclass shuffle with `seed`; round(fraction * count) rows of each subclass train.
Split stratified_split(const std::vector<LabelRecord>& records, double train_fraction, std::uint64_t seed);

struct ExperimentResult {
    EvaluationReport report;
    TrainedModel model;
    std::size_t unlabeled = 0;
    std::size_t train_count = 0, test_count = 0;
    std::vector<std::string> access_log;  ///< which rows each fitting stage read
};

/// Split, normalize, select features and train on the training rows, then
/// evaluate on the test rows. Throws if a fitting stage touches a test row.
ExperimentResult train_and_evaluate(const LabeledCorpus& corpus, const ExperimentConfig& config);

/// Full pipeline with per-stage checkpoints under config.output_dir: an
/// existing labels/features pair from the same corpus settings is reused.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace moblp

#endif  // MOBLP_EXPERIMENT_HPP
