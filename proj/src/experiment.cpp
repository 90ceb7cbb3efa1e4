#include "moblp/experiment.hpp"

#include "moblp/error.hpp"
#include "moblp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace moblp {

std::string_view to_string(Setting setting) {
    switch (setting) {
        case Setting::Complete: return "complete";
        case Setting::ReducedTest: return "reduced-test";
        case Setting::ReducedBoth: return "reduced-both";
    }
    return "?";
}

Setting parse_setting(std::string_view token) {
    if (token == "complete" || token == "1") return Setting::Complete;
    if (token == "reduced-test" || token == "2") return Setting::ReducedTest;
    if (token == "reduced-both" || token == "3") return Setting::ReducedBoth;
    throw InvalidArgument("unknown setting '" + std::string(token) + "' (complete, reduced-test, reduced-both)");
}

std::string_view to_string(CorpusKind kind) {
    switch (kind) {
        case CorpusKind::KP: return "kp";
        case CorpusKind::AP: return "ap";
        case CorpusKind::Planted: return "planted";
    }
    return "?";
}

CorpusKind parse_corpus_kind(std::string_view token) {
    if (token == "kp" || token == "KP") return CorpusKind::KP;
    if (token == "ap" || token == "AP") return CorpusKind::AP;
    if (token == "planted") return CorpusKind::Planted;
    throw InvalidArgument("unknown corpus kind '" + std::string(token) + "' (kp, ap, planted)");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_value(const std::string& text) {
    std::istringstream in(text);
    T value{};
    if (!(in >> value) || !(in >> std::ws).eof()) throw InvalidArgument("bad value '" + text + "'");
    return value;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "kind") config.kind = parse_corpus_kind(value);
            else if (key == "sizes") {
                config.sizes.clear();
                std::istringstream list(value);
                for (std::string item; std::getline(list, item, ',');) config.sizes.push_back(parse_value<Index>(trim(item)));
                if (config.sizes.empty()) throw InvalidArgument("sizes list is empty");
            } else if (key == "instances_per_subclass") config.instances_per_subclass = parse_value<Index>(value);
            else if (key == "p") config.p = parse_value<Index>(value);
            else if (key == "corpus_seed") config.corpus_seed = parse_value<std::uint64_t>(value);
            else if (key == "split_seed") config.split_seed = parse_value<std::uint64_t>(value);
            else if (key == "setting") config.setting = parse_setting(value);
            else if (key == "metric") config.metric = parse_metric(value);
            else if (key == "c_reg") config.msvm.c_reg = parse_value<double>(value);
            else if (key == "tol") config.msvm.tol = parse_value<double>(value);
            else if (key == "max_epochs") config.msvm.max_epochs = parse_value<int>(value);
            else if (key == "msvm_seed") config.msvm.seed = parse_value<std::uint64_t>(value);
            else if (key == "train_fraction") config.train_fraction = parse_value<double>(value);
            else if (key == "time_cap_s") config.time_cap_s = value == "none" ? std::nullopt : std::optional(parse_value<double>(value));
            else if (key == "output_dir") config.output_dir = value;
            else if (key == "threads") config.threads = parse_value<int>(value);
            else throw InvalidArgument("unknown key '" + key + "'");
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), number);
        }
    }
    if (config.p < 2) throw ParseError("p must be at least 2", 0);
    if (config.instances_per_subclass < 1) throw ParseError("instances_per_subclass must be positive", 0);
    if (!(config.train_fraction > 0 && config.train_fraction < 1)) throw ParseError("train_fraction must lie in (0, 1)", 0);
    return config;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_config(in);
}

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "kind = " << to_string(c.kind) << "\nsizes = ";
    for (std::size_t k = 0; k < c.sizes.size(); ++k) out << (k ? "," : "") << c.sizes[k];
    out << "\ninstances_per_subclass = " << c.instances_per_subclass << "\np = " << c.p
        << "\ncorpus_seed = " << c.corpus_seed << "\nsplit_seed = " << c.split_seed
        << "\nsetting = " << to_string(c.setting) << "\nmetric = " << to_string(c.metric)
        << "\nc_reg = " << format_number(c.msvm.c_reg) << "\ntol = " << format_number(c.msvm.tol)
        << "\nmax_epochs = " << c.msvm.max_epochs << "\nmsvm_seed = " << c.msvm.seed
        << "\ntrain_fraction = " << format_number(c.train_fraction)
        << "\ntime_cap_s = " << (c.time_cap_s ? format_number(*c.time_cap_s) : std::string("none"))
        << "\noutput_dir = " << c.output_dir.string() << "\nthreads = " << c.threads << '\n';
    return out.str();
}

MoblpInstance generate_planted(Index n, Index p, std::uint64_t seed) {
    MoblpInstance inst = generate_kp(n, p, seed, {1, 100});
    Rng rng(seed ^ 0x5eedf00dULL);
    const Index source = static_cast<Index>(rng.uniform_int(0, p - 2));
    const double scale = 2.0 + 3.0 * rng.uniform();
    for (Index k = 0; k < n; ++k) inst.C(p - 1, k) = std::round(scale * inst.C(source, k));
    // the remaining objectives take only a handful of distinct values
    for (Index i = 0; i + 1 < p; ++i) {
        if (i == source) continue;
        for (Index k = 0; k < n; ++k) inst.C(i, k) = -static_cast<double>(rng.uniform_int(1, 3));
    }
    inst.id = "planted_n" + std::to_string(n) + "_p" + std::to_string(p) + "_s" + std::to_string(seed);
    return inst;
}

std::vector<MoblpInstance> build_corpus(const ExperimentConfig& config) {
    std::vector<MoblpInstance> corpus;
    Rng rng(config.corpus_seed);
    for (Index size : config.sizes) {
        for (Index k = 0; k < config.instances_per_subclass; ++k) {
            const std::uint64_t seed = rng.next();
            MoblpInstance inst;
            switch (config.kind) {
                case CorpusKind::KP: inst = generate_kp(size, config.p, seed); break;
                case CorpusKind::AP: inst = generate_ap(size, config.p, seed); break;
                case CorpusKind::Planted: inst = generate_planted(size, config.p, seed); break;
            }
            corpus.push_back(preorder(inst).first);
        }
    }
    return corpus;
}

LabeledCorpus label_corpus(const std::vector<MoblpInstance>& corpus, const LabelOptions& options, int threads,
                           const std::function<void(std::size_t, std::size_t)>& progress) {
    LabeledCorpus out;
    if (corpus.empty()) return out;
    const Index p = corpus.front().p();
    out.records.resize(corpus.size());
    out.features.names = feature_names(p);
    out.features.ids.resize(corpus.size());
    out.features.X.resize(static_cast<Index>(corpus.size()), feature_count(p));

    int workers = threads > 0 ? threads : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    if (options.metric == LabelMetric::TimeS) workers = 1;  // timed runs never share the machine
    workers = std::min<int>(workers, static_cast<int>(corpus.size()));

    std::atomic<std::size_t> next{0}, done{0};
    std::mutex guard;
    std::exception_ptr failure;
    const auto work = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= corpus.size()) return;
            {
                std::lock_guard lock(guard);
                if (failure) return;
            }
            try {
                const auto& inst = corpus[k];
                if (inst.p() != p) throw DimensionError("corpus mixes objective counts");
                out.records[k] = label_instance(inst, options);
                const auto fv = extract_features(inst);
                out.features.ids[k] = inst.id;
                out.features.X.row(static_cast<Index>(k)) = fv.values.transpose();
                const std::size_t finished = ++done;
                if (progress) {
                    std::lock_guard lock(guard);
                    progress(finished, corpus.size());
                }
            } catch (...) {
                std::lock_guard lock(guard);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

Split stratified_split(const std::vector<LabelRecord>& records, double train_fraction, std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < records.size(); ++k) groups[records[k].subclass].push_back(k);
    Split split;
    Rng rng(seed);
    for (auto& [subclass, rows] : groups) {
        rng.shuffle(std::span<std::size_t>(rows));
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
        split.train.insert(split.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        split.test.insert(split.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

namespace {

/// Records the rows each fitting stage reads and refuses test rows.
class AccessLog {
public:
    explicit AccessLog(const std::vector<std::string>& test_ids) : test_(test_ids.begin(), test_ids.end()) {}

    void read(const std::string& stage, const std::vector<std::string>& ids) {
        for (const auto& id : ids)
            if (test_.count(id)) throw std::logic_error(stage + " read test instance " + id);
        lines_.push_back(stage + ": " + std::to_string(ids.size()) + " training rows");
    }
    std::vector<std::string> take() { return std::move(lines_); }

private:
    std::set<std::string> test_;
    std::vector<std::string> lines_;
};

}  // namespace

ExperimentResult train_and_evaluate(const LabeledCorpus& corpus, const ExperimentConfig& config) {
    ExperimentResult result;
    std::vector<std::size_t> labeled;
    for (std::size_t k = 0; k < corpus.records.size(); ++k) {
        if (corpus.records[k].label) labeled.push_back(k);
        else ++result.unlabeled;
    }
    std::vector<LabelRecord> records;
    for (std::size_t k : labeled) records.push_back(corpus.records[k]);
    const Split split = stratified_split(records, config.train_fraction, config.split_seed);

    const auto pick = [&](const std::vector<std::size_t>& rows) {
        std::vector<LabelRecord> out;
        for (std::size_t r : rows) out.push_back(records[r]);
        return out;
    };
    std::vector<LabelRecord> train = pick(split.train);
    std::vector<LabelRecord> test = pick(split.test);
    const std::size_t test_before = test.size();
    if (config.setting != Setting::Complete) test = reduce_set(test);
    if (config.setting == Setting::ReducedBoth) train = reduce_set(train);
    if (train.size() < 2) throw InvalidArgument("fewer than 2 training records after the split");
    if (test.empty()) throw InvalidArgument("no test records after the split");

    std::map<std::string, Index> row_of;
    for (std::size_t k = 0; k < corpus.features.ids.size(); ++k) row_of[corpus.features.ids[k]] = static_cast<Index>(k);
    const auto rows_of = [&](const std::vector<LabelRecord>& recs) {
        Eigen::MatrixXd X(static_cast<Index>(recs.size()), corpus.features.X.cols());
        for (std::size_t k = 0; k < recs.size(); ++k) {
            const auto it = row_of.find(recs[k].id);
            if (it == row_of.end()) throw InvalidArgument("no features for " + recs[k].id);
            X.row(static_cast<Index>(k)) = corpus.features.X.row(it->second);
        }
        return X;
    };
    const auto ids_of = [](const std::vector<LabelRecord>& recs) {
        std::vector<std::string> ids;
        for (const auto& r : recs) ids.push_back(r.id);
        return ids;
    };

    std::vector<std::string> test_ids = ids_of(pick(split.test));
    AccessLog log(test_ids);
    const Eigen::MatrixXd X_train = rows_of(train);
    std::vector<Index> y_train;
    for (const auto& r : train) y_train.push_back(*r.label);
    const Index p = train.front().p();

    log.read("fit_normalizer", ids_of(train));
    TrainedModel model;
    model.p = p;
    model.normalizer = fit_normalizer(X_train, corpus.features.names);
    const Eigen::MatrixXd Z_train = apply_normalizer_rows(model.normalizer, X_train);
    log.read("subset_frontier", ids_of(train));
    const SubsetFrontier frontier = subset_frontier(Z_train, y_train, p, config.msvm, corpus.features.names);
    const SelectedModel chosen = select_model(frontier);
    model.msvm = chosen.point.model;
    model.selected_k = chosen.point.k;
    model.selected_e = chosen.point.e;
    model.distance = chosen.distance;
    model.seed = config.split_seed;

    const Eigen::MatrixXd X_test = rows_of(test);
    std::vector<Index> predictions;
    for (Index r = 0; r < X_test.rows(); ++r) predictions.push_back(model.classify(X_test.row(r).transpose()));
    result.report = evaluate(test, predictions);
    result.report.before_reduction = test_before;
    result.report.after_reduction = test.size();
    result.model = std::move(model);
    result.train_count = train.size();
    result.test_count = test.size();
    result.access_log = log.take();
    return result;
}

namespace {

std::string corpus_key(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "kind=" << to_string(c.kind) << " sizes=";
    for (Index s : c.sizes) out << s << ';';
    out << " count=" << c.instances_per_subclass << " p=" << c.p << " corpus_seed=" << c.corpus_seed
        << " metric=" << to_string(c.metric) << " time_cap_s=" << (c.time_cap_s ? format_number(*c.time_cap_s) : "none");
    return out.str();
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    const fs::path labels_path = config.output_dir / "labels.csv";
    const fs::path features_path = config.output_dir / "features.csv";
    const fs::path key_path = config.output_dir / "corpus.key";
    const std::string key = corpus_key(config);

    LabeledCorpus corpus;
    if (fs::exists(key_path) && read_text(key_path) == key + "\n" && fs::exists(labels_path) && fs::exists(features_path)) {
        if (log) *log << "reusing labeled corpus in " << config.output_dir.string() << '\n';
        corpus.records = read_labels(labels_path);
        corpus.features = read_feature_table(features_path);
    } else {
        fs::remove(key_path);
        const auto instances = build_corpus(config);
        const fs::path instance_dir = config.output_dir / "instances";
        fs::create_directories(instance_dir);
        for (const auto& inst : instances) write_instance(inst, instance_dir / (inst.id + ".moblp"));
        if (log) *log << "labeling " << instances.size() << " instances\n";
        LabelOptions options;
        options.metric = config.metric;
        options.time_cap_s = config.time_cap_s;
        corpus = label_corpus(instances, options, config.threads, [&](std::size_t done, std::size_t total) {
            if (log && (done % 50 == 0 || done == total)) *log << "  labeled " << done << "/" << total << '\n';
        });
        write_labels(corpus.records, config.corpus_seed, labels_path);
        write_feature_table(corpus.features, features_path);
        write_file_atomic(key_path, key + "\n");
    }

    ExperimentResult result = train_and_evaluate(corpus, config);
    const fs::path run_dir = config.output_dir / ("split" + std::to_string(config.split_seed) + "_" + std::string(to_string(config.setting)));
    fs::create_directories(run_dir);
    write_model(result.model, run_dir / "model.json");
    write_file_atomic(run_dir / "config.txt", format_config(config));
    std::string hygiene;
    for (const auto& line : result.access_log) hygiene += line + "\n";
    write_file_atomic(run_dir / "hygiene.log", hygiene);
    const nlohmann::json run{{"corpus_seed", config.corpus_seed},
                             {"split_seed", config.split_seed},
                             {"setting", std::string(to_string(config.setting))},
                             {"kind", std::string(to_string(config.kind))},
                             {"train_count", result.train_count},
                             {"test_count", result.test_count},
                             {"unlabeled", result.unlabeled},
                             {"selected_k", result.model.selected_k},
                             {"selected_e", result.model.selected_e}};
    std::ostringstream json_out;
    write_report_json(json_out, result.report, run.dump());
    write_file_atomic(run_dir / "report.json", json_out.str());
    std::ostringstream title;
    title << to_string(config.kind) << " corpus, seed " << config.corpus_seed << ", split seed " << config.split_seed
          << ", setting " << to_string(config.setting) << ", " << result.train_count << " train / " << result.test_count
          << " test, " << result.unlabeled << " unlabeled, k = " << result.model.selected_k;
    write_file_atomic(run_dir / "report.txt", render_report(result.report, title.str()));
    if (log) *log << render_report(result.report, title.str());
    return result;
}

}  // namespace moblp
