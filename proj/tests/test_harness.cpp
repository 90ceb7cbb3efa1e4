#include "moblp/error.hpp"
#include "moblp/experiment.hpp"
#include "moblp/harness.hpp"
#include "moblp/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace moblp;

namespace {

LabelRecord timed(std::string id, std::string subclass, std::vector<double> times) {
    std::vector<ProjectionEffort> effort;
    for (double t : times) effort.push_back(ProjectionEffort{t, 0, 0});
    return make_record(std::move(id), std::move(subclass), std::move(effort), LabelMetric::TimeS);
}

LabelRecord with_range(std::string id, std::string subclass, double range) {
    return timed(std::move(id), std::move(subclass), {5.0, 5.0 + range, 5.0 + range / 2});
}

std::set<std::string> ids(const std::vector<LabelRecord>& records) {
    std::set<std::string> out;
    for (const auto& r : records) out.insert(r.id);
    return out;
}

ExperimentConfig small_config(const std::filesystem::path& dir) {
    ExperimentConfig c;
    c.kind = CorpusKind::KP;
    c.sizes = {6, 7};
    c.instances_per_subclass = 10;
    c.corpus_seed = 5;
    c.split_seed = 2;
    c.msvm.max_epochs = 200;
    c.output_dir = dir;
    c.threads = 2;
    return c;
}

}  // namespace

TEST_CASE("labels are the argmin with ties to the first projection") {
    CHECK(*timed("a", "s", {10, 8, 9}).label == 1);
    CHECK(*timed("a", "s", {4, 4, 4}).label == 0);
    CHECK(*timed("a", "s", {7, 3, 3}).label == 1);
    const auto r = make_record("b", "s", {{0.1, 5, 40}, {0.2, 4, 30}, {0.3, 4, 30}}, LabelMetric::IlpCount);
    CHECK(*r.label == 1);
    CHECK(r.range() == 1.0);
}

TEST_CASE("labeling solves every projection and cross-checks the frontier") {
    Rng rng(8);
    for (int trial = 0; trial < 6; ++trial) {
        const auto inst = preorder(trial % 2 ? generate_kp(8, 3, rng.next()) : generate_ap(3, 3, rng.next())).first;
        Frontier frontier;
        const auto record = label_instance(inst, {}, &frontier);
        REQUIRE(record.label);
        CHECK(record.p() == 3);
        CHECK(record.id == inst.id);
        CHECK(record.subclass == inst.subclass());
        CHECK(frontier.same_points(brute_force_frontier(inst)));
        const Eigen::VectorXd v = record.values();
        CHECK(v[*record.label] == v.minCoeff());
        for (const auto& e : record.effort) CHECK(e.ilp_count >= 2 * frontier.points.size());
    }
}

TEST_CASE("a time cap leaves the record unlabeled") {
    LabelOptions options;
    options.time_cap_s = 0.0;
    const auto record = label_instance(preorder(generate_ap(4, 3, 3)).first, options);
    CHECK_FALSE(record.label);
    CHECK(record.p() == 3);
}

TEST_CASE("reduction keeps only clearly separated instances") {
    const std::vector<LabelRecord> records{with_range("r2", "A", 2), with_range("r3", "A", 3), with_range("r10", "A", 10)};
    // ranges {2,3,10}: sample std sqrt(19), threshold 2 + 4.359 = 6.359
    CHECK(ids(reduce_set(records)) == std::set<std::string>{"r10"});
    for (const auto& r : records) CHECK(r.range() == doctest::Approx(std::stod(r.id.substr(1))));

    const std::vector<LabelRecord> flat{with_range("a", "B", 4), with_range("b", "B", 4), with_range("c", "B", 4)};
    CHECK(reduce_set(flat).empty());

    const std::vector<LabelRecord> single{with_range("solo", "C", 1)};
    CHECK(ids(reduce_set(single)) == std::set<std::string>{"solo"});

    std::vector<LabelRecord> mixed = records;
    mixed.push_back(with_range("solo", "C", 1));
    CHECK(ids(reduce_set(mixed)) == std::set<std::string>{"r10", "solo"});
}

TEST_CASE("single-record evaluation") {
    const auto report = evaluate({timed("x", "KP-n10", {10, 8, 9})}, {1});
    CHECK(report.overall.accuracy == 1.0);
    CHECK(std::abs(report.overall.ml_vs_rand - 100.0 / 9.0) < 1e-9);
    CHECK(std::abs(report.overall.best_vs_rand - 100.0 / 9.0) < 1e-9);
    CHECK(report.overall.ratio == doctest::Approx(1.0));
    REQUIRE(report.groups.size() == 1);
    CHECK(report.groups[0].subclass == "KP-n10");
    CHECK_THROWS_AS(evaluate({}, {}), InvalidArgument);
}

TEST_CASE("aggregate metric identities") {
    Rng rng(12);
    std::vector<LabelRecord> records;
    for (int k = 0; k < 90; ++k) {
        std::vector<double> t;
        for (int j = 0; j < 3; ++j) t.push_back(static_cast<double>(rng.uniform_int(1, 6)));
        records.push_back(timed("r" + std::to_string(k), k % 2 ? "odd" : "even", t));
    }
    std::vector<Index> oracle, random;
    for (const auto& r : records) {
        oracle.push_back(*r.label);
        random.push_back(static_cast<Index>(rng.uniform_int(0, 2)));
    }
    const auto perfect = evaluate(records, oracle);
    CHECK(perfect.overall.accuracy == 1.0);
    CHECK(perfect.overall.ml_vs_rand == doctest::Approx(perfect.overall.best_vs_rand));
    CHECK(perfect.overall.ratio == doctest::Approx(1.0));
    for (const auto& report : {perfect, evaluate(records, random)}) {
        for (const auto& g : report.groups) {
            CHECK(g.accuracy >= g.strict_accuracy);
            CHECK(g.best_vs_rand >= g.ml_vs_rand);
            if (g.best_vs_rand != 0) CHECK(std::abs(g.ratio - g.ml_vs_rand / g.best_vs_rand) <= 1e-12);
        }
        CHECK(report.overall.count == 90);
    }
    // zero denominators give a zero ratio
    const auto flat = evaluate({timed("f", "s", {3, 3, 3})}, {2});
    CHECK(flat.overall.ratio == 0.0);
    CHECK(flat.overall.accuracy == 1.0);
}

TEST_CASE("labels file round trip") {
    std::vector<LabelRecord> records{make_record("kp_a", "KP-n10", {{0.25, 4, 17}, {1.0 / 3.0, 6, 12}, {2.5, 4, 90}}, LabelMetric::Nodes),
                                     make_record("kp_b", "KP-n10", {{0.5, 2, 3}, {0.5, 2, 3}, {0.5, 2, 3}}, LabelMetric::Nodes)};
    records.push_back(records[0]);
    records.back().id = "kp_c";
    records.back().label.reset();
    std::stringstream buffer;
    write_labels(buffer, records, 77);
    CHECK(buffer.str().rfind("# seed 77 metric nodes\nid,subclass,time_1,ilps_1,nodes_1,", 0) == 0);
    CHECK(buffer.str().find(",NA\n") != std::string::npos);
    const auto back = parse_labels(buffer);
    REQUIRE(back.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(back[k].id == records[k].id);
        CHECK(back[k].label == records[k].label);
        CHECK(back[k].metric == LabelMetric::Nodes);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(back[k].effort[j].time_s == records[k].effort[j].time_s);
            CHECK(back[k].effort[j].nodes == records[k].effort[j].nodes);
        }
    }
    CHECK(*back[0].label == 1);
    std::istringstream bad("id,subclass,time_1,ilps_1,nodes_1,time_2,ilps_2,nodes_2,label\nx,s,1,2,3,4,5,6,3\n");
    CHECK_THROWS_AS(parse_labels(bad), ParseError);
}

TEST_CASE("config parsing") {
    std::istringstream in("# demo\nkind = ap\nsizes = 4, 5\ninstances_per_subclass = 7 # trailing\nsetting = reduced-both\n"
                          "metric = ilp_count\nc_reg = 100\ntime_cap_s = none\nthreads = 3\n");
    const auto c = parse_config(in);
    CHECK(c.kind == CorpusKind::AP);
    CHECK(c.sizes == std::vector<Index>{4, 5});
    CHECK(c.instances_per_subclass == 7);
    CHECK(c.setting == Setting::ReducedBoth);
    CHECK(c.metric == LabelMetric::IlpCount);
    CHECK(c.msvm.c_reg == 100);
    CHECK_FALSE(c.time_cap_s);
    CHECK(c.threads == 3);
    std::istringstream again(format_config(c));
    CHECK(format_config(parse_config(again)) == format_config(c));
    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(parse_config(unknown), ParseError);
    std::istringstream bad("p = three\n");
    CHECK_THROWS_AS(parse_config(bad), ParseError);
}

TEST_CASE("planted generator") {
    const auto inst = generate_planted(10, 3, 4);
    inst.validate();
    CHECK(inst.kind == InstanceKind::KP);
    CHECK((inst.C.array() == inst.C.array().round()).all());
    CHECK(generate_planted(10, 3, 4) == inst);
}

TEST_CASE("stratified split") {
    std::vector<LabelRecord> records;
    for (int k = 0; k < 50; ++k) records.push_back(with_range("r" + std::to_string(k), k < 20 ? "A" : "B", k));
    const auto split = stratified_split(records, 0.8, 3);
    CHECK(split.train.size() == 40);
    CHECK(split.test.size() == 10);
    std::size_t test_a = 0;
    for (std::size_t r : split.test) test_a += records[r].subclass == "A";
    CHECK(test_a == 4);
    std::set<std::size_t> all(split.train.begin(), split.train.end());
    all.insert(split.test.begin(), split.test.end());
    CHECK(all.size() == 50);
    CHECK(stratified_split(records, 0.8, 3).test == split.test);
    CHECK(stratified_split(records, 0.8, 4).test != split.test);
}

TEST_CASE("pipeline end to end with checkpoint reuse and determinism") {
    const auto dir = std::filesystem::temp_directory_path() / "moblp_pipeline_test";
    std::filesystem::remove_all(dir);
    auto config = small_config(dir);
    const auto first = run_experiment(config);
    CHECK(first.train_count == 16);
    CHECK(first.test_count == 4);
    CHECK(std::filesystem::exists(dir / "labels.csv"));
    CHECK(std::filesystem::exists(dir / "features.csv"));
    CHECK(std::filesystem::exists(dir / "split2_complete" / "model.json"));
    CHECK(std::filesystem::exists(dir / "split2_complete" / "report.txt"));
    REQUIRE(first.access_log.size() == 2);
    for (const auto& line : first.access_log) CHECK(line.find("16 training rows") != std::string::npos);

    // second run reuses the labeled corpus and reproduces the report
    std::ostringstream log;
    const auto second = run_experiment(config, &log);
    CHECK(log.str().find("reusing labeled corpus") != std::string::npos);
    CHECK(second.report.overall.accuracy == first.report.overall.accuracy);
    CHECK(second.model.msvm.W == first.model.msvm.W);

    std::ifstream report_in(dir / "split2_complete" / "report.json");
    const auto parsed = parse_report_json(report_in);
    CHECK(parsed.overall.count == first.report.overall.count);
    CHECK(parsed.overall.ml_vs_rand == first.report.overall.ml_vs_rand);

    // loaded model predicts the same labels as the in-memory one
    const auto model = read_model(dir / "split2_complete" / "model.json");
    const auto table = read_feature_table(dir / "features.csv");
    for (Index r = 0; r < table.X.rows(); ++r)
        CHECK(model.classify(table.X.row(r).transpose()) == first.model.classify(table.X.row(r).transpose()));

    config.setting = Setting::ReducedBoth;
    const auto reduced = run_experiment(config);
    CHECK(reduced.report.after_reduction <= reduced.report.before_reduction);
    CHECK(reduced.train_count <= 16);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fresh labeling matches single-threaded labeling") {
    auto config = small_config({});
    config.sizes = {6};
    const auto corpus = build_corpus(config);
    const auto a = label_corpus(corpus, {}, 1);
    const auto b = label_corpus(corpus, {}, 3);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        CHECK(a.records[k].label == b.records[k].label);
        CHECK(a.records[k].effort[0].nodes == b.records[k].effort[0].nodes);
    }
    CHECK(a.features.X == b.features.X);
}
