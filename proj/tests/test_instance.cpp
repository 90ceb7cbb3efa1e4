#include "moblp/error.hpp"
#include "moblp/instance.hpp"
#include "moblp/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

using namespace moblp;

namespace {

MoblpInstance from_objectives(Eigen::MatrixXd C) {
    MoblpInstance inst;
    const Index n = C.cols();
    inst.C = std::move(C);
    inst.A = Eigen::MatrixXd::Ones(1, n);
    inst.b = Eigen::VectorXd::Constant(1, 1.0);
    inst.sense = {Sense::LE};
    return inst;
}

MoblpInstance round_trip(const MoblpInstance& inst) {
    std::ostringstream out;
    write_instance(out, inst);
    std::istringstream in(out.str());
    return parse_instance(in);
}

}  // namespace

TEST_CASE("preorder of a two-objective example") {
    Eigen::MatrixXd C(2, 2);
    C << 2, 0, 1, 1;
    const auto inst = from_objectives(C);
    const Eigen::VectorXd x = preorder_point(C);
    CHECK(x[0] == doctest::Approx(0.25));
    CHECK(x[1] == doctest::Approx(0.5));
    const auto [sorted, report] = preorder(inst);
    CHECK(report.permutation == std::vector<Index>{0, 1});
    CHECK(report.scores[0] == doctest::Approx(0.5));
    CHECK(report.scores[1] == doctest::Approx(0.75));
    CHECK(sorted.C == C);
}

TEST_CASE("preorder reorders and breaks ties lexicographically") {
    Eigen::MatrixXd C(3, 2);
    C << 3, 3, 1, 1, 1, 1;
    auto [sorted, report] = preorder(from_objectives(C));
    CHECK(report.permutation == std::vector<Index>{1, 2, 0});
    // identical rows keep the identity order
    Eigen::MatrixXd same(2, 3);
    same << 1, 2, 3, 1, 2, 3;
    CHECK(preorder(from_objectives(same)).second.permutation == std::vector<Index>{0, 1});
    // equal scores from different rows: smaller lexicographic row first
    Eigen::MatrixXd tie(2, 2);
    tie << 0, 1, 1, 0;
    CHECK(preorder(from_objectives(tie)).second.permutation == std::vector<Index>{0, 1});
    tie << 1, 0, 0, 1;
    CHECK(preorder(from_objectives(tie)).second.permutation == std::vector<Index>{1, 0});
}

TEST_CASE("preorder is permutation invariant and idempotent") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = trial % 2 ? generate_kp(8, 4, rng.next(), {1, 5}) : generate_ap(3, 4, rng.next(), {1, 3});
        const auto canonical = preorder(inst).first;
        std::vector<Index> order(4);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<Index>(order));
        MoblpInstance shuffled = inst;
        for (Index i = 0; i < 4; ++i) shuffled.C.row(i) = inst.C.row(order[static_cast<std::size_t>(i)]);
        CHECK(preorder(shuffled).first.C == canonical.C);
        CHECK(preorder(canonical).first == canonical);
        const auto scores = preorder(inst).second.scores;
        CHECK(std::is_sorted(scores.begin(), scores.end()));
    }
}

TEST_CASE("knapsack generator") {
    const auto inst = generate_kp(5, 3, 42);
    CHECK(inst.n() == 5);
    CHECK(inst.p() == 3);
    CHECK(inst.m() == 1);
    CHECK(inst.kind == InstanceKind::KP);
    CHECK((inst.C.array() <= -1).all());
    CHECK((inst.C.array() >= -100).all());
    CHECK(inst.sense == std::vector<Sense>{Sense::LE});
    CHECK(inst.b[0] == std::ceil(inst.A.sum() / 2.0));
    CHECK(generate_kp(5, 3, 42) == inst);
    CHECK_FALSE(generate_kp(5, 3, 43) == inst);
    CHECK(inst.is_feasible(Eigen::VectorXd::Zero(5)));
    CHECK_THROWS_AS(generate_kp(5, 3, 1, {5, 4}), InvalidArgument);
    CHECK_THROWS_AS(generate_kp(5, 3, 1, {0, 4}), InvalidArgument);
    CHECK_THROWS_AS(generate_kp(0, 3, 1), InvalidArgument);
}

TEST_CASE("single-item knapsack is feasible only for unit weight") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = generate_kp(1, 2, seed, {1, 4});
        const double w = inst.A(0, 0);
        CHECK(inst.b[0] == std::ceil(w / 2));
        CHECK(inst.b[0] >= 1);
        CHECK(inst.is_feasible(Eigen::VectorXd::Ones(1)) == (w == 1));
    }
}

TEST_CASE("assignment generator") {
    const auto inst = generate_ap(3, 3, 1);
    CHECK(inst.n() == 9);
    CHECK(inst.m() == 6);
    CHECK(std::all_of(inst.sense.begin(), inst.sense.end(), [](Sense s) { return s == Sense::EQ; }));
    CHECK((inst.b.array() == 1).all());
    CHECK((inst.A.rowwise().sum().array() == 3).all());
    CHECK((inst.A.colwise().sum().array() == 2).all());
    CHECK((inst.C.array() >= 1).all());
    CHECK((inst.C.array() <= 20).all());
    // every permutation matrix is feasible
    std::vector<int> perm{0, 1, 2};
    int feasible = 0;
    do {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
        for (int a = 0; a < 3; ++a) x[a * 3 + perm[static_cast<std::size_t>(a)]] = 1;
        feasible += inst.is_feasible(x);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(feasible == 6);
    CHECK(generate_ap(3, 3, 1) == inst);
    CHECK_THROWS_AS(generate_ap(1, 3, 1), InvalidArgument);
}

TEST_CASE("text format round trip") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto kp = generate_kp(7, 3, seed);
        CHECK(round_trip(kp) == kp);
        const auto ap = generate_ap(3, 2, seed);
        CHECK(round_trip(ap) == ap);
    }
    MoblpInstance frac = from_objectives(Eigen::MatrixXd::Constant(2, 2, 0.1));
    frac.b[0] = 1.0 / 3.0;
    frac.sense = {Sense::GE};
    CHECK(round_trip(frac) == frac);

    const auto path = std::filesystem::temp_directory_path() / "moblp_roundtrip.moblp";
    write_instance(generate_kp(4, 2, 9), path);
    CHECK(read_instance(path) == generate_kp(4, 2, 9));
    std::filesystem::remove(path);
}

TEST_CASE("whitespace and comments do not matter") {
    std::istringstream tidy("2 2 1 GENERIC\n1 2\n3 4\n1 1 <= 1\n");
    std::istringstream messy("# header\n  2   2 1   GENERIC  \n\n1\t2\n 3 4 # trailing\n1 1 <= 1\n\n");
    CHECK(parse_instance(tidy) == parse_instance(messy));
}

TEST_CASE("parse errors") {
    std::istringstream short_rows("2 2 2 KP\n1 2\n3 4\n1 1 <= 1\n");
    CHECK_THROWS_AS(parse_instance(short_rows), DimensionError);
    std::istringstream bad_sense("1 2 1 KP\n1 2\n1 1 < 1\n");
    try {
        parse_instance(bad_sense);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream bad_number("1 2 1 KP\n1 x\n1 1 <= 1\n");
    CHECK_THROWS_AS(parse_instance(bad_number), ParseError);
    std::istringstream bad_kind("1 2 1 XP\n1 2\n1 1 <= 1\n");
    CHECK_THROWS_AS(parse_instance(bad_kind), ParseError);
}

TEST_CASE("numbers render in shortest round-trip form") {
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(-17.0) == "-17");
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
