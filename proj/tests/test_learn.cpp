#include "moblp/error.hpp"
#include "moblp/learn.hpp"
#include "moblp/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace moblp;

namespace {

/// Three clouds on rays 120 degrees apart; separable by a bias-free linear machine.
void clouds(Eigen::MatrixXd& X, std::vector<Index>& y, int per_class = 30) {
    X.resize(3 * per_class, 2);
    y.clear();
    for (int c = 0; c < 3; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / 3.0;
        for (int k = 0; k < per_class; ++k) {
            const double radius = 1.0 + 0.05 * (k % 7);
            const double wobble = 0.2 * ((k % 5) - 2) / 2.0;
            const Index r = c * per_class + k;
            X(r, 0) = radius * std::cos(angle + wobble);
            X(r, 1) = radius * std::sin(angle + wobble);
            y.push_back(c);
        }
    }
}

/// Crammer-Singer primal objective without bias.
double primal(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X, const std::vector<Index>& y, double C) {
    double loss = 0.0;
    for (Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd s = W * X.row(i).transpose();
        const Index yi = y[static_cast<std::size_t>(i)];
        double worst = 0.0;
        for (Index m = 0; m < W.rows(); ++m)
            if (m != yi) worst = std::max(worst, 1.0 + s[m] - s[yi]);
        loss += worst;
    }
    return 0.5 * W.squaredNorm() + C * loss;
}

SubsetFrontier frontier_of(std::initializer_list<std::pair<Index, double>> pts) {
    SubsetFrontier f;
    for (const auto& [k, e] : pts) f.points.push_back(SubsetPoint{k, e, {}});
    return f;
}

}  // namespace

TEST_CASE("separable clouds are learned exactly") {
    Eigen::MatrixXd X;
    std::vector<Index> y;
    clouds(X, y);
    const auto model = train_msvm(X, y, 3);
    CHECK(training_error(model, X, y) == 0.0);
    CHECK(model.k() == 2);
    CHECK(model.p() == 3);
}

TEST_CASE("trainer reaches the primal optimum") {
    // Overlapping data; convexity makes local optimality against random
    // directions a check of global optimality.
    Rng rng(6);
    Eigen::MatrixXd X(60, 3);
    std::vector<Index> y;
    for (Index r = 0; r < 60; ++r) {
        const Index c = r % 3;
        for (Index k = 0; k < 3; ++k) X(r, k) = rng.uniform(-1, 1) + (k == c ? 0.8 : 0.0);
        y.push_back(c);
    }
    MsvmOptions options;
    options.c_reg = 1.0;
    options.tol = 1e-7;
    options.max_epochs = 20000;
    const auto model = train_msvm(X, y, 3, {}, options);
    const double at_opt = primal(model.W, X, y, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::MatrixXd D = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return rng.uniform(-1, 1); });
        for (double step : {1e-1, 1e-2, 1e-3}) CHECK(primal(model.W + step * D, X, y, 1.0) >= at_opt - 1e-6);
    }
}

TEST_CASE("single example is classified as its own label") {
    Eigen::MatrixXd X(1, 3);
    X << 0.2, -0.5, 0.9;
    for (Index label = 0; label < 3; ++label) {
        const auto model = train_msvm(X, {label}, 3);
        CHECK(predict(model, X.row(0).transpose()) == label);
    }
}

TEST_CASE("duplicating the training set keeps the decisions") {
    Eigen::MatrixXd X;
    std::vector<Index> y;
    clouds(X, y, 12);
    Eigen::MatrixXd X2(2 * X.rows(), 2);
    X2 << X, X;
    std::vector<Index> y2 = y;
    y2.insert(y2.end(), y.begin(), y.end());
    MsvmOptions options;
    options.tol = 1e-6;
    options.max_epochs = 100000;
    const auto a = train_msvm(X, y, 3, {}, options);
    const auto b = train_msvm(X2, y2, 3, {}, options);
    CHECK(a.epochs < options.max_epochs);
    CHECK(b.epochs < options.max_epochs);
    for (double u = -2; u <= 2; u += 0.25)
        for (double v = -2; v <= 2; v += 0.25) {
            const Eigen::Vector2d x(u, v);
            if (x.norm() < 0.5) continue;
            const Eigen::VectorXd sa = a.W * x;
            Eigen::VectorXd sorted = sa;
            std::sort(sorted.begin(), sorted.end());
            if (sorted[2] - sorted[1] < 1e-3 * sorted.cwiseAbs().maxCoeff()) continue;  // on a decision boundary
            CHECK(predict(a, x) == predict(b, x));
        }
}

TEST_CASE("fixed seed gives identical weights") {
    Eigen::MatrixXd X;
    std::vector<Index> y;
    clouds(X, y);
    MsvmOptions options;
    options.seed = 77;
    CHECK(train_msvm(X, y, 3, {}, options).W == train_msvm(X, y, 3, {}, options).W);
}

TEST_CASE("trainer input errors") {
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, 0, 1;
    CHECK_THROWS_AS(train_msvm(Eigen::MatrixXd(0, 2), {}, 3), InvalidArgument);
    CHECK_THROWS_AS(train_msvm(X, {0, 3}, 3), InvalidArgument);
    CHECK_THROWS_AS(train_msvm(X, {0}, 3), DimensionError);
}

TEST_CASE("prediction rule") {
    Eigen::MatrixXd W(3, 2);
    W << 1, 0, 0, 1, -1, -1;
    CHECK(predict(W, Eigen::Vector2d(2, 1)) == 0);
    CHECK(predict(Eigen::MatrixXd::Zero(3, 2), Eigen::Vector2d(2, 1)) == 0);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Vector2d x(rng.uniform(-5, 5), rng.uniform(-5, 5));
        CHECK(predict(W, x) == predict(W, rng.uniform(0.01, 100) * x));
    }
    CHECK_THROWS_AS(predict(W, Eigen::Vector3d(1, 2, 3)), DimensionError);
}

TEST_CASE("least important feature") {
    Eigen::MatrixXd W(3, 2);
    W << 1, 1, 1, 2, 1, 3;
    CHECK(least_important_feature(W) == 0);
    W << 1, 1, 2, 2, 3, 3;
    CHECK(least_important_feature(W) == 0);
    W << 0, 5, 0, -5, 0, 0;
    CHECK(least_important_feature(W) == 0);
    W << 5, 0, -5, 0, 0, 0;
    CHECK(least_important_feature(W) == 1);
    CHECK_THROWS_AS(least_important_feature(Eigen::MatrixXd(3, 0)), InvalidArgument);
}

TEST_CASE("backward elimination emits one point per feature count") {
    Rng rng(11);
    Eigen::MatrixXd X(45, 6);
    std::vector<Index> y;
    for (Index r = 0; r < 45; ++r) {
        const Index c = r % 3;
        for (Index k = 0; k < 6; ++k) X(r, k) = rng.uniform(-1, 1) + (k == c ? 1.0 : 0.0);
        X(r, 4) = 0.0;  // identically zero column
        y.push_back(c);
    }
    std::vector<std::string> names{"a", "b", "c", "d", "zero", "f"};
    const auto frontier = subset_frontier(X, y, 3, {}, names);
    CHECK(frontier.retained == std::vector<Index>{0, 1, 2, 3, 5});
    REQUIRE(frontier.points.size() == 5);
    for (std::size_t t = 0; t < 5; ++t) {
        CHECK(frontier.points[t].k == static_cast<Index>(5 - t));
        CHECK(frontier.points[t].model.k() == frontier.points[t].k);
        CHECK(frontier.points[t].e >= 0.0);
        CHECK(frontier.points[t].e <= 1.0);
        if (t > 0) {
            const auto& prev = frontier.points[t - 1].model.active;
            const auto& cur = frontier.points[t].model.active;
            const std::set<Index> before(prev.begin(), prev.end());
            for (Index c : cur) CHECK(before.count(c) == 1);
        }
    }
    CHECK(frontier.points[0].model.names == std::vector<std::string>{"a", "b", "c", "d", "f"});
    CHECK_THROWS_AS(subset_frontier(Eigen::MatrixXd::Ones(4, 3), {0, 1, 2, 0}, 3), InvalidArgument);
}

TEST_CASE("phase two selection worked examples") {
    auto chosen = select_model(frontier_of({{10, 0.4}, {5, 0.5}, {2, 0.9}}));
    CHECK(chosen.point.k == 5);
    CHECK(chosen.point.e == 0.5);
    CHECK(chosen.distance == doctest::Approx(std::hypot(0.375, 0.2)).epsilon(1e-12));
    CHECK(chosen.filtered.size() == 3);

    chosen = select_model(frontier_of({{5, 0.2}, {3, 0.2}}));
    CHECK(chosen.point.k == 3);
    CHECK(chosen.filtered.size() == 1);

    chosen = select_model(frontier_of({{4, 0.3}, {3, 0.3}, {2, 0.3}, {1, 0.3}}));
    CHECK(chosen.point.k == 1);
    CHECK(chosen.distance == 0.0);
    CHECK_THROWS_AS(select_model(SubsetFrontier{}), InvalidArgument);
}

TEST_CASE("phase two selection matches an exhaustive recomputation") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        SubsetFrontier f;
        const Index K = static_cast<Index>(rng.uniform_int(1, 12));
        for (Index k = K; k >= 1; --k) f.points.push_back(SubsetPoint{k, static_cast<double>(rng.uniform_int(0, 10)) / 10.0, {}});
        const auto chosen = select_model(f);
        // oracle: nondominated set by pairwise comparison, then direct distances
        std::vector<std::pair<Index, double>> nd;
        for (const auto& a : f.points) {
            bool dominated = false;
            for (const auto& b : f.points)
                if (&a != &b && b.k <= a.k && b.e <= a.e) dominated = true;
            if (!dominated) nd.emplace_back(a.k, a.e);
        }
        std::sort(nd.begin(), nd.end());
        REQUIRE(nd.size() == chosen.filtered.size());
        for (std::size_t a = 0; a < nd.size(); ++a)
            for (std::size_t b = 0; b < nd.size(); ++b)
                if (a != b) CHECK_FALSE((nd[a].first <= nd[b].first && nd[a].second <= nd[b].second));
        const double k_lo = static_cast<double>(nd.front().first), k_hi = static_cast<double>(nd.back().first);
        const double e_hi = nd.front().second, e_lo = nd.back().second;
        double best = 1e300;
        Index best_k = -1;
        for (const auto& [k, e] : nd) {
            const double kn = k_hi > k_lo ? (static_cast<double>(k) - k_lo) / (k_hi - k_lo) : 0.0;
            const double en = e_hi > e_lo ? (e - e_lo) / (e_hi - e_lo) : 0.0;
            const double d = std::sqrt(kn * kn + en * en);
            if (d < best - 1e-12) {
                best = d;
                best_k = k;
            }
        }
        CHECK(chosen.point.k == best_k);
        CHECK(chosen.distance == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("model file round trip predicts identically") {
    Rng rng(4);
    Eigen::MatrixXd X(30, 4);
    std::vector<Index> y;
    for (Index r = 0; r < 30; ++r) {
        for (Index k = 0; k < 4; ++k) X(r, k) = rng.uniform(-10, 10);
        y.push_back(r % 3);
    }
    TrainedModel model;
    model.p = 3;
    model.normalizer = fit_normalizer(X, {"F2", "F3", "F4", "F9_1"});
    const Eigen::MatrixXd Z = apply_normalizer_rows(model.normalizer, X);
    model.msvm = train_msvm(Z, y, 3, {0, 2, 3}, {}, model.normalizer.names);
    model.selected_k = 3;
    model.selected_e = training_error(model.msvm, Z, y);
    model.distance = 0.25;
    model.seed = 12345678901234ULL;

    std::stringstream buffer;
    write_model(buffer, model);
    const auto back = parse_model(buffer);
    CHECK(back.msvm.W == model.msvm.W);
    CHECK(back.msvm.active == model.msvm.active);
    CHECK(back.msvm.names == std::vector<std::string>{"F2", "F4", "F9_1"});
    CHECK(back.normalizer.mean == model.normalizer.mean);
    CHECK(back.normalizer.std == model.normalizer.std);
    CHECK(back.selected_e == model.selected_e);
    CHECK(back.seed == model.seed);
    for (Index r = 0; r < 200; ++r) {
        Eigen::VectorXd raw(4);
        for (Index k = 0; k < 4; ++k) raw[k] = rng.uniform(-12, 12);
        CHECK(back.classify(raw) == model.classify(raw));
    }
    std::istringstream junk("{\"format\": \"other\"}");
    CHECK_THROWS_AS(parse_model(junk), ParseError);
}
