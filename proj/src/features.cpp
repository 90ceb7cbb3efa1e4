#include "moblp/features.hpp"

#include "moblp/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace moblp {

Stats5 stats5(std::vector<double> values) {
    if (values.empty()) return {0, 0, 0, 0, 0};
    const double count = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    const double median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return {mean, values.front(), values.back(), std::sqrt(ss / count), median};
}

Eigen::VectorXd leverage_scores(const Eigen::MatrixXd& A) {
    const Index n = A.cols();
    const Eigen::VectorXd norms = A.colwise().squaredNorm().transpose();
    const double total = norms.sum();
    if (total == 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return norms / total;
}

Index feature_count(Index p) { return 5 * p * p + 106 * p - 50; }

namespace {

std::string tag(int family, Index i) { return "F" + std::to_string(family) + "_" + std::to_string(i + 1); }

void add_stat_names(std::vector<std::string>& out, const std::string& base) {
    for (const char* stat : kStatNames) out.push_back(base + "." + stat);
}

/// Max-magnitude scaling of each row; zero rows stay zero.
Eigen::MatrixXd row_normalized(const Eigen::MatrixXd& M, Eigen::VectorXd* scale_out = nullptr) {
    Eigen::VectorXd scale = M.cwiseAbs().rowwise().maxCoeff();
    Eigen::MatrixXd out = M;
    for (Index r = 0; r < M.rows(); ++r) {
        if (scale[r] > 0) out.row(r) /= scale[r];
        else out.row(r).setZero();
    }
    if (scale_out) *scale_out = std::move(scale);
    return out;
}

class Emitter {
public:
    explicit Emitter(Index expected) { values_.reserve(static_cast<std::size_t>(expected)); }
    void scalar(double v) { values_.push_back(v); }
    void stats(std::vector<double> set) {
        for (double v : stats5(std::move(set))) values_.push_back(v);
    }
    Eigen::VectorXd finish() const { return Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Index>(values_.size())); }

private:
    std::vector<double> values_;
};

}  // namespace

std::vector<std::string> feature_names(Index p) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(feature_count(p)));
    for (Index i = 0; i < p; ++i) out.push_back(tag(1, i));
    out.insert(out.end(), {"F2", "F3", "F4"});
    for (Index i = 0; i < p; ++i) out.push_back(tag(5, i));
    for (int family : {6, 7})
        for (Index i = 0; i < p; ++i) {
            out.push_back(tag(family, i) + ".size");
            add_stat_names(out, tag(family, i));
        }
    for (Index i = 0; i < p; ++i) add_stat_names(out, tag(8, i));
    for (Index i = 0; i < p; ++i) out.push_back(tag(9, i));
    for (int family : {10, 11})
        for (Index i = 0; i < p; ++i) add_stat_names(out, tag(family, i));
    for (Index i = 0; i < p; ++i) out.push_back(tag(12, i));
    for (int family : {13, 14, 15, 16})
        for (Index i = 0; i < p; ++i) add_stat_names(out, tag(family, i));
    for (Index i = 0; i < p; ++i) out.push_back(tag(17, i));
    for (Index i = 0; i < p; ++i)
        for (int bin = 1; bin <= 6; ++bin) out.push_back(tag(18, i) + ".bin" + std::to_string(bin));
    for (int family : {19, 20, 21})
        for (Index i = 1; i < p; ++i) out.push_back(tag(family, i));
    for (int family = 22; family <= 27; ++family)
        for (Index i = 1; i < p; ++i) add_stat_names(out, tag(family, i));
    for (Index i = 0; i < p; ++i)
        for (Index l = 0; l < p; ++l)
            if (l != i) add_stat_names(out, tag(28, i) + "_" + std::to_string(l + 1));
    for (int family = 29; family <= 32; ++family)
        for (Index i = 1; i < p; ++i) add_stat_names(out, tag(family, i));
    return out;
}

std::string feature_family(const std::string& name) {
    const auto cut = name.find_first_of("_.");
    return name.substr(0, cut);
}

FeatureVector extract_features(const MoblpInstance& inst, const SimplexOptions& lp) {
    inst.validate();
    const Index p = inst.p();
    const Index n = inst.n();
    const Index m = inst.m();
    const auto& C = inst.C;
    const auto& A = inst.A;
    const auto& b = inst.b;
    const double nd = static_cast<double>(n);
    Emitter out(feature_count(p));

    // F1-F4
    const Eigen::VectorXd scores = C * preorder_point(C);
    for (Index i = 0; i < p; ++i) out.scalar(scores[i]);
    out.scalar(nd);
    out.scalar(static_cast<double>(m));
    out.scalar(static_cast<double>((A.array() != 0).count()) / (static_cast<double>(m) * nd));

    // F5-F7
    std::vector<std::vector<double>> positive(static_cast<std::size_t>(p)), negative(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i)
        for (Index k = 0; k < n; ++k) {
            if (C(i, k) > 0) positive[static_cast<std::size_t>(i)].push_back(C(i, k));
            if (C(i, k) < 0) negative[static_cast<std::size_t>(i)].push_back(C(i, k));
        }
    for (Index i = 0; i < p; ++i) out.scalar(static_cast<double>((C.row(i).array() == 0).count()));
    for (const auto* sets : {&positive, &negative})
        for (const auto& set : *sets) {
            out.scalar(static_cast<double>(set.size()));
            out.stats(set);
        }

    // F8, F9
    const Eigen::MatrixXd CA = C * A.transpose();  // p x m
    for (Index i = 0; i < p; ++i) out.stats({CA.row(i).begin(), CA.row(i).end()});
    const Eigen::VectorXd c_at_b = CA * b;
    for (Index i = 0; i < p; ++i) out.scalar(c_at_b[i]);

    // F10, F11
    const Eigen::VectorXd b_shift = b.unaryExpr([](double v) { return v >= 0 ? v + 1.0 : v - 1.0; });
    for (const auto* sets : {&positive, &negative})
        for (const auto& set : *sets) {
            const double sum = std::accumulate(set.begin(), set.end(), 0.0);
            std::vector<double> s;
            for (Index j = 0; j < m; ++j) s.push_back(sum / b_shift[j]);
            out.stats(std::move(s));
        }

    // F12
    Eigen::VectorXd width(p);
    for (Index i = 0; i < p; ++i) {
        const auto [lo, hi] = objective_bounds(inst, i, lp);
        width[i] = hi - lo;
    }
    for (Index i = 0; i < p; ++i) {
        double product = 1.0;
        for (Index j = 0; j < p; ++j)
            if (j != i) product *= width[j];
        out.scalar(product);
    }

    // F13-F15
    const Eigen::MatrixXd absC = C.cwiseAbs();
    const Eigen::VectorXd abs_sum = absC.rowwise().sum();
    const Eigen::VectorXd abs_mean = abs_sum / nd;
    const Eigen::RowVectorXd abs_col = absC.colwise().sum();
    const Eigen::RowVectorXd abs_a_col = A.cwiseAbs().colwise().sum();
    for (Index i = 0; i < p; ++i) {
        std::vector<double> s;
        for (Index j = 0; j < p; ++j)
            if (j != i) s.push_back(abs_sum[i] / (abs_mean[j] + 1.0));
        out.stats(std::move(s));
    }
    for (Index i = 0; i < p; ++i) {
        std::vector<double> s;
        for (Index k = 0; k < n; ++k) s.push_back((abs_col[k] - absC(i, k)) / (absC(i, k) + 1.0));
        out.stats(std::move(s));
    }
    for (Index i = 0; i < p; ++i) {
        std::vector<double> s;
        for (Index k = 0; k < n; ++k) s.push_back(abs_a_col[k] / (absC(i, k) + 1.0));
        out.stats(std::move(s));
    }

    // F16, F17
    const Eigen::MatrixXd gram = C * C.transpose();
    for (Index i = 0; i < p; ++i) {
        std::vector<double> s;
        for (Index j = 0; j < p; ++j)
            if (j != i) s.push_back(gram(i, j));
        out.stats(std::move(s));
    }
    const Eigen::VectorXd ls = leverage_scores(A);
    const Eigen::VectorXd c_ls = C * ls;
    for (Index i = 0; i < p; ++i) out.scalar(c_ls[i]);

    // F18: closed intervals around the mean of all of C
    const double avg = C.mean();
    const double sd = std::sqrt((C.array() - avg).square().mean());
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::array<std::pair<double, double>, 6> bins{
        {{-inf, -1.0}, {-1.0, -0.5}, {-0.5, 0.0}, {0.0, 0.5}, {0.5, 1.0}, {1.0, inf}}};
    for (Index i = 0; i < p; ++i)
        for (const auto& [l, u] : bins) {
            const double lo = std::isinf(l) ? -inf : avg + l * sd;
            const double hi = std::isinf(u) ? inf : avg + u * sd;
            out.scalar(static_cast<double>((C.row(i).array() >= lo && C.row(i).array() <= hi).count()));
        }

    // Scale-free families
    const Eigen::MatrixXd cb = row_normalized(C);
    const Eigen::MatrixXd cb2 = cb.cwiseProduct(cb);
    Eigen::VectorXd a_max;
    const Eigen::MatrixXd ab = row_normalized(A, &a_max);
    Eigen::VectorXd bb(m);
    for (Index l = 0; l < m; ++l) bb[l] = a_max[l] > 0 ? b[l] / a_max[l] : 0.0;

    // F19-F21
    const auto count_if = [&](Index i, auto pred) { return static_cast<double>(cb.row(i).unaryExpr(pred).count()); };
    const auto zero = [](double v) { return v == 0; };
    const auto pos = [](double v) { return v > 0; };
    const auto neg = [](double v) { return v < 0; };
    for (int kind = 0; kind < 3; ++kind)
        for (Index i = 1; i < p; ++i) {
            const auto tally = [&](Index r) {
                return kind == 0 ? count_if(r, zero) : kind == 1 ? count_if(r, pos) : count_if(r, neg);
            };
            out.scalar(std::log(1.0 + tally(0) / (1.0 + tally(i))));
        }

    // F22-F27
    const auto ratio_family = [&](const Eigen::MatrixXd& c) {
        for (Index i = 1; i < p; ++i) {
            std::vector<double> s;
            for (Index k = 0; k < n; ++k) s.push_back(c(0, k) / g(c(i, k)));
            out.stats(std::move(s));
        }
    };
    // weights w_j = c_1j / (n g(c_ij)) as a p x n matrix (row 0 unused)
    const auto weights = [&](const Eigen::MatrixXd& c) {
        Eigen::MatrixXd w(p, n);
        for (Index i = 0; i < p; ++i)
            for (Index k = 0; k < n; ++k) w(i, k) = c(0, k) / (nd * g(c(i, k)));
        return w;
    };
    const Eigen::MatrixXd w1 = weights(cb);
    const Eigen::MatrixXd w2 = weights(cb2);
    const auto row_family = [&](const Eigen::MatrixXd& w, bool subtract_b) {
        for (Index i = 1; i < p; ++i) {
            const Eigen::VectorXd v = ab * w.row(i).transpose();
            std::vector<double> s;
            for (Index l = 0; l < m; ++l) s.push_back(v[l] - (subtract_b ? bb[l] : 0.0));
            out.stats(std::move(s));
        }
    };
    ratio_family(cb);
    ratio_family(cb2);
    row_family(w1, false);
    row_family(w1, true);
    row_family(w2, false);
    row_family(w2, true);

    // F28
    for (Index i = 0; i < p; ++i)
        for (Index l = 0; l < p; ++l) {
            if (l == i) continue;
            std::vector<double> s;
            for (Index k = 0; k < n; ++k) s.push_back(cb(i, k) / g(cb(l, k)));
            out.stats(std::move(s));
        }

    // F29-F32: column statistics of the normalized constraint matrix
    Eigen::MatrixXd col_stats(5, n);
    for (Index k = 0; k < n; ++k) {
        const Stats5 s = stats5({ab.col(k).begin(), ab.col(k).end()});
        for (int t = 0; t < 5; ++t) col_stats(t, k) = s[static_cast<std::size_t>(t)];
    }
    const Stats5 b_stats = stats5({bb.begin(), bb.end()});
    const auto column_family = [&](const Eigen::MatrixXd& w, bool subtract_b) {
        for (Index i = 1; i < p; ++i) {
            const Eigen::VectorXd v = col_stats * w.row(i).transpose();
            for (int t = 0; t < 5; ++t) out.scalar(v[t] - (subtract_b ? b_stats[static_cast<std::size_t>(t)] : 0.0));
        }
    };
    column_family(w1, false);
    column_family(w1, true);
    column_family(w2, false);
    column_family(w2, true);

    FeatureVector fv;
    fv.p = p;
    fv.names = feature_names(p);
    fv.values = out.finish();
    if (fv.values.size() != feature_count(p) || static_cast<Index>(fv.names.size()) != fv.values.size())
        throw std::logic_error("feature layout does not match the expected count");
    if (!fv.values.allFinite()) throw NumericalError("non-finite feature value for " + inst.id);
    return fv;
}

bool NormalizationParams::constant(Index k) const {
    return std[k] <= 1e-12 * std::max(1.0, std::abs(mean[k]));
}

NormalizationParams fit_normalizer(const Eigen::MatrixXd& X, std::vector<std::string> names) {
    if (X.rows() < 2) throw InvalidArgument("normalizer needs at least 2 training instances");
    if (static_cast<Index>(names.size()) != X.cols()) throw DimensionError("feature names do not match the matrix");
    NormalizationParams params;
    params.mean = X.colwise().mean().transpose();
    params.std = ((X.rowwise() - params.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (const auto& name : names) params.group.push_back(feature_family(name));
    params.names = std::move(names);
    return params;
}

Eigen::VectorXd apply_normalizer(const NormalizationParams& params, const Eigen::VectorXd& x) {
    if (x.size() != params.size()) throw DimensionError("feature vector length does not match the normalizer");
    Eigen::VectorXd out(x.size());
    for (Index k = 0; k < x.size(); ++k)
        out[k] = params.constant(k) ? 0.0 : std::clamp((x[k] - params.mean[k]) / (3.0 * params.std[k]), -1.0, 1.0);
    return out;
}

Eigen::MatrixXd apply_normalizer_rows(const NormalizationParams& params, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Index r = 0; r < X.rows(); ++r) out.row(r) = apply_normalizer(params, Eigen::VectorXd(X.row(r).transpose())).transpose();
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

void write_feature_table(std::ostream& out, const FeatureTable& table) {
    if (static_cast<Index>(table.names.size()) != table.X.cols() || static_cast<Index>(table.ids.size()) != table.X.rows())
        throw DimensionError("feature table shape does not match its labels");
    out << "id";
    for (const auto& name : table.names) out << ',' << name;
    out << '\n';
    for (Index r = 0; r < table.X.rows(); ++r) {
        out << table.ids[static_cast<std::size_t>(r)];
        for (Index k = 0; k < table.X.cols(); ++k) out << ',' << format_number(table.X(r, k));
        out << '\n';
    }
}

FeatureTable parse_feature_table(std::istream& in) {
    FeatureTable table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing feature header", 1);
    auto header = split_csv(line);
    if (header.empty() || header[0] != "id") throw ParseError("feature header must start with 'id'", 1);
    table.names.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size()) throw ParseError("row has " + std::to_string(cells.size()) + " cells", number);
        table.ids.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            double v = 0;
            const auto& s = cells[k];
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", number);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    table.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t k = 0; k < rows[r].size(); ++k) table.X(static_cast<Index>(r), static_cast<Index>(k)) = rows[r][k];
    return table;
}

void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
    std::ostringstream out;
    write_feature_table(out, table);
    write_file_atomic(path, out.str());
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_feature_table(in);
}

}  // namespace moblp
