#include "moblp/instance.hpp"

#include "moblp/error.hpp"
#include "moblp/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace moblp {

std::string_view to_string(Sense sense) {
    switch (sense) {
        case Sense::LE: return "<=";
        case Sense::GE: return ">=";
        case Sense::EQ: return "=";
    }
    return "?";
}

std::string_view to_string(InstanceKind kind) {
    switch (kind) {
        case InstanceKind::AP: return "AP";
        case InstanceKind::KP: return "KP";
        case InstanceKind::Generic: return "GENERIC";
    }
    return "?";
}

InstanceKind parse_kind(std::string_view token) {
    if (token == "AP") return InstanceKind::AP;
    if (token == "KP") return InstanceKind::KP;
    if (token == "GENERIC") return InstanceKind::Generic;
    throw InvalidArgument("unknown instance kind '" + std::string(token) + "'");
}

bool satisfies(double lhs, Sense sense, double rhs, double tol) {
    switch (sense) {
        case Sense::LE: return lhs <= rhs + tol;
        case Sense::GE: return lhs >= rhs - tol;
        case Sense::EQ: return std::abs(lhs - rhs) <= tol;
    }
    return false;
}

void MoblpInstance::validate() const {
    if (p() < 2) throw InvalidArgument("instance needs at least 2 objectives");
    if (n() < 1) throw InvalidArgument("instance needs at least 1 variable");
    if (m() < 1) throw InvalidArgument("instance needs at least 1 constraint");
    if (A.cols() != n()) throw DimensionError("constraint matrix has " + std::to_string(A.cols()) + " columns, expected " + std::to_string(n()));
    if (b.size() != m()) throw DimensionError("rhs has " + std::to_string(b.size()) + " entries, expected " + std::to_string(m()));
    if (static_cast<Index>(sense.size()) != m()) throw DimensionError("sense vector length does not match m");
    if (!C.allFinite() || !A.allFinite() || !b.allFinite()) throw InvalidArgument("instance data must be finite");
    if (kind == InstanceKind::KP) {
        if (m() != 1 || sense[0] != Sense::LE) throw InvalidArgument("KP instance must have a single <= row");
        if ((A.array() < 0).any() || b[0] < 0) throw InvalidArgument("KP weights and capacity must be non-negative");
    }
    if (kind == InstanceKind::AP) {
        const auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n()))));
        if (r * r != n() || m() != 2 * r) throw InvalidArgument("AP instance must have n = r^2 and m = 2r");
        if (std::any_of(sense.begin(), sense.end(), [](Sense s) { return s != Sense::EQ; }) || !(b.array() == 1.0).all())
            throw InvalidArgument("AP rows must be equalities with rhs 1");
    }
}

bool MoblpInstance::is_feasible(const Eigen::VectorXd& x, double tol) const {
    const Eigen::VectorXd lhs = A * x;
    for (Index row = 0; row < m(); ++row)
        if (!satisfies(lhs[row], sense[row], b[row], tol)) return false;
    return true;
}

std::string MoblpInstance::subclass() const {
    if (kind == InstanceKind::AP) {
        const auto r = std::llround(std::sqrt(static_cast<double>(n())));
        return "AP-" + std::to_string(r) + "x" + std::to_string(r);
    }
    return std::string(to_string(kind)) + "-n" + std::to_string(n());
}

bool operator==(const MoblpInstance& lhs, const MoblpInstance& rhs) {
    auto same = [](const auto& a, const auto& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    return same(lhs.C, rhs.C) && same(lhs.A, rhs.A) && same(lhs.b, rhs.b) && lhs.sense == rhs.sense &&
           lhs.kind == rhs.kind && lhs.id == rhs.id && lhs.seed == rhs.seed;
}

Eigen::VectorXd preorder_point(const Eigen::MatrixXd& C) {
    Eigen::VectorXd point(C.cols());
    std::vector<double> column(static_cast<std::size_t>(C.rows()));
    for (Index j = 0; j < C.cols(); ++j) {
        // Summing in sorted order makes the result independent of row order.
        for (Index i = 0; i < C.rows(); ++i) column[static_cast<std::size_t>(i)] = std::abs(C(i, j));
        std::sort(column.begin(), column.end());
        const double total = std::accumulate(column.begin(), column.end(), 0.0);
        point[j] = 1.0 / (total + 1.0);
    }
    return point;
}

std::pair<MoblpInstance, PreorderReport> preorder(const MoblpInstance& inst) {
    const Eigen::VectorXd point = preorder_point(inst.C);
    const Eigen::VectorXd scores = inst.C * point;

    std::vector<Index> order(static_cast<std::size_t>(inst.p()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        const auto ra = inst.C.row(a);
        const auto rb = inst.C.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });

    MoblpInstance out = inst;
    PreorderReport report{order, Eigen::VectorXd(inst.p())};
    for (Index k = 0; k < inst.p(); ++k) {
        out.C.row(k) = inst.C.row(order[static_cast<std::size_t>(k)]);
        report.scores[k] = scores[order[static_cast<std::size_t>(k)]];
    }
    return {std::move(out), std::move(report)};
}

namespace {

void check_generator_args(Index p, CoeffRange range) {
    if (p < 2) throw InvalidArgument("p must be at least 2");
    if (range.lo < 1 || range.hi < range.lo)
        throw InvalidArgument("coefficient range must be a nonempty positive interval");
}

}  // namespace

MoblpInstance generate_kp(Index n, Index p, std::uint64_t seed, CoeffRange range) {
    if (n < 1) throw InvalidArgument("n must be at least 1");
    check_generator_args(p, range);
    Rng rng(seed);
    MoblpInstance inst;
    inst.C.resize(p, n);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < n; ++j) inst.C(i, j) = -static_cast<double>(rng.uniform_int(range.lo, range.hi));
    inst.A.resize(1, n);
    std::int64_t total = 0;
    for (Index j = 0; j < n; ++j) {
        const auto w = rng.uniform_int(range.lo, range.hi);
        inst.A(0, j) = static_cast<double>(w);
        total += w;
    }
    inst.b = Eigen::VectorXd::Constant(1, static_cast<double>((total + 1) / 2));
    inst.sense = {Sense::LE};
    inst.kind = InstanceKind::KP;
    inst.seed = seed;
    inst.id = "kp_n" + std::to_string(n) + "_p" + std::to_string(p) + "_s" + std::to_string(seed);
    return inst;
}

MoblpInstance generate_ap(Index r, Index p, std::uint64_t seed, CoeffRange range) {
    if (r < 2) throw InvalidArgument("assignment size r must be at least 2");
    check_generator_args(p, range);
    Rng rng(seed);
    const Index n = r * r;
    MoblpInstance inst;
    inst.C.resize(p, n);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < n; ++j) inst.C(i, j) = static_cast<double>(rng.uniform_int(range.lo, range.hi));
    inst.A = Eigen::MatrixXd::Zero(2 * r, n);
    for (Index agent = 0; agent < r; ++agent)
        for (Index task = 0; task < r; ++task) {
            inst.A(agent, agent * r + task) = 1.0;
            inst.A(r + task, agent * r + task) = 1.0;
        }
    inst.b = Eigen::VectorXd::Ones(2 * r);
    inst.sense.assign(static_cast<std::size_t>(2 * r), Sense::EQ);
    inst.kind = InstanceKind::AP;
    inst.seed = seed;
    inst.id = "ap_r" + std::to_string(r) + "_p" + std::to_string(p) + "_s" + std::to_string(seed);
    return inst;
}

std::string format_number(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

double parse_number(const std::string& token, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last)
        throw ParseError("expected a number, got '" + token + "'", line);
    return value;
}

Index parse_count(const std::string& token, std::size_t line, const char* what) {
    long long value = 0;
    const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
    if (result.ec != std::errc() || result.ptr != token.data() + token.size() || value < 0)
        throw ParseError(std::string("expected a non-negative integer for ") + what + ", got '" + token + "'", line);
    return static_cast<Index>(value);
}

Sense parse_sense(const std::string& token, std::size_t line) {
    if (token == "<=") return Sense::LE;
    if (token == ">=") return Sense::GE;
    if (token == "=" || token == "==") return Sense::EQ;
    throw ParseError("expected a sense token (<=, >=, =), got '" + token + "'", line);
}

}  // namespace

MoblpInstance parse_instance(std::istream& in) {
    MoblpInstance inst;
    std::vector<Line> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) {
            std::istringstream meta(raw.substr(hash + 1));
            std::string key, value, extra;
            if (meta >> key >> value && !(meta >> extra)) {
                if (key == "id") inst.id = value;
                if (key == "seed") inst.seed = static_cast<std::uint64_t>(std::stoull(value));
            }
            raw.erase(hash);
        }
        std::istringstream fields(raw);
        Line line{number, {}};
        for (std::string token; fields >> token;) line.tokens.push_back(std::move(token));
        if (!line.tokens.empty()) lines.push_back(std::move(line));
    }
    if (lines.empty()) throw ParseError("empty instance file", 0);

    const auto& header = lines.front();
    if (header.tokens.size() != 4) throw ParseError("header must be 'p n m kind'", header.number);
    const Index p = parse_count(header.tokens[0], header.number, "p");
    const Index n = parse_count(header.tokens[1], header.number, "n");
    const Index m = parse_count(header.tokens[2], header.number, "m");
    try {
        inst.kind = parse_kind(header.tokens[3]);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), header.number);
    }

    const auto expected = static_cast<std::size_t>(1 + p + m);
    if (lines.size() != expected)
        throw DimensionError("header declares " + std::to_string(p) + " objective and " + std::to_string(m) +
                             " constraint rows but the file has " + std::to_string(lines.size() - 1) + " data rows");

    inst.C.resize(p, n);
    for (Index i = 0; i < p; ++i) {
        const auto& line = lines[static_cast<std::size_t>(1 + i)];
        if (static_cast<Index>(line.tokens.size()) != n)
            throw DimensionError("line " + std::to_string(line.number) + ": objective row has " +
                                 std::to_string(line.tokens.size()) + " values, expected " + std::to_string(n));
        for (Index j = 0; j < n; ++j) inst.C(i, j) = parse_number(line.tokens[static_cast<std::size_t>(j)], line.number);
    }
    inst.A.resize(m, n);
    inst.b.resize(m);
    inst.sense.resize(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) {
        const auto& line = lines[static_cast<std::size_t>(1 + p + k)];
        if (static_cast<Index>(line.tokens.size()) != n + 2)
            throw DimensionError("line " + std::to_string(line.number) + ": constraint row has " +
                                 std::to_string(line.tokens.size()) + " tokens, expected " + std::to_string(n + 2));
        for (Index j = 0; j < n; ++j) inst.A(k, j) = parse_number(line.tokens[static_cast<std::size_t>(j)], line.number);
        inst.sense[static_cast<std::size_t>(k)] = parse_sense(line.tokens[static_cast<std::size_t>(n)], line.number);
        inst.b[k] = parse_number(line.tokens[static_cast<std::size_t>(n + 1)], line.number);
    }
    return inst;
}

void write_instance(std::ostream& out, const MoblpInstance& inst) {
    if (!inst.id.empty()) out << "# id " << inst.id << '\n';
    if (inst.seed) out << "# seed " << *inst.seed << '\n';
    out << inst.p() << ' ' << inst.n() << ' ' << inst.m() << ' ' << to_string(inst.kind) << '\n';
    for (Index i = 0; i < inst.p(); ++i) {
        for (Index j = 0; j < inst.n(); ++j) out << (j ? " " : "") << format_number(inst.C(i, j));
        out << '\n';
    }
    for (Index k = 0; k < inst.m(); ++k) {
        for (Index j = 0; j < inst.n(); ++j) out << format_number(inst.A(k, j)) << ' ';
        out << to_string(inst.sense[static_cast<std::size_t>(k)]) << ' ' << format_number(inst.b[k]) << '\n';
    }
}

MoblpInstance read_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_instance(in);
}

void write_instance(const MoblpInstance& inst, const std::filesystem::path& path) {
    std::ostringstream out;
    write_instance(out, inst);
    write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto temp = path;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + temp.string());
        out << contents;
        if (!out.flush()) throw std::runtime_error("write failed for " + temp.string());
    }
    std::filesystem::rename(temp, path);
}

}  // namespace moblp
