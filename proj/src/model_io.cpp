#include "moblp/error.hpp"
#include "moblp/learn.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace moblp {

namespace {

using nlohmann::json;

std::vector<double> to_list(const Eigen::VectorXd& v) { return {v.begin(), v.end()}; }

Eigen::VectorXd from_list(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

void write_model(std::ostream& out, const TrainedModel& model) {
    const auto& m = model.msvm;
    std::vector<double> w;
    for (Index r = 0; r < m.W.rows(); ++r)
        for (Index c = 0; c < m.W.cols(); ++c) w.push_back(m.W(r, c));
    json doc{
        {"format", "moblp-msvm"},
        {"version", 1},
        {"p", model.p},
        {"active", m.active},
        {"active_names", m.names},
        {"W", {{"rows", m.W.rows()}, {"cols", m.W.cols()}, {"row_major", w}}},
        {"c_reg", m.c_reg},
        {"tol", m.tol},
        {"epochs", m.epochs},
        {"normalizer",
         {{"names", model.normalizer.names},
          {"mean", to_list(model.normalizer.mean)},
          {"std", to_list(model.normalizer.std)},
          {"group", model.normalizer.group}}},
        {"selection", {{"k", model.selected_k}, {"e", model.selected_e}, {"distance", model.distance}}},
        {"seed", model.seed},
    };
    out << doc.dump(1) << '\n';
}

TrainedModel parse_model(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what(), 0);
    }
    try {
        if (doc.at("format") != "moblp-msvm") throw ParseError("not a model file", 0);
        TrainedModel model;
        model.p = doc.at("p").get<Index>();
        auto& m = model.msvm;
        m.active = doc.at("active").get<std::vector<Index>>();
        m.names = doc.at("active_names").get<std::vector<std::string>>();
        const auto& W = doc.at("W");
        const auto rows = W.at("rows").get<Index>();
        const auto cols = W.at("cols").get<Index>();
        const auto w = W.at("row_major").get<std::vector<double>>();
        if (static_cast<Index>(w.size()) != rows * cols || rows != model.p || cols != static_cast<Index>(m.active.size()))
            throw DimensionError("model weight matrix does not match its declared shape");
        m.W.resize(rows, cols);
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) m.W(r, c) = w[static_cast<std::size_t>(r * cols + c)];
        m.c_reg = doc.at("c_reg").get<double>();
        m.tol = doc.at("tol").get<double>();
        m.epochs = doc.value("epochs", 0);
        const auto& norm = doc.at("normalizer");
        model.normalizer.names = norm.at("names").get<std::vector<std::string>>();
        model.normalizer.mean = from_list(norm.at("mean"));
        model.normalizer.std = from_list(norm.at("std"));
        model.normalizer.group = norm.at("group").get<std::vector<std::string>>();
        if (model.normalizer.mean.size() != model.normalizer.std.size() ||
            static_cast<Index>(model.normalizer.names.size()) != model.normalizer.mean.size())
            throw DimensionError("normalizer vectors differ in length");
        for (Index source : m.active)
            if (source < 0 || source >= model.normalizer.size()) throw DimensionError("active feature index out of range");
        const auto& sel = doc.at("selection");
        model.selected_k = sel.at("k").get<Index>();
        model.selected_e = sel.at("e").get<double>();
        model.distance = sel.at("distance").get<double>();
        model.seed = doc.at("seed").get<std::uint64_t>();
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what(), 0);
    }
}

void write_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ostringstream out;
    write_model(out, model);
    write_file_atomic(path, out.str());
}

TrainedModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_model(in);
}

}  // namespace moblp
