#include "gmmnet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gmmnet {

using ordered_json = nlohmann::ordered_json;

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ostringstream out;
    for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
    out << "label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j)
            out << format_real(data.points(i, j)) << ',';
        out << data.labels[i] << '\n';
    }
    write_text_file(path, out.str());
}

Dataset read_dataset_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);

    std::size_t dim = 0;
    {
        std::istringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) {
            if (cell == "label") break;
            ++dim;
        }
    }
    if (dim == 0) throw IoError("dataset header has no feature columns: " + path);

    std::vector<double> values;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        for (std::size_t j = 0; j < dim; ++j) {
            if (!std::getline(row, cell, ',')) throw IoError("short row in: " + path);
            values.push_back(std::stod(cell));
        }
        if (!std::getline(row, cell, ',')) throw IoError("missing label in: " + path);
        labels.push_back(std::stoi(cell));
    }

    Dataset data;
    data.points = Matrix(labels.size(), dim);
    data.points.data() = std::move(values);
    data.labels = std::move(labels);
    return data;
}

std::string mixture_to_json(const GaussianMixture& m) {
    ordered_json j;
    j["weights"] = ordered_json::array();
    for (double w : m.weights) j["weights"].push_back(format_real(w));
    j["components"] = ordered_json::array();
    for (const Gaussian& g : m.components) {
        ordered_json c;
        c["mean"] = ordered_json::array();
        for (double v : g.mean) c["mean"].push_back(format_real(v));
        c["covariance"] = ordered_json::array();
        for (std::size_t i = 0; i < g.covariance.rows(); ++i) {
            ordered_json row = ordered_json::array();
            for (std::size_t k = 0; k < g.covariance.cols(); ++k)
                row.push_back(format_real(g.covariance(i, k)));
            c["covariance"].push_back(row);
        }
        j["components"].push_back(c);
    }
    return j.dump(2) + "\n";
}

namespace {

double json_real(const ordered_json& v) {
    if (v.is_string()) return std::stod(v.get<std::string>());
    return v.get<double>();
}

}  // namespace

GaussianMixture mixture_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("mixture JSON parse error: ") + e.what());
    }
    GaussianMixture m;
    for (const auto& w : j.at("weights")) m.weights.push_back(json_real(w));
    for (const auto& c : j.at("components")) {
        Gaussian g;
        for (const auto& v : c.at("mean")) g.mean.push_back(json_real(v));
        const auto& cov = c.at("covariance");
        const std::size_t d = g.mean.size();
        if (cov.size() != d) throw IoError("mixture JSON: covariance shape mismatch");
        g.covariance = Matrix(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            if (cov[i].size() != d) throw IoError("mixture JSON: covariance shape mismatch");
            for (std::size_t k = 0; k < d; ++k) g.covariance(i, k) = json_real(cov[i][k]);
        }
        m.components.push_back(std::move(g));
    }
    validate_mixture(m);
    return m;
}

void write_mixture_json(const GaussianMixture& m, const std::string& path) {
    write_text_file(path, mixture_to_json(m));
}

GaussianMixture read_mixture_json(const std::string& path) {
    return mixture_from_json(read_text_file(path));
}

namespace {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Abs:
            return "Abs";
        case Activation::ReLU:
            return "ReLU";
        case Activation::Identity:
            return "Identity";
    }
    return "Abs";
}

Activation activation_from_name(const std::string& name) {
    if (name == "Abs") return Activation::Abs;
    if (name == "ReLU") return Activation::ReLU;
    if (name == "Identity") return Activation::Identity;
    throw IoError("model JSON: unknown activation " + name);
}

}  // namespace

std::string model_to_json(const MLPModel& m, const ModelMetadata& meta) {
    ordered_json j;
    j["format_version"] = 1;
    j["layers"] = ordered_json::array();
    for (const DistanceLayer& l : m.layers) {
        ordered_json layer;
        layer["shape"] = {l.weights.rows(), l.weights.cols()};
        layer["weights"] = ordered_json::array();
        for (double v : l.weights.data()) layer["weights"].push_back(format_real(v));
        layer["bias"] = ordered_json::array();
        for (double v : l.bias) layer["bias"].push_back(format_real(v));
        layer["activation"] = activation_name(l.activation);
        if (l.provenance) {
            layer["provenance"] = ordered_json::array();
            for (const Provenance& p : *l.provenance)
                layer["provenance"].push_back({p.component, p.eigen_index});
        }
        j["layers"].push_back(layer);
    }
    j["metadata"]["seed"] = meta.seed;
    j["metadata"]["creation_parameters"] = meta.creation_parameters;
    return j.dump(2) + "\n";
}

std::pair<MLPModel, ModelMetadata> model_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("model JSON parse error: ") + e.what());
    }
    if (j.at("format_version").get<int>() != 1)
        throw IoError("model JSON: unsupported format version");

    MLPModel m;
    for (const auto& layer : j.at("layers")) {
        DistanceLayer l;
        const auto shape = layer.at("shape");
        const std::size_t rows = shape[0].get<std::size_t>();
        const std::size_t cols = shape[1].get<std::size_t>();
        const auto& weights = layer.at("weights");
        if (weights.size() != rows * cols)
            throw IoError("model JSON: weight count does not match shape");
        l.weights = Matrix(rows, cols);
        for (std::size_t i = 0; i < weights.size(); ++i)
            l.weights.data()[i] = json_real(weights[i]);
        for (const auto& b : layer.at("bias")) l.bias.push_back(json_real(b));
        if (l.bias.size() != rows) throw IoError("model JSON: bias length mismatch");
        l.activation = activation_from_name(layer.at("activation").get<std::string>());
        if (layer.contains("provenance")) {
            std::vector<Provenance> prov;
            for (const auto& p : layer.at("provenance"))
                prov.push_back({p[0].get<int>(), p[1].get<int>()});
            l.provenance = std::move(prov);
        }
        if (!l.weights.all_finite())
            throw IoError("model JSON: non-finite weights");
        m.layers.push_back(std::move(l));
    }

    ModelMetadata meta;
    if (j.contains("metadata")) {
        meta.seed = j["metadata"].value("seed", std::uint64_t{0});
        meta.creation_parameters = j["metadata"].value("creation_parameters", "");
    }
    return {std::move(m), std::move(meta)};
}

void write_model_json(const MLPModel& m, const ModelMetadata& meta, const std::string& path) {
    write_text_file(path, model_to_json(m, meta));
}

std::pair<MLPModel, ModelMetadata> read_model_json(const std::string& path) {
    return model_from_json(read_text_file(path));
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
    std::ostringstream out;
    out << "epoch,loss,penalty,total\n";
    for (const HistoryRow& row : history)
        out << row.epoch << ',' << format_real(row.loss) << ',' << format_real(row.penalty)
            << ',' << format_real(row.total) << '\n';
    write_text_file(path, out.str());
}

}  // namespace gmmnet
