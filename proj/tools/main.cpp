// gmmnet: data generation, invariant verification, initialization
// experiments, and GMM <-> network translation from the command line.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmmnet/io.hpp"
#include "gmmnet/rng.hpp"
#include "gmmnet/verify.hpp"

namespace {

using namespace gmmnet;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ','))
        if (!tok.empty()) out.push_back(static_cast<std::size_t>(std::stoul(tok)));
    return out;
}

// Grouping syntax: semicolon-separated groups of comma-separated row
// indices, e.g. "0,1;2,3".
std::vector<std::vector<std::size_t>> parse_grouping(const std::string& text) {
    std::vector<std::vector<std::size_t>> groups;
    std::istringstream in(text);
    std::string group;
    while (std::getline(in, group, ';')) {
        groups.push_back(parse_size_list(group));
        if (groups.back().empty()) throw InvalidSubset("empty group in grouping");
    }
    return groups;
}

std::string truth_path_for(const std::string& csv_path) {
    if (csv_path.size() > 4 && csv_path.ends_with(".csv"))
        return csv_path.substr(0, csv_path.size() - 4) + ".truth.json";
    return csv_path + ".truth.json";
}

GaussianMixture make_random_mixture(std::size_t k, std::size_t dim, double separation,
                                    std::uint64_t seed) {
    Rng rng(seed);
    GaussianMixture m;
    m.weights.assign(k, 1.0 / static_cast<double>(k));
    for (std::size_t c = 0; c < k; ++c) {
        Gaussian g;
        // Mean on a sphere of radius `separation`.
        g.mean.resize(dim);
        double nrm = 0.0;
        for (double& v : g.mean) {
            v = rng.normal();
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) nrm = 1.0;
        for (double& v : g.mean) v = separation * v / nrm;

        const Matrix q = random_rotation(dim, seed * 131 + c);
        Vector lambdas(dim);
        for (double& l : lambdas) l = 0.5 + 1.5 * rng.uniform();
        g.covariance = Matrix(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) {
                double s = 0.0;
                for (std::size_t t = 0; t < dim; ++t) s += q(i, t) * lambdas[t] * q(j, t);
                g.covariance(i, j) = s;
                g.covariance(j, i) = s;
            }
        m.components.push_back(std::move(g));
    }
    return m;
}

int cmd_gen(std::size_t k, std::size_t dim, std::size_t n, double separation,
            std::uint64_t seed, const std::string& out) {
    const GaussianMixture truth = make_random_mixture(k, dim, separation, seed);
    const Dataset data = sample_gmm(truth, n, seed ^ 0xD1CEULL);
    write_dataset_csv(data, out);
    write_mixture_json(truth, truth_path_for(out));
    std::cout << "wrote " << n << " samples to " << out << " and truth to "
              << truth_path_for(out) << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& suite, const std::string& dims_csv, std::size_t trials,
               std::uint64_t seed) {
    if (!known_suite(suite)) {
        std::cerr << "unknown suite: " << suite << "\n";
        return kExitUsage;
    }
    VerifyOptions opts;
    opts.dims = parse_size_list(dims_csv);
    if (opts.dims.empty()) {
        std::cerr << "no dimensions given\n";
        return kExitUsage;
    }
    opts.trials = trials;
    opts.seed = seed;

    const std::vector<CheckResult> results = run_suite(suite, opts);
    const CheckResult* first_fail = nullptr;
    for (const CheckResult& c : results) {
        std::printf("%-48s %-6s value=%.3e %s %.0e\n", c.name.c_str(),
                    c.passed ? "pass" : "FAIL", c.value,
                    c.pass_if_greater ? ">" : "<", c.tolerance);
        if (!c.passed && first_fail == nullptr) first_fail = &c;
    }
    if (first_fail != nullptr) {
        std::cerr << "first failing check: " << first_fail->name << "\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_experiment(const std::string& data_path, std::size_t k, std::size_t rows,
                   const std::string& strategies_csv, std::size_t epochs,
                   std::uint64_t seed, double threshold, const std::string& out_dir) {
    const Dataset data = read_dataset_csv(data_path);
    int max_label = 0;
    for (int l : data.labels) max_label = std::max(max_label, l);
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    std::vector<std::string> strategies;
    {
        std::istringstream in(strategies_csv);
        std::string tok;
        while (std::getline(in, tok, ','))
            if (!tok.empty()) strategies.push_back(tok);
    }
    if (strategies.empty()) {
        std::cerr << "no strategies given\n";
        return kExitUsage;
    }
    std::filesystem::create_directories(out_dir);

    ordered_json summary = ordered_json::array();
    for (const std::string& name : strategies) {
        InitStrategy strategy;
        if (name == "ClusterPCA") {
            strategy = InitStrategy::ClusterPCA;
        } else if (name == "RandomNormal") {
            strategy = InitStrategy::RandomNormal;
        } else {
            std::cerr << "unknown strategy: " << name << "\n";
            return kExitUsage;
        }

        MLPModel model;
        model.layers.push_back(initialize_layer(data, k, rows, strategy, seed));
        // Shared head initialization keeps the comparison down to the
        // first layer only.
        DistanceLayer head;
        head.weights = Matrix(classes, rows);
        Rng head_rng(seed ^ 0x4EADULL);
        const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
        for (double& v : head.weights.data()) v = scale * head_rng.normal();
        head.bias.assign(classes, 0.0);
        head.activation = Activation::Identity;
        model.layers.push_back(std::move(head));

        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = seed;
        cfg.learning_rate = 0.05;
        cfg.batch_size = 32;
        cfg.loss = Loss::SoftmaxCrossEntropy;

        ordered_json row;
        row["strategy"] = name;
        try {
            const TrainResult result = train(model, data, cfg);
            const std::string history_path = out_dir + "/" + name + "_history.csv";
            write_history_csv(result.history, history_path);

            long epochs_to_threshold = -1;
            for (const HistoryRow& h : result.history)
                if (h.loss < threshold) {
                    epochs_to_threshold = static_cast<long>(h.epoch);
                    break;
                }
            row["initial_loss"] = format_real(result.history.front().loss);
            row["final_loss"] = format_real(result.history.back().loss);
            row["epochs_to_threshold"] = epochs_to_threshold;
            row["history"] = history_path;
        } catch (const DivergenceError& e) {
            row["diverged_at_epoch"] = e.epoch;
        }
        summary.push_back(row);
    }

    const std::string summary_path = out_dir + "/summary.json";
    write_text_file(summary_path, summary.dump(2) + "\n");
    std::cout << "wrote " << summary_path << "\n";
    return kExitOk;
}

int cmd_translate(const std::string& in_path, const std::string& direction,
                  const std::string& grouping_text, const std::string& truth_path,
                  const std::string& out) {
    if (direction == "gmm2net") {
        const GaussianMixture m = read_mixture_json(in_path);
        std::vector<std::size_t> full(m.dim());
        for (std::size_t i = 0; i < m.dim(); ++i) full[i] = i;
        const DistanceLayer layer =
            gmm_to_network(m, std::vector<std::vector<std::size_t>>(m.size(), full));
        MLPModel model;
        model.layers.push_back(layer);
        ModelMetadata meta;
        meta.creation_parameters = "translate gmm2net " + in_path;
        write_model_json(model, meta, out);
        std::cout << "wrote " << out << "\n";
        return kExitOk;
    }
    if (direction != "net2gmm") {
        std::cerr << "direction must be gmm2net or net2gmm\n";
        return kExitUsage;
    }

    const auto [model, meta] = read_model_json(in_path);
    if (model.layers.empty()) {
        std::cerr << "model has no layers\n";
        return kExitUsage;
    }
    const DistanceLayer& layer = model.layers.front();

    std::vector<std::vector<std::size_t>> grouping;
    if (grouping_text == "auto") {
        if (!layer.provenance) {
            std::cerr << "model has no provenance; pass --grouping explicitly\n";
            return kExitUsage;
        }
        int max_component = 0;
        for (const Provenance& p : *layer.provenance)
            max_component = std::max(max_component, p.component);
        grouping.resize(static_cast<std::size_t>(max_component) + 1);
        for (std::size_t r = 0; r < layer.provenance->size(); ++r)
            grouping[static_cast<std::size_t>((*layer.provenance)[r].component)]
                .push_back(r);
    } else {
        grouping = parse_grouping(grouping_text);
    }

    RecoveredMixture rec;
    try {
        rec = network_to_gmm(layer, grouping);
    } catch (const UnderdeterminedGroup& e) {
        for (std::size_t gi = 0; gi < grouping.size(); ++gi) {
            if (grouping[gi].size() < layer.in_dim()) {
                std::cerr << "UnderdeterminedGroup: group " << gi << ": " << e.what()
                          << "\n";
                return kExitCheckFailed;
            }
        }
        std::cerr << "UnderdeterminedGroup: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    write_mixture_json(rec.mixture, out);

    ordered_json report;
    report["components"] = rec.mixture.size();
    report["orthogonal_path"] = ordered_json::array();
    for (bool b : rec.orthogonal_path) report["orthogonal_path"].push_back(b);
    if (!truth_path.empty()) {
        const GaussianMixture truth = read_mixture_json(truth_path);
        const TranslationReport cmp = compare_mixtures(truth, rec.mixture);
        report["mean_errors"] = ordered_json::array();
        report["covariance_errors"] = ordered_json::array();
        for (double e : cmp.mean_errors) report["mean_errors"].push_back(format_real(e));
        for (double e : cmp.covariance_errors)
            report["covariance_errors"].push_back(format_real(e));
    }
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mahalanobis-distance view of Abs-activated linear layers"};
    app.require_subcommand(1);

    // gen
    std::size_t gen_k = 2, gen_dim = 2, gen_n = 1000;
    double gen_separation = 10.0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Sample a random GMM to CSV plus a truth JSON");
    gen->add_option("--k", gen_k, "number of mixture components");
    gen->add_option("--dim", gen_dim, "data dimension");
    gen->add_option("--n", gen_n, "number of samples");
    gen->add_option("--separation", gen_separation, "radius of the mean sphere")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // verify
    std::string verify_suite = "all", verify_dims = "2,4,8";
    std::size_t verify_trials = 100;
    std::uint64_t verify_seed = 0;
    auto* verify = app.add_subcommand("verify", "Run an invariant suite");
    verify->add_option("--suite", verify_suite,
                       "mahalanobis|rotation|abs-relu|roundtrip|gradcheck|all");
    verify->add_option("--dims", verify_dims, "comma-separated dimensions");
    verify->add_option("--trials", verify_trials, "trials per dimension");
    verify->add_option("--seed", verify_seed, "RNG seed");

    // experiment
    std::string exp_data, exp_strategies = "ClusterPCA,RandomNormal", exp_out_dir;
    std::size_t exp_k = 2, exp_rows = 4, exp_epochs = 20;
    std::uint64_t exp_seed = 0;
    double exp_threshold = 0.5;
    auto* experiment =
        app.add_subcommand("experiment", "Compare initialization strategies");
    experiment->add_option("--data", exp_data, "dataset CSV")->required();
    experiment->add_option("--k", exp_k, "clusters for ClusterPCA");
    experiment->add_option("--rows", exp_rows, "first-layer rows");
    experiment->add_option("--strategies", exp_strategies, "comma-separated strategies");
    experiment->add_option("--epochs", exp_epochs, "training epochs");
    experiment->add_option("--seed", exp_seed, "RNG seed");
    experiment->add_option("--threshold", exp_threshold, "loss threshold for epoch count");
    experiment->add_option("--out-dir", exp_out_dir, "output directory")->required();

    // translate
    std::string tr_in, tr_direction, tr_grouping = "auto", tr_truth, tr_out;
    auto* translate =
        app.add_subcommand("translate", "Convert between mixture JSON and model JSON");
    translate->add_option("--in", tr_in, "input model or mixture JSON")->required();
    translate->add_option("--direction", tr_direction, "gmm2net|net2gmm")->required();
    translate->add_option("--grouping", tr_grouping,
                          "row groups like '0,1;2,3' or 'auto' (provenance)");
    translate->add_option("--truth", tr_truth, "reference mixture JSON for the report");
    translate->add_option("--out", tr_out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_k, gen_dim, gen_n, gen_separation, gen_seed, gen_out);
        if (verify->parsed())
            return cmd_verify(verify_suite, verify_dims, verify_trials, verify_seed);
        if (experiment->parsed())
            return cmd_experiment(exp_data, exp_k, exp_rows, exp_strategies, exp_epochs,
                                  exp_seed, exp_threshold, exp_out_dir);
        if (translate->parsed())
            return cmd_translate(tr_in, tr_direction, tr_grouping, tr_truth, tr_out);
    } catch (const IoError& e) {
        std::cerr << "IO error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
