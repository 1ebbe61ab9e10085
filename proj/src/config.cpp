#include "wca/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wca/csv.hpp"
#include "wca/experiments.hpp"

namespace wca {

using nlohmann::json;

static void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
static void get_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root = json::parse(json_text);
    check_keys(root, {"dataset", "model", "objective", "training", "attacks", "eval_n",
                      "eps_sweep", "out_dir", "seed"},
               "top level");

    ExperimentConfig cfg;
    get_if(root, "eval_n", cfg.eval_n);
    get_if(root, "eps_sweep", cfg.eps_sweep);
    get_if(root, "out_dir", cfg.out_dir);
    get_if(root, "seed", cfg.seed);

    if (root.contains("dataset")) {
        const json& d = root.at("dataset");
        check_keys(d, {"kind", "n_train_per_class", "n_test_per_class", "pca", "data_dir",
                       "blob_spread", "export_features", "pca_norm"},
                   "dataset");
        get_if(d, "kind", cfg.dataset.kind);
        get_if(d, "n_train_per_class", cfg.dataset.n_train_per_class);
        get_if(d, "n_test_per_class", cfg.dataset.n_test_per_class);
        get_if(d, "pca", cfg.dataset.pca);
        get_if(d, "pca_norm", cfg.dataset.pca_norm);
        get_if(d, "data_dir", cfg.dataset.data_dir);
        get_if(d, "blob_spread", cfg.dataset.blob_spread);
        get_if(d, "export_features", cfg.dataset.export_features);
    }
    if (root.contains("model")) {
        const json& m = root.at("model");
        check_keys(m, {"hidden", "feature_dim", "noise", "l_init"}, "model");
        get_if(m, "hidden", cfg.model.hidden);
        get_if(m, "feature_dim", cfg.model.feature_dim);
        get_if(m, "noise", cfg.model.noise);
        get_if(m, "l_init", cfg.model.l_init);
    }
    if (root.contains("objective")) {
        const json& o = root.at("objective");
        check_keys(o, {"loss", "lambda", "wca", "wca_coeff", "regularizer", "gamma", "tau"},
                   "objective");
        get_if(o, "loss", cfg.objective.loss);
        get_if(o, "lambda", cfg.objective.lambda);
        get_if(o, "wca", cfg.objective.wca);
        get_if(o, "wca_coeff", cfg.objective.wca_coeff);
        get_if(o, "regularizer", cfg.objective.regularizer);
        get_if(o, "gamma", cfg.objective.gamma);
        get_if(o, "tau", cfg.objective.tau);
    }
    if (root.contains("training")) {
        const json& t = root.at("training");
        check_keys(t, {"lr", "epochs", "batch", "grid", "log_every"}, "training");
        get_if(t, "lr", cfg.training.lr);
        get_if(t, "epochs", cfg.training.epochs);
        get_if(t, "batch", cfg.training.batch);
        get_if(t, "grid", cfg.training.grid);
        get_if(t, "log_every", cfg.training.log_every);
    }
    if (root.contains("attacks")) {
        const json& arr = root.at("attacks");
        if (!arr.is_array()) throw std::invalid_argument("config: attacks must be an array");
        for (const json& a : arr) {
            check_keys(a,
                       {"kind", "epsilon", "norm", "steps", "step_size", "restarts", "eot_samples",
                        "kappa", "c0", "binary_steps", "iters", "lr", "n_pixels", "population",
                        "k_max", "crossover", "mutation", "budget", "p0"},
                       "attacks[]");
            AttackSpec s;
            get_if(a, "kind", s.kind);
            get_if(a, "epsilon", s.epsilon);
            get_if(a, "norm", s.norm);
            get_if(a, "steps", s.steps);
            get_if(a, "step_size", s.step_size);
            get_if(a, "restarts", s.restarts);
            get_if(a, "eot_samples", s.eot_samples);
            get_if(a, "kappa", s.kappa);
            get_if(a, "c0", s.c0);
            get_if(a, "binary_steps", s.binary_steps);
            get_if(a, "iters", s.iters);
            get_if(a, "lr", s.lr);
            get_if(a, "n_pixels", s.n_pixels);
            get_if(a, "population", s.population);
            get_if(a, "k_max", s.k_max);
            get_if(a, "crossover", s.crossover);
            get_if(a, "mutation", s.mutation);
            get_if(a, "budget", s.budget);
            get_if(a, "p0", s.p0);
            cfg.attacks.push_back(std::move(s));
        }
    }

    // Validate enumerations and ranges up front.
    const std::set<std::string> kinds{"blobs", "bound_blobs", "synth01", "mnist01", "mnist"};
    if (!kinds.count(cfg.dataset.kind))
        throw std::invalid_argument("config: unknown dataset kind '" + cfg.dataset.kind + "'");
    const std::set<std::string> losses{"auto", "hinge", "xent"};
    if (!losses.count(cfg.objective.loss))
        throw std::invalid_argument("config: unknown loss '" + cfg.objective.loss + "'");
    const std::set<std::string> regs{"penalty", "constraint"};
    if (!regs.count(cfg.objective.regularizer))
        throw std::invalid_argument("config: unknown regularizer '" + cfg.objective.regularizer + "'");
    if (cfg.objective.lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
    if (cfg.training.lr <= 0.0) throw std::invalid_argument("config: lr must be > 0");
    const std::set<std::string> shapes{"full", "diagonal", "spherical"};
    if (!shapes.count(cfg.model.noise))
        throw std::invalid_argument("config: unknown noise shape '" + cfg.model.noise + "'");
    for (const auto& a : cfg.attacks) {
        const std::set<std::string> akinds{"fgsm", "pgd", "cw", "one_pixel", "square"};
        if (!akinds.count(a.kind))
            throw std::invalid_argument("config: unknown attack kind '" + a.kind + "'");
        if (a.epsilon < 0.0) throw std::invalid_argument("config: attack epsilon must be >= 0");
        if (a.norm != "inf" && a.norm != "2")
            throw std::invalid_argument("config: attack norm must be 'inf' or '2'");
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
    json root;
    root["dataset"] = {{"kind", cfg.dataset.kind},
                       {"n_train_per_class", cfg.dataset.n_train_per_class},
                       {"n_test_per_class", cfg.dataset.n_test_per_class},
                       {"pca", cfg.dataset.pca},
                       {"pca_norm", cfg.dataset.pca_norm},
                       {"data_dir", cfg.dataset.data_dir},
                       {"blob_spread", cfg.dataset.blob_spread},
                       {"export_features", cfg.dataset.export_features}};
    root["model"] = {{"hidden", cfg.model.hidden},
                     {"feature_dim", cfg.model.feature_dim},
                     {"noise", cfg.model.noise},
                     {"l_init", cfg.model.l_init}};
    root["objective"] = {{"loss", cfg.objective.loss},
                         {"lambda", cfg.objective.lambda},
                         {"wca", cfg.objective.wca},
                         {"wca_coeff", cfg.objective.wca_coeff},
                         {"regularizer", cfg.objective.regularizer},
                         {"gamma", cfg.objective.gamma},
                         {"tau", cfg.objective.tau}};
    root["training"] = {{"lr", cfg.training.lr},
                        {"epochs", cfg.training.epochs},
                        {"batch", cfg.training.batch},
                        {"grid", cfg.training.grid},
                        {"log_every", cfg.training.log_every}};
    json attacks = json::array();
    for (const auto& a : cfg.attacks) {
        attacks.push_back({{"kind", a.kind},
                           {"epsilon", a.epsilon},
                           {"norm", a.norm},
                           {"steps", a.steps},
                           {"step_size", a.step_size},
                           {"restarts", a.restarts},
                           {"eot_samples", a.eot_samples},
                           {"kappa", a.kappa},
                           {"c0", a.c0},
                           {"binary_steps", a.binary_steps},
                           {"iters", a.iters},
                           {"lr", a.lr},
                           {"n_pixels", a.n_pixels},
                           {"population", a.population},
                           {"k_max", a.k_max},
                           {"crossover", a.crossover},
                           {"mutation", a.mutation},
                           {"budget", a.budget},
                           {"p0", a.p0}});
    }
    root["attacks"] = attacks;
    root["eval_n"] = cfg.eval_n;
    root["eps_sweep"] = cfg.eps_sweep;
    // out_dir deliberately left out: the hash identifies the experiment, not
    // where its artifacts land.
    root["seed"] = cfg.seed;
    return root.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
    return hash_hex(fnv1a64(canonical_config(cfg)));
}

static std::string data_root(const DatasetSpec& spec) {
    if (!spec.data_dir.empty()) return spec.data_dir;
    if (const char* env = std::getenv("WCA_DATA_DIR")) return env;
    return ".";
}

DatasetBundle build_datasets(const DatasetSpec& spec, std::uint64_t seed) {
    DatasetBundle out;

    if (spec.kind == "blobs") {
        Rng tr = Rng::stream(seed, 0xB10B0u);
        Rng te = Rng::stream(seed, 0xB10B1u);
        out.train = make_unit_blobs(tr, spec.n_train_per_class, spec.blob_spread);
        out.test = make_unit_blobs(te, spec.n_test_per_class, spec.blob_spread);
        out.num_classes = 2;
        out.binary = false;
    } else if (spec.kind == "bound_blobs") {
        Rng tr = Rng::stream(seed, 0xB10B2u);
        Rng te = Rng::stream(seed, 0xB10B3u);
        out.train = filter_binary(make_bound_blobs(tr, spec.n_train_per_class), 0, 1);
        out.test = filter_binary(make_bound_blobs(te, spec.n_test_per_class), 0, 1);
        out.binary = true;
        out.num_classes = 1;
        out.box_lo = 0.0;
        out.box_hi = 6.0;
    } else if (spec.kind == "synth01") {
        Rng tr = Rng::stream(seed, 0xD161u);
        Rng te = Rng::stream(seed, 0xD162u);
        out.train = filter_binary(make_synth_digits(tr, spec.n_train_per_class), 0, 1);
        out.test = filter_binary(make_synth_digits(te, spec.n_test_per_class), 0, 1);
        out.binary = true;
        out.num_classes = 1;
    } else if (spec.kind == "mnist01" || spec.kind == "mnist") {
        std::string root = data_root(spec);
        LabeledDataset train_full =
            load_idx(root + "/train-images-idx3-ubyte", root + "/train-labels-idx1-ubyte");
        LabeledDataset test_full =
            load_idx(root + "/t10k-images-idx3-ubyte", root + "/t10k-labels-idx1-ubyte");
        if (spec.kind == "mnist01") {
            out.train = filter_binary(train_full, 0, 1);
            out.test = filter_binary(test_full, 0, 1);
            out.binary = true;
            out.num_classes = 1;
        } else {
            out.train = std::move(train_full);
            out.test = std::move(test_full);
            out.num_classes = 10;
        }
    } else {
        throw std::invalid_argument("build_datasets: unknown kind '" + spec.kind + "'");
    }

    if (spec.pca > 0) {
        PcaModel pca = pca_fit(out.train.features, spec.pca);
        out.train.features = pca_transform(pca, out.train.features);
        out.test.features = pca_transform(pca, out.test.features);
        std::string tag = "pca" + std::to_string(spec.pca);
        out.train.preprocessing.push_back(tag);
        out.test.preprocessing.push_back(tag);
        if (spec.pca_norm > 0.0) scale_to_mean_norm(out.train, out.test, spec.pca_norm);
        // PCA features are unconstrained reals.
        out.box_lo = -1e30;
        out.box_hi = 1e30;
    }
    return out;
}

}  // namespace wca
