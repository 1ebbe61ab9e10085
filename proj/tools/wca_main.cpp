#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wca/config.hpp"
#include "wca/csv.hpp"
#include "wca/experiments.hpp"
#include "wca/svg.hpp"

namespace fs = std::filesystem;
using namespace wca;

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    std::string data_dir;
    std::string checkpoint;
    std::uint64_t seed = 0;
    bool have_seed = false;
};

ExperimentConfig load_cfg(const CliArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
    // Flags override file values.
    if (args.have_seed) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.data_dir.empty()) cfg.dataset.data_dir = args.data_dir;
    fs::create_directories(cfg.out_dir);
    return cfg;
}

LossKind resolve_loss(const ExperimentConfig& cfg, const DatasetBundle& data) {
    if (cfg.objective.loss == "hinge") return LossKind::Hinge;
    if (cfg.objective.loss == "xent") return LossKind::SoftmaxXent;
    return data.binary ? LossKind::Hinge : LossKind::SoftmaxXent;
}

std::vector<std::size_t> layer_dims_for(const ExperimentConfig& cfg, const DatasetBundle& data) {
    std::vector<std::size_t> dims{data.train.dim()};
    if (cfg.model.hidden.empty() && cfg.model.feature_dim == 0) return dims;  // identity extractor
    if (cfg.model.feature_dim == 0)
        throw std::invalid_argument("model.feature_dim required when hidden layers are configured");
    for (auto h : cfg.model.hidden) dims.push_back(h);
    dims.push_back(cfg.model.feature_dim);
    return dims;
}

TrainOptions train_options(const ExperimentConfig& cfg, const DatasetBundle& data) {
    TrainOptions opt;
    opt.objective.loss = resolve_loss(cfg, data);
    opt.objective.lambda = cfg.objective.regularizer == "constraint" ? 0.0 : cfg.objective.lambda;
    opt.objective.wca_enabled = cfg.objective.wca;
    opt.objective.wca_coeff = cfg.objective.wca_coeff;
    opt.use_constraint = cfg.objective.regularizer == "constraint";
    opt.projection.gamma = cfg.objective.gamma;
    opt.projection.tau = cfg.objective.tau;
    opt.lr = cfg.training.lr;
    opt.epochs = cfg.training.epochs;
    opt.batch = cfg.training.batch;
    opt.log_every = cfg.training.log_every;
    opt.seed = cfg.seed;
    return opt;
}

AttackConfig white_box_config(const AttackSpec& s, const DatasetBundle& data) {
    AttackConfig cfg;
    cfg.epsilon = s.epsilon;
    cfg.norm = s.norm == "2" ? NormKind::L2 : NormKind::Linf;
    cfg.steps = s.steps;
    cfg.step_size = s.step_size;
    cfg.restarts = s.restarts;
    cfg.eot_samples = s.eot_samples;
    cfg.box_lo = data.box_lo;
    cfg.box_hi = data.box_hi;
    return cfg;
}

int cmd_train(const CliArgs& args) {
    ExperimentConfig cfg = load_cfg(args);
    DatasetBundle data = build_datasets(cfg.dataset, cfg.seed);
    std::vector<std::size_t> dims = layer_dims_for(cfg, data);

    TrainOptions opt = train_options(cfg, data);
    NoiseShape shape = cfg.model.noise == "diagonal"
                           ? NoiseShape::Diagonal
                           : (cfg.model.noise == "spherical" ? NoiseShape::Spherical
                                                             : NoiseShape::Full);

    CsvWriter log(config_hash(cfg), cfg.seed);
    log.comment("dataset=" + data.train.provenance());

    if (cfg.training.grid) {
        GridChoice choice = grid_search(data.train, dims, data.num_classes, opt, shape);
        opt.lr = choice.lr;
        opt.objective.lambda = choice.lambda;
        log.comment("grid_choice lr=" + fmt_double(choice.lr) +
                    " lambda=" + fmt_double(choice.lambda) +
                    " val_acc=" + fmt_double(choice.val_acc));
        std::cout << "grid: lr=" << choice.lr << " lambda=" << choice.lambda
                  << " val_acc=" << choice.val_acc << "\n";
    }

    Rng init = Rng::stream(cfg.seed, 0x31u);
    StochasticClassifier model =
        make_model(dims, data.num_classes, init, cfg.model.l_init, shape);
    TrainResult result = train(model, data.train, opt);

    log.header({"step", "L_C", "L_WCA", "penalty", "total", "clean_accuracy"});
    for (const auto& row : result.log) {
        log.cell(static_cast<std::int64_t>(row.step));
        log.cell(row.parts.classification);
        log.cell(row.parts.wca);
        log.cell(row.parts.penalty);
        log.cell(row.parts.total);
        log.cell(row.clean_acc);
        log.end_row();
    }
    log.write_file(cfg.out_dir + "/training_log.csv");

    std::string ckpt = cfg.out_dir + "/model.ckpt";
    save_checkpoint(model, ckpt);

    if (cfg.dataset.export_features) {
        std::ofstream ftr(cfg.out_dir + "/features_train.csv", std::ios::binary);
        ftr << features_csv(data.train);
        std::ofstream fte(cfg.out_dir + "/features_test.csv", std::ios::binary);
        fte << features_csv(data.test);
    }

    double test_acc = evaluate_accuracy(model, data.test,
                                        opt.noise ? ForwardMode::sample(1) : ForwardMode::deterministic(),
                                        cfg.seed ^ 0xE7a1u);
    std::cout << "trained " << dims.size() - 1 << "-layer extractor, d=" << model.feature_dim()
              << ", C=" << model.num_classes() << "\n";
    std::cout << "checkpoint: " << ckpt << "\n";
    std::cout << "test accuracy (stochastic eval): " << test_acc << "\n";
    return 0;
}

int cmd_attack(const CliArgs& args) {
    ExperimentConfig cfg = load_cfg(args);
    DatasetBundle data = build_datasets(cfg.dataset, cfg.seed);
    std::string ckpt = args.checkpoint.empty() ? cfg.out_dir + "/model.ckpt" : args.checkpoint;
    StochasticClassifier model = load_checkpoint(ckpt);
    if (model.input_dim() != data.test.dim())
        throw std::invalid_argument("attack: checkpoint input dim does not match dataset");

    std::vector<AttackSpec> attacks = cfg.attacks;
    if (attacks.empty()) attacks.push_back(AttackSpec{});

    CsvWriter report(config_hash(cfg), cfg.seed);
    report.comment("dataset=" + data.test.provenance());
    report.header({"example_id", "attack", "epsilon", "success", "margin_before", "margin_after",
                   "queries"});
    CsvWriter summary(config_hash(cfg), cfg.seed);
    summary.comment("dataset=" + data.test.provenance());
    summary.header({"attack", "epsilon", "accuracy", "success_rate", "mean_margin_before",
                    "mean_margin_after", "queries"});

    for (const AttackSpec& spec : attacks) {
        std::vector<double> eps_list{spec.epsilon};
        if (cfg.eps_sweep && (spec.kind == "fgsm" || spec.kind == "pgd" || spec.kind == "square")) {
            eps_list.clear();
            for (int n = 0; n <= 7; ++n) eps_list.push_back(std::pow(2.0, n) / 255.0);
        }
        for (double eps : eps_list) {
            PerExampleAttack fn;
            if (spec.kind == "fgsm" || spec.kind == "pgd") {
                AttackConfig acfg = white_box_config(spec, data);
                acfg.epsilon = eps;
                bool is_fgsm = spec.kind == "fgsm";
                fn = [&model, acfg, is_fgsm](const Tensor& x, int y, Rng& rng, std::uint64_t) {
                    return is_fgsm ? fgsm(model, x, y, acfg, rng) : pgd(model, x, y, acfg, rng);
                };
            } else if (spec.kind == "cw") {
                CwConfig ccfg;
                ccfg.kappa = spec.kappa;
                ccfg.c0 = spec.c0;
                ccfg.binary_steps = spec.binary_steps;
                ccfg.iters = spec.iters;
                ccfg.lr = spec.lr;
                ccfg.eot_samples = spec.eot_samples;
                ccfg.box_lo = data.box_lo;
                ccfg.box_hi = data.box_hi;
                fn = [&model, ccfg](const Tensor& x, int y, Rng& rng, std::uint64_t) {
                    return cw(model, x, y, ccfg, rng);
                };
            } else if (spec.kind == "one_pixel") {
                OnePixelConfig pcfg;
                pcfg.n_pixels = spec.n_pixels;
                pcfg.population = spec.population;
                pcfg.k_max = spec.k_max;
                pcfg.crossover = spec.crossover;
                pcfg.mutation = spec.mutation;
                pcfg.box_lo = data.box_lo;
                pcfg.box_hi = data.box_hi;
                fn = [&model, pcfg](const Tensor& x, int y, Rng& rng, std::uint64_t es) {
                    QueryFn q = make_query(model, es);
                    return one_pixel(q, x, y, pcfg, rng);
                };
            } else if (spec.kind == "square") {
                SquareConfig scfg;
                scfg.epsilon = eps;
                scfg.budget = spec.budget;
                scfg.p0 = spec.p0;
                scfg.box_lo = data.box_lo;
                scfg.box_hi = data.box_hi;
                fn = [&model, scfg](const Tensor& x, int y, Rng& rng, std::uint64_t es) {
                    QueryFn q = make_query(model, es);
                    return square_attack(q, x, y, scfg, rng);
                };
            }

            DetailedAttack det = run_attack_detailed(model, data.test, cfg.eval_n,
                                                     cfg.seed ^ fnv1a64(spec.kind), fn,
                                                     ForwardMode::sample(1));
            for (std::size_t i = 0; i < det.results.size(); ++i) {
                report.cell(static_cast<std::int64_t>(i));
                report.cell(spec.kind);
                report.cell(eps);
                report.cell(std::string(det.results[i].success ? "1" : "0"));
                report.cell(det.results[i].margin_before);
                report.cell(det.results[i].margin_after);
                report.cell(det.results[i].queries);
                report.end_row();
            }
            summary.cell(spec.kind);
            summary.cell(eps);
            summary.cell(det.summary.accuracy);
            summary.cell(det.summary.success_rate);
            summary.cell(det.summary.mean_margin_before);
            summary.cell(det.summary.mean_margin_after);
            summary.cell(det.summary.queries);
            summary.end_row();
            std::cout << spec.kind << " eps=" << eps << " accuracy=" << det.summary.accuracy
                      << " success=" << det.summary.success_rate << "\n";
        }
    }

    report.write_file(cfg.out_dir + "/attack_report.csv");
    summary.write_file(cfg.out_dir + "/attack_summary.csv");
    return 0;
}

int cmd_bound(const CliArgs& args) {
    ExperimentConfig cfg = load_cfg(args);
    DatasetBundle data = build_datasets(cfg.dataset, cfg.seed);
    if (!data.binary)
        throw std::invalid_argument("bound: binary dataset required (synth01, mnist01, or filtered)");

    BoundStudyOptions opt;
    opt.eval_n = cfg.eval_n;
    opt.train = train_options(cfg, data);
    opt.train.objective.loss = LossKind::Hinge;
    opt.feature_box = cfg.dataset.pca == 0;
    opt.box_lo = data.box_lo;
    opt.box_hi = data.box_hi;
    for (const auto& a : cfg.attacks) {
        if (a.kind == "pgd") {
            opt.pgd_steps = a.steps;
            opt.pgd_restarts = a.restarts;
            opt.eot_samples = a.eot_samples;
        }
    }

    CsvWriter csv(config_hash(cfg), cfg.seed);
    csv.comment("dataset=" + data.train.provenance());
    csv.header({"variant", "epsilon", "clean_misclass", "adv_upper", "gap_bound",
                "certified_floor", "clean_acc", "attacked_acc", "floor_satisfied"});

    SvgPlot plot(720, 480);
    double max_eps = opt.eps.back();
    plot.set_bounds(0.0, max_eps, 0.0, 1.0);

    const char* colors[2][2] = {{"#c22", "#e99"}, {"#22c", "#99e"}};
    for (int iso = 0; iso <= 1; ++iso) {
        BoundStudyResult res = bound_study(data.train, data.test,
                                           iso ? NoiseShape::Spherical : NoiseShape::Full, opt);
        std::vector<std::pair<double, double>> acc_pts, floor_pts;
        for (const auto& row : res.report.rows) {
            double slack = 3.0 * std::sqrt(0.25 / static_cast<double>(opt.eval_n));
            bool ok = row.empirical_attacked_acc >= row.certified_floor - slack;
            csv.cell(std::string(iso ? "isotropic" : "anisotropic"));
            csv.cell(row.epsilon);
            csv.cell(row.clean_misclass);
            csv.cell(row.adv_upper);
            csv.cell(row.gap);
            csv.cell(row.certified_floor);
            csv.cell(row.empirical_clean_acc);
            csv.cell(row.empirical_attacked_acc);
            csv.cell(std::string(ok ? "1" : "0"));
            csv.end_row();
            acc_pts.emplace_back(row.epsilon, row.empirical_attacked_acc);
            floor_pts.emplace_back(row.epsilon, std::max(0.0, row.certified_floor));
            std::cout << (iso ? "iso " : "aniso") << " eps=" << row.epsilon
                      << " attacked_acc=" << row.empirical_attacked_acc
                      << " floor=" << row.certified_floor << (ok ? "" : "  FLOOR VIOLATED")
                      << "\n";
        }
        plot.polyline(acc_pts, colors[iso][0], 2.0);
        plot.polyline(floor_pts, colors[iso][1], 1.5);
        std::cout << (iso ? "iso " : "aniso") << " w_sigma_w=" << res.w_sigma_w << "\n";
    }
    plot.axes("epsilon", "accuracy");
    plot.text(0.6 * max_eps, 0.98, "solid: attacked accuracy, light: certified floor");
    plot.text(0.6 * max_eps, 0.92, "red: anisotropic, blue: isotropic");

    csv.write_file(cfg.out_dir + "/bound_report.csv");
    plot.write_file(cfg.out_dir + "/bound_plot.svg");
    return 0;
}

int cmd_checklist(const CliArgs& args) {
    ExperimentConfig cfg = load_cfg(args);
    DatasetBundle data = build_datasets(cfg.dataset, cfg.seed);
    std::string ckpt = args.checkpoint.empty() ? cfg.out_dir + "/model.ckpt" : args.checkpoint;
    StochasticClassifier model = load_checkpoint(ckpt);

    ChecklistOptions opt;
    opt.seed = cfg.seed;
    opt.eval_n = cfg.eval_n;
    opt.box_lo = data.box_lo;
    opt.box_hi = data.box_hi;
    if (!cfg.attacks.empty()) {
        opt.epsilon = cfg.attacks.front().epsilon;
        opt.pgd_steps = cfg.attacks.front().steps;
        opt.eot_samples = cfg.attacks.front().eot_samples;
    }

    std::vector<CriterionResult> results = obfuscation_checklist(model, data.test, opt);

    CsvWriter csv(config_hash(cfg), cfg.seed);
    csv.header({"criterion", "name", "pass", "detail"});
    int fails = 0;
    for (const auto& r : results) {
        csv.cell(static_cast<std::int64_t>(r.id));
        csv.cell(r.name);
        csv.cell(std::string(r.pass ? "PASS" : "FAIL"));
        csv.cell(r.detail);
        csv.end_row();
        std::cout << "criterion " << r.id << " [" << (r.pass ? "PASS" : "FAIL") << "] " << r.name
                  << ": " << r.detail << "\n";
        if (!r.pass) fails++;
    }
    csv.write_file(cfg.out_dir + "/checklist_report.csv");
    return fails == 0 ? 0 : 1;
}

int cmd_contours(const CliArgs& args) {
    ExperimentConfig cfg = load_cfg(args);
    std::string ckpt = args.checkpoint.empty() ? cfg.out_dir + "/model.ckpt" : args.checkpoint;
    StochasticClassifier model = load_checkpoint(ckpt);
    ContourData data = covariance_contours(model);

    CsvWriter csv(config_hash(cfg), cfg.seed);
    csv.comment("sigma=[[" + fmt_double(data.sigma.at(0, 0)) + "," + fmt_double(data.sigma.at(0, 1)) +
                "],[" + fmt_double(data.sigma.at(1, 0)) + "," + fmt_double(data.sigma.at(1, 1)) + "]]");
    csv.comment("eigenvalues=" + fmt_double(data.eigenvalues[0]) + "," +
                fmt_double(data.eigenvalues[1]));
    for (std::size_t c = 0; c < data.weight_rays.size(); ++c)
        csv.comment("w" + std::to_string(c) + "=" + fmt_double(data.weight_rays[c].first) + "," +
                    fmt_double(data.weight_rays[c].second));
    csv.comment(data.alignment_defined
                    ? "alignment_score=" + fmt_double(data.alignment)
                    : "alignment_score=undefined (rotationally symmetric covariance)");
    // Per-class gap bounds are a heuristic diagnostic only: the gap theory is
    // binary, applied here row by row with an l-inf budget of 0.1.
    for (std::size_t c = 0; c < model.num_classes(); ++c) {
        Tensor wi = model.head.W.row(c);
        double delta = linear_delta_inf(wi, 0.1);
        try {
            csv.comment("heuristic_gap_bound_class" + std::to_string(c) + "(eps=0.1)=" +
                        fmt_double(gap_bound(wi, model.head.L, delta)));
        } catch (const std::domain_error&) {
            csv.comment("heuristic_gap_bound_class" + std::to_string(c) +
                        "(eps=0.1)=undefined (zero variance along w)");
        }
    }
    csv.header({"point_id", "x_1sigma", "y_1sigma", "x_2sigma", "y_2sigma"});
    for (std::size_t i = 0; i < data.ellipse_1sigma.size(); ++i) {
        csv.cell(static_cast<std::int64_t>(i));
        csv.cell(data.ellipse_1sigma[i].first);
        csv.cell(data.ellipse_1sigma[i].second);
        csv.cell(data.ellipse_2sigma[i].first);
        csv.cell(data.ellipse_2sigma[i].second);
        csv.end_row();
    }
    csv.write_file(cfg.out_dir + "/contours.csv");

    double extent = 1e-6;
    for (const auto& [x, y] : data.ellipse_2sigma)
        extent = std::max({extent, std::abs(x), std::abs(y)});
    for (const auto& [x, y] : data.weight_rays)
        extent = std::max({extent, std::abs(x), std::abs(y)});
    SvgPlot plot(520, 520);
    plot.set_bounds(-1.1 * extent, 1.1 * extent, -1.1 * extent, 1.1 * extent);
    plot.polyline(data.ellipse_1sigma, "#2a6", 2.0);
    plot.polyline(data.ellipse_2sigma, "#8c8", 1.5);
    for (const auto& [x, y] : data.weight_rays) plot.line(0, 0, x, y, "#c22", 2.0);
    plot.circle(0, 0, 2.0, "#000");
    plot.text(-extent, extent,
              data.alignment_defined ? "alignment=" + fmt_double(data.alignment)
                                     : "alignment undefined (isotropic)");
    plot.write_file(cfg.out_dir + "/contours.svg");

    std::cout << "sigma eigenvalues: " << data.eigenvalues[0] << ", " << data.eigenvalues[1] << "\n";
    if (data.alignment_defined)
        std::cout << "alignment score: " << data.alignment << "\n";
    else
        std::cout << "alignment score: undefined (rotationally symmetric covariance)\n";
    return 0;
}

int cmd_ablate(const CliArgs& args) {
    ExperimentConfig cfg = load_cfg(args);
    DatasetBundle data = build_datasets(cfg.dataset, cfg.seed);
    std::vector<std::size_t> dims = layer_dims_for(cfg, data);

    AblationOptions opt;
    opt.train = train_options(cfg, data);
    opt.seed = cfg.seed;
    opt.eval_n = cfg.eval_n;
    opt.box_lo = data.box_lo;
    opt.box_hi = data.box_hi;
    if (!cfg.attacks.empty()) {
        opt.epsilon = cfg.attacks.front().epsilon;
        opt.eot_samples = cfg.attacks.front().eot_samples;
    }

    std::vector<AblationRow> rows = run_ablation(data.train, data.test, dims, data.num_classes, opt);

    CsvWriter csv(config_hash(cfg), cfg.seed);
    csv.comment("dataset=" + data.train.provenance() + " epsilon=" + fmt_double(opt.epsilon));
    csv.header({"variant", "clean", "fgsm", "pgd"});
    for (const auto& r : rows) {
        csv.cell(r.name);
        csv.cell(r.clean);
        csv.cell(r.fgsm);
        csv.cell(r.pgd);
        csv.end_row();
        std::cout << r.name << " clean=" << r.clean << " fgsm=" << r.fgsm << " pgd=" << r.pgd
                  << "\n";
    }
    csv.write_file(cfg.out_dir + "/ablation.csv");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale laboratory for stochastic classifiers with weight-covariance aligned "
                 "anisotropic noise"};
    app.require_subcommand(1);

    CliArgs args;
    std::string mode;
    for (const char* name : {"train", "attack", "bound", "checklist", "contours", "ablate"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config_path, "JSON config file");
        sub->add_option("--seed", args.seed, "override config seed")
            ->each([&](const std::string&) { args.have_seed = true; });
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--data", args.data_dir, "IDX dataset root (or $WCA_DATA_DIR)");
        sub->add_option("--checkpoint", args.checkpoint, "model checkpoint path");
        sub->callback([&mode, name]() { mode = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (mode == "train") return cmd_train(args);
        if (mode == "attack") return cmd_attack(args);
        if (mode == "bound") return cmd_bound(args);
        if (mode == "checklist") return cmd_checklist(args);
        if (mode == "contours") return cmd_contours(args);
        if (mode == "ablate") return cmd_ablate(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
