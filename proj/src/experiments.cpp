#include "wca/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wca/parallel.hpp"

namespace wca {

namespace {

LabeledDataset head_subset(const LabeledDataset& ds, std::size_t n) {
    n = std::min(n, ds.size());
    LabeledDataset out;
    out.features = Tensor({n, ds.dim()});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ds.dim(); ++j) out.features.at(i, j) = ds.features.at(i, j);
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<long>(n));
    out.name = ds.name;
    out.preprocessing = ds.preprocessing;
    return out;
}

Tensor gather_batch(const LabeledDataset& ds, const std::vector<std::size_t>& idx,
                    std::size_t lo, std::size_t hi, std::vector<int>& labels) {
    std::size_t bs = hi - lo, dim = ds.dim();
    Tensor x({bs, dim});
    labels.clear();
    labels.reserve(bs);
    for (std::size_t r = 0; r < bs; ++r) {
        std::size_t src = idx[lo + r];
        for (std::size_t j = 0; j < dim; ++j) x.at(r, j) = ds.features.at(src, j);
        labels.push_back(ds.labels[src]);
    }
    return x;
}

double train_set_accuracy(const StochasticClassifier& model, const LabeledDataset& ds) {
    Rng unused(0);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Tensor logits = forward(model, ds.example(i), ForwardMode::deterministic(), unused);
        if (predict_label(logits) == ds.labels[i]) hits++;
    }
    return ds.size() ? static_cast<double>(hits) / static_cast<double>(ds.size()) : 0.0;
}

}  // namespace

TrainResult train(StochasticClassifier& model, const LabeledDataset& ds, const TrainOptions& opt) {
    if (ds.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (opt.batch == 0) throw std::invalid_argument("train: batch must be >= 1");
    if (opt.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

    std::size_t n = ds.size();
    std::size_t steps_per_epoch = (n + opt.batch - 1) / opt.batch;
    int log_every = opt.log_every > 0 ? opt.log_every : static_cast<int>(steps_per_epoch);

    Rng shuffle_rng = Rng::stream(opt.seed, 0x5u);
    Rng noise_rng = Rng::stream(opt.seed, 0x6u);
    std::uint64_t adv_counter = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    long step = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = shuffle_rng.index(i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t lo = 0; lo < n; lo += opt.batch) {
            std::size_t hi = std::min(n, lo + opt.batch);
            std::vector<int> labels;
            Tensor x = gather_batch(ds, order, lo, hi, labels);

            if (opt.adv != AdvTraining::None) {
                for (std::size_t r = 0; r < x.rows(); ++r) {
                    bool replace = opt.adv == AdvTraining::Pure || (r % 2 == 0);
                    if (!replace) continue;
                    Rng arng = Rng::stream(opt.seed ^ 0xADu, adv_counter + r);
                    AttackResult a = pgd(model, x.row(r), labels[r], opt.adv_attack, arng);
                    for (std::size_t j = 0; j < x.cols(); ++j) x.at(r, j) = a.x_adv[j];
                }
                adv_counter += x.rows();
            }

            Tensor u;
            const Tensor* u_ptr = nullptr;
            if (opt.noise) {
                u = gaussian_matrix(noise_rng, x.rows(), model.feature_dim());
                u_ptr = &u;
            }

            LossGraph g = build_loss(model, x, labels, opt.objective, u_ptr);
            g.tape.backward(g.loss);
            ParamGrads grads = collect_grads(g.tape, g.nodes);
            if (opt.use_constraint)
                projected_update(model, grads, opt.lr, opt.projection, opt.mask);
            else
                sgd_step(model, grads, opt.lr, opt.mask);

            ++step;
            bool last = epoch + 1 == opt.epochs && hi == n;
            if (step % log_every == 0 || last) {
                TrainLogRow row;
                row.step = step;
                row.parts = g.parts;
                row.clean_acc = train_set_accuracy(model, ds);
                result.log.push_back(row);
            }
        }
    }
    return result;
}

GridChoice grid_search(const LabeledDataset& ds, const std::vector<std::size_t>& layer_dims,
                       std::size_t num_classes, const TrainOptions& base, NoiseShape shape) {
    LabeledDataset tr, val;
    split_train_validation(ds, tr, val);

    const double grid[] = {1e-1, 1e-2, 1e-3, 1e-4};
    GridChoice best;
    bool have = false;
    for (double lr : grid) {
        for (double lambda : grid) {
            TrainOptions opt = base;
            opt.lr = lr;
            opt.objective.lambda = lambda;
            Rng init = Rng::stream(base.seed, 0x17u);
            StochasticClassifier model =
                make_model(layer_dims, num_classes, init, 0.1, shape);
            train(model, tr, opt);
            double acc = evaluate_accuracy(model, val, ForwardMode::sample(1), base.seed ^ 0x9e1u);
            if (!have || acc > best.val_acc) {
                best = {lr, lambda, acc};
                have = true;
            }
        }
    }
    return best;
}

double evaluate_accuracy(const StochasticClassifier& model, const LabeledDataset& ds,
                         const ForwardMode& mode, std::uint64_t seed) {
    std::size_t n = ds.size();
    if (n == 0) return 0.0;
    std::vector<char> hit(n, 0);
    parallel_for(n, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, i);
        Tensor logits = forward(model, ds.example(i), mode, rng);
        hit[i] = predict_label(logits) == ds.labels[i] ? 1 : 0;
    });
    std::size_t hits = 0;
    for (char h : hit) hits += h;
    return static_cast<double>(hits) / static_cast<double>(n);
}

AttackOutcome run_attack(const StochasticClassifier& model, const LabeledDataset& ds,
                         std::size_t eval_n, std::uint64_t seed, const PerExampleAttack& attack) {
    return run_attack(model, ds, eval_n, seed, attack, ForwardMode::sample(1));
}

AttackOutcome run_attack(const StochasticClassifier& model, const LabeledDataset& ds,
                         std::size_t eval_n, std::uint64_t seed, const PerExampleAttack& attack,
                         const ForwardMode& eval_mode) {
    return run_attack_detailed(model, ds, eval_n, seed, attack, eval_mode).summary;
}

DetailedAttack run_attack_detailed(const StochasticClassifier& model, const LabeledDataset& ds,
                                   std::size_t eval_n, std::uint64_t seed,
                                   const PerExampleAttack& attack, const ForwardMode& eval_mode) {
    std::size_t n = std::min(eval_n, ds.size());
    if (n == 0) throw std::invalid_argument("run_attack: empty evaluation set");

    DetailedAttack out;
    out.results.resize(n);
    out.correct.assign(n, 0);
    parallel_for(n, [&](std::size_t i) {
        Rng arng = Rng::stream(seed, 2 * i);
        out.results[i] = attack(ds.example(i), ds.labels[i], arng, seed ^ (0xE0ull + i));
        Rng erng = Rng::stream(seed, 2 * i + 1);
        Tensor logits = forward(model, out.results[i].x_adv, eval_mode, erng);
        out.correct[i] = predict_label(logits) == ds.labels[i] ? 1 : 0;
    });

    for (std::size_t i = 0; i < n; ++i) {
        out.summary.accuracy += out.correct[i];
        out.summary.success_rate += out.results[i].success ? 1.0 : 0.0;
        out.summary.mean_margin_before += out.results[i].margin_before;
        out.summary.mean_margin_after += out.results[i].margin_after;
        out.summary.queries += out.results[i].queries;
    }
    auto dn = static_cast<double>(n);
    out.summary.accuracy /= dn;
    out.summary.success_rate /= dn;
    out.summary.mean_margin_before /= dn;
    out.summary.mean_margin_after /= dn;
    return out;
}

AttackOutcome run_fgsm(const StochasticClassifier& model, const LabeledDataset& ds,
                       std::size_t eval_n, std::uint64_t seed, const AttackConfig& cfg) {
    return run_attack(model, ds, eval_n, seed,
                      [&model, cfg](const Tensor& x, int y, Rng& rng, std::uint64_t) {
                          return fgsm(model, x, y, cfg, rng);
                      });
}

AttackOutcome run_pgd(const StochasticClassifier& model, const LabeledDataset& ds,
                      std::size_t eval_n, std::uint64_t seed, const AttackConfig& cfg) {
    return run_attack(model, ds, eval_n, seed,
                      [&model, cfg](const Tensor& x, int y, Rng& rng, std::uint64_t) {
                          return pgd(model, x, y, cfg, rng);
                      });
}

BoundStudyResult bound_study(const LabeledDataset& train_ds, const LabeledDataset& test_ds,
                             NoiseShape shape, const BoundStudyOptions& opt) {
    for (int y : train_ds.labels)
        if (y != 1 && y != -1)
            throw std::invalid_argument("bound_study: binary {-1,+1} labels required");

    BoundStudyResult out;
    Rng init = Rng::stream(opt.train.seed, 0x1717u);
    out.model = make_model({train_ds.dim()}, 1, init, 0.1, shape);

    TrainOptions topt = opt.train;
    topt.objective.loss = LossKind::Hinge;
    train(out.model, train_ds, topt);

    const Tensor w = out.model.head.W.row(0);
    const double b = out.model.head.b[0];
    const Tensor& l = out.model.head.L;
    {
        Tensor ltw = matvec(transpose(l), w);
        out.w_sigma_w = dot(ltw, ltw);
    }

    LabeledDataset eval = head_subset(test_ds, opt.eval_n);
    double clean_acc = evaluate_accuracy(out.model, eval, ForwardMode::sample(1), opt.train.seed ^ 0xC1u);

    double box_lo = opt.feature_box ? opt.box_lo : -1e30;
    double box_hi = opt.feature_box ? opt.box_hi : 1e30;

    for (double eps : opt.eps) {
        BoundRow row;
        row.epsilon = eps;
        double delta = linear_delta_inf(w, eps);
        for (std::size_t i = 0; i < eval.size(); ++i) {
            Tensor fx = eval.example(i);
            row.clean_misclass += clean_misclass_prob(w, b, l, fx, eval.labels[i]);
            row.adv_upper += adv_misclass_upper(w, b, l, fx, eval.labels[i], delta);
        }
        auto dn = static_cast<double>(eval.size());
        row.clean_misclass /= dn;
        row.adv_upper /= dn;
        row.gap = gap_bound(w, l, delta);
        row.certified_floor = 1.0 - row.clean_misclass - row.gap;
        row.empirical_clean_acc = clean_acc;

        AttackConfig acfg;
        acfg.epsilon = eps;
        acfg.norm = NormKind::Linf;
        acfg.steps = opt.pgd_steps;
        acfg.restarts = opt.pgd_restarts;
        acfg.eot_samples = opt.eot_samples;
        acfg.box_lo = box_lo;
        acfg.box_hi = box_hi;
        AttackOutcome pg = run_pgd(out.model, eval, eval.size(), opt.train.seed ^ 0xA77u, acfg);
        row.empirical_attacked_acc = pg.accuracy;

        out.report.rows.push_back(row);
    }
    return out;
}

std::vector<CriterionResult> obfuscation_checklist(const StochasticClassifier& model,
                                                   const LabeledDataset& test_ds,
                                                   const ChecklistOptions& opt) {
    LabeledDataset eval = head_subset(test_ds, opt.eval_n);
    std::vector<CriterionResult> out;
    char buf[256];

    AttackConfig base;
    base.epsilon = opt.epsilon;
    base.norm = NormKind::Linf;
    base.steps = opt.pgd_steps;
    base.eot_samples = opt.eot_samples;
    base.box_lo = opt.box_lo;
    base.box_hi = opt.box_hi;

    AttackOutcome fg = run_fgsm(model, eval, eval.size(), opt.seed ^ 0x1u, base);
    AttackOutcome pg = run_pgd(model, eval, eval.size(), opt.seed ^ 0x2u, base);

    // 1. One-step attacks perform better than iterative attacks -> refuted
    //    when PGD succeeds at least as often as FGSM.
    {
        bool pass = pg.success_rate >= fg.success_rate - 1e-12;
        std::snprintf(buf, sizeof(buf), "pgd_success=%.4f fgsm_success=%.4f",
                      pg.success_rate, fg.success_rate);
        out.push_back({1, "iterative >= one-step", pass, buf});
    }

    // 2. Black-box attacks perform better than white-box -> refuted when the
    //    one-pixel attack succeeds no more often than PGD.
    {
        OnePixelConfig pcfg;
        pcfg.box_lo = opt.box_lo;
        pcfg.box_hi = opt.box_hi;
        AttackOutcome px = run_attack(
            model, eval, eval.size(), opt.seed ^ 0x3u,
            [&model, pcfg](const Tensor& x, int y, Rng& rng, std::uint64_t example_seed) {
                QueryFn q = make_query(model, example_seed);
                return one_pixel(q, x, y, pcfg, rng);
            });
        bool pass = px.success_rate <= pg.success_rate + 1e-12;
        std::snprintf(buf, sizeof(buf), "one_pixel_success=%.4f pgd_success=%.4f",
                      px.success_rate, pg.success_rate);
        out.push_back({2, "black-box <= white-box", pass, buf});
    }

    // 3. Unbounded attacks do not reach 100% success -> refuted when PGD with
    //    the full box as budget drives accuracy to exactly zero.
    {
        AttackConfig unb = base;
        unb.epsilon = opt.box_hi - opt.box_lo;
        unb.steps = 20;
        unb.restarts = 1;
        AttackOutcome res = run_pgd(model, eval, eval.size(), opt.seed ^ 0x4u, unb);
        bool pass = res.accuracy == 0.0;
        std::snprintf(buf, sizeof(buf), "unbounded_pgd_accuracy=%.4f (epsilon=%.3f, k=20)",
                      res.accuracy, unb.epsilon);
        out.push_back({3, "unbounded attack reaches 0% accuracy", pass, buf});
    }

    // 4. Random sampling finds adversarial examples (that gradients miss) ->
    //    refuted when random in-ball sampling breaks few PGD survivors.
    {
        std::vector<AttackResult> pgd_results(eval.size());
        parallel_for(eval.size(), [&](std::size_t i) {
            Rng arng = Rng::stream(opt.seed ^ 0x2u, 2 * i);
            pgd_results[i] = pgd(model, eval.example(i), eval.labels[i], base, arng);
        });
        std::vector<char> extra(eval.size(), 0);
        std::size_t survivors = 0;
        for (std::size_t i = 0; i < eval.size(); ++i)
            if (!pgd_results[i].success) survivors++;
        parallel_for(eval.size(), [&](std::size_t i) {
            if (pgd_results[i].success) return;
            Rng rng = Rng::stream(opt.seed ^ 0x5u, i);
            Tensor x = eval.example(i);
            for (int s = 0; s < opt.random_samples; ++s) {
                Tensor xp = x;
                for (std::size_t j = 0; j < xp.size(); ++j)
                    xp[j] = std::clamp(xp[j] + rng.uniform(-opt.epsilon, opt.epsilon),
                                       opt.box_lo, opt.box_hi);
                Tensor logits = forward(model, xp, ForwardMode::sample(1), rng);
                if (predict_label(logits) != eval.labels[i]) {
                    extra[i] = 1;
                    break;
                }
            }
        });
        std::size_t broken = 0;
        for (char e : extra) broken += e;
        double rate = survivors ? static_cast<double>(broken) / static_cast<double>(survivors) : 0.0;
        bool pass = rate <= opt.extra_break_threshold;
        std::snprintf(buf, sizeof(buf),
                      "random_extra_break_rate=%.4f over %zu pgd survivors (threshold %.2f)",
                      rate, survivors, opt.extra_break_threshold);
        out.push_back({4, "random sampling finds few extra adversarials", pass, buf});
    }

    // 5. Increasing the distortion bound does not increase success -> refuted
    //    when success is monotone non-decreasing over the epsilon grid.
    {
        bool pass = true;
        std::string detail = "success:";
        double prev = -1.0;
        for (double eps : opt.eps_grid) {
            AttackConfig cfg = base;
            cfg.epsilon = eps;
            AttackOutcome res = run_pgd(model, eval, eval.size(), opt.seed ^ 0x6u, cfg);
            std::snprintf(buf, sizeof(buf), " eps=%.3g->%.4f", eps, res.success_rate);
            detail += buf;
            if (prev >= 0.0 && res.success_rate < prev - 0.02) pass = false;
            prev = std::max(prev, res.success_rate);
        }
        out.push_back({5, "success increases with distortion bound", pass, detail});
    }

    return out;
}

double alignment_score(const Tensor& w, const Tensor& l) {
    EigResult e = sym_eig(matmul_nt(l, l));
    std::size_t d = l.rows();
    Tensor top({d});
    for (std::size_t i = 0; i < d; ++i) top[i] = e.vectors.at(i, 0);
    double best = 0.0;
    for (std::size_t c = 0; c < w.rows(); ++c) {
        Tensor wi = w.row(c);
        double n2 = dot(wi, wi);
        if (n2 <= 0.0) continue;
        double c2 = dot(wi, top);
        best = std::max(best, c2 * c2 / n2);
    }
    return best;
}

ContourData covariance_contours(const StochasticClassifier& model) {
    if (model.feature_dim() != 2)
        throw std::invalid_argument("covariance_contours: 2-d bottleneck required");

    ContourData out;
    out.sigma = model.head.covariance();
    EigResult e = sym_eig(out.sigma);
    out.eigenvalues = e.values;
    out.eigenvectors = e.vectors;

    double s1 = std::sqrt(std::max(0.0, e.values[0]));
    double s2 = std::sqrt(std::max(0.0, e.values[1]));
    const int steps = 64;
    for (int k = 1; k <= 2; ++k) {
        auto& ring = k == 1 ? out.ellipse_1sigma : out.ellipse_2sigma;
        for (int t = 0; t <= steps; ++t) {
            double th = 2.0 * M_PI * t / steps;
            double a = k * s1 * std::cos(th), b2 = k * s2 * std::sin(th);
            ring.emplace_back(a * e.vectors.at(0, 0) + b2 * e.vectors.at(0, 1),
                              a * e.vectors.at(1, 0) + b2 * e.vectors.at(1, 1));
        }
    }
    for (std::size_t c = 0; c < model.num_classes(); ++c)
        out.weight_rays.emplace_back(model.head.W.at(c, 0), model.head.W.at(c, 1));

    double gap = e.values[0] - e.values[1];
    out.alignment_defined = gap > 1e-9 * std::max(1e-30, std::abs(e.values[0]));
    out.alignment = alignment_score(model.head.W, model.head.L);
    return out;
}

LabeledDataset make_unit_blobs(Rng& rng, std::size_t n_per_class, double spread) {
    Tensor means = Tensor::mat(2, 2, {0.28, 0.34, 0.72, 0.66});
    Tensor cov = scale(identity(2), spread * spread);
    LabeledDataset ds = make_blobs(rng, n_per_class, means, {cov, cov});
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        ds.features[i] = std::clamp(ds.features[i], 0.0, 1.0);
    ds.name = "unit_blobs";
    ds.preprocessing.push_back("clip[0,1]");
    return ds;
}

LabeledDataset make_bound_blobs(Rng& rng, std::size_t n_per_class) {
    Tensor means = Tensor::mat(2, 2, {1.8, 1.8, 4.2, 4.2});
    // Long axis along (1, -1), short along the separating (1, 1) direction.
    double a = 1.1, b = 0.18;
    double vxx = 0.5 * (a * a + b * b), vxy = 0.5 * (b * b - a * a);
    Tensor cov = Tensor::mat(2, 2, {vxx, vxy, vxy, vxx});
    LabeledDataset ds = make_blobs(rng, n_per_class, means, {cov, cov});
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        ds.features[i] = std::clamp(ds.features[i], 0.0, 6.0);
    ds.name = "bound_blobs";
    ds.preprocessing.push_back("clip[0,6]");
    return ds;
}

std::vector<AblationRow> run_ablation(const LabeledDataset& train_ds, const LabeledDataset& test_ds,
                                      const std::vector<std::size_t>& layer_dims,
                                      std::size_t num_classes, const AblationOptions& opt) {
    std::vector<AblationRow> rows;

    AttackConfig atk;
    atk.epsilon = opt.epsilon;
    atk.norm = NormKind::Linf;
    atk.steps = 25;  // k * alpha covers the ball from any random init
    atk.eot_samples = opt.eot_samples;
    atk.box_lo = opt.box_lo;
    atk.box_hi = opt.box_hi;

    auto eval_variant = [&](const std::string& name, const StochasticClassifier& model,
                            const ForwardMode& mode, int eot) {
        AblationRow row;
        row.name = name;
        row.clean = evaluate_accuracy(model, head_subset(test_ds, opt.eval_n), mode, opt.seed ^ 0xC1u);
        AttackConfig cfg = atk;
        cfg.eot_samples = eot;
        AttackOutcome fg = run_attack(
            model, test_ds, opt.eval_n, opt.seed ^ 0xF6u,
            [&model, cfg](const Tensor& x, int y, Rng& rng, std::uint64_t) {
                return fgsm(model, x, y, cfg, rng);
            },
            mode);
        AttackOutcome pg = run_attack(
            model, test_ds, opt.eval_n, opt.seed ^ 0x96du,
            [&model, cfg](const Tensor& x, int y, Rng& rng, std::uint64_t) {
                return pgd(model, x, y, cfg, rng);
            },
            mode);
        row.fgsm = fg.accuracy;
        row.pgd = pg.accuracy;
        rows.push_back(row);
    };

    auto fresh_model = [&](double l_init, NoiseShape shape) {
        Rng init = Rng::stream(opt.seed, 0x31u);
        return make_model(layer_dims, num_classes, init, l_init, shape);
    };

    // No defense: deterministic training, no alignment term, zero noise.
    StochasticClassifier baseline = fresh_model(0.0, NoiseShape::Full);
    {
        TrainOptions topt = opt.train;
        topt.noise = false;
        topt.objective.wca_enabled = false;
        train(baseline, train_ds, topt);
        eval_variant("no_defense", baseline, ForwardMode::deterministic(), opt.eot_samples);
    }

    // Penalty-regularized WCA (the default model).
    StochasticClassifier penalty_model = fresh_model(0.1, NoiseShape::Full);
    {
        TrainOptions topt = opt.train;
        train(penalty_model, train_ds, topt);
        eval_variant("wca_penalty", penalty_model, ForwardMode::sample(1), opt.eot_samples);
    }

    // Constraint-regularized WCA (projected subgradient, no penalty term).
    {
        StochasticClassifier model = fresh_model(0.1, NoiseShape::Full);
        TrainOptions topt = opt.train;
        topt.use_constraint = true;
        topt.objective.lambda = 0.0;
        train(model, train_ds, topt);
        eval_variant("wca_constraint", model, ForwardMode::sample(1), opt.eot_samples);
    }

    // E1: attack without EoT (single gradient sample per update).
    eval_variant("e1_attack_without_eot", penalty_model, ForwardMode::sample(1), 1);

    // E2: average multiple noise samples at test time.
    eval_variant("e2_average_logits_n10", penalty_model, ForwardMode::sample(10), opt.eot_samples);

    // E3: train the model deterministically, then the noise alone.
    {
        StochasticClassifier model = baseline;
        model.head.L = scale(identity(model.feature_dim()), 0.1);
        TrainOptions topt = opt.train;
        topt.mask = TrainMask{false, false, true};
        train(model, train_ds, topt);
        eval_variant("e3_noise_trained_independently", model, ForwardMode::sample(1),
                     opt.eot_samples);
    }

    // Adversarial training variants of the WCA model.
    {
        AttackConfig adv = atk;
        adv.eot_samples = 1;  // cheap crafting during training
        adv.steps = 10;

        StochasticClassifier model = fresh_model(0.1, NoiseShape::Full);
        TrainOptions topt = opt.train;
        topt.adv = AdvTraining::Pure;
        topt.adv_attack = adv;
        train(model, train_ds, topt);
        eval_variant("wca_at", model, ForwardMode::sample(1), opt.eot_samples);

        StochasticClassifier model2 = fresh_model(0.1, NoiseShape::Full);
        TrainOptions topt2 = opt.train;
        topt2.adv = AdvTraining::Mixed;
        topt2.adv_attack = adv;
        train(model2, train_ds, topt2);
        eval_variant("wca_ct_at", model2, ForwardMode::sample(1), opt.eot_samples);
    }

    return rows;
}

}  // namespace wca
