#include "wca/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "wca/tape.hpp"

namespace wca {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Tensor clip_box(Tensor x, double lo, double hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo, hi);
    return x;
}

double det_margin(const StochasticClassifier& model, const Tensor& x, int y) {
    Rng unused(0);
    return logits_margin(forward(model, x, ForwardMode::deterministic(), unused), y);
}

Tensor as_row_batch(const Tensor& x, std::size_t n) {
    Tensor out({n, x.size()});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.size(); ++j) out.at(i, j) = x[j];
    return out;
}

}  // namespace

Tensor eot_gradient(const StochasticClassifier& model, const Tensor& x, int y, int n, Rng& rng,
                    AttackLoss loss, bool targeted) {
    if (n < 1) throw std::invalid_argument("eot_gradient: n must be >= 1");
    if (x.rank() != 1) throw std::invalid_argument("eot_gradient: rank-1 input required");
    if (targeted && loss == AttackLoss::Hinge)
        throw std::invalid_argument("eot_gradient: targeted hinge objective is not defined");

    auto nn = static_cast<std::size_t>(n);
    Tensor xb = as_row_batch(x, nn);
    Tensor u = gaussian_matrix(rng, nn, model.feature_dim());

    Tape tape;
    GraphNodes g = build_forward(tape, model, xb, &u);
    std::vector<int> labels(nn, y);

    // Per-row objective the attacker ascends; mean over rows is the EoT value.
    NodeId obj;
    switch (loss) {
        case AttackLoss::Margin:
            obj = tape.scale(tape.margin(g.logits, labels), targeted ? 1.0 : -1.0);
            break;
        case AttackLoss::Xent:
            obj = tape.scale(tape.softmax_xent(g.logits, labels), targeted ? -1.0 : 1.0);
            break;
        case AttackLoss::Hinge:
            obj = tape.hinge(tape.margin(g.logits, labels));
            break;
    }
    NodeId total = tape.mean(obj);
    tape.backward(total);

    // mean(...) already carries the 1/n, so summing the replicated-row grads
    // gives the averaged input gradient.
    const Tensor& gx = tape.grad(g.x);
    Tensor out({x.size()});
    for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t j = 0; j < x.size(); ++j) out[j] += gx.at(i, j);
    return out;
}

AttackResult fgsm(const StochasticClassifier& model, const Tensor& x, int y,
                  const AttackConfig& cfg, Rng& rng) {
    if (cfg.epsilon < 0.0) throw std::invalid_argument("fgsm: epsilon must be >= 0");
    AttackResult res;
    res.margin_before = det_margin(model, x, y);

    Tensor g = eot_gradient(model, x, y, cfg.eot_samples, rng, cfg.loss, cfg.targeted);
    Tensor xa = x;
    for (std::size_t i = 0; i < xa.size(); ++i) xa[i] += cfg.epsilon * sign(g[i]);
    res.x_adv = clip_box(std::move(xa), cfg.box_lo, cfg.box_hi);
    res.queries = cfg.eot_samples;
    res.margin_after = det_margin(model, res.x_adv, y);
    res.success = cfg.targeted ? res.margin_after > 0.0 : res.margin_after < 0.0;
    return res;
}

AttackResult pgd(const StochasticClassifier& model, const Tensor& x, int y,
                 const AttackConfig& cfg, Rng& rng) {
    if (cfg.steps < 1) throw std::invalid_argument("pgd: steps must be >= 1");
    if (cfg.restarts < 1) throw std::invalid_argument("pgd: restarts must be >= 1");
    if (cfg.norm == NormKind::L0) throw std::invalid_argument("pgd: l0 norm unsupported");

    double alpha = cfg.step_size > 0.0 ? cfg.step_size : cfg.epsilon / 10.0;
    std::size_t dim = x.size();

    AttackResult res;
    res.margin_before = det_margin(model, x, y);
    res.x_adv = x;
    bool have = false;
    double best = 0.0;  // worst margin seen (untargeted), best target margin (targeted)

    for (int r = 0; r < cfg.restarts; ++r) {
        Tensor delta({dim});
        if (cfg.random_init) {
            if (cfg.norm == NormKind::Linf) {
                for (std::size_t i = 0; i < dim; ++i)
                    delta[i] = rng.uniform(-cfg.epsilon, cfg.epsilon);
            } else {
                // Uniform in the l2 ball: gaussian direction, radius ~ U^(1/d).
                Tensor dir = gaussian(rng, dim);
                double n2 = norm2(dir);
                double rad = cfg.epsilon *
                             std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
                if (n2 > 0.0)
                    for (std::size_t i = 0; i < dim; ++i) delta[i] = dir[i] / n2 * rad;
            }
        }
        Tensor xa = clip_box(add(x, delta), cfg.box_lo, cfg.box_hi);

        for (int k = 0; k < cfg.steps; ++k) {
            Tensor g = eot_gradient(model, xa, y, cfg.eot_samples, rng, cfg.loss, cfg.targeted);
            res.queries += cfg.eot_samples;
            if (cfg.norm == NormKind::Linf) {
                for (std::size_t i = 0; i < dim; ++i) xa[i] += alpha * sign(g[i]);
            } else {
                double n2 = norm2(g);
                if (n2 > 0.0)
                    for (std::size_t i = 0; i < dim; ++i) xa[i] += alpha * g[i] / n2;
            }
            // Project back into the epsilon ball, then the box.
            if (cfg.norm == NormKind::Linf) {
                for (std::size_t i = 0; i < dim; ++i)
                    xa[i] = std::clamp(xa[i], x[i] - cfg.epsilon, x[i] + cfg.epsilon);
            } else {
                Tensor d2 = sub(xa, x);
                double n2 = norm2(d2);
                if (n2 > cfg.epsilon && n2 > 0.0) {
                    for (std::size_t i = 0; i < dim; ++i) xa[i] = x[i] + d2[i] * cfg.epsilon / n2;
                }
            }
            xa = clip_box(std::move(xa), cfg.box_lo, cfg.box_hi);
        }

        double m = det_margin(model, xa, y);
        bool better = !have || (cfg.targeted ? m > best : m < best);
        if (better) {
            best = m;
            res.x_adv = xa;
            have = true;
        }
    }

    res.margin_after = best;
    res.success = cfg.targeted ? best > 0.0 : best < 0.0;
    return res;
}

AttackResult cw(const StochasticClassifier& model, const Tensor& x, int y, const CwConfig& cfg,
                Rng& rng) {
    if (cfg.binary_steps < 1 || cfg.iters < 1)
        throw std::invalid_argument("cw: binary_steps and iters must be >= 1");
    const double lo = cfg.box_lo, hi = cfg.box_hi, span = hi - lo;
    if (span <= 0.0) throw std::invalid_argument("cw: empty box");
    std::size_t dim = x.size();

    // v-space coordinates with x = lo + span * (tanh(v) + 1) / 2.
    Tensor v0({dim});
    for (std::size_t i = 0; i < dim; ++i) {
        double t = std::clamp((x[i] - lo) / span * 2.0 - 1.0, -1.0 + 1e-12, 1.0 - 1e-12);
        v0[i] = std::atanh(t);
    }
    auto to_x = [&](const Tensor& v) {
        Tensor out({dim});
        for (std::size_t i = 0; i < dim; ++i) out[i] = lo + span * (std::tanh(v[i]) + 1.0) / 2.0;
        return out;
    };

    AttackResult res;
    res.margin_before = det_margin(model, x, y);
    res.x_adv = x;

    double c_lo = 0.0, c_hi = -1.0, c = cfg.c0;  // c_hi < 0 means no upper bracket yet
    double best_norm = -1.0;

    for (int bs = 0; bs < cfg.binary_steps; ++bs) {
        Tensor v = v0;
        Tensor adam_m({dim}), adam_v({dim});
        bool round_success = false;
        for (int it = 0; it < cfg.iters; ++it) {
            Tensor xi = to_x(v);
            double m = det_margin(model, xi, y);
            Tensor delta = sub(xi, x);
            double dn = norm2(delta);
            if (m < 0.0) {
                round_success = true;
                if (best_norm < 0.0 || dn < best_norm) {
                    best_norm = dn;
                    res.x_adv = xi;
                }
            }

            // d/dx of |delta|^2 always applies; the margin term drops out when
            // the max() clamps at -kappa.
            Tensor gx = scale(delta, 2.0);
            if (m > -cfg.kappa) {
                Tensor gm = eot_gradient(model, xi, y, cfg.eot_samples, rng, AttackLoss::Margin,
                                         false);
                res.queries += cfg.eot_samples;
                // ascend objective was -margin; the objective here adds c * margin
                for (std::size_t i = 0; i < dim; ++i) gx[i] -= c * gm[i];
            }
            // Adam on the tanh-space variable; plain steps are too brittle to
            // the box span driven through the chain rule.
            for (std::size_t i = 0; i < dim; ++i) {
                double th = std::tanh(v[i]);
                double gv = gx[i] * span * 0.5 * (1.0 - th * th);
                adam_m[i] = 0.9 * adam_m[i] + 0.1 * gv;
                adam_v[i] = 0.999 * adam_v[i] + 0.001 * gv * gv;
                double mh = adam_m[i] / (1.0 - std::pow(0.9, it + 1));
                double vh = adam_v[i] / (1.0 - std::pow(0.999, it + 1));
                v[i] -= cfg.lr * mh / (std::sqrt(vh) + 1e-12);
            }
        }
        {
            Tensor xi = to_x(v);
            double m = det_margin(model, xi, y);
            double dn = norm2(sub(xi, x));
            if (m < 0.0) {
                round_success = true;
                if (best_norm < 0.0 || dn < best_norm) {
                    best_norm = dn;
                    res.x_adv = xi;
                }
            }
        }
        if (round_success) {
            c_hi = c;
        } else {
            c_lo = c;
        }
        c = c_hi > 0.0 ? 0.5 * (c_lo + c_hi) : c * 10.0;
    }

    res.success = best_norm >= 0.0;
    res.margin_after = det_margin(model, res.x_adv, y);
    return res;
}

QueryFn make_query(const StochasticClassifier& model, std::uint64_t seed, ForwardMode mode) {
    auto rng = std::make_shared<Rng>(Rng::stream(seed, 0x71b9));
    return [model, rng, mode](const Tensor& x) { return forward(model, x, mode, *rng); };
}

AttackResult one_pixel(const QueryFn& query, const Tensor& x, int y, const OnePixelConfig& cfg,
                       Rng& rng) {
    if (cfg.n_pixels < 1) throw std::invalid_argument("one_pixel: pixel budget must be >= 1");
    if (cfg.population < 4) throw std::invalid_argument("one_pixel: population must be >= 4");
    std::size_t dim = x.size();
    std::size_t genes = 2 * static_cast<std::size_t>(cfg.n_pixels);

    AttackResult res;
    {
        Tensor logits = query(x);
        res.queries++;
        res.margin_before = logits_margin(logits, y);
    }

    auto apply = [&](const std::vector<double>& cand) {
        Tensor out = x;
        for (int p = 0; p < cfg.n_pixels; ++p) {
            auto idx = static_cast<std::size_t>(cand[2 * p]);
            out[std::min(idx, dim - 1)] = cand[2 * p + 1];
        }
        return out;
    };
    // Energy: confidence assigned to the true class (softmax for multi-class
    // heads, logistic of the margin for a single-output head).
    auto energy_of = [&](const Tensor& logits) {
        if (logits.size() == 1) {
            double m = logits_margin(logits, y);
            return 1.0 / (1.0 + std::exp(-m));
        }
        auto yy = static_cast<std::size_t>(y);
        double mx = logits[0];
        for (std::size_t j = 1; j < logits.size(); ++j) mx = std::max(mx, logits[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < logits.size(); ++j) denom += std::exp(logits[j] - mx);
        return std::exp(logits[yy] - mx) / denom;
    };

    std::vector<std::vector<double>> pop(cfg.population, std::vector<double>(genes));
    std::vector<double> energy(cfg.population);
    std::vector<double> margins(cfg.population);
    for (std::size_t i = 0; i < cfg.population; ++i) {
        for (int p = 0; p < cfg.n_pixels; ++p) {
            pop[i][2 * p] = rng.uniform() * static_cast<double>(dim);
            pop[i][2 * p + 1] = rng.uniform(cfg.box_lo, cfg.box_hi);
        }
        Tensor logits = query(apply(pop[i]));
        res.queries++;
        energy[i] = energy_of(logits);
        margins[i] = logits_margin(logits, y);
    }

    auto converged = [&]() {
        double mean = 0.0;
        for (double e : energy) mean += e;
        mean /= static_cast<double>(cfg.population);
        double var = 0.0;
        for (double e : energy) var += (e - mean) * (e - mean);
        var /= static_cast<double>(cfg.population);
        return std::sqrt(var) <= std::abs(mean) / 100.0;
    };

    int iterations = 0;
    for (; iterations < cfg.k_max && !converged(); ++iterations) {
        for (std::size_t i = 0; i < cfg.population; ++i) {
            std::size_t a, b, c;
            do { a = rng.index(cfg.population); } while (a == i);
            do { b = rng.index(cfg.population); } while (b == i || b == a);
            do { c = rng.index(cfg.population); } while (c == i || c == a || c == b);

            std::vector<double> trial = pop[i];
            std::size_t j_rand = rng.index(genes);
            for (std::size_t j = 0; j < genes; ++j) {
                if (rng.uniform() < cfg.crossover || j == j_rand)
                    trial[j] = pop[a][j] + cfg.mutation * (pop[b][j] - pop[c][j]);
            }
            for (int p = 0; p < cfg.n_pixels; ++p) {
                trial[2 * p] = std::clamp(trial[2 * p], 0.0, static_cast<double>(dim) - 1e-9);
                trial[2 * p + 1] = std::clamp(trial[2 * p + 1], cfg.box_lo, cfg.box_hi);
            }
            Tensor logits = query(apply(trial));
            res.queries++;
            double e = energy_of(logits);
            if (e <= energy[i]) {
                pop[i] = std::move(trial);
                energy[i] = e;
                margins[i] = logits_margin(logits, y);
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < cfg.population; ++i)
        if (energy[i] < energy[best]) best = i;
    res.x_adv = apply(pop[best]);
    res.margin_after = margins[best];
    res.success = margins[best] < 0.0;
    return res;
}

AttackResult square_attack(const QueryFn& query, const Tensor& x, int y, const SquareConfig& cfg,
                           Rng& rng) {
    std::size_t h = cfg.img_h, w = cfg.img_w;
    if (h == 0 || w == 0) {
        auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(x.size()))));
        if (side * side != x.size())
            throw std::invalid_argument("square_attack: input of size " + std::to_string(x.size()) +
                                        " is not reshapeable to H x W");
        h = w = side;
    }
    if (h * w != x.size())
        throw std::invalid_argument("square_attack: H x W does not match input size");

    AttackResult res;
    Tensor delta({x.size()});
    Tensor xa = x;
    double best_m;
    {
        Tensor logits = query(xa);
        res.queries++;
        best_m = logits_margin(logits, y);
        res.margin_before = best_m;
    }
    res.x_adv = xa;

    // Piecewise-constant schedule: halve the square fraction at fixed
    // fractions of the query budget.
    const double marks[] = {0.05, 0.1, 0.2, 0.4, 0.6, 0.8};

    for (int t = 0; t < cfg.budget; ++t) {
        double p = cfg.p0;
        for (double mark : marks)
            if (static_cast<double>(t) >= mark * cfg.budget) p *= 0.5;
        auto side = static_cast<std::size_t>(
            std::max(1.0, std::round(std::sqrt(p * static_cast<double>(h * w)))));
        side = std::min({side, h, w});

        std::size_t r0 = rng.index(h - side + 1);
        std::size_t c0 = rng.index(w - side + 1);
        double val = rng.uniform() < 0.5 ? -cfg.epsilon : cfg.epsilon;

        Tensor cand = delta;
        for (std::size_t r = r0; r < r0 + side; ++r)
            for (std::size_t c = c0; c < c0 + side; ++c) cand[r * w + c] = val;

        Tensor xc({x.size()});
        for (std::size_t i = 0; i < x.size(); ++i)
            xc[i] = std::clamp(x[i] + cand[i], cfg.box_lo, cfg.box_hi);

        Tensor logits = query(xc);
        res.queries++;
        double m = logits_margin(logits, y);
        if (m < best_m) {
            best_m = m;
            delta = std::move(cand);
            res.x_adv = xc;
        }
    }

    res.margin_after = best_m;
    res.success = best_m < 0.0;
    return res;
}

}  // namespace wca
