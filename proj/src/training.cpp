#include "attnkit/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace attnkit {

namespace {

Tensor instance_logprob(const Model& model, const TaskInstance& inst, Rng* rng = nullptr,
                        const std::vector<int>& forced = {}) {
    ContextSet ctx = model.encode(inst);
    // pointer training is unmasked: the model itself must learn to put
    // no mass on visited indices (masking stays a decode-time guarantee)
    if (model.config().pointer())
        return pointer_forced_logprob(model.decoder(), model.attention(), ctx, inst.target,
                                      /*mask_visited=*/false);
    return teacher_forced_logprob(model.decoder(), model.attention(), model.attention_mode(), ctx,
                                  inst.target, rng, forced)
        .log_prob_y;
}

void scale_grads(ParamStore& params, double factor) {
    for (auto& [name, p] : params.all()) {
        Tensor t = p;
        for (auto& g : t.grad()) g *= factor;
    }
}

int target_symbols(const std::vector<TaskInstance>& instances) {
    int n = 0;
    for (const auto& inst : instances) n += static_cast<int>(inst.target.size());
    return n;
}

}  // namespace

void BaselineState::update(double mean_reward, double decay) {
    if (!initialized) {
        b = mean_reward;
        var = 1.0;
        initialized = true;
        return;
    }
    const double dev = mean_reward - b;
    var = decay * var + (1.0 - decay) * dev * dev;
    b = decay * b + (1.0 - decay) * mean_reward;
}

Tensor mle_loss(const Model& model, const std::vector<TaskInstance>& batch) {
    if (batch.empty()) throw std::invalid_argument("mle_loss: empty batch");
    if (model.attention_mode() == AttentionMode::Hard && !model.config().pointer())
        throw std::invalid_argument("mle_loss: hard attention is not differentiable, "
                                    "use reinforce_grad");
    Tensor total = Tensor::scalar(0.0);
    for (const auto& inst : batch) total = add(total, instance_logprob(model, inst));
    return scale(total, -1.0 / static_cast<double>(batch.size()));
}

void sgd_step(ParamStore& params, const TrainConfig& config) {
    double sq_norm = 0.0;
    for (const auto& [name, p] : params.all())
        for (double g : p.grad()) {
            if (!std::isfinite(g))
                throw NumericError("sgd_step: non-finite gradient in parameter " + name);
            sq_norm += g * g;
        }
    const double norm = std::sqrt(sq_norm);
    double factor = 1.0;
    if (config.grad_clip_norm > 0.0 && std::isfinite(config.grad_clip_norm) &&
        norm > config.grad_clip_norm)
        factor = config.grad_clip_norm / norm;
    for (const auto& [name, p] : params.all()) {
        Tensor t = p;
        for (std::size_t i = 0; i < t.size(); ++i)
            t.value()[i] -= config.learning_rate * factor * t.grad()[i];
        t.zero_grad();
    }
}

ReinforceStats reinforce_grad(const Model& model, const TaskInstance& inst,
                              const TrainConfig& config, BaselineState& baseline, Rng& rng) {
    if (model.attention_mode() != AttentionMode::Hard)
        throw std::invalid_argument("reinforce_grad: hard attention mode required");
    ReinforceStats stats;
    const double b = baseline.initialized ? baseline.b : 0.0;
    const double sd = config.variance_norm
                          ? std::max(std::sqrt(std::max(baseline.var, 0.0)), 1e-4)
                          : 1.0;
    Tensor surrogate = Tensor::scalar(0.0);
    ContextSet ctx = model.encode(inst);
    for (int m = 0; m < config.mc_samples; ++m) {
        auto tf = teacher_forced_logprob(model.decoder(), model.attention(), AttentionMode::Hard,
                                         ctx, inst.target, &rng);
        const double reward = tf.log_prob_y.item();
        stats.rewards.push_back(reward);
        const double coeff = (reward - b) / sd;
        surrogate = add(surrogate, add(tf.log_prob_y, scale(tf.log_prob_r, coeff)));
    }
    backward(scale(surrogate, 1.0 / config.mc_samples));
    double mean = 0.0;
    for (double r : stats.rewards) mean += r;
    mean /= static_cast<double>(stats.rewards.size());
    stats.mean_reward = mean;
    stats.baseline_used = b;
    baseline.update(mean, config.baseline_decay);
    return stats;
}

namespace {

// iterate all index sequences r in {0..M-1}^T
template <typename Fn>
void for_each_path(int m, int steps, Fn&& fn) {
    std::vector<int> path(steps, 0);
    while (true) {
        fn(path);
        int i = steps - 1;
        while (i >= 0 && ++path[i] == m) path[i--] = 0;
        if (i < 0) break;
    }
}

double check_path_count(const Model& model, const TaskInstance& inst, int* m_out) {
    if (model.config().pointer())
        throw std::invalid_argument("enumerate_lower_bound: pointer tasks unsupported");
    const int m = static_cast<int>(model.encode(inst).vectors.size());
    const double paths = std::pow(static_cast<double>(m), static_cast<double>(inst.target.size()));
    if (paths > 1e4)
        throw std::invalid_argument("enumerate_lower_bound: state space too large (" +
                                    std::to_string(paths) + " paths)");
    *m_out = m;
    return paths;
}

}  // namespace

LowerBoundResult enumerate_lower_bound(const Model& model, const TaskInstance& inst) {
    int m = 0;
    check_path_count(model, inst, &m);
    const int steps = static_cast<int>(inst.target.size());
    ContextSet ctx = model.encode(inst);
    LowerBoundResult result;
    double lb = 0.0;
    double lse_max = -std::numeric_limits<double>::infinity();
    std::vector<double> joint_logps;
    for_each_path(m, steps, [&](const std::vector<int>& path) {
        auto tf = teacher_forced_logprob(model.decoder(), model.attention(), AttentionMode::Hard,
                                         ctx, inst.target, nullptr, path);
        const double logp_y = tf.log_prob_y.item();
        const double logp_r = tf.log_prob_r.item();
        lb += std::exp(logp_r) * logp_y;
        joint_logps.push_back(logp_y + logp_r);
        lse_max = std::max(lse_max, joint_logps.back());
        ++result.paths;
    });
    double z = 0.0;
    for (double lp : joint_logps) z += std::exp(lp - lse_max);
    result.lower_bound = lb;
    result.log_likelihood = lse_max + std::log(z);
    return result;
}

LowerBoundResult enumerate_lower_bound_grad(const Model& model, const TaskInstance& inst) {
    int m = 0;
    check_path_count(model, inst, &m);
    const int steps = static_cast<int>(inst.target.size());
    ContextSet ctx = model.encode(inst);
    LowerBoundResult result;
    double lb = 0.0;
    for_each_path(m, steps, [&](const std::vector<int>& path) {
        auto tf = teacher_forced_logprob(model.decoder(), model.attention(), AttentionMode::Hard,
                                         ctx, inst.target, nullptr, path);
        const double logp_y = tf.log_prob_y.item();
        const double p_r = std::exp(tf.log_prob_r.item());
        lb += p_r * logp_y;
        // d/dtheta [p(r) log p(y|r)] = p(r) d log p(y|r) + log p(y|r) p(r) d log p(r)
        backward(add(scale(tf.log_prob_y, p_r), scale(tf.log_prob_r, p_r * logp_y)));
        ++result.paths;
    });
    result.lower_bound = lb;
    return result;
}

EvalMetrics evaluate(const Model& model, const std::vector<TaskInstance>& instances, int beam) {
    EvalMetrics metrics;
    metrics.n = static_cast<int>(instances.size());
    if (instances.empty()) return metrics;
    double total_nll = 0.0;
    int sym_correct = 0;
    int seq_correct = 0;
    int tours_with_repeat = 0;
    int valid = 0;
    double gap_sum = 0.0;
    const bool pointer = model.config().pointer();

    for (const auto& inst : instances) {
        total_nll -= instance_logprob(model, inst).item();
        std::vector<int> out;
        if (pointer) {
            ContextSet ctx = model.encode(inst);
            int repeats = 0;
            auto res = pointer_decode(model.decoder(), model.attention(), ctx,
                                      /*mask_visited=*/true, &repeats);
            out = res.order;
            if (repeats > 0) ++tours_with_repeat;
            bool is_perm = true;
            std::vector<char> seen(ctx.size(), 0);
            for (int i : out)
                if (i < 0 || i >= ctx.size() || seen[i]) { is_perm = false; break; }
                else seen[i] = 1;
            if (is_perm) ++valid;
            if (model.config().task == TaskKind::Tsp && is_perm && inst.optimal_length > 0)
                gap_sum += (tour_length(inst.cities, out) - inst.optimal_length) /
                           inst.optimal_length;
        } else {
            ContextSet ctx = model.encode(inst);
            const int max_len = static_cast<int>(inst.target.size()) + 10;
            if (beam <= 1) {
                out = greedy_decode(model.decoder(), model.attention(), model.attention_mode(),
                                    ctx, max_len)
                          .first;
            } else {
                auto hyps = beam_decode(model.decoder(), model.attention(), model.attention_mode(),
                                        ctx, beam, max_len);
                if (!hyps.empty()) out = hyps.front().symbols;
            }
        }
        if (out == inst.target) ++seq_correct;
        for (std::size_t i = 0; i < inst.target.size() && i < out.size(); ++i)
            if (out[i] == inst.target[i]) ++sym_correct;
    }

    const int total_syms = target_symbols(instances);
    metrics.nll = total_nll / total_syms;
    metrics.seq_acc = static_cast<double>(seq_correct) / metrics.n;
    metrics.sym_acc = static_cast<double>(sym_correct) / total_syms;
    if (pointer) {
        metrics.valid_frac = static_cast<double>(valid) / metrics.n;
        metrics.gap = gap_sum / metrics.n;
        metrics.repeat_frac = static_cast<double>(tours_with_repeat) / metrics.n;
    }
    return metrics;
}

TrainResult train(Model& model, std::vector<TaskInstance> train_set,
                  const std::vector<TaskInstance>& dev_set, const TrainConfig& config,
                  std::ostream* live_log) {
    TrainResult result;
    std::ostringstream log;
    log.precision(6);
    log << std::fixed;
    Rng rng(config.seed);
    BaselineState baseline;
    const bool hard = model.attention_mode() == AttentionMode::Hard && !model.config().pointer();

    // fixed subsample keeps the per-epoch train metrics cheap
    std::vector<TaskInstance> train_probe(
        train_set.begin(),
        train_set.begin() + std::min<std::size_t>(train_set.size(), 200));

    auto emit = [&](const std::string& line) {
        log << line << '\n';
        if (live_log) *live_log << line << '\n' << std::flush;
    };

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        // Fisher-Yates from the run seed
        for (std::size_t i = train_set.size(); i > 1; --i)
            std::swap(train_set[i - 1], train_set[rng.below(i)]);

        for (std::size_t start = 0; start < train_set.size(); start += config.batch_size) {
            const std::size_t stop = std::min(train_set.size(), start + config.batch_size);
            model.params().zero_grad();
            if (hard) {
                for (std::size_t i = start; i < stop; ++i)
                    reinforce_grad(model, train_set[i], config, baseline, rng);
                // the estimator points uphill on the lower bound
                scale_grads(model.params(), -1.0 / static_cast<double>(stop - start));
            } else {
                std::vector<TaskInstance> batch(train_set.begin() + start,
                                                train_set.begin() + stop);
                backward(mle_loss(model, batch));
            }
            sgd_step(model.params(), config);
        }

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        EvalMetrics train_m = evaluate(model, train_probe);
        EvalMetrics dev_m = evaluate(model, dev_set);
        result.dev_metrics.push_back(dev_m);
        {
            std::ostringstream line;
            line.precision(6);
            line << std::fixed;
            line << "epoch=" << epoch << " split=train nll=" << train_m.nll
                 << " acc=" << train_m.seq_acc << " seconds=" << seconds;
            emit(line.str());
        }
        {
            std::ostringstream line;
            line.precision(6);
            line << std::fixed;
            line << "epoch=" << epoch << " split=dev nll=" << dev_m.nll
                 << " acc=" << dev_m.seq_acc << " seconds=" << 0.0;
            emit(line.str());
        }
    }
    result.log = log.str();
    return result;
}

}  // namespace attnkit
