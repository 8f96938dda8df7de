#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "attnkit/model.hpp"

namespace attnkit {

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 30;
    double grad_clip_norm = 1.0;
    std::uint64_t seed = 1;
    int batch_size = 16;
    int mc_samples = 1;           // M of the REINFORCE estimator
    double baseline_decay = 0.9;  // beta
    bool variance_norm = false;
};

// Exponential moving average of the reward log p(y|r,x); the running
// second moment backs the optional variance normalization.
struct BaselineState {
    double b = 0.0;
    double var = 1.0;
    bool initialized = false;

    void update(double mean_reward, double decay);
};

// Negative mean teacher-forced log-probability over the batch; requires a
// differentiable (soft or location) attention mode.
Tensor mle_loss(const Model& model, const std::vector<TaskInstance>& batch);

// Global-norm clip then theta <- theta - lr * g; grads are zeroed.
// Aborts with a NumericError naming the parameter on non-finite gradients.
void sgd_step(ParamStore& params, const TrainConfig& config);

struct ReinforceStats {
    double mean_reward = 0.0;
    double baseline_used = 0.0;
    std::vector<double> rewards;
};

// Monte Carlo REINFORCE gradient for hard attention: accumulates into the
// parameter grads the mean over mc_samples of
//   grad log p(y|r,x) + (log p(y|r,x) - b) * grad log p(r|x),
// optionally dividing the centered reward by the running standard
// deviation. The baseline is updated after the gradient is formed.
ReinforceStats reinforce_grad(const Model& model, const TaskInstance& inst,
                              const TrainConfig& config, BaselineState& baseline, Rng& rng);

struct LowerBoundResult {
    double lower_bound = 0.0;     // sum_r p(r|x) log p(y|r,x)
    double log_likelihood = 0.0;  // log sum_r p(y,r|x)
    int paths = 0;
};

// Exact enumeration over all attention-index sequences r; tiny instances
// only (M^T' <= 1e4).
LowerBoundResult enumerate_lower_bound(const Model& model, const TaskInstance& inst);

// Exact gradient of the lower bound by enumeration, accumulated into the
// parameter grads; the oracle for reinforce_grad.
LowerBoundResult enumerate_lower_bound_grad(const Model& model, const TaskInstance& inst);

struct EvalMetrics {
    double nll = 0.0;         // mean per-symbol negative log-likelihood
    double seq_acc = 0.0;     // exact-match rate under greedy decoding
    double sym_acc = 0.0;     // per-symbol accuracy under greedy decoding
    int n = 0;
    // TSP only
    double valid_frac = 0.0;  // valid permutations
    double gap = 0.0;         // mean (tour - optimal) / optimal
    double repeat_frac = 0.0; // tours whose unmasked argmax revisited a city
};

EvalMetrics evaluate(const Model& model, const std::vector<TaskInstance>& instances,
                     int beam = 1);

struct TrainResult {
    std::string log;  // one line per epoch and split:
                      // epoch=<n> split=<train|dev> nll=<float> acc=<float> seconds=<float>
    std::vector<EvalMetrics> dev_metrics;
};

// Epoch loop over seeded shuffled instances with per-epoch held-out
// metrics; deterministic given the seed (the seconds field aside).
TrainResult train(Model& model, std::vector<TaskInstance> train_set,
                  const std::vector<TaskInstance>& dev_set, const TrainConfig& config,
                  std::ostream* live_log = nullptr);

}  // namespace attnkit
