#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "attnkit/checkpoint.hpp"
#include "attnkit/io.hpp"
#include "attnkit/tasks.hpp"
#include "attnkit/training.hpp"

namespace {

using namespace attnkit;

struct GenDefaults {
    int train_count;
    int dev_count;
};

GenDefaults gen_defaults(TaskKind task) {
    switch (task) {
        case TaskKind::Copy:
        case TaskKind::Reverse: return {1500, 200};
        case TaskKind::Monotone: return {1000, 200};
        case TaskKind::Sort: return {1000, 200};
        case TaskKind::Tsp: return {2000, 200};
    }
    return {1000, 200};
}

std::vector<TaskInstance> generate(TaskKind task, std::uint64_t seed, int count) {
    switch (task) {
        case TaskKind::Copy: return gen_copy(seed, count, 13, 1, 10);
        case TaskKind::Reverse: return gen_reverse(seed, count, 13, 1, 10);
        case TaskKind::Monotone: return gen_monotone(seed, count, 5, 2, 4, 2, 5);
        case TaskKind::Sort: return gen_sort(seed, count, 3, 7, 13);
        case TaskKind::Tsp: return gen_tsp(seed, count, 5);
    }
    return {};
}

// --key value flags shared by subcommands; validation lives in RunConfig::set
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& overrides) {
    for (const char* key : {"task", "attention", "hidden", "d_emb", "d_a", "K", "lr", "epochs",
                            "seed", "beam", "M_samples", "baseline_decay", "variance_norm"}) {
        const std::string name = std::string("--") + key;
        cmd->add_option_function<std::string>(
            name, [&overrides, key = std::string(key)](const std::string& v) { overrides[key] = v; });
    }
}

RunConfig resolve_config(const std::string& config_path,
                         const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::parse_file(config_path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    if (const char* env_seed = std::getenv("ATNK_SEED")) cfg.set("seed", env_seed);
    return cfg;
}

int cmd_train(const std::string& config_path, const std::map<std::string, std::string>& overrides,
              const std::string& out_path) {
    RunConfig cfg = resolve_config(config_path, overrides);
    const TaskKind task = task_from_string(cfg.task);
    const auto counts = gen_defaults(task);
    auto train_set = generate(task, cfg.seed, counts.train_count);
    auto dev_set = generate(task, cfg.seed + 1000, counts.dev_count);

    Model model(cfg.model_config(), cfg.seed);
    train(model, std::move(train_set), dev_set, cfg.train_config(), &std::cout);
    save_checkpoint(out_path, model);
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path, int beam) {
    Model model = load_checkpoint(ckpt_path);
    auto instances = read_instances(data_path);
    EvalMetrics m = evaluate(model, instances, beam);
    std::cout.precision(6);
    std::cout << std::fixed;
    std::cout << "nll=" << m.nll << " acc=" << m.sym_acc << " n=" << m.n << '\n';
    if (model.config().task == TaskKind::Tsp)
        std::cout << "valid=" << m.valid_frac << " gap=" << m.gap << '\n';
    return 0;
}

int cmd_decode(const std::string& ckpt_path, const std::string& data_path, int beam) {
    Model model = load_checkpoint(ckpt_path);
    auto instances = read_instances(data_path);
    for (const auto& inst : instances) {
        ContextSet ctx = model.encode(inst);
        std::vector<int> out;
        double log_prob = 0.0;
        if (model.config().pointer()) {
            auto res = pointer_decode(model.decoder(), model.attention(), ctx, true);
            out = res.order;
            log_prob = res.log_prob;
        } else {
            const int max_len = static_cast<int>(inst.source.size()) * 2 + 10;
            auto hyps = beam_decode(model.decoder(), model.attention(), model.attention_mode(),
                                    ctx, beam, max_len);
            if (!hyps.empty()) {
                out = hyps.front().symbols;
                log_prob = hyps.front().log_prob;
            }
        }
        for (std::size_t i = 0; i < out.size(); ++i) std::cout << (i ? " " : "") << out[i];
        std::cout << "\tlogprob=" << log_prob << '\n';
    }
    return 0;
}

int cmd_attend(const std::string& ckpt_path, const std::string& data_path,
               const std::string& prefix) {
    Model model = load_checkpoint(ckpt_path);
    auto instances = read_instances(data_path);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        ContextSet ctx = model.encode(instances[i]);
        DecoderTrace trace;
        if (model.config().pointer())
            trace = pointer_decode(model.decoder(), model.attention(), ctx, true).trace;
        else
            trace = teacher_forced_logprob(model.decoder(), model.attention(),
                                           model.attention_mode(), ctx, instances[i].target)
                        .trace;
        write_attention_csv(prefix + "-" + std::to_string(i) + ".csv", trace, ctx);
        write_attention_pgm(prefix + "-" + std::to_string(i) + ".pgm", trace);
    }
    return 0;
}

int cmd_gen(const std::string& task_name, std::uint64_t seed, int count,
            const std::string& out_path) {
    const TaskKind task = task_from_string(task_name);
    const int n = count > 0 ? count : gen_defaults(task).train_count;
    write_instances(out_path, generate(task, seed, n));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention-based encoder-decoder toolkit"};
    app.require_subcommand(1);

    std::map<std::string, std::string> overrides;
    std::string config_path, out_path = "model.ckpt";
    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    train_cmd->add_option("--config", config_path, "key=value config file");
    train_cmd->add_option("--out", out_path, "output checkpoint path");
    add_config_flags(train_cmd, overrides);

    std::string ckpt_path, data_path, prefix = "attn";
    int beam = 1;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on an instance file");
    eval_cmd->add_option("--checkpoint", ckpt_path)->required();
    eval_cmd->add_option("--data", data_path)->required();
    eval_cmd->add_option("--beam", beam);

    auto* decode_cmd = app.add_subcommand("decode", "decode an instance file");
    decode_cmd->add_option("--checkpoint", ckpt_path)->required();
    decode_cmd->add_option("--data", data_path)->required();
    decode_cmd->add_option("--beam", beam);

    auto* attend_cmd = app.add_subcommand("attend", "export attention matrices (CSV + PGM)");
    attend_cmd->add_option("--checkpoint", ckpt_path)->required();
    attend_cmd->add_option("--data", data_path)->required();
    attend_cmd->add_option("--out-prefix", prefix);

    std::string gen_task = "copy";
    std::uint64_t gen_seed = 1;
    int gen_count = 0;
    auto* gen_cmd = app.add_subcommand("gen", "write a synthetic task instance file");
    gen_cmd->add_option("--task", gen_task);
    gen_cmd->add_option("--seed", gen_seed);
    gen_cmd->add_option("--count", gen_count);
    gen_cmd->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, overrides, out_path);
        if (eval_cmd->parsed()) return cmd_eval(ckpt_path, data_path, beam);
        if (decode_cmd->parsed()) return cmd_decode(ckpt_path, data_path, beam);
        if (attend_cmd->parsed()) return cmd_attend(ckpt_path, data_path, prefix);
        if (gen_cmd->parsed()) return cmd_gen(gen_task, gen_seed, gen_count, out_path);
    } catch (const attnkit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const attnkit::CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << '\n';
        return 4;
    } catch (const attnkit::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
