#pragma once

#include <map>
#include <string>

#include "attnkit/decoder.hpp"
#include "attnkit/training.hpp"

namespace attnkit {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line-oriented key=value run configuration. Unknown keys are rejected
// and every value is range-checked.
struct RunConfig {
    std::string task = "copy";
    std::string attention = "soft";
    int hidden = 32;
    int d_emb = 16;
    int d_a = 16;
    int window = 3;  // K
    double lr = 0.1;
    int epochs = 30;
    std::uint64_t seed = 1;
    int beam = 1;
    int mc_samples = 1;
    double baseline_decay = 0.9;
    bool variance_norm = false;

    void set(const std::string& key, const std::string& value);
    static RunConfig parse_file(const std::string& path);

    ModelConfig model_config() const;
    TrainConfig train_config() const;
};

// T' x M attention matrix export: CSV with a header row of source
// positions and 6-decimal weights, and a plain (P2) PGM where brighter
// means higher weight, rows are output steps.
void write_attention_csv(const std::string& path, const DecoderTrace& trace,
                         const ContextSet& ctx);
void write_attention_pgm(const std::string& path, const DecoderTrace& trace);

}  // namespace attnkit
