#include "attnkit/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace attnkit {

namespace {

int parse_int(const std::string& key, const std::string& value, int lo, int hi) {
    int v;
    try {
        std::size_t used = 0;
        v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + value);
    }
    if (v < lo || v > hi)
        throw ConfigError("config key '" + key + "': " + value + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

double parse_double(const std::string& key, const std::string& value, double lo, double hi) {
    double v;
    try {
        std::size_t used = 0;
        v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + value);
    }
    if (!(v >= lo && v <= hi))
        throw ConfigError("config key '" + key + "': " + value + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "task") {
        try {
            task_from_string(value);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config key 'task': ") + e.what());
        }
        task = value;
    } else if (key == "attention") {
        try {
            attention_from_string(value);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config key 'attention': ") + e.what());
        }
        attention = value;
    } else if (key == "hidden") {
        hidden = parse_int(key, value, 1, 4096);
    } else if (key == "d_emb") {
        d_emb = parse_int(key, value, 1, 4096);
    } else if (key == "d_a") {
        d_a = parse_int(key, value, 1, 4096);
    } else if (key == "K") {
        window = parse_int(key, value, 1, 99);
        if (window % 2 == 0) throw ConfigError("config key 'K': window must be odd");
    } else if (key == "lr") {
        lr = parse_double(key, value, 1e-12, 1e6);
    } else if (key == "epochs") {
        epochs = parse_int(key, value, 0, 1000000);
    } else if (key == "seed") {
        try {
            seed = std::stoull(value);
        } catch (const std::exception&) {
            throw ConfigError("config key 'seed': not an integer: " + value);
        }
    } else if (key == "beam") {
        beam = parse_int(key, value, 1, 10000);
    } else if (key == "M_samples") {
        mc_samples = parse_int(key, value, 1, 1000000);
    } else if (key == "baseline_decay") {
        baseline_decay = parse_double(key, value, 0.0, 1.0);
        if (baseline_decay >= 1.0) throw ConfigError("config key 'baseline_decay': must be < 1");
    } else if (key == "variance_norm") {
        if (value == "true" || value == "1")
            variance_norm = true;
        else if (value == "false" || value == "0")
            variance_norm = false;
        else
            throw ConfigError("config key 'variance_norm': expected true/false, got " + value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("malformed config line (expected key=value): " + line);
        cfg.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig mc;
    mc.task = task_from_string(task);
    mc.attention = attention_from_string(attention);
    mc.encoder = mc.task == TaskKind::Tsp ? EncoderKind::Point : EncoderKind::BiRnn;
    mc.hidden = hidden;
    mc.d_emb = d_emb;
    mc.d_a = d_a;
    mc.window = window;
    mc.vocab = 13;  // 10 payload symbols + PAD/BOS/EOS, every symbol task default
    return mc;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.learning_rate = lr;
    tc.epochs = epochs;
    tc.seed = seed;
    tc.mc_samples = mc_samples;
    tc.baseline_decay = baseline_decay;
    tc.variance_norm = variance_norm;
    return tc;
}

void write_attention_csv(const std::string& path, const DecoderTrace& trace,
                         const ContextSet& ctx) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (int j = 0; j < ctx.size(); ++j) {
        if (j) out << ',';
        out << ctx.positions[j].index;
    }
    out << '\n';
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& step : trace.steps) {
        for (std::size_t j = 0; j < step.alpha.size(); ++j) {
            if (j) out << ',';
            out << step.alpha[j];
        }
        out << '\n';
    }
}

void write_attention_pgm(const std::string& path, const DecoderTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const int height = static_cast<int>(trace.steps.size());
    const int width = height ? static_cast<int>(trace.steps[0].alpha.size()) : 0;
    out << "P2\n" << width << ' ' << height << "\n255\n";
    for (const auto& step : trace.steps) {
        for (std::size_t j = 0; j < step.alpha.size(); ++j) {
            if (j) out << ' ';
            out << static_cast<int>(std::lround(step.alpha[j] * 255.0));
        }
        out << '\n';
    }
}

}  // namespace attnkit
