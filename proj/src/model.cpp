#include "attnkit/model.hpp"

#include <stdexcept>

namespace attnkit {

TaskKind task_from_string(const std::string& s) {
    if (s == "copy") return TaskKind::Copy;
    if (s == "reverse") return TaskKind::Reverse;
    if (s == "monotone") return TaskKind::Monotone;
    if (s == "sort") return TaskKind::Sort;
    if (s == "tsp") return TaskKind::Tsp;
    throw std::invalid_argument("unknown task: " + s);
}

std::string to_string(TaskKind t) {
    switch (t) {
        case TaskKind::Copy: return "copy";
        case TaskKind::Reverse: return "reverse";
        case TaskKind::Monotone: return "monotone";
        case TaskKind::Sort: return "sort";
        case TaskKind::Tsp: return "tsp";
    }
    return "?";
}

AttentionMode attention_from_string(const std::string& s) {
    if (s == "soft") return AttentionMode::Soft;
    if (s == "hard") return AttentionMode::Hard;
    if (s == "location") return AttentionMode::Location;
    throw std::invalid_argument("unknown attention mode: " + s);
}

std::string to_string(AttentionMode m) {
    switch (m) {
        case AttentionMode::Soft: return "soft";
        case AttentionMode::Hard: return "hard";
        case AttentionMode::Location: return "location";
    }
    return "?";
}

EncoderKind encoder_from_string(const std::string& s) {
    if (s == "birnn") return EncoderKind::BiRnn;
    if (s == "meanpool") return EncoderKind::MeanPool;
    if (s == "point") return EncoderKind::Point;
    throw std::invalid_argument("unknown encoder: " + s);
}

std::string to_string(EncoderKind e) {
    switch (e) {
        case EncoderKind::BiRnn: return "birnn";
        case EncoderKind::MeanPool: return "meanpool";
        case EncoderKind::Point: return "point";
    }
    return "?";
}

int ModelConfig::context_dim() const {
    return encoder == EncoderKind::MeanPool ? hidden : 2 * hidden;
}

std::map<std::string, std::string> ModelConfig::to_map() const {
    return {{"task", to_string(task)},
            {"attention", to_string(attention)},
            {"encoder", to_string(encoder)},
            {"vocab", std::to_string(vocab)},
            {"d_emb", std::to_string(d_emb)},
            {"hidden", std::to_string(hidden)},
            {"d_a", std::to_string(d_a)},
            {"K", std::to_string(window)}};
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& m) {
    ModelConfig c;
    c.task = task_from_string(m.at("task"));
    c.attention = attention_from_string(m.at("attention"));
    c.encoder = encoder_from_string(m.at("encoder"));
    c.vocab = std::stoi(m.at("vocab"));
    c.d_emb = std::stoi(m.at("d_emb"));
    c.hidden = std::stoi(m.at("hidden"));
    c.d_a = std::stoi(m.at("d_a"));
    c.window = std::stoi(m.at("K"));
    return c;
}

Tensor ParamStore::add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
    index_[name] = params_.size();
    params_.emplace_back(name, t);
    return t;
}

Tensor ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return params_[it->second].second;
}

void ParamStore::zero_grad() {
    for (auto& [name, p] : params_) p.zero_grad();
}

GruParams Model::add_gru(const std::string& prefix, int hidden, int input) {
    GruParams g;
    g.U = store_.add(prefix + ".U", {hidden, hidden});
    g.W = store_.add(prefix + ".W", {hidden, input});
    g.b = store_.add(prefix + ".b", {hidden});
    g.U_u = store_.add(prefix + ".U_u", {hidden, hidden});
    g.W_u = store_.add(prefix + ".W_u", {hidden, input});
    g.b_u = store_.add(prefix + ".b_u", {hidden});
    // the reset gate multiplies the input, so it is input-sized
    g.U_r = store_.add(prefix + ".U_r", {input, hidden});
    g.W_r = store_.add(prefix + ".W_r", {input, input});
    g.b_r = store_.add(prefix + ".b_r", {input});
    return g;
}

Model::Model(ModelConfig config, std::uint64_t init_seed) : config_(config) {
    const int h = config_.hidden;
    const int d_c = config_.context_dim();

    if (config_.task == TaskKind::Tsp) {
        config_.encoder = EncoderKind::Point;
        point_.W_lift = store_.add("point.W_lift", {config_.d_emb, 2});
        point_.b_lift = store_.add("point.b_lift", {config_.d_emb});
        point_.rnn.fwd = add_gru("enc.fwd", h, config_.d_emb);
        point_.rnn.bwd = add_gru("enc.bwd", h, config_.d_emb);
        point_.rnn.h0_fwd = store_.add("enc.fwd.h0", {h});
        point_.rnn.h0_bwd = store_.add("enc.bwd.h0", {h});
    } else {
        src_embed_ = store_.add("src_embed.table", {config_.vocab, config_.d_emb});
        if (config_.encoder == EncoderKind::MeanPool) {
            meanpool_.cell = add_gru("enc.fwd", h, config_.d_emb);
            meanpool_.h0 = store_.add("enc.fwd.h0", {h});
        } else {
            birnn_.fwd = add_gru("enc.fwd", h, config_.d_emb);
            birnn_.bwd = add_gru("enc.bwd", h, config_.d_emb);
            birnn_.h0_fwd = store_.add("enc.fwd.h0", {h});
            birnn_.h0_bwd = store_.add("enc.bwd.h0", {h});
        }
    }

    attn_.W_a = store_.add("attn.W_a", {config_.d_a, h});
    attn_.U_a = store_.add("attn.U_a", {config_.d_a, d_c});
    attn_.v_a = store_.add("attn.v_a", {config_.d_a});
    if (config_.attention == AttentionMode::Location) {
        if (config_.window < 1 || config_.window % 2 == 0)
            throw std::invalid_argument("location attention window K must be odd and positive");
        attn_.V_loc = store_.add("attn.V_loc", {config_.window, config_.d_a});
        attn_.window = config_.window;
    }

    const int dec_input = config_.pointer() ? 2 * d_c : config_.d_emb + d_c;
    dec_.cell = add_gru("dec", h, dec_input);
    dec_.W_init = store_.add("dec.init.W", {h, d_c});
    dec_.b_init = store_.add("dec.init.b", {h});
    if (!config_.pointer()) {
        dec_.tgt_embed = store_.add("tgt_embed.table", {config_.vocab, config_.d_emb});
        dec_.O = store_.add("dec.O", {config_.vocab, h + d_c + config_.d_emb});
        dec_.b_o = store_.add("dec.b_o", {config_.vocab});
    }

    init_params(init_seed);
}

void Model::init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (const auto& [name, p] : store_.all()) {
        const auto leaf_pos = name.rfind('.');
        const std::string leaf = leaf_pos == std::string::npos ? name : name.substr(leaf_pos + 1);
        const bool zero = leaf[0] == 'b' || leaf == "h0" || leaf == "V_loc";
        Tensor t = p;  // shares the underlying node
        for (auto& v : t.value()) v = zero ? 0.0 : rng.uniform(-0.08, 0.08);
    }
}

std::vector<Tensor> Model::embed_source(const std::vector<int>& symbols) const {
    std::vector<Tensor> out;
    out.reserve(symbols.size());
    for (int s : symbols) out.push_back(pick_row(src_embed_, s));
    return out;
}

ContextSet Model::encode(const TaskInstance& inst) const {
    if (config_.task == TaskKind::Tsp) return point_encode(point_, inst.cities);
    ContextSet ctx;
    if (config_.encoder == EncoderKind::MeanPool)
        ctx = meanpool_encode(meanpool_, embed_source(inst.source));
    else
        ctx = birnn_encode(birnn_, embed_source(inst.source));
    for (std::size_t i = 0; i < ctx.positions.size(); ++i)
        if (i < inst.source.size()) ctx.positions[i].token = inst.source[i];
    return ctx;
}

}  // namespace attnkit
