#include "attnkit/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace attnkit {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

const char kMagic[4] = {'A', 'T', 'N', 'K'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw CheckpointError("checkpoint truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
};

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t seed) {
    static const auto table = make_crc_table();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> serialize_checkpoint(const Model& model) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kCheckpointVersion);

    std::ostringstream cfg;
    for (const auto& [k, v] : model.config().to_map()) cfg << k << '=' << v << '\n';
    const std::string cfg_str = cfg.str();
    put_u32(out, static_cast<std::uint32_t>(cfg_str.size()));
    out.insert(out.end(), cfg_str.begin(), cfg_str.end());

    const auto& params = model.params().all();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, p] : params) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_u32(out, static_cast<std::uint32_t>(p.shape().size()));
        for (int d : p.shape()) put_u32(out, static_cast<std::uint32_t>(d));
        for (double v : p.value()) put_f64(out, v);
    }
    put_u32(out, crc32(out.data(), out.size()));
    return out;
}

void save_checkpoint(const std::string& path, const Model& model) {
    const auto bytes = serialize_checkpoint(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed: " + path);
}

Model deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw CheckpointError("checkpoint truncated");
    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) << 0 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
    if (crc32(bytes.data(), bytes.size() - 4) != stored_crc)
        throw CheckpointError("checkpoint CRC mismatch");

    Reader r{bytes};
    if (r.str(4) != std::string(kMagic, 4)) throw CheckpointError("bad checkpoint magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

    const std::uint32_t cfg_len = r.u32();
    std::istringstream cfg_in(r.str(cfg_len));
    std::map<std::string, std::string> cfg_map;
    std::string line;
    while (std::getline(cfg_in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw CheckpointError("malformed config line: " + line);
        cfg_map[line.substr(0, eq)] = line.substr(eq + 1);
    }
    Model model(ModelConfig::from_map(cfg_map), /*init_seed=*/0);

    const std::uint32_t count = r.u32();
    const auto& params = model.params().all();
    if (count != params.size())
        throw CheckpointError("checkpoint has " + std::to_string(count) + " parameters, model has " +
                              std::to_string(params.size()));
    for (const auto& [expected_name, p] : params) {
        const std::string name = r.str(r.u32());
        if (name != expected_name)
            throw CheckpointError("parameter name mismatch: checkpoint has '" + name +
                                  "', model expects '" + expected_name + "'");
        const std::uint32_t rank = r.u32();
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(r.u32());
        if (shape != p.shape())
            throw CheckpointError("parameter " + name + " has shape " + shape_str(shape) +
                                  ", model expects " + shape_str(p.shape()));
        Tensor t = p;
        for (auto& v : t.value()) v = r.f64();
    }
    return model;
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace attnkit
