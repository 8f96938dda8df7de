#include "attnkit/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "attnkit/decoder.hpp"

namespace attnkit {

namespace {

void check_range(int lo, int hi, const char* what) {
    if (lo < 1 || hi < lo)
        throw std::invalid_argument(std::string(what) + ": bad range [" + std::to_string(lo) +
                                    ", " + std::to_string(hi) + "]");
}

std::vector<int> random_symbols(Rng& rng, int len, int vocab_size) {
    std::vector<int> out(len);
    for (auto& s : out) s = 3 + static_cast<int>(rng.below(vocab_size - 3));
    return out;
}

}  // namespace

std::vector<TaskInstance> gen_copy(std::uint64_t seed, int count, int vocab_size, int len_min,
                                   int len_max) {
    if (vocab_size < 4) throw std::invalid_argument("gen_copy: vocab must be >= 4 (3 reserved ids)");
    check_range(len_min, len_max, "gen_copy");
    Rng rng(seed);
    std::vector<TaskInstance> out;
    for (int i = 0; i < count; ++i) {
        TaskInstance inst;
        inst.id = i;
        inst.seed = seed;
        const int len = len_min + static_cast<int>(rng.below(len_max - len_min + 1));
        inst.source = random_symbols(rng, len, vocab_size);
        inst.target = inst.source;
        inst.target.push_back(kEos);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<TaskInstance> gen_reverse(std::uint64_t seed, int count, int vocab_size, int len_min,
                                      int len_max) {
    auto out = gen_copy(seed, count, vocab_size, len_min, len_max);
    for (auto& inst : out) {
        inst.target.assign(inst.source.rbegin(), inst.source.rend());
        inst.target.push_back(kEos);
    }
    return out;
}

std::vector<TaskInstance> gen_monotone(std::uint64_t seed, int count, int n_phones,
                                       int frames_min, int frames_max, int len_min, int len_max,
                                       double noise_rate) {
    if (n_phones < 1) throw std::invalid_argument("gen_monotone: need at least one phone");
    if (frames_min < 2) throw std::invalid_argument("gen_monotone: frames per phone must be >= 2");
    check_range(frames_min, frames_max, "gen_monotone");
    check_range(len_min, len_max, "gen_monotone");
    Rng rng(seed);
    std::vector<TaskInstance> out;
    for (int i = 0; i < count; ++i) {
        TaskInstance inst;
        inst.id = i;
        inst.seed = seed;
        const int len = len_min + static_cast<int>(rng.below(len_max - len_min + 1));
        for (int t = 0; t < len; ++t) {
            const int phone = 3 + static_cast<int>(rng.below(n_phones));
            const int frames = frames_min + static_cast<int>(rng.below(frames_max - frames_min + 1));
            const int begin = static_cast<int>(inst.source.size());
            for (int f = 0; f < frames; ++f) {
                int frame_sym = phone + n_phones;  // frame symbols sit above the phone ids
                if (rng.uniform() < noise_rate)
                    frame_sym = 3 + n_phones + static_cast<int>(rng.below(n_phones));
                inst.source.push_back(frame_sym);
            }
            inst.alignment.push_back({begin, static_cast<int>(inst.source.size())});
            inst.target.push_back(phone);
        }
        inst.target.push_back(kEos);
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<TaskInstance> gen_sort(std::uint64_t seed, int count, int n_min, int n_max,
                                   int vocab_size) {
    check_range(n_min, n_max, "gen_sort");
    if (vocab_size - 3 < n_max)
        throw std::invalid_argument("gen_sort: vocab too small for distinct symbols");
    Rng rng(seed);
    std::vector<TaskInstance> out;
    for (int i = 0; i < count; ++i) {
        TaskInstance inst;
        inst.id = i;
        inst.seed = seed;
        const int n = n_min + static_cast<int>(rng.below(n_max - n_min + 1));
        // sample n distinct symbols
        std::vector<int> pool(vocab_size - 3);
        std::iota(pool.begin(), pool.end(), 3);
        for (int j = 0; j < n; ++j)
            std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
        inst.source.assign(pool.begin(), pool.begin() + n);
        inst.target.resize(n);
        std::iota(inst.target.begin(), inst.target.end(), 0);
        std::sort(inst.target.begin(), inst.target.end(),
                  [&](int a, int b) { return inst.source[a] < inst.source[b]; });
        out.push_back(std::move(inst));
    }
    return out;
}

double tour_length(const std::vector<std::array<double, 2>>& cities,
                   const std::vector<int>& order) {
    const int n = static_cast<int>(cities.size());
    if (static_cast<int>(order.size()) != n)
        throw std::invalid_argument("tour_length: order size mismatch");
    std::vector<char> seen(n, 0);
    for (int i : order) {
        if (i < 0 || i >= n || seen[i]) throw std::invalid_argument("tour_length: not a permutation");
        seen[i] = 1;
    }
    double len = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& a = cities[order[i]];
        const auto& b = cities[order[(i + 1) % n]];
        len += std::hypot(a[0] - b[0], a[1] - b[1]);
    }
    return len;
}

std::pair<std::vector<int>, double> tsp_brute_force(
    const std::vector<std::array<double, 2>>& cities) {
    const int n = static_cast<int>(cities.size());
    if (n < 2 || n > 9) throw std::invalid_argument("tsp_brute_force: n must be in [2, 9]");
    std::vector<int> rest(n - 1);
    std::iota(rest.begin(), rest.end(), 1);
    std::vector<int> best_order, order(n);
    order[0] = 0;
    double best = std::numeric_limits<double>::infinity();
    do {
        // canonical direction: second visited index below the last
        if (n > 2 && rest.front() > rest.back()) continue;
        std::copy(rest.begin(), rest.end(), order.begin() + 1);
        const double len = tour_length(cities, order);
        if (len < best) {
            best = len;
            best_order = order;
        }
    } while (std::next_permutation(rest.begin(), rest.end()));
    return {best_order, best};
}

std::vector<TaskInstance> gen_tsp(std::uint64_t seed, int count, int n) {
    if (n < 2 || n > 9) throw std::invalid_argument("gen_tsp: n must be in [2, 9]");
    Rng rng(seed);
    std::vector<TaskInstance> out;
    for (int i = 0; i < count; ++i) {
        TaskInstance inst;
        inst.id = i;
        inst.seed = seed;
        inst.cities.resize(n);
        for (auto& c : inst.cities) {
            c[0] = rng.uniform();
            c[1] = rng.uniform();
        }
        auto [order, len] = tsp_brute_force(inst.cities);
        inst.target = std::move(order);
        inst.optimal_length = len;
        out.push_back(std::move(inst));
    }
    return out;
}

std::string format_instance(const TaskInstance& inst) {
    std::ostringstream os;
    os.precision(17);
    if (!inst.cities.empty()) {
        os << "CITIES\t";
        for (std::size_t i = 0; i < inst.cities.size(); ++i) {
            if (i) os << ' ';
            os << inst.cities[i][0] << ',' << inst.cities[i][1];
        }
        os << "\tOPT\t";
        for (std::size_t i = 0; i < inst.target.size(); ++i) {
            if (i) os << ' ';
            os << inst.target[i];
        }
        os << "\tLEN\t" << inst.optimal_length;
    } else {
        os << "SRC\t";
        for (std::size_t i = 0; i < inst.source.size(); ++i) {
            if (i) os << ' ';
            os << inst.source[i];
        }
        os << "\tTGT\t";
        for (std::size_t i = 0; i < inst.target.size(); ++i) {
            if (i) os << ' ';
            os << inst.target[i];
        }
    }
    return os.str();
}

TaskInstance parse_instance(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, '\t')) fields.push_back(field);

    auto parse_ints = [](const std::string& s) {
        std::vector<int> out;
        std::istringstream ss(s);
        int v;
        while (ss >> v) out.push_back(v);
        return out;
    };

    TaskInstance inst;
    if (fields.size() == 6 && fields[0] == "CITIES" && fields[2] == "OPT" && fields[4] == "LEN") {
        std::istringstream cs(fields[1]);
        std::string pair;
        while (cs >> pair) {
            const auto comma = pair.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("parse_instance: bad city " + pair);
            inst.cities.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
        }
        inst.target = parse_ints(fields[3]);
        inst.optimal_length = std::stod(fields[5]);
    } else if (fields.size() == 4 && fields[0] == "SRC" && fields[2] == "TGT") {
        inst.source = parse_ints(fields[1]);
        inst.target = parse_ints(fields[3]);
    } else {
        throw std::invalid_argument("parse_instance: malformed line: " + line);
    }
    return inst;
}

void write_instances(const std::string& path, const std::vector<TaskInstance>& insts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_instances: cannot open " + path);
    for (const auto& inst : insts) out << format_instance(inst) << '\n';
}

std::vector<TaskInstance> read_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_instances: cannot open " + path);
    std::vector<TaskInstance> out;
    std::string line;
    std::uint64_t id = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TaskInstance inst = parse_instance(line);
        inst.id = id++;
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace attnkit
