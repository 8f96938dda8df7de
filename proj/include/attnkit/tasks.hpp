#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "attnkit/rng.hpp"

namespace attnkit {

// Alignment span recorded by gen_monotone: target step t was produced
// from source positions [begin, end).
struct AlignSpan {
    int begin = 0;
    int end = 0;
};

struct TaskInstance {
    std::vector<int> source;                 // symbol ids (symbol tasks)
    std::vector<int> target;                 // symbol ids ending with EOS, or a permutation
    std::vector<std::array<double, 2>> cities;  // TSP only
    std::vector<AlignSpan> alignment;        // gen_monotone oracle spans
    double optimal_length = 0.0;             // TSP oracle tour length
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
};

// Symbol ids 0..2 are reserved (PAD, BOS, EOS); payload symbols start at 3.
std::vector<TaskInstance> gen_copy(std::uint64_t seed, int count, int vocab_size, int len_min,
                                   int len_max);
std::vector<TaskInstance> gen_reverse(std::uint64_t seed, int count, int vocab_size, int len_min,
                                      int len_max);

// Speech-style monotone alignment task: the target is a phone sequence;
// the source repeats each phone's frame symbol a random number of times
// with symbol substitution noise at rate 0.1.
std::vector<TaskInstance> gen_monotone(std::uint64_t seed, int count, int n_phones,
                                       int frames_min, int frames_max, int len_min, int len_max,
                                       double noise_rate = 0.1);

// Pointer task: source is distinct random integer symbols, target is the
// permutation of source positions that sorts them ascending.
std::vector<TaskInstance> gen_sort(std::uint64_t seed, int count, int n_min, int n_max,
                                   int vocab_size);

// Tiny TSP with an exhaustive oracle (city 0 fixed first, direction
// canonicalized so the second visited index is lower than the last).
std::vector<TaskInstance> gen_tsp(std::uint64_t seed, int count, int n);

double tour_length(const std::vector<std::array<double, 2>>& cities,
                   const std::vector<int>& order);

// Exhaustive minimum over canonical tours; returns the optimal order.
std::pair<std::vector<int>, double> tsp_brute_force(
    const std::vector<std::array<double, 2>>& cities);

// Line-oriented instance file format:
//   SRC<TAB>s1 s2 ...<TAB>TGT<TAB>t1 t2 ...
//   CITIES<TAB>x1,y1 x2,y2 ...<TAB>OPT<TAB>p1 p2 ...<TAB>LEN<TAB><float>
std::string format_instance(const TaskInstance& inst);
TaskInstance parse_instance(const std::string& line);
void write_instances(const std::string& path, const std::vector<TaskInstance>& insts);
std::vector<TaskInstance> read_instances(const std::string& path);

}  // namespace attnkit
