#pragma once

#include <array>
#include <vector>

#include "attnkit/cells.hpp"
#include "attnkit/tensor.hpp"

namespace attnkit {

// Per-context source metadata: which input position (0-based) a context
// vector summarizes, plus coordinates for geometric tasks.
struct SourcePosition {
    int index = 0;
    int token = -1;                       // source symbol id, -1 when n/a
    std::array<double, 2> coords{0, 0};   // city coordinates, tasks with geometry
    bool has_coords = false;
};

// Ordered set of M context vectors of equal dimension d_c.
struct ContextSet {
    std::vector<Tensor> vectors;
    std::vector<SourcePosition> positions;

    int size() const { return static_cast<int>(vectors.size()); }
    int dim() const { return vectors.empty() ? 0 : vectors[0].shape()[0]; }
};

struct BiRnnParams {
    GruParams fwd, bwd;
    Tensor h0_fwd, h0_bwd;
};

// One context vector per input step: c_t = [fwd state t ; bwd state t].
ContextSet birnn_encode(const BiRnnParams& p, const std::vector<Tensor>& inputs);

struct MeanPoolParams {
    GruParams cell;
    Tensor h0;
};

// Single fixed-size context: the arithmetic mean of the recurrent states.
ContextSet meanpool_encode(const MeanPoolParams& p, const std::vector<Tensor>& inputs);

struct PointEncoderParams {
    Tensor W_lift;  // d_in x 2
    Tensor b_lift;  // d_in
    BiRnnParams rnn;
};

// Lifts each 2-D city through a shared affine+tanh, then runs the
// bidirectional encoder; positions carry the city index and coordinates.
ContextSet point_encode(const PointEncoderParams& p,
                        const std::vector<std::array<double, 2>>& cities);

}  // namespace attnkit
