#include <cmath>

#include "attnkit/cells.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace attnkit;
using testutil::close;
using testutil::mirror;
using testutil::random_gru;
using testutil::random_tensor;

TEST_CASE("tanh cell analytic cases") {
    TanhCellParams p;
    p.U = Tensor::zeros({2, 2});
    p.W = Tensor::zeros({2, 2});
    p.b = Tensor::zeros({2});
    Tensor h = tanh_cell_step(p, Tensor::from_values({2}, {0.3, -0.7}),
                              Tensor::from_values({2}, {1, 1}));
    CHECK(close(h.value(), {0, 0}));

    TanhCellParams q;
    q.U = Tensor::from_values({1, 1}, {0.9});
    q.W = Tensor::from_values({1, 1}, {1.0});
    q.b = Tensor::zeros({1});
    Tensor h2 = tanh_cell_step(q, Tensor::from_values({1}, {0.0}),
                               Tensor::from_values({1}, {0.5}));
    CHECK(close(h2.value()[0], std::tanh(0.5), 1e-15));
}

TEST_CASE("tanh cell matches scalar recomputation") {
    Rng rng(5);
    TanhCellParams p;
    p.U = random_tensor({3, 3}, rng);
    p.W = random_tensor({3, 2}, rng);
    p.b = random_tensor({3}, rng);
    Tensor h_prev = random_tensor({3}, rng);
    Tensor x = random_tensor({2}, rng);

    Tensor h = tanh_cell_step(p, h_prev, x);
    auto expect = oracle::vtanh(oracle::add(
        oracle::add(oracle::matvec(testutil::to_mat(p.U), h_prev.value()),
                    oracle::matvec(testutil::to_mat(p.W), x.value())),
        p.b.value()));
    CHECK(close(h.value(), expect, 1e-14));
    CHECK(h.value()[0] > -1.0);
    CHECK(h.value()[0] < 1.0);
}

TEST_CASE("gru gate closed keeps previous state") {
    Rng rng(9);
    GruParams g = random_gru(3, 3, rng);
    for (auto& v : g.b_u.value()) v = -40.0;  // u -> 0
    Tensor h_prev = random_tensor({3}, rng);
    Tensor h = gru_step(g, h_prev, random_tensor({3}, rng));
    CHECK(close(h.value(), h_prev.value(), 1e-12));
}

TEST_CASE("gru gate open takes candidate state") {
    Rng rng(10);
    GruParams g = random_gru(3, 3, rng);
    for (auto& v : g.b_u.value()) v = 40.0;  // u -> 1
    Tensor h_prev = random_tensor({3}, rng);
    Tensor x = random_tensor({3}, rng);
    Tensor h = gru_step(g, h_prev, x);

    auto w = mirror(g);
    auto r = oracle::vsigmoid(oracle::add(
        oracle::add(oracle::matvec(w.U_r, h_prev.value()), oracle::matvec(w.W_r, x.value())),
        w.b_r));
    auto cand = oracle::vtanh(oracle::add(
        oracle::add(oracle::matvec(w.U, h_prev.value()),
                    oracle::matvec(w.W, oracle::mul(r, x.value()))),
        w.b));
    CHECK(close(h.value(), cand, 1e-12));
}

TEST_CASE("gru matches scalar oracle, state bracketed by gates") {
    Rng rng(21);
    GruParams g = random_gru(4, 4, rng);
    Tensor h_prev = random_tensor({4}, rng);
    Tensor x = random_tensor({4}, rng);
    Tensor h = gru_step(g, h_prev, x);

    auto w = mirror(g);
    auto expect = oracle::gru_step(w, h_prev.value(), x.value());
    CHECK(close(h.value(), expect, 1e-12));

    auto u = oracle::vsigmoid(oracle::add(
        oracle::add(oracle::matvec(w.U_u, h_prev.value()), oracle::matvec(w.W_u, x.value())),
        w.b_u));
    auto r = oracle::vsigmoid(oracle::add(
        oracle::add(oracle::matvec(w.U_r, h_prev.value()), oracle::matvec(w.W_r, x.value())),
        w.b_r));
    auto cand = oracle::vtanh(oracle::add(
        oracle::add(oracle::matvec(w.U, h_prev.value()),
                    oracle::matvec(w.W, oracle::mul(r, x.value()))),
        w.b));
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(u[i] > 0.0);
        CHECK(u[i] < 1.0);
        CHECK(r[i] > 0.0);
        CHECK(r[i] < 1.0);
        CHECK(h.value()[i] >= std::min(cand[i], h_prev.value()[i]) - 1e-12);
        CHECK(h.value()[i] <= std::max(cand[i], h_prev.value()[i]) + 1e-12);
    }
}

TEST_CASE("unroll basics") {
    Rng rng(2);
    GruParams g = random_gru(3, 2, rng);
    Tensor h0 = random_tensor({3}, rng);

    auto one = unroll(gru_step, g, h0, {random_tensor({2}, rng)});
    CHECK(one.size() == 1);

    CHECK_THROWS_AS(unroll(gru_step, g, h0, std::vector<Tensor>{}), ShapeError);

    TanhCellParams p;
    p.U = Tensor::zeros({2, 2});
    p.W = random_tensor({2, 2}, rng);
    p.b = Tensor::zeros({2});
    auto states = unroll(tanh_cell_step, p, Tensor::zeros({2}),
                         {Tensor::zeros({2}), Tensor::zeros({2})});
    for (const auto& s : states) CHECK(close(s.value(), {0, 0}));
}

TEST_CASE("unroll is causal") {
    Rng rng(14);
    GruParams g = random_gru(3, 2, rng);
    Tensor h0 = random_tensor({3}, rng);
    std::vector<Tensor> inputs;
    for (int t = 0; t < 5; ++t) inputs.push_back(random_tensor({2}, rng));

    auto full = unroll(gru_step, g, h0, inputs);
    std::vector<Tensor> prefix(inputs.begin(), inputs.begin() + 3);
    auto part = unroll(gru_step, g, h0, prefix);
    for (int t = 0; t < 3; ++t) CHECK(close(full[t].value(), part[t].value(), 0.0));
}

TEST_CASE("length-5 gru unroll gradient vs finite differences") {
    Rng rng(33);
    GruParams g = random_gru(3, 2, rng);
    Tensor h0 = random_tensor({3}, rng);
    std::vector<Tensor> inputs;
    for (int t = 0; t < 5; ++t) inputs.push_back(random_tensor({2}, rng));

    auto loss = [&] { return sum(unroll(gru_step, g, h0, inputs).back()); };
    auto report = grad_check(loss,
                             {{"U", g.U},
                              {"W", g.W},
                              {"b", g.b},
                              {"U_u", g.U_u},
                              {"W_u", g.W_u},
                              {"b_u", g.b_u},
                              {"U_r", g.U_r},
                              {"W_r", g.W_r},
                              {"b_r", g.b_r},
                              {"h0", h0}},
                             1e-5, 1e-4);
    CHECK(report.passed);
}
