#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "attnkit/checkpoint.hpp"
#include "attnkit/io.hpp"
#include "attnkit/tasks.hpp"
#include "attnkit/training.hpp"

namespace py = pybind11;
using namespace attnkit;

namespace {

Model make_model(const std::string& task, const std::string& attention,
                 const std::string& encoder, int vocab, int d_emb, int hidden, int d_a, int window,
                 std::uint64_t seed) {
    ModelConfig cfg;
    cfg.task = task_from_string(task);
    cfg.attention = attention_from_string(attention);
    cfg.encoder = encoder_from_string(encoder);
    cfg.vocab = vocab;
    cfg.d_emb = d_emb;
    cfg.hidden = hidden;
    cfg.d_a = d_a;
    cfg.window = window;
    return Model(cfg, seed);
}

std::vector<int> model_decode(const Model& model, const TaskInstance& inst, int beam) {
    ContextSet ctx = model.encode(inst);
    if (model.config().pointer())
        return pointer_decode(model.decoder(), model.attention(), ctx, true).order;
    const int max_len = static_cast<int>(inst.source.size()) * 2 + 10;
    auto hyps = beam_decode(model.decoder(), model.attention(), model.attention_mode(), ctx,
                            std::max(beam, 1), max_len);
    return hyps.empty() ? std::vector<int>{} : hyps.front().symbols;
}

std::vector<std::vector<double>> attention_matrix(const Model& model, const TaskInstance& inst) {
    ContextSet ctx = model.encode(inst);
    DecoderTrace trace;
    if (model.config().pointer())
        trace = pointer_decode(model.decoder(), model.attention(), ctx, true).trace;
    else
        trace = teacher_forced_logprob(model.decoder(), model.attention(),
                                       model.attention_mode(), ctx, inst.target)
                    .trace;
    std::vector<std::vector<double>> rows;
    for (const auto& step : trace.steps) rows.push_back(step.alpha);
    return rows;
}

}  // namespace

PYBIND11_MODULE(_attnkit, m) {
    m.doc() = "attention-based encoder-decoder toolkit";

    py::class_<TaskInstance>(m, "TaskInstance")
        .def(py::init<>())
        .def_readwrite("source", &TaskInstance::source)
        .def_readwrite("target", &TaskInstance::target)
        .def_readwrite("cities", &TaskInstance::cities)
        .def_readwrite("optimal_length", &TaskInstance::optimal_length)
        .def("__repr__", [](const TaskInstance& t) { return format_instance(t); });

    py::class_<EvalMetrics>(m, "EvalMetrics")
        .def_readonly("nll", &EvalMetrics::nll)
        .def_readonly("seq_acc", &EvalMetrics::seq_acc)
        .def_readonly("sym_acc", &EvalMetrics::sym_acc)
        .def_readonly("n", &EvalMetrics::n)
        .def_readonly("valid_frac", &EvalMetrics::valid_frac)
        .def_readonly("gap", &EvalMetrics::gap);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("grad_clip_norm", &TrainConfig::grad_clip_norm)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("mc_samples", &TrainConfig::mc_samples)
        .def_readwrite("baseline_decay", &TrainConfig::baseline_decay)
        .def_readwrite("variance_norm", &TrainConfig::variance_norm);

    py::class_<Model>(m, "Model")
        .def("decode", &model_decode, py::arg("instance"), py::arg("beam") = 1)
        .def("evaluate",
             [](const Model& model, const std::vector<TaskInstance>& insts, int beam) {
                 return evaluate(model, insts, beam);
             },
             py::arg("instances"), py::arg("beam") = 1)
        .def("attention_matrix", &attention_matrix)
        .def("train",
             [](Model& model, std::vector<TaskInstance> train_set,
                const std::vector<TaskInstance>& dev_set, const TrainConfig& cfg) {
                 return train(model, std::move(train_set), dev_set, cfg).log;
             })
        .def("save", [](const Model& model, const std::string& path) {
            save_checkpoint(path, model);
        });

    m.def("make_model", &make_model, py::arg("task"), py::arg("attention") = "soft",
          py::arg("encoder") = "birnn", py::arg("vocab") = 13, py::arg("d_emb") = 16,
          py::arg("hidden") = 32, py::arg("d_a") = 16, py::arg("K") = 3, py::arg("seed") = 1);
    m.def("load_model", &load_checkpoint);

    m.def("gen_copy", &gen_copy, py::arg("seed"), py::arg("count"), py::arg("vocab") = 13,
          py::arg("len_min") = 1, py::arg("len_max") = 10);
    m.def("gen_reverse", &gen_reverse, py::arg("seed"), py::arg("count"), py::arg("vocab") = 13,
          py::arg("len_min") = 1, py::arg("len_max") = 10);
    m.def("gen_monotone", &gen_monotone, py::arg("seed"), py::arg("count"),
          py::arg("n_phones") = 5, py::arg("frames_min") = 2, py::arg("frames_max") = 4,
          py::arg("len_min") = 2, py::arg("len_max") = 5, py::arg("noise_rate") = 0.1);
    m.def("gen_sort", &gen_sort, py::arg("seed"), py::arg("count"), py::arg("n_min") = 3,
          py::arg("n_max") = 7, py::arg("vocab") = 13);
    m.def("gen_tsp", &gen_tsp, py::arg("seed"), py::arg("count"), py::arg("n") = 5);
    m.def("tour_length", &tour_length);
    m.def("tsp_brute_force", &tsp_brute_force);
    m.def("write_instances", &write_instances);
    m.def("read_instances", &read_instances);
}
