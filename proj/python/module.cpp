#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "symrewrite/datagen.hpp"
#include "symrewrite/errors.hpp"
#include "symrewrite/evaluation.hpp"
#include "symrewrite/grammar.hpp"
#include "symrewrite/hashing.hpp"
#include "symrewrite/model.hpp"
#include "symrewrite/report.hpp"
#include "symrewrite/training.hpp"

namespace py = pybind11;
using namespace symrewrite;

namespace {

py::object biguint_to_int(const BigUint& v) {
    return py::module_::import("builtins").attr("int")(v.to_string());
}

py::dict summary_to_dict(const SweepSummary& s) {
    py::dict d;
    d["runs"] = s.runs;
    py::dict per_set;
    for (const auto& [name, st] : s.per_set) {
        py::dict stats;
        stats["mean"] = st.mean;
        stats["std"] = st.stddev;
        stats["min"] = st.min;
        stats["max"] = st.max;
        per_set[name.c_str()] = stats;
    }
    d["per_set"] = per_set;
    d["pearson_repeat_long"] =
        s.pearson_repeat_long ? py::cast(*s.pearson_repeat_long) : py::none();
    d["best_seed"] = s.best_seed;
    d["best_seed_nonstandard_mean"] = s.best_seed_nonstandard_mean;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Symbol-rewriting generalization experiment: task grammar, data "
              "generation, seq2seq-attention training, and seed sweeps.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TokenError>(m, "TokenError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<CompatError>(m, "CompatError", PyExc_ValueError);
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);

    py::enum_<BlockPolicy>(m, "BlockPolicy")
        .value("DISTINCT_WITHIN_BLOCK", BlockPolicy::DistinctWithinBlock)
        .value("WITH_REPLACEMENT", BlockPolicy::WithReplacement);

    py::enum_<RepeatMode>(m, "RepeatMode")
        .value("FORBIDDEN", RepeatMode::Forbidden)
        .value("ALLOWED", RepeatMode::Allowed)
        .value("REQUIRED_AT_LEAST_ONE", RepeatMode::RequiredAtLeastOne);

    py::class_<SplitRng>(m, "SplitRng")
        .def(py::init<uint64_t>(), py::arg("seed"))
        .def("split", py::overload_cast<std::string_view>(&SplitRng::split, py::const_))
        .def("split_index", py::overload_cast<uint64_t>(&SplitRng::split, py::const_))
        .def("next_u64", &SplitRng::next_u64)
        .def("uniform", &SplitRng::uniform, py::arg("a") = 0.0, py::arg("b") = 1.0)
        .def("next_below", &SplitRng::next_below, py::arg("n"));

    py::class_<Grammar>(m, "Grammar")
        .def(py::init<int, int, int, BlockPolicy>(), py::arg("num_inputs"),
             py::arg("alphabet_size"), py::arg("k"),
             py::arg("block_policy") = BlockPolicy::DistinctWithinBlock)
        .def_property_readonly("num_inputs", &Grammar::num_inputs)
        .def_property_readonly("alphabet_size", &Grammar::alphabet_size)
        .def_property_readonly("k", &Grammar::k)
        .def_property_readonly("block_policy", &Grammar::block_policy)
        .def("token_name", &Grammar::token_name)
        .def("token_id", &Grammar::token_id)
        .def("output_token", &Grammar::output_token, py::arg("input_symbol"), py::arg("index"))
        .def("generate_output", &Grammar::generate_output, py::arg("input"), py::arg("rng"))
        .def("validate", &Grammar::validate, py::arg("input"), py::arg("output"))
        .def("count_valid_outputs",
             [](const Grammar& g, const std::vector<int>& input) {
                 return biguint_to_int(g.count_valid_outputs(input));
             })
        .def("to_text", &Grammar::to_text)
        .def("save", &Grammar::save)
        .def_static("load", &Grammar::load)
        .def("__eq__", [](const Grammar& a, const Grammar& b) { return a == b; });

    py::class_<DistributionSpec>(m, "DistributionSpec")
        .def(py::init([](int min_len, int max_len, RepeatMode repeats, int size) {
                 return DistributionSpec{min_len, max_len, repeats, size};
             }),
             py::arg("min_len"), py::arg("max_len"), py::arg("repeats"), py::arg("size"))
        .def_readwrite("min_len", &DistributionSpec::min_len)
        .def_readwrite("max_len", &DistributionSpec::max_len)
        .def_readwrite("repeats", &DistributionSpec::repeats)
        .def_readwrite("size", &DistributionSpec::size);

    py::class_<Sample>(m, "Sample")
        .def(py::init<>())
        .def_readwrite("input", &Sample::input)
        .def_readwrite("output", &Sample::output);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("spec", &Dataset::spec)
        .def_readonly("samples", &Dataset::samples)
        .def_readonly("grammar_fingerprint", &Dataset::grammar_fingerprint)
        .def("__len__", [](const Dataset& d) { return d.samples.size(); });

    m.def("sample_input", &sample_input, py::arg("grammar"), py::arg("spec"), py::arg("rng"));
    m.def("generate_dataset", &generate_dataset, py::arg("grammar"), py::arg("spec"),
          py::arg("rng"));
    m.def("paper_splits", &paper_splits, py::arg("grammar"), py::arg("rng"),
          py::arg("train_size") = 100000, py::call_guard<py::gil_scoped_release>());
    m.def("write_dataset", &write_dataset, py::arg("path"), py::arg("grammar"), py::arg("dataset"));
    m.def("read_dataset", &read_dataset, py::arg("path"), py::arg("grammar"),
          py::arg("check_fingerprint") = true);
    m.def("grammar_fingerprint", &grammar_fingerprint);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_static("for_grammar", &ModelConfig::for_grammar)
        .def_readwrite("embed_dim", &ModelConfig::embed_dim)
        .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
        .def_readwrite("input_vocab", &ModelConfig::input_vocab)
        .def_readwrite("output_vocab", &ModelConfig::output_vocab)
        .def_readwrite("dropout_p", &ModelConfig::dropout_p)
        .def_readwrite("max_decode_len", &ModelConfig::max_decode_len);

    py::class_<ModelParams>(m, "ModelParams")
        .def_readonly("config", &ModelParams::config);

    m.def("init_params", [](const ModelConfig& config, uint64_t seed, double init_range) {
        SplitRng rng(seed);
        return init_params(config, rng, init_range);
    }, py::arg("config"), py::arg("seed"), py::arg("init_range") = 0.1);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("max_grad_norm", &TrainConfig::max_grad_norm)
        .def_readwrite("dropout_p", &TrainConfig::dropout_p)
        .def_readwrite("init_range", &TrainConfig::init_range)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("seed", &TrainConfig::seed);

    py::enum_<StopReason>(m, "StopReason")
        .value("VAL_PLATEAU_OR_DROP", StopReason::ValPlateauOrDrop)
        .value("MAX_EPOCHS", StopReason::MaxEpochs);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("epochs_run", &TrainReport::epochs_run)
        .def_readonly("val_accuracy_per_epoch", &TrainReport::val_accuracy_per_epoch)
        .def_readonly("val_valid_counts", &TrainReport::val_valid_counts)
        .def_readonly("train_loss_per_epoch", &TrainReport::train_loss_per_epoch)
        .def_readonly("stopped_reason", &TrainReport::stopped_reason)
        .def_readonly("selected_epoch", &TrainReport::selected_epoch);

    m.def("train",
          [](const Grammar& g, const Dataset& train_set, const Dataset& val_set,
             const ModelConfig& mc, const TrainConfig& tc) {
              return train(g, train_set, val_set, mc, tc);
          },
          py::arg("grammar"), py::arg("train_set"), py::arg("val_set"), py::arg("model_config"),
          py::arg("train_config"), py::call_guard<py::gil_scoped_release>());

    m.def("greedy_decode", &greedy_decode, py::arg("params"), py::arg("grammar"),
          py::arg("input_tokens"));
    m.def("accuracy", &accuracy, py::arg("params"), py::arg("grammar"), py::arg("dataset"),
          py::call_guard<py::gil_scoped_release>());
    m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("params"),
          py::arg("grammar"));
    m.def("load_checkpoint", [](const std::string& path) {
        auto [params, meta] = load_checkpoint(path);
        py::dict meta_d;
        meta_d["grammar_inputs"] = meta.grammar_inputs;
        meta_d["grammar_alphabet"] = meta.grammar_alphabet;
        meta_d["grammar_k"] = meta.grammar_k;
        meta_d["grammar_policy"] = to_string(meta.grammar_policy);
        meta_d["grammar_hash"] = meta.grammar_hash;
        return py::make_tuple(std::move(params), meta_d);
    });

    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("seed", &EvalResult::seed)
        .def_readonly("accuracy", &EvalResult::accuracy)
        .def_readonly("valid_counts", &EvalResult::valid_counts)
        .def_readonly("set_size", &EvalResult::set_size)
        .def_readonly("selected_epoch", &EvalResult::selected_epoch)
        .def_readonly("epochs_run", &EvalResult::epochs_run)
        .def_readonly("wall_time_s", &EvalResult::wall_time_s);

    m.def("run_seed", &run_seed, py::arg("grammar"), py::arg("splits"), py::arg("model_config"),
          py::arg("train_config"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

    m.def("sweep",
          [](const Grammar& g, const std::map<std::string, Dataset>& splits, const ModelConfig& mc,
             const TrainConfig& tc, const std::vector<uint64_t>& seeds, int workers) {
              SweepResult r;
              {
                  py::gil_scoped_release release;
                  r = sweep(g, splits, mc, tc, seeds, workers);
              }
              py::list failures;
              for (const FailedSeed& f : r.failures) {
                  failures.append(py::make_tuple(f.seed, f.error));
              }
              return py::make_tuple(r.results, failures);
          },
          py::arg("grammar"), py::arg("splits"), py::arg("model_config"), py::arg("train_config"),
          py::arg("seeds"), py::arg("workers") = 1);

    m.def("pearson", &pearson, py::arg("xs"), py::arg("ys"));
    m.def("summarize",
          [](const std::vector<EvalResult>& results) { return summary_to_dict(summarize(results)); });
    m.def("results_table", &results_table, py::arg("results"),
          py::arg("failures") = std::vector<FailedSeed>{});
    m.def("results_csv", &results_csv);
    m.def("results_boxplot_svg", &results_boxplot_svg);

    py::class_<FailedSeed>(m, "FailedSeed")
        .def_readonly("seed", &FailedSeed::seed)
        .def_readonly("error", &FailedSeed::error);

    m.attr("__version__") = "1.0.0";
}
