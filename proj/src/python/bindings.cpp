#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimic/candidates.hpp"
#include "mimic/corpus.hpp"
#include "mimic/errors.hpp"
#include "mimic/fragmenter.hpp"
#include "mimic/judge.hpp"
#include "mimic/llm_gateway.hpp"
#include "mimic/scoreboard.hpp"

namespace py = pybind11;
using namespace mimic;

namespace {

std::string verdict_str(judge::StyleVerdict v) {
    switch (v) {
        case judge::StyleVerdict::A: return "A";
        case judge::StyleVerdict::B: return "B";
        case judge::StyleVerdict::Equal: return "=";
    }
    return "=";
}

scoreboard::FactCounts counts_from_tuple(const std::tuple<std::size_t, std::size_t, std::size_t>& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

}  // namespace

PYBIND11_MODULE(_mimic_eval, m) {
    m.doc() = "persona-imitation evaluation core";

    py::register_exception<Error>(m, "MimicError");

    py::class_<ChatMessage>(m, "ChatMessage")
        .def(py::init([](const std::string& role, const std::string& content) {
                 return ChatMessage{role_from_string(role), content};
             }),
             py::arg("role"), py::arg("content"))
        .def_property_readonly("role",
                               [](const ChatMessage& msg) { return std::string(to_string(msg.role)); })
        .def_readonly("content", &ChatMessage::content)
        .def("__repr__", [](const ChatMessage& msg) {
            return "ChatMessage(" + std::string(to_string(msg.role)) + ", " + msg.content + ")";
        });

    py::class_<Dialog>(m, "Dialog")
        .def_readonly("id", &Dialog::id)
        .def_readonly("messages", &Dialog::messages)
        .def_property_readonly("tags", [](const Dialog& d) {
            std::vector<std::string> tags;
            for (Tag t : d.tags) tags.emplace_back(to_string(t));
            return tags;
        });

    py::class_<fragmenter::Fragment>(m, "Fragment")
        .def_readonly("source_id", &fragmenter::Fragment::source_id)
        .def_readonly("window_index", &fragmenter::Fragment::window_index)
        .def_readonly("messages", &fragmenter::Fragment::messages)
        .def_property_readonly("n_subdialogs", &fragmenter::Fragment::n_subdialogs);

    // corpus
    m.def("strip_artifacts",
          [](const std::string& text) { return corpus::strip_artifacts(text); },
          py::arg("utterance"));
    m.def("merge_consecutive", &corpus::merge_consecutive, py::arg("messages"));
    m.def("parse_transcript",
          [](const std::string& text, const std::string& persona) {
              return corpus::parse_transcript(text, persona);
          },
          py::arg("text"), py::arg("persona"));

    // fragmenter
    m.def("build_fragments", &fragmenter::build_fragments, py::arg("dialog"), py::arg("window"),
          py::arg("seed"));
    m.def("serialize_chat",
          py::overload_cast<const fragmenter::Fragment&>(&fragmenter::serialize_chat),
          py::arg("fragment"));
    m.def("parse_chat", &fragmenter::parse_chat, py::arg("json_text"));

    // judge prompts and parsers
    m.def("build_style_prompt", &judge::build_style_prompt, py::arg("original"),
          py::arg("message_a"), py::arg("message_b"));
    m.def("parse_style_verdict",
          [](const std::string& raw) { return verdict_str(judge::parse_style_verdict(raw)); },
          py::arg("raw"));
    m.def("build_fact_prompt", &judge::build_fact_prompt, py::arg("original"),
          py::arg("fragment_a"), py::arg("fragment_b"));
    m.def("parse_fact_extraction",
          [](const std::string& raw) {
              judge::FactExtraction e = judge::parse_fact_extraction(raw);
              py::dict out;
              out["original_facts"] = e.original_facts;
              out["matched_a"] = e.matched_a;
              out["extra_a"] = e.extra_a;
              out["matched_b"] = e.matched_b;
              out["extra_b"] = e.extra_b;
              out["warnings"] = e.sanitize_warnings;
              return out;
          },
          py::arg("raw"));
    m.def("style_prompt_version", []() { return std::string(judge::style_prompt_version()); });
    m.def("fact_prompt_version", []() { return std::string(judge::fact_prompt_version()); });

    // scoreboard
    m.def("prf1",
          [](std::size_t tp, std::size_t fp, std::size_t fn) {
              scoreboard::Metrics metrics = scoreboard::prf1({tp, fp, fn});
              return py::make_tuple(metrics.precision, metrics.recall, metrics.f1);
          },
          py::arg("tp"), py::arg("fp"), py::arg("fn"));
    m.def("noise_rate",
          [](std::size_t differing, std::size_t total) {
              return scoreboard::estimate_noise(differing, total).rate();
          },
          py::arg("differing"), py::arg("total"));
    m.def("z_value", &scoreboard::z_value, py::arg("confidence"));
    m.def("normal_quantile", &scoreboard::normal_quantile, py::arg("p"));
    m.def("significance_threshold",
          [](double noise_rate, double confidence) {
              return noise_rate * scoreboard::z_value(confidence);
          },
          py::arg("noise_rate"), py::arg("confidence"));
    m.def("style_winner",
          [](const std::string& model_a, const std::string& model_b, std::size_t a_wins,
             std::size_t b_wins, std::size_t equals, std::size_t invalids, double noise_rate,
             double confidence) -> std::optional<std::string> {
              scoreboard::PairScore score;
              score.model_a = model_a;
              score.model_b = model_b;
              score.a_wins = a_wins;
              score.b_wins = b_wins;
              score.equals = equals;
              score.invalids = invalids;
              score.n_samples = score.total() / 2;
              return scoreboard::significance(score, noise_rate, confidence).winner;
          },
          py::arg("model_a"), py::arg("model_b"), py::arg("a_wins"), py::arg("b_wins"),
          py::arg("equals"), py::arg("invalids"), py::arg("noise_rate"), py::arg("confidence"));
    m.def("f1_diff",
          [](const std::string& model_x, const std::tuple<std::size_t, std::size_t, std::size_t>& x,
             const std::string& model_y,
             const std::tuple<std::size_t, std::size_t, std::size_t>& y) {
              scoreboard::F1Diff diff =
                  scoreboard::f1_diff(model_x, scoreboard::prf1(counts_from_tuple(x)), model_y,
                                      scoreboard::prf1(counts_from_tuple(y)));
              return py::make_tuple(diff.diff_pp, diff.winner);
          },
          py::arg("model_x"), py::arg("counts_x"), py::arg("model_y"), py::arg("counts_y"));
}
