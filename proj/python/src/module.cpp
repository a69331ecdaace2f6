#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "eqderiv/calculus.hpp"
#include "eqderiv/canonical.hpp"
#include "eqderiv/config.hpp"
#include "eqderiv/generator.hpp"
#include "eqderiv/latex.hpp"
#include "eqderiv/metrics.hpp"
#include "eqderiv/perturb.hpp"
#include "eqderiv/records.hpp"
#include "eqderiv/stats.hpp"

namespace py = pybind11;
using namespace eqderiv;

namespace {

// Records cross the boundary as JSON text; the Python wrapper turns them into
// dicts.

GenConfig make_config(const std::map<std::string, std::string>& fields) {
  GenConfig cfg;
  cfg.threads = 1;
  for (const auto& [k, v] : fields) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

DerivationRecord record_from(const std::string& text) { return derivation_record_from_json(Json::parse(text)); }

Perturbation kind_from(const std::string& name) {
  const auto p = perturbation_from_name(name);
  if (!p) throw std::invalid_argument("unknown perturbation '" + name + "'");
  return *p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Synthetic equation derivations";

  py::register_exception<LatexError>(m, "LatexError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RecordError>(m, "RecordError", PyExc_ValueError);

  m.def("normalize", [](const std::string& s) { return to_latex(parse_latex(s)); },
        "Parse LaTeX and print it back in canonical form.");
  m.def("normalize_equation", [](const std::string& s) { return to_latex(parse_equation(s)); });
  m.def("differentiate", [](const std::string& s, const std::string& var) {
    return to_latex(differentiate(parse_latex(s), var));
  });
  m.def("integrate", [](const std::string& s, const std::string& var) -> std::optional<std::string> {
    const auto a = IntegralTable::standard().antiderivative(parse_latex(s), var);
    if (!a) return std::nullopt;
    return to_latex(*a);
  }, "Antiderivative without a constant, or None on a table miss.");
  m.def("evaluate", [](const std::string& s, const std::map<std::string, double>& at) {
    return eval_numeric(parse_latex(s), at);
  });

  m.def("generate_jsonl", [](std::size_t count, std::uint64_t seed, const std::map<std::string, std::string>& cfg) {
    GenConfig c = make_config(cfg);
    c.seed = seed;
    std::vector<DerivationRecord> recs;
    {
      py::gil_scoped_release release;
      recs = generate_dataset(Generator(c), count);
    }
    std::ostringstream os;
    write_jsonl(os, recs);
    return os.str();
  }, py::arg("count"), py::arg("seed"), py::arg("config") = std::map<std::string, std::string>{});

  m.def("replay", [](const std::string& record) {
    const auto v = replay(record_from(record).derivation);
    return py::make_tuple(v.valid, v.reason);
  });

  m.def("perturb", [](const std::string& record, const std::string& kind,
                      const std::map<std::string, std::string>& cfg) -> std::optional<std::string> {
    const Generator gen(make_config(cfg));
    const auto out = perturb_record(record_from(record), kind_from(kind), gen);
    if (!out) return std::nullopt;
    return to_json(*out).dump();
  }, py::arg("record"), py::arg("kind"), py::arg("config") = std::map<std::string, std::string>{});

  m.def("prompt", [](const std::string& record) {
    const DerivationRecord r = record_from(record);
    PromptRecord p = build_prompt(r.derivation, r.id);
    p.static_id = r.static_id.empty() ? r.id : r.static_id;
    p.perturbation = r.perturbation;
    return to_json(p).dump();
  });
  m.def("remove_steps", [](const std::string& prompt_record) -> std::optional<std::string> {
    const auto out = remove_steps(prompt_record_from_json(Json::parse(prompt_record)));
    if (!out) return std::nullopt;
    return to_json(*out).dump();
  });

  m.def("stats", [](const std::string& jsonl, std::size_t top) {
    std::istringstream in(jsonl);
    std::vector<Derivation> ds;
    for (auto& r : read_derivation_jsonl(in)) ds.push_back(std::move(r.derivation));
    return stats_json(compute_stats(ds), top).dump();
  }, py::arg("jsonl"), py::arg("top") = 10);

  m.def("rouge", [](const std::string& c, const std::string& r, const std::string& variant) {
    const auto v = rouge_from_name(variant);
    if (!v) throw std::invalid_argument("ROUGE variant must be 1, 2 or L");
    return rouge(c, r, *v);
  }, py::arg("candidate"), py::arg("reference"), py::arg("variant") = "2");
  m.def("bleu", py::overload_cast<std::string_view, std::string_view, int>(&bleu), py::arg("candidate"),
        py::arg("reference"), py::arg("max_n") = 4);
  m.def("gleu", py::overload_cast<std::string_view, std::string_view, int>(&gleu), py::arg("candidate"),
        py::arg("reference"), py::arg("max_n") = 4);
  m.def("manual_score", [](const std::array<int, 6>& flags) { return manual_score(flags); },
        "Flags in the order overall, skip, repeat, incorrect, irrelevant, redundant; 1 = error-free.");
}
