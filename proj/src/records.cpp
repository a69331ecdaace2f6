#include "eqderiv/records.hpp"

#include <istream>
#include <ostream>

#include "eqderiv/latex.hpp"

namespace eqderiv {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw RecordError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw RecordError(std::string("field '") + key + "' has the wrong type");
  }
}

void check_schema(const Json& j) {
  if (!j.is_object()) throw RecordError("record is not a JSON object");
  const int v = field<int>(j, "schema_version");
  if (v != kSchemaVersion) {
    throw RecordError("unsupported schema_version " + std::to_string(v));
  }
}

std::optional<Perturbation> perturbation_field(const Json& j) {
  const auto it = j.find("perturbation");
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw RecordError("field 'perturbation' has the wrong type");
  auto p = perturbation_from_name(it->get<std::string>());
  if (!p) throw RecordError("unknown perturbation '" + it->get<std::string>() + "'");
  return p;
}

template <typename R, typename Parse>
std::vector<R> read_lines(std::istream& is, std::vector<LineError>* errors, Parse parse) {
  std::vector<R> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(Json::parse(line)));
    } catch (const std::exception& e) {
      if (!errors) throw RecordError("line " + std::to_string(n) + ": " + e.what());
      errors->push_back({n, e.what()});
    }
  }
  return out;
}

}  // namespace

Json to_json(const DerivationRecord& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = r.id;
  j["seed"] = r.seed;
  Json steps = Json::array();
  for (const auto& s : r.derivation.steps) {
    Json step;
    step["latex"] = to_latex(s.equation);
    step["op"] = std::string(op_name(s.op));
    step["parents"] = s.parents;
    step["operand_latex"] = s.operand ? Json(to_latex(*s.operand)) : Json(nullptr);
    step["role"] = std::string(role_name(s.role));
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  if (r.perturbation) j["perturbation"] = std::string(perturbation_name(*r.perturbation));
  if (!r.static_id.empty()) j["static_id"] = r.static_id;
  return j;
}

Json to_json(const PromptRecord& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = r.id;
  j["static_id"] = r.static_id;
  j["perturbation"] = r.perturbation ? Json(std::string(perturbation_name(*r.perturbation))) : Json(nullptr);
  j["prompt"] = r.prompt;
  j["target"] = r.target;
  return j;
}

DerivationRecord derivation_record_from_json(const Json& j, const SymbolTable& table) {
  check_schema(j);
  DerivationRecord r;
  r.id = field<std::string>(j, "id");
  r.seed = field<std::uint64_t>(j, "seed");
  const auto it = j.find("steps");
  if (it == j.end() || !it->is_array()) throw RecordError("missing field 'steps'");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const Json& js = (*it)[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    Step s;
    try {
      s.equation = parse_equation(field<std::string>(js, "latex"), table);
      if (const auto o = js.find("operand_latex"); o != js.end() && !o->is_null()) {
        s.operand = parse_latex(o->get<std::string>(), table);
      }
    } catch (const RecordError&) {
      throw;
    } catch (const std::exception& e) {
      throw RecordError(where + e.what());
    }
    const auto op = op_from_name(field<std::string>(js, "op"));
    if (!op) throw RecordError(where + "unknown op '" + js["op"].get<std::string>() + "'");
    s.op = *op;
    s.parents = field<std::vector<std::size_t>>(js, "parents");
    const auto role = role_from_name(field<std::string>(js, "role"));
    if (!role) throw RecordError(where + "unknown role");
    s.role = *role;
    r.derivation.steps.push_back(std::move(s));
  }
  r.perturbation = perturbation_field(j);
  if (const auto s = j.find("static_id"); s != j.end() && s->is_string()) r.static_id = s->get<std::string>();
  return r;
}

PromptRecord prompt_record_from_json(const Json& j) {
  check_schema(j);
  PromptRecord r;
  r.id = field<std::string>(j, "id");
  if (const auto s = j.find("static_id"); s != j.end() && s->is_string()) r.static_id = s->get<std::string>();
  r.perturbation = perturbation_field(j);
  r.prompt = field<std::string>(j, "prompt");
  r.target = field<std::string>(j, "target");
  return r;
}

void write_jsonl(std::ostream& os, const std::vector<DerivationRecord>& records) {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

void write_jsonl(std::ostream& os, const std::vector<PromptRecord>& records) {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

std::vector<DerivationRecord> read_derivation_jsonl(std::istream& is, std::vector<LineError>* errors,
                                                    const SymbolTable& table) {
  return read_lines<DerivationRecord>(is, errors, [&](const Json& j) { return derivation_record_from_json(j, table); });
}

std::vector<PromptRecord> read_prompt_jsonl(std::istream& is, std::vector<LineError>* errors) {
  return read_lines<PromptRecord>(is, errors, [](const Json& j) { return prompt_record_from_json(j); });
}

}  // namespace eqderiv
