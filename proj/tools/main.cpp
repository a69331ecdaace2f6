// eqderiv command-line tool.
//
// Exit codes: 0 success, 1 some records failed (see the error report),
// 2 bad arguments or config, 3 file I/O failure.

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "eqderiv/client.hpp"
#include "eqderiv/config.hpp"
#include "eqderiv/generator.hpp"
#include "eqderiv/metrics.hpp"
#include "eqderiv/perturb.hpp"
#include "eqderiv/prompt.hpp"
#include "eqderiv/records.hpp"
#include "eqderiv/stats.hpp"

using namespace eqderiv;

namespace {

constexpr int kExitRecords = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out.flush()) throw IoError("cannot write " + path);
}

// Collects per-record problems and writes them as one JSON document.
struct ErrorReport {
  std::string command;
  Json errors = Json::array();
  Json summary = Json::object();

  void add(const std::string& where, const std::string& message) {
    errors.push_back({{"record", where}, {"message", message}});
  }
  void add_lines(const std::vector<LineError>& lines) {
    for (const auto& e : lines) add("line " + std::to_string(e.line), e.message);
  }
  void finish(const std::string& path) const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["summary"] = summary;
    j["errors"] = errors;
    std::cerr << j["summary"].dump() << '\n';
    for (const auto& e : errors) std::cerr << e["record"].get<std::string>() << ": " << e["message"].get<std::string>() << '\n';
    if (!path.empty()) write_file(path, j.dump(2) + "\n");
  }
};

struct ConfigOptions {
  std::string path;
  std::vector<std::string> overrides;
  unsigned threads = 0;

  GenConfig load() const {
    GenConfig cfg;
    if (!path.empty()) cfg = load_config(path, cfg);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (threads) cfg.threads = threads;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "Generator config file (key = value lines)");
    cmd->add_option("--set", overrides, "Override one config field, key=value")->take_all();
    cmd->add_option("--threads", threads, "Worker threads (default: config value)");
  }
};

SymbolTable parsing_table(const GenConfig& cfg) {
  if (cfg.vocabulary_path.empty()) return SymbolTable::parsing_default();
  return SymbolTable::parsing_default().merged(SymbolTable::load(cfg.vocabulary_path));
}

std::vector<DerivationRecord> load_derivations(const std::string& path, const SymbolTable& table,
                                               ErrorReport& report) {
  std::istringstream in(read_file(path));
  std::vector<LineError> errs;
  auto out = read_derivation_jsonl(in, &errs, table);
  report.add_lines(errs);
  return out;
}

bool looks_like_derivations(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return Json::parse(line).contains("steps");
    } catch (const std::exception&) {
      return false;
    }
  }
  return false;
}

template <typename T>
std::string to_jsonl(const std::vector<T>& records) {
  std::ostringstream os;
  write_jsonl(os, records);
  return os.str();
}

unsigned worker_count(unsigned configured, std::size_t n) {
  unsigned t = configured ? configured : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(n, 1)));
}

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// FNV-1a, so few-shot sampling depends only on the static id.
std::uint64_t id_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

PromptRecord prompt_for(const DerivationRecord& r) {
  PromptRecord p = build_prompt(r.derivation, r.id);
  p.static_id = r.static_id.empty() ? r.id : r.static_id;
  p.perturbation = r.perturbation;
  return p;
}

std::vector<PromptRecord> load_prompts(const std::string& path, const SymbolTable& table, ErrorReport& report) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::vector<LineError> errs;
  std::vector<PromptRecord> out;
  if (looks_like_derivations(text)) {
    for (const auto& r : read_derivation_jsonl(in, &errs, table)) {
      try {
        out.push_back(prompt_for(r));
      } catch (const std::exception& e) {
        report.add(r.id, e.what());
      }
    }
  } else {
    out = read_prompt_jsonl(in, &errs);
  }
  report.add_lines(errs);
  return out;
}

// ---------------------------------------------------------------------------

int cmd_generate(const ConfigOptions& co, std::size_t count, std::optional<std::uint64_t> seed,
                 const std::string& out, const std::string& errors) {
  if (count == 0) throw UsageError("--count must be at least 1");
  GenConfig cfg = co.load();
  if (seed) cfg.seed = *seed;
  const Generator gen(cfg);
  DatasetReport rep;
  const auto records = generate_dataset(gen, count, &rep);
  write_file(out, to_jsonl(records));
  ErrorReport report{"generate"};
  report.summary = {{"requested", rep.requested},         {"produced", rep.produced},
                    {"attempts", rep.attempts},           {"retry_exhausted", rep.retry_exhausted},
                    {"length_filtered", rep.length_filtered}, {"token_filtered", rep.token_filtered},
                    {"records_missing", rep.records_missing}};
  if (rep.records_missing) report.add("dataset", std::to_string(rep.records_missing) + " records hit attempt_cap");
  report.finish(errors);
  return rep.produced == count ? 0 : kExitRecords;
}

int cmd_perturb(const ConfigOptions& co, const std::string& kind_name, const std::string& in_path,
                const std::string& out, const std::string& errors) {
  const auto kind = perturbation_from_name(kind_name);
  if (!kind) throw UsageError("unknown perturbation kind '" + kind_name + "'");
  const GenConfig cfg = co.load();
  const Generator gen(cfg);
  ErrorReport report{"perturb"};
  const SymbolTable table = parsing_table(cfg);

  std::size_t input = 0, produced = 0;
  if (*kind == Perturbation::SR) {
    const auto prompts = load_prompts(in_path, table, report);
    input = prompts.size();
    std::vector<PromptRecord> outs;
    for (const auto& p : prompts) {
      PromptRecord base = p;
      if (base.static_id.empty()) base.static_id = base.id;
      if (auto r = remove_steps(base)) outs.push_back(std::move(*r));
    }
    produced = outs.size();
    write_file(out, to_jsonl(outs));
  } else {
    const auto records = load_derivations(in_path, table, report);
    input = records.size();
    std::vector<std::optional<DerivationRecord>> slots(records.size());
    parallel_for(records.size(), worker_count(cfg.threads, records.size()),
                 [&](std::size_t i) { slots[i] = perturb_record(records[i], *kind, gen); });
    std::vector<DerivationRecord> outs;
    for (auto& s : slots) {
      if (s) outs.push_back(std::move(*s));
    }
    produced = outs.size();
    write_file(out, to_jsonl(outs));
  }
  report.summary = {{"kind", std::string(perturbation_name(*kind))},
                    {"input", input},
                    {"produced", produced},
                    {"skipped", input - produced}};
  report.finish(errors);
  return report.errors.empty() ? 0 : kExitRecords;
}

int cmd_prompt(const ConfigOptions& co, const std::string& mode, const std::string& in_path,
               const std::string& train_path, std::uint64_t seed, const std::string& out, const std::string& errors) {
  if (mode != "finetune" && mode != "fewshot") throw UsageError("--mode must be finetune or fewshot");
  const GenConfig cfg = co.load();
  const SymbolTable table = parsing_table(cfg);
  ErrorReport report{"prompt"};
  const auto prompts = load_prompts(in_path, table, report);
  std::vector<PromptRecord> outs;
  if (mode == "finetune") {
    outs = prompts;
  } else {
    if (train_path.empty()) throw UsageError("--mode fewshot needs --train");
    const auto pool = load_prompts(train_path, table, report);
    for (const auto& p : prompts) {
      const std::string sid = p.static_id.empty() ? p.id : p.static_id;
      Rng rng = Rng::stream(seed, id_hash(sid));
      try {
        PromptRecord f = p;
        f.prompt = build_fewshot(p, pool, rng);
        outs.push_back(std::move(f));
      } catch (const InsufficientPool& e) {
        report.add(p.id, e.what());
      }
    }
  }
  write_file(out, to_jsonl(outs));
  report.summary = {{"mode", mode}, {"input", prompts.size()}, {"produced", outs.size()}};
  report.finish(errors);
  return report.errors.empty() ? 0 : kExitRecords;
}

int cmd_score(const std::string& pred_path, const std::string& ref_path, bool pairs, const std::string& rouge_name,
              const std::string& bleurt_path, const std::string& out, const std::string& csv,
              const std::string& errors) {
  ScoreOptions opt;
  const auto rv = rouge_from_name(rouge_name);
  if (!rv) throw UsageError("--rouge must be 1, 2 or L");
  opt.rouge = *rv;
  ErrorReport report{"score"};
  std::vector<LineError> errs;
  std::istringstream pin(read_file(pred_path));
  const auto preds = read_predictions(pin, &errs);
  report.add_lines(errs);
  const auto refs = load_prompts(ref_path, SymbolTable::parsing_default(), report);
  std::map<std::string, double> bleurt;
  if (!bleurt_path.empty()) {
    errs.clear();
    std::istringstream bin(read_file(bleurt_path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(bin, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const Json j = Json::parse(line);
        bleurt[j.at("id").get<std::string>()] = j.at("bleurt").get<double>();
      } catch (const std::exception& e) {
        report.add("bleurt line " + std::to_string(n), e.what());
      }
    }
  }
  const ScoreReport sr = score_records(preds, refs, opt, pairs, bleurt);
  write_file(out, report_json(sr).dump(2) + "\n");
  if (!csv.empty()) {
    std::ostringstream os;
    write_feature_csv(os, sr);
    write_file(csv, os.str());
  }
  for (const auto& id : sr.missing_predictions) report.add(id, "no prediction");
  for (const auto& id : sr.unmatched_static) report.add(id, "static record or its prediction is missing");
  report.summary = {{"references", refs.size()}, {"scored", sr.rows.size()}};
  report.finish(errors);
  return report.errors.empty() ? 0 : kExitRecords;
}

int cmd_stats(const ConfigOptions& co, const std::string& in_path, std::size_t top, const std::string& out,
              const std::string& errors) {
  const GenConfig cfg = co.load();
  ErrorReport report{"stats"};
  const auto records = load_derivations(in_path, parsing_table(cfg), report);
  std::vector<Derivation> ds;
  for (const auto& r : records) ds.push_back(r.derivation);
  write_file(out, stats_json(compute_stats(ds), top).dump(2) + "\n");
  report.summary = {{"derivations", ds.size()}};
  report.finish(errors);
  return report.errors.empty() ? 0 : kExitRecords;
}

int cmd_verify(const ConfigOptions& co, const std::string& in_path, const std::string& errors) {
  const GenConfig cfg = co.load();
  ErrorReport report{"verify"};
  const auto records = load_derivations(in_path, parsing_table(cfg), report);
  std::size_t valid = 0;
  for (const auto& r : records) {
    const auto v = replay(r.derivation);
    if (v.valid) {
      ++valid;
    } else {
      std::string where = r.id;
      if (v.first_invalid) where += " step " + std::to_string(*v.first_invalid);
      report.add(where, v.reason);
    }
  }
  report.summary = {{"records", records.size()}, {"valid", valid}};
  report.finish(errors);
  return report.errors.empty() ? 0 : kExitRecords;
}

int cmd_query(const EndpointConfig& ep, const std::string& in_path, const std::string& out,
              const std::string& errors) {
  ErrorReport report{"query"};
  const auto prompts = load_prompts(in_path, SymbolTable::parsing_default(), report);
  const auto results = query_records(ep, prompts);
  std::ostringstream os;
  std::size_t ok = 0;
  for (const auto& r : results) {
    if (r.completion) {
      ++ok;
      os << Json{{"schema_version", kSchemaVersion}, {"id", r.id}, {"prediction", *r.completion}}.dump() << '\n';
    } else {
      report.errors.push_back({{"record", r.id}, {"kind", r.error_kind}, {"message", r.error}});
    }
  }
  write_file(out, os.str());
  report.summary = {{"prompts", prompts.size()}, {"completed", ok}};
  report.finish(errors);
  return report.errors.empty() ? 0 : kExitRecords;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic equation derivations: generation, perturbation, prompts and scoring"};
  app.require_subcommand(1);
  std::string errors;
  app.add_option("--errors", errors, "Write the per-record error report (JSON) here");

  ConfigOptions co;
  std::string in, out = "-", train, kind, mode = "finetune";
  std::size_t count = 0, top = 10;
  std::optional<std::uint64_t> seed;
  std::uint64_t prompt_seed = 0;

  auto* gen = app.add_subcommand("generate", "Generate derivation records");
  co.attach(gen);
  gen->add_option("--count", count, "Number of records")->required();
  gen->add_option("--seed", seed, "Seed (overrides the config)");
  gen->add_option("--out", out, "Output JSONL ('-' for stdout)");

  ConfigOptions co_p;
  auto* per = app.add_subcommand("perturb", "Apply a perturbation to static records");
  co_p.attach(per);
  per->add_option("--kind", kind, "vr, ee, ag or sr")->required();
  per->add_option("--in", in, "Input JSONL")->required();
  per->add_option("--out", out, "Output JSONL");

  ConfigOptions co_pr;
  auto* pr = app.add_subcommand("prompt", "Render fine-tuning or few-shot prompts");
  co_pr.attach(pr);
  pr->add_option("--mode", mode, "finetune or fewshot");
  pr->add_option("--in", in, "Derivation or prompt JSONL")->required();
  pr->add_option("--train", train, "Example pool for few-shot prompts");
  pr->add_option("--seed", prompt_seed, "Few-shot sampling seed");
  pr->add_option("--out", out, "Output JSONL");

  std::string pred, ref, rouge = "2", bleurt, csv;
  bool pairs = false;
  auto* sc = app.add_subcommand("score", "Score predictions against reference targets");
  sc->add_option("--pred", pred, "Predictions JSONL ({\"id\", \"prediction\"})")->required();
  sc->add_option("--ref", ref, "Reference derivation or prompt JSONL")->required();
  sc->add_flag("--pairs", pairs, "Add static/perturbed pairwise differences and ratios");
  sc->add_option("--rouge", rouge, "ROUGE variant: 1, 2 or L");
  sc->add_option("--bleurt", bleurt, "External BLEURT scores JSONL ({\"id\", \"bleurt\"})");
  sc->add_option("--csv", csv, "Feature vectors CSV");
  sc->add_option("--out", out, "Report JSON");

  ConfigOptions co_s;
  auto* st = app.add_subcommand("stats", "Length, operation and chain statistics");
  co_s.attach(st);
  st->add_option("--in", in, "Derivation JSONL")->required();
  st->add_option("--top", top, "Chains kept per length (0: all)");
  st->add_option("--out", out, "Output JSON");

  ConfigOptions co_v;
  auto* ve = app.add_subcommand("verify", "Replay every record; exit 1 if any fails");
  co_v.attach(ve);
  ve->add_option("--in", in, "Derivation JSONL")->required();

  EndpointConfig ep;
  auto* qu = app.add_subcommand("query", "Send prompts to a chat-completions endpoint");
  qu->add_option("--in", in, "Prompt JSONL")->required();
  qu->add_option("--out", out, "Predictions JSONL");
  qu->add_option("--base-url", ep.base_url, "scheme://host[:port]");
  qu->add_option("--path", ep.path, "Request path");
  qu->add_option("--model", ep.model, "Model name");
  qu->add_option("--token-env", ep.token_env, "Environment variable holding the API token ('' for none)");
  qu->add_option("--temperature", ep.temperature, "Sampling temperature");
  qu->add_option("--timeout", ep.timeout_seconds, "Per-request timeout in seconds");
  qu->add_option("--retries", ep.max_retries, "Retries after a 5xx response");
  qu->add_option("--concurrency", ep.concurrency, "Requests in flight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(co, count, seed, out, errors);
    if (*per) return cmd_perturb(co_p, kind, in, out, errors);
    if (*pr) return cmd_prompt(co_pr, mode, in, train, prompt_seed, out, errors);
    if (*sc) return cmd_score(pred, ref, pairs, rouge, bleurt, out, csv, errors);
    if (*st) return cmd_stats(co_s, in, top, out, errors);
    if (*ve) return cmd_verify(co_v, in, errors);
    if (*qu) return cmd_query(ep, in, out, errors);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const VocabularyError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRecords;
  }
  return kExitConfig;
}
