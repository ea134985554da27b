#include "ideal/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ideal/auto_annotation.hpp"
#include "ideal/diffusion.hpp"
#include "ideal/embedding.hpp"
#include "ideal/error.hpp"
#include "ideal/graph.hpp"
#include "ideal/parallel.hpp"
#include "ideal/retrieval.hpp"
#include "ideal/selection.hpp"
#include "ideal/theory.hpp"

namespace ideal::cli {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Fully resolved flags of one invocation.
struct RunConfig {
  std::string subcommand;
  std::string embeddings;
  std::string graph;
  std::string format = "auto";
  std::string subset;
  std::string selection;
  std::string queries;
  std::string out;
  std::string trace;
  std::string method = "ideal";
  std::size_t k = kDefaultNeighbors;
  std::uint32_t reps = kDefaultReps;
  std::size_t budget = 0;
  std::size_t prompts = kDefaultPromptsPerTarget;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool lazy = false;
  bool common_random_numbers = false;
  bool random_retrieval = false;
  double rho = kDefaultVoteDiscount;
  std::size_t trials = 100;
  std::size_t max_n = 0;
};

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// A path that does not exist is a bad argument (exit 2); failures while
// reading or writing an existing path are I/O errors (exit 3).
void require_input(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) fail_usage("no such file '" + path + "'");
}

EmbeddingSet load_normalized(const std::string& path, const std::string& format) {
  require_input(path);
  const auto fmt = format == "auto" ? format_from_path(path) : parse_embedding_format(format);
  return normalize(load_embeddings(path, fmt));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail_io("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  require_input(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) fail_usage(std::string("missing required flag ") + flag);
}

// Graph and (optionally) the embeddings it was built from, with vertex ids.
struct Pool {
  std::optional<EmbeddingSet> embeddings;
  std::optional<DiffusionGraph> graph;
  std::vector<std::string> ids;

  std::size_t size() const { return ids.size(); }

  VertexId index_of(const std::string& id) const {
    if (embeddings) return embeddings->index_of(id);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return static_cast<VertexId>(i);
    }
    fail_validation("unknown id '" + id + "'");
  }
};

Pool load_pool(const RunConfig& cfg, bool need_graph, bool need_embeddings) {
  Pool pool;
  if (!cfg.embeddings.empty()) pool.embeddings = load_normalized(cfg.embeddings, cfg.format);
  if (need_embeddings && !pool.embeddings) fail_usage("this command needs --embeddings");
  if (need_graph) {
    if (!cfg.graph.empty()) {
      require_input(cfg.graph);
      pool.graph = load_graph(cfg.graph);
      if (pool.embeddings && pool.graph->built_from() != pool.embeddings->content_hash()) {
        fail_validation("graph '" + cfg.graph + "' was not built from '" + cfg.embeddings + "'");
      }
    } else if (pool.embeddings) {
      pool.graph = build_graph(*pool.embeddings, cfg.k, cfg.threads);
    } else {
      fail_usage("this command needs --graph or --embeddings");
    }
  }
  if (pool.embeddings) {
    pool.ids = pool.embeddings->ids();
  } else if (pool.graph) {
    for (std::size_t i = 0; i < pool.graph->size(); ++i) pool.ids.push_back(std::to_string(i));
  } else {
    fail_usage("this command needs --graph or --embeddings");
  }
  return pool;
}

std::vector<std::string> read_selected_ids(const std::string& path) {
  const auto text = read_text(path);
  std::vector<std::string> ids;
  const auto doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_object() && doc.contains("selected")) {
    for (const auto& id : doc["selected"]) ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
  } else if (doc.is_array()) {
    for (const auto& id : doc) ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) ids.push_back(line);
    }
  }
  if (ids.empty()) fail_usage("subset file '" + path + "' lists no ids");
  return ids;
}

std::vector<VertexId> resolve_ids(const Pool& pool, const std::vector<std::string>& ids) {
  std::vector<VertexId> vertices;
  vertices.reserve(ids.size());
  for (const auto& id : ids) vertices.push_back(pool.index_of(id));
  return vertices;
}

Json config_json(const RunConfig& cfg) {
  Json c;
  c["subcommand"] = cfg.subcommand;
  if (!cfg.embeddings.empty()) c["embeddings"] = cfg.embeddings;
  if (!cfg.graph.empty()) c["graph"] = cfg.graph;
  if (!cfg.subset.empty()) c["subset"] = cfg.subset;
  if (!cfg.selection.empty()) c["selection"] = cfg.selection;
  if (!cfg.queries.empty()) c["queries"] = cfg.queries;
  c["format"] = cfg.format;
  c["k"] = cfg.k;
  c["seed"] = cfg.seed;
  return c;
}

Json metadata_json(const RunConfig& cfg, double wall_ms) {
  Json m;
  m["wall_time_ms"] = wall_ms;
  m["threads"] = resolve_threads(cfg.threads);
  return m;
}

int cmd_build_graph(const RunConfig& cfg, std::ostream& out) {
  require(cfg.embeddings, "--embeddings");
  require(cfg.out, "--out");
  const auto start = Clock::now();
  const auto e = load_normalized(cfg.embeddings, cfg.format);
  const auto g = build_graph(e, cfg.k, cfg.threads);
  save_graph(g, cfg.out);
  out << "n=" << g.size() << " k=" << g.k() << " edges=" << g.edge_count()
      << " build_time_ms=" << ms_since(start) << '\n';
  return kSuccess;
}

int cmd_select(const RunConfig& cfg, std::ostream& out) {
  require(cfg.out, "--out");
  const auto method = parse_method(cfg.method);
  if (cfg.budget < 1) fail_usage("--budget must be at least 1");
  const auto start = Clock::now();
  const bool graph_method = method == SelectionMethod::ideal ||
                            method == SelectionMethod::ideal_lazy ||
                            method == SelectionMethod::brute_force ||
                            (method == SelectionMethod::fast_votek && !cfg.graph.empty());
  const bool embedding_method = method == SelectionMethod::kmeans || method == SelectionMethod::mfl;
  const auto pool = load_pool(cfg, graph_method, embedding_method);

  SelectionResult result;
  switch (method) {
    case SelectionMethod::ideal:
    case SelectionMethod::ideal_lazy: {
      GreedyOptions options;
      options.reps = cfg.reps;
      options.seed = cfg.seed;
      options.lazy = cfg.lazy || method == SelectionMethod::ideal_lazy;
      options.mode = cfg.common_random_numbers ? CoinMode::common : CoinMode::fresh;
      options.threads = cfg.threads;
      result = greedy_select(*pool.graph, cfg.budget, options);
      break;
    }
    case SelectionMethod::brute_force:
      result = brute_force_optimal(*pool.graph, cfg.budget);
      break;
    case SelectionMethod::random:
      result = random_select(pool.size(), cfg.budget, cfg.seed);
      break;
    case SelectionMethod::kmeans: {
      KMeansOptions options;
      options.threads = cfg.threads;
      result = kmeans_select(*pool.embeddings, cfg.budget, cfg.seed, options);
      break;
    }
    case SelectionMethod::mfl:
      result = mfl_select(*pool.embeddings, cfg.budget, cfg.threads);
      break;
    case SelectionMethod::fast_votek: {
      const auto knn = pool.graph ? successor_lists(*pool.graph)
                                  : knn_lists(*pool.embeddings, cfg.k, cfg.threads);
      result = fast_votek_select(knn, cfg.budget, cfg.rho);
      break;
    }
  }

  Json doc;
  doc["method"] = method_name(result.method);
  doc["budget"] = result.budget;
  auto selected = Json::array();
  for (VertexId v : result.selected) selected.push_back(pool.ids.at(v));
  doc["selected"] = std::move(selected);
  doc["marginal_gains"] = result.marginal_gains;
  doc["objective"] = result.objective;
  doc["seed"] = result.seed;
  doc["evaluations"] = result.evaluations;
  auto config = config_json(cfg);
  config["method"] = cfg.method;
  config["budget"] = cfg.budget;
  config["reps"] = cfg.reps;
  config["lazy"] = cfg.lazy || method == SelectionMethod::ideal_lazy;
  config["coin_mode"] = cfg.common_random_numbers ? "common" : "fresh";
  config["rho"] = cfg.rho;
  doc["config"] = std::move(config);
  auto metadata = metadata_json(cfg, ms_since(start));
  metadata["selection_time_ms"] = result.wall_time_ms;
  doc["metadata"] = std::move(metadata);
  write_text(cfg.out, doc.dump(2) + "\n");

  out << "method=" << method_name(result.method) << " selected=" << result.selected.size()
      << " evaluations=" << result.evaluations << " wall_time_ms=" << result.wall_time_ms << '\n';
  return kSuccess;
}

int cmd_influence(const RunConfig& cfg, std::ostream& out) {
  require(cfg.graph, "--graph");
  require(cfg.subset, "--subset");
  const auto start = Clock::now();
  const auto pool = load_pool(cfg, true, false);
  const auto subset = resolve_ids(pool, read_selected_ids(cfg.subset));
  InfluenceOptions options;
  options.mode = cfg.common_random_numbers ? CoinMode::common : CoinMode::fresh;
  options.threads = cfg.threads;
  const auto est = estimate_influence(*pool.graph, subset, cfg.reps, cfg.seed, options);
  out << "influence " << est.mean << " +/- " << est.std_error << " (reps=" << est.reps
      << ", seed=" << est.seed << ", subset=" << est.subset_size << ")\n";

  if (!cfg.trace.empty()) {
    const auto canonical = canonical_seed_set(*pool.graph, subset);
    auto stream = cfg.common_random_numbers
                      ? RunStream::common(cfg.seed, 0)
                      : RunStream::fresh(cfg.seed, subset_hash(canonical), 0);
    export_cascade_trace(simulate_cascade(*pool.graph, canonical, stream), cfg.trace);
  }
  if (!cfg.out.empty()) {
    Json doc;
    doc["mean"] = est.mean;
    doc["std_error"] = est.std_error;
    doc["reps"] = est.reps;
    doc["seed"] = est.seed;
    doc["subset_size"] = est.subset_size;
    auto config = config_json(cfg);
    config["reps"] = cfg.reps;
    config["coin_mode"] = cfg.common_random_numbers ? "common" : "fresh";
    doc["config"] = std::move(config);
    doc["metadata"] = metadata_json(cfg, ms_since(start));
    write_text(cfg.out, doc.dump(2) + "\n");
  }
  return kSuccess;
}

int cmd_retrieve(const RunConfig& cfg, std::ostream& out) {
  require(cfg.embeddings, "--embeddings");
  require(cfg.selection, "--selection");
  require(cfg.queries, "--queries");
  if (cfg.prompts < 1) fail_usage("--c must be at least 1");
  const auto pool = load_pool(cfg, false, true);
  const auto annotated = resolve_ids(pool, read_selected_ids(cfg.selection));
  const RetrievalIndex index(*pool.embeddings, annotated);
  const auto queries = load_normalized(cfg.queries, cfg.format);

  std::string lines;
  for (VertexId q = 0; q < queries.size(); ++q) {
    Json record;
    record["query_id"] = queries.id(q);
    auto prompts = Json::array();
    auto similarities = Json::array();
    if (cfg.random_retrieval) {
      for (auto& id : index.random_retrieve(cfg.prompts, mix_keys(cfg.seed, q))) {
        prompts.push_back(id);
      }
    } else {
      for (const auto& hit : index.retrieve(queries.row(q), cfg.prompts)) {
        prompts.push_back(hit.id);
        similarities.push_back(hit.similarity);
      }
    }
    record["prompts"] = std::move(prompts);
    record["similarities"] = std::move(similarities);
    lines += record.dump() + "\n";
  }
  if (cfg.out.empty()) {
    out << lines;
  } else {
    write_text(cfg.out, lines);
    out << "queries=" << queries.size() << " pool=" << index.size() << '\n';
  }
  return kSuccess;
}

int cmd_auto_annotate(const RunConfig& cfg, std::ostream& out) {
  require(cfg.embeddings, "--embeddings");
  require(cfg.selection, "--selection");
  require(cfg.out, "--out");
  const auto start = Clock::now();
  const auto pool = load_pool(cfg, true, true);
  const auto manual = resolve_ids(pool, read_selected_ids(cfg.selection));
  const auto schedule =
      diffusion_schedule(*pool.graph, *pool.embeddings, manual, cfg.prompts, cfg.seed);
  if (const auto problem = validate_schedule(schedule, pool.size()); !problem.empty()) {
    // Construction guarantees validity; reaching this is a defect.
    throw std::logic_error("invalid schedule: " + problem);
  }
  auto doc = schedule_to_json(schedule, pool.ids);
  auto config = config_json(cfg);
  config["c"] = cfg.prompts;
  doc["config"] = std::move(config);
  doc["metadata"] = metadata_json(cfg, ms_since(start));
  write_text(cfg.out, doc.dump(2) + "\n");
  out << "coverage=" << schedule.scheduled_count() << "/" << pool.size()
      << " manual=" << schedule.manual.size() << " rounds=" << schedule.rounds.size()
      << " fallbacks=" << schedule.fallback_count() << '\n';
  return kSuccess;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const auto start = Clock::now();
  TheoryConfig theory;
  theory.trials = cfg.trials;
  theory.seed = cfg.seed;
  theory.threads = cfg.threads;
  if (cfg.max_n != 0) {
    theory.monotone_max_n = std::min<std::size_t>(cfg.max_n, 8);
    theory.submodular_max_n = std::min<std::size_t>(cfg.max_n, 6);
    theory.step_bound_max_n = cfg.max_n;
    theory.ratio_max_n = cfg.max_n;
  }
  const auto report = run_theory_checks(theory);
  out << format_report_table(report);
  if (!cfg.out.empty()) {
    auto doc = report_to_json(report);
    Json config;
    config["subcommand"] = cfg.subcommand;
    config["trials"] = cfg.trials;
    config["seed"] = cfg.seed;
    config["max_n"] = cfg.max_n;
    doc["config"] = std::move(config);
    doc["metadata"] = metadata_json(cfg, ms_since(start));
    write_text(cfg.out, doc.dump(2) + "\n");
  }
  return report.pass ? kSuccess : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Influence-driven selective annotation toolkit", "ideal"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  RunConfig cfg;
  std::optional<std::uint64_t> seed_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag, "Random seed (default: $IDEAL_SEED, else 0)");
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
    sub->add_option("--out", cfg.out, "Output path");
    sub->add_option("--format", cfg.format, "Embedding format: auto, jsonl, csv, raw-f32");
  };
  auto add_pool = [&](CLI::App* sub) {
    sub->add_option("--embeddings", cfg.embeddings, "Embedding file");
    sub->add_option("--graph", cfg.graph, "Graph file written by build-graph");
    sub->add_option("--k", cfg.k, "Successors per vertex when building a graph")
        ->check(CLI::PositiveNumber);
  };

  auto* build = app.add_subcommand("build-graph", "Build the k-NN diffusion graph");
  build->add_option("--embeddings", cfg.embeddings, "Embedding file");
  build->add_option("--k", cfg.k, "Successors per vertex")->check(CLI::PositiveNumber);
  add_common(build);

  auto* select = app.add_subcommand("select", "Select a subset to annotate");
  add_pool(select);
  select->add_option("--method", cfg.method,
                     "ideal, ideal-lazy, random, kmeans, mfl, fast-votek, brute-force");
  select->add_option("--budget", cfg.budget, "Annotation budget m")->required();
  select->add_option("--reps", cfg.reps, "Cascade runs per influence estimate")
      ->check(CLI::PositiveNumber);
  select->add_flag("--lazy", cfg.lazy, "Lazy (priority-queue) greedy");
  select->add_flag("--crn", cfg.common_random_numbers, "Common random numbers across candidates");
  select->add_option("--rho", cfg.rho, "Fast Vote-k discount base");
  add_common(select);

  auto* influence = app.add_subcommand("influence", "Estimate the influence of a subset");
  add_pool(influence);
  influence->add_option("--subset", cfg.subset, "Selection JSON or one id per line");
  influence->add_option("--reps", cfg.reps, "Cascade runs")->check(CLI::PositiveNumber);
  influence->add_flag("--crn", cfg.common_random_numbers, "Common random numbers");
  influence->add_option("--trace", cfg.trace, "Write one cascade trace as JSON");
  add_common(influence);

  auto* retrieve = app.add_subcommand("retrieve", "Retrieve prompts for query embeddings");
  retrieve->add_option("--embeddings", cfg.embeddings, "Pool embedding file");
  retrieve->add_option("--selection", cfg.selection, "Selection JSON of annotated ids");
  retrieve->add_option("--queries", cfg.queries, "Query embedding file");
  retrieve->add_option("--c", cfg.prompts, "Prompts per query");
  retrieve->add_flag("--random", cfg.random_retrieval, "Random retrieval baseline");
  add_common(retrieve);

  auto* annotate = app.add_subcommand("auto-annotate", "Diffusion-ordered annotation schedule");
  add_pool(annotate);
  annotate->add_option("--selection", cfg.selection, "Selection JSON of manual ids");
  annotate->add_option("--c", cfg.prompts, "Prompt sources per target");
  add_common(annotate);

  auto* verify = app.add_subcommand("verify", "Check the influence theory on random graphs");
  verify->add_option("--trials", cfg.trials, "Random graphs per check");
  verify->add_option("--max-n", cfg.max_n, "Override the largest graph size (0 = defaults)");
  add_common(verify);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("ideal");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  if (seed_flag) {
    cfg.seed = *seed_flag;
  } else if (const char* env = std::getenv("IDEAL_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    cfg.seed = std::strtoull(env, &end, 10);
    if (*end != '\0') {
      err << "error: IDEAL_SEED must be an unsigned integer\n";
      return kUsageError;
    }
  }

  try {
    if (build->parsed()) {
      cfg.subcommand = "build-graph";
      return cmd_build_graph(cfg, out);
    }
    if (select->parsed()) {
      cfg.subcommand = "select";
      return cmd_select(cfg, out);
    }
    if (influence->parsed()) {
      cfg.subcommand = "influence";
      return cmd_influence(cfg, out);
    }
    if (retrieve->parsed()) {
      cfg.subcommand = "retrieve";
      return cmd_retrieve(cfg, out);
    }
    if (annotate->parsed()) {
      cfg.subcommand = "auto-annotate";
      return cmd_auto_annotate(cfg, out);
    }
    cfg.subcommand = "verify";
    return cmd_verify(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::io ? kIoError : kUsageError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace ideal::cli
