// astcrf: extract, split, train, predict, baseline and evaluate from the
// command line. Diagnostics go to stderr; results to stdout or -o files.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "astcrf/astcrf.hpp"

namespace fs = std::filesystem;
using namespace astcrf;

namespace {

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<TransformLabeling> load_dataset(const fs::path& path) {
  try {
    return dataset_from_json(read_json(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// Files given directly, plus the *.json files of any directory argument in name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a)) {
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(a);
    }
  }
  return out;
}

std::string stats_table(const std::vector<TransformLabeling>& data) {
  const auto s = labeling_stats(data);
  std::string out;
  char buf[96];
  for (std::size_t t = 1; t < kTransformCount; ++t) {
    const auto tr = static_cast<Transform>(t);
    auto it = s.per_transform.find(tr);
    std::snprintf(buf, sizeof buf, "%-16s %8d\n", std::string(to_string(tr)).c_str(),
                  it == s.per_transform.end() ? 0 : it->second);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-16s %8d\n%-16s %8d\n%-16s %8zu\n", "single", s.single, "multiple", s.multiple,
                "examples", data.size());
  return out + buf;
}

void warn_all(const std::vector<std::string>& lines) {
  for (const auto& l : lines) std::cerr << "warning: " << l << "\n";
}

Json ranked_to_json(const std::vector<TransformLabeling>& ranked, const std::vector<RankedLabeling>* scored) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    Json rec = {{"rank", i + 1}, {"labels", labels_to_json(ranked[i])}};
    if (scored) {
      rec["probability"] = (*scored)[i].probability;
      rec["score"] = (*scored)[i].score;
    }
    arr.push_back(std::move(rec));
  }
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repair-transform prediction over ASTs with a tree CRF"};
  app.require_subcommand(1);

  int threshold = kDefaultRootOpThreshold;
  std::vector<std::string> script_args;
  std::string out_path;
  auto* extract = app.add_subcommand("extract", "Edit scripts to a labeled dataset with per-transform counts");
  extract->add_option("scripts", script_args, "Edit-script files or directories of them")->required();
  extract->add_option("--threshold", threshold, "Maximum root edit operations per script")->capture_default_str();
  extract->add_option("-o,--output", out_path, "Dataset file (default stdout)");

  std::string data_path, train_out, test_out;
  int per_transform = 300, multiple = 1000;
  std::uint64_t seed = 0;
  auto* split = app.add_subcommand("split", "Seeded train/test split");
  split->add_option("--data", data_path, "Dataset file")->required();
  split->add_option("--per-transform", per_transform, "Test examples per single transform")->capture_default_str();
  split->add_option("--multiple", multiple, "Test examples with several transforms")->capture_default_str();
  split->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  split->add_option("--train-out", train_out, "Train dataset file")->required();
  split->add_option("--test-out", test_out, "Test dataset file")->required();

  std::string manifest_path, log_path;
  TrainConfig config;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a manifest");
  train_cmd->add_option("manifest", manifest_path, "{\"train\": [files], \"config\": {...}}")->required();
  auto* q_opt = train_cmd->add_option("--q", config.q, "Prior magnitude")->capture_default_str();
  auto* d_opt = train_cmd->add_option("--delta2", config.delta2, "Gaussian prior variance")->capture_default_str();
  auto* g_opt = train_cmd->add_option("--iters", config.G, "Maximum gradient evaluations")->capture_default_str();
  train_cmd->add_option("-o,--output", out_path, "Model file")->required();
  train_cmd->add_option("--log", log_path, "Training log, one JSON record per line");

  std::string model_path, ast_path;
  int k = 3;
  auto* predict = app.add_subcommand("predict", "Ranked labelings of an AST");
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--ast", ast_path, "AST document")->required();
  predict->add_option("--k", k, "Number of labelings")->capture_default_str();

  std::string baseline_path;
  bool rank = false;
  auto* baseline = app.add_subcommand("baseline", "Build a frequency baseline, or rank an AST with one");
  baseline->add_option("--train", data_path, "Training dataset (build mode)");
  baseline->add_flag("--rank", rank, "Rank --ast with --baseline");
  baseline->add_option("--baseline", baseline_path, "Baseline file (rank mode)");
  baseline->add_option("--ast", ast_path, "AST document (rank mode)");
  baseline->add_option("--k", k, "Number of labelings")->capture_default_str();
  baseline->add_option("-o,--output", out_path, "Baseline file (default stdout)");

  std::string test_path, json_path;
  std::vector<int> ks{1, 3};
  auto* eval = app.add_subcommand("evaluate", "Top-k exact-match accuracy on a test set");
  eval->add_option("--test", test_path, "Test dataset")->required();
  auto* model_opt = eval->add_option("--model", model_path, "Model file");
  auto* base_opt = eval->add_option("--baseline", baseline_path, "Baseline file");
  model_opt->excludes(base_opt);
  eval->add_option("--k", ks, "Cut-offs")->capture_default_str();
  eval->add_option("--json", json_path, "Machine-readable report file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      std::vector<EditScript> scripts;
      for (const auto& p : expand_inputs(script_args)) scripts.push_back(load_edit_script(p));
      const auto ds = prepare_dataset(scripts, threshold);
      warn_all(ds.log);
      write_text(out_path, dataset_to_json(ds.examples).dump(1) + "\n");
      (out_path.empty() ? std::cerr : std::cout) << stats_table(ds.examples);
    } else if (*split) {
      const auto s = split_dataset(load_dataset(data_path), per_transform, multiple, seed);
      warn_all(s.warnings);
      write_text(train_out, dataset_to_json(s.train).dump(1) + "\n");
      write_text(test_out, dataset_to_json(s.test).dump(1) + "\n");
      std::cout << "train " << s.train.size() << ", test " << s.test.size() << "\n";
    } else if (*train_cmd) {
      const fs::path manifest(manifest_path);
      const Json m = read_json(manifest);
      if (!m.contains("train") || !m["train"].is_array()) throw ParseError(manifest_path + ": 'train' must be a list");
      if (auto c = m.find("config"); c != m.end()) {
        if (!q_opt->count() && c->contains("q")) config.q = c->at("q").get<double>();
        if (!d_opt->count() && c->contains("delta2")) config.delta2 = c->at("delta2").get<double>();
        if (!g_opt->count() && c->contains("G")) config.G = c->at("G").get<int>();
      }
      std::vector<TransformLabeling> data;
      for (const auto& f : m["train"]) {
        auto part = load_dataset(manifest.parent_path() / f.get<std::string>());
        data.insert(data.end(), part.begin(), part.end());
      }
      TrainReport rep;
      const Model model = train(data, build_vocabulary(data), build_admissible_sets(data), config, &rep);
      write_text(out_path, serialize_model(model));
      if (!log_path.empty()) {
        std::string lines;
        for (const auto& r : rep.log) lines += train_record_to_json(r).dump() + "\n";
        write_text(log_path, lines);
      }
      std::cout << "examples " << data.size() << ", features " << model.size() << ", evaluations " << rep.evaluations
                << ", objective " << rep.objective << ", stop: " << rep.stop_reason << "\n";
    } else if (*predict) {
      const Model model = parse_model(read_text_file(model_path));
      const Ast ast = parse_ast_document(read_text_file(ast_path));
      InstanceGraph g(ast, model);
      warn_all(g.warnings());
      const auto pot = compute_potentials(g, model.weights);
      const auto ranked = top_k(g, pot, sum_product(g, pot).log_z, k);
      std::vector<TransformLabeling> labelings;
      for (const auto& r : ranked) labelings.push_back(r.labeling);
      std::cout << ranked_to_json(labelings, &ranked).dump(1) << "\n";
    } else if (*baseline) {
      if (rank) {
        if (baseline_path.empty() || ast_path.empty()) throw Error("--rank needs --baseline and --ast");
        const auto b = baseline_from_json(read_json(baseline_path));
        const auto ranked = baseline_rank(parse_ast_document(read_text_file(ast_path)), b, k);
        std::cout << ranked_to_json(ranked, nullptr).dump(1) << "\n";
      } else {
        if (data_path.empty()) throw Error("baseline needs --train, or --rank");
        write_text(out_path, baseline_to_json(build_baseline(load_dataset(data_path))).dump(1) + "\n");
      }
    } else if (*eval) {
      const auto test = load_dataset(test_path);
      EvalReport rep;
      if (!model_path.empty()) {
        const Model model = parse_model(read_text_file(model_path));
        rep = evaluate(test, model_predictor(model), ks);
      } else if (!baseline_path.empty()) {
        const auto b = baseline_from_json(read_json(baseline_path));
        rep = evaluate(test, baseline_predictor(b), ks);
      } else {
        throw Error("evaluate needs --model or --baseline");
      }
      std::cout << eval_report_table(rep);
      if (!json_path.empty()) write_text(json_path, eval_report_to_json(rep).dump(1) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
