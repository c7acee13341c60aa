// Command-line front end: lexicon stats, classification, single-screen
// grounding, batch evaluation and the HTTP service.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "grounding/error.hpp"
#include "grounding/eval.hpp"
#include "grounding/grounding.hpp"
#include "grounding/intent_prediction.hpp"
#include "grounding/kernels.hpp"
#include "grounding/lexicon_db.hpp"
#include "grounding/service.hpp"

using namespace grounding;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string db;
  std::string labels;
  std::string predictor;
  std::string stopwords;
  std::size_t top_k = 5;
  std::uint64_t seed = 0;
};

LabelSet load_labels(const CommonArgs& a) {
  return a.labels.empty() ? LabelSet::defaults() : LabelSet::from_file(a.labels);
}

LexiconDb load_db(const CommonArgs& a) {
  IngestReport report;
  auto db = LexiconDb::open(a.db, load_labels(a), &report);
  if (!report.rejected.empty()) {
    std::cerr << "warning: " << report.rejected.size() << " pair record(s) rejected";
    const auto& first = report.rejected.front();
    std::cerr << " (first: line " << first.line << ", " << first.reason << ")\n";
  }
  return db;
}

GroundingConfig grounding_config(const CommonArgs& a) {
  GroundingConfig cfg;
  cfg.predictor.k = a.top_k;
  if (!a.predictor.empty()) apply_predictor_spec(a.predictor, cfg.predictor);
  if (!a.stopwords.empty()) cfg.stopwords = StopwordSet::from_file(a.stopwords);
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_all(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_ranking_table(const LabelRanking& ranking, std::ostream& os) {
  os << "Agent votes\n";
  for (const auto& av : ranking.agents) {
    std::string name(agent_name(av.agent));
    if (!is_deterministic(av.agent)) name += " (n=" + std::to_string(sample_size(av.agent)) + ")";
    char buf[32];
    std::snprintf(buf, sizeof buf, "  %-13s", name.c_str());
    os << buf;
    if (av.labels.empty()) os << "(abstain)";
    for (std::size_t i = 0; i < av.labels.size(); ++i) os << (i ? ", " : "") << av.labels[i];
    os << "\n";
  }
  os << "Ranking\n";
  int rank = 1;
  for (const auto& t : ranking.tallies) {
    os << "  " << rank++ << ". " << t.label << "  votes=" << t.votes << " (deterministic " << t.deterministic_votes
       << ")\n";
  }
  if (ranking.tallies.empty()) os << "  (empty)\n";
}

int cmd_db_stats(const CommonArgs& a, std::size_t top, bool as_json) {
  auto db = load_db(a);
  const auto& meta = db.metadata();
  auto labels = db.top_labels(top);
  if (as_json) {
    json top_json = json::array();
    for (const auto& lc : labels) top_json.push_back({{"label", lc.label}, {"pairs", lc.count}, {"share", lc.percentage}});
    std::cout << json{{"pairs", meta.pair_total}, {"words", meta.word_total}, {"source", meta.source},
                      {"top_labels", top_json}}
                     .dump(2)
              << "\n";
    return 0;
  }
  std::cout << "source:         " << meta.source << "\n"
            << "pairs:          " << meta.pair_total << "\n"
            << "distinct words: " << meta.word_total << "\n"
            << "top " << labels.size() << " labels by pair count:\n";
  for (const auto& lc : labels) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-16s %12llu  %6.2f%%\n", lc.label.c_str(),
                  static_cast<unsigned long long>(lc.count), lc.percentage * 100.0);
    std::cout << buf;
  }
  return 0;
}

int cmd_ground(const CommonArgs& a, const std::string& intent_text, const std::string& screen_path,
               const std::string& mode, bool overlay) {
  auto db = load_db(a);
  auto cfg = grounding_config(a);
  if (mode == "cv_only") cfg.mode = SearchMode::cv_only;
  else if (mode == "text_only") cfg.mode = SearchMode::text_only;
  auto predictor = make_predictor(cfg.predictor);
  std::vector<ScreenWarning> warnings;
  auto screen = load_screen_file(screen_path, db.label_set(), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w.path << ": " << w.message << "\n";
  auto result = ground(Intent(intent_text), screen, db, cfg, *predictor, Seed{a.seed});
  json out = to_json(result);
  out["screen_id"] = screen.id;
  if (overlay) {
    json boxes = json::array();
    int rank = 1;
    for (const auto& t : result.targets) {
      boxes.push_back({{"id", t.element_id},
                       {"rank", rank++},
                       {"kind", to_string(result.path)},
                       {"rect", {static_cast<double>(t.bbox.x) / screen.width, static_cast<double>(t.bbox.y) / screen.height,
                                 static_cast<double>(t.bbox.w) / screen.width, static_cast<double>(t.bbox.h) / screen.height}}});
    }
    out["overlay"] = std::move(boxes);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_classify(const CommonArgs& a, const std::string& words_path, const std::string& intent_text,
                 const std::string& format) {
  auto db = load_db(a);
  std::vector<DescriptiveWord> words;
  json extra = json::object();
  if (!words_path.empty()) {
    json doc = json::parse(read_all(words_path));
    std::vector<WordScore> raw;
    for (const auto& item : doc) {
      if (item.is_array()) raw.push_back({item.at(0).get<std::string>(), item.at(1).get<double>()});
      else raw.push_back({item.at("word").get<std::string>(), item.at("probability").get<double>()});
    }
    words = normalize_predictions(std::move(raw), std::max(a.top_k, doc.size()), words_path);
  } else {
    auto cfg = grounding_config(a);
    auto predictor = make_predictor(cfg.predictor);
    auto prompt = build_prompt(Intent(intent_text), cfg.predictor);
    words = predict_words(prompt, cfg.predictor, *predictor);
    extra["prompt"] = prompt;
  }
  auto ranking = classify(words, db, Seed{a.seed});
  if (format == "table" || format == "both") {
    std::cout << "Words\n";
    for (const auto& w : words) std::cout << "  " << w.rank << ". " << w.word << "  p=" << w.probability << "\n";
    print_ranking_table(ranking, std::cout);
  }
  if (format == "json" || format == "both") {
    json out = to_json(ranking);
    json wj = json::array();
    for (const auto& w : words) wj.push_back({{"rank", w.rank}, {"word", w.word}, {"probability", w.probability}});
    out["words"] = std::move(wj);
    out.update(extra);
    std::cout << out.dump(2) << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::string dataset;
  std::string screens;
  std::string splits;
  std::string ablate = "cv_only,text_only";
  std::string baseline = "1,2,3,5";
  std::size_t trials = 1000;
  std::string report;
  double threshold = 0.25;
  std::string basis = "ground_truth";
  std::size_t eval_top_k = 1;
  bool serial = false;
};

int cmd_eval(const CommonArgs& a, const EvalArgs& e) {
  auto db = load_db(a);
  EvalConfig cfg;
  cfg.grounding = grounding_config(a);
  cfg.rule.threshold = e.threshold;
  if (e.basis == "output") cfg.rule.basis = OverlapBasis::output;
  else if (e.basis != "ground_truth") throw Error("--basis must be ground_truth or output");
  cfg.eval_top_k = e.eval_top_k;
  cfg.trials = e.trials;
  cfg.policy = e.serial ? ExecutionPolicy::serial : ExecutionPolicy::parallel;
  if (!e.splits.empty()) {
    cfg.splits.clear();
    for (const auto& s : split_list(e.splits)) cfg.splits.push_back(parse_split_filter(s));
  }
  auto ablations = split_list(e.ablate);
  cfg.ablate_cv_only = std::find(ablations.begin(), ablations.end(), "cv_only") != ablations.end();
  cfg.ablate_text_only = std::find(ablations.begin(), ablations.end(), "text_only") != ablations.end();
  cfg.baselines.clear();
  for (const auto& x : split_list(e.baseline)) {
    if (x == "none") continue;
    cfg.baselines.push_back(std::stoul(x));
  }

  auto predictor = make_predictor(cfg.grounding.predictor);
  auto cases = load_dataset(e.dataset);
  auto screens = ScreenStore::load_directory(e.screens, db.label_set());
  auto report = evaluate(cases, screens, db, cfg, *predictor, Seed{a.seed});
  std::cout << render_report(report);
  if (!e.report.empty()) {
    std::ofstream out(e.report);
    if (!out) throw Error("cannot write report " + e.report);
    out << to_json(report).dump(2) << "\n";
    std::cout << "report written to " << e.report << "\n";
  }
  return 0;
}

int cmd_serve(const CommonArgs& a, const std::string& bind, const std::string& screens_dir,
              const std::string& seed_policy, bool seed_given) {
  auto db = std::make_shared<const LexiconDb>(load_db(a));
  auto cfg = grounding_config(a);
  std::shared_ptr<const WordPredictor> predictor = make_predictor(cfg.predictor);
  ScreenStore screens;
  if (!screens_dir.empty()) screens = ScreenStore::load_directory(screens_dir, db->label_set());
  ServiceOptions options;
  if (seed_policy == "fixed") options.seed_policy = SeedPolicy::fixed;
  else if (seed_policy != "per-request") throw Error("--seed-policy must be fixed or per-request");
  if (seed_given) options.fixed_seed = Seed{a.seed};
  GroundingService service(db, std::move(screens), cfg, predictor, options);

  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error("--bind must be host:port");
  std::string host = bind.substr(0, colon);
  int port = std::stoi(bind.substr(colon + 1));
  httplib::Server server;
  service.mount(server);
  std::cerr << "serving on " << host << ":" << port << " (" << db->metadata().pair_total << " pairs, "
            << predictor->describe() << ")\n";
  if (!server.listen(host, port)) throw Error("cannot bind " + bind);
  return 0;
}

void add_db_options(CLI::App* cmd, CommonArgs& a, bool require_db = true) {
  auto* opt = cmd->add_option("--db", a.db, "Pair file (TSV) or binary snapshot");
  if (require_db) opt->required();
  cmd->add_option("--labels", a.labels, "Label set file (default: built-in 80 labels)");
}

void add_pipeline_options(CLI::App* cmd, CommonArgs& a, bool require_predictor = true) {
  auto* opt = cmd->add_option("--predictor", a.predictor, "fixture:<path> or remote:<url>");
  if (require_predictor) opt->required();
  cmd->add_option("--top-k", a.top_k, "Descriptive words taken from the predictor")->check(CLI::PositiveNumber);
  cmd->add_option("--stopwords", a.stopwords, "Stopword file overriding the built-in list");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground natural-language intents to on-screen operational areas"};
  app.require_subcommand(1);
  CommonArgs common;

  auto* db_cmd = app.add_subcommand("db", "Lexicon database tools");
  db_cmd->require_subcommand(1);
  auto* stats = db_cmd->add_subcommand("stats", "Print pair totals and top labels");
  std::size_t stats_top = 20;
  bool stats_json = false;
  add_db_options(stats, common);
  stats->add_option("--top", stats_top, "Number of labels to list");
  stats->add_flag("--json", stats_json, "Emit JSON");
  auto* snapshot = db_cmd->add_subcommand("snapshot", "Write a binary snapshot of a pair file");
  std::string snapshot_out;
  add_db_options(snapshot, common);
  snapshot->add_option("--out", snapshot_out, "Snapshot path")->required();

  auto* classify_cmd = app.add_subcommand("classify", "Rank local labels for descriptive words");
  std::string words_path;
  std::string classify_intent;
  std::string format = "both";
  add_db_options(classify_cmd, common);
  add_pipeline_options(classify_cmd, common, false);
  auto* words_opt = classify_cmd->add_option("--words", words_path, "JSON list of [word, probability] ('-' for stdin)");
  auto* intent_opt = classify_cmd->add_option("--intent", classify_intent, "Intent text (uses --predictor)");
  words_opt->excludes(intent_opt);
  classify_cmd->add_option("--seed", common.seed, "Seed for the random agents");
  classify_cmd->add_option("--format", format, "table, json or both")->check(CLI::IsMember({"table", "json", "both"}));

  auto* ground_cmd = app.add_subcommand("ground", "Ground one intent on one screen");
  std::string intent_text;
  std::string screen_path;
  std::string mode = "full";
  bool overlay = false;
  add_db_options(ground_cmd, common);
  add_pipeline_options(ground_cmd, common);
  ground_cmd->add_option("--intent", intent_text, "Intent text")->required();
  ground_cmd->add_option("--screen", screen_path, "Screen annotation JSON")->required();
  ground_cmd->add_option("--seed", common.seed, "Seed for the random agents");
  ground_cmd->add_option("--mode", mode, "full, cv_only or text_only")
      ->check(CLI::IsMember({"full", "cv_only", "text_only"}));
  ground_cmd->add_flag("--overlay", overlay, "Include normalised overlay rectangles for a UI");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a dataset of intents");
  EvalArgs eval_args;
  add_db_options(eval_cmd, common);
  add_pipeline_options(eval_cmd, common);
  eval_cmd->add_option("--dataset", eval_args.dataset, "Cases (JSON lines)")->required();
  eval_cmd->add_option("--screens", eval_args.screens, "Directory of screen annotations")->required();
  eval_cmd->add_option("--splits", eval_args.splits, "Comma-separated splits to report (default: all)");
  eval_cmd->add_option("--ablate", eval_args.ablate, "Ablations: cv_only,text_only or none");
  eval_cmd->add_option("--baseline", eval_args.baseline, "UIED_Random_x selection counts, or none");
  eval_cmd->add_option("--trials", eval_args.trials, "Baseline trials per case")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", common.seed, "Run seed");
  eval_cmd->add_option("--report", eval_args.report, "Write the JSON report here");
  eval_cmd->add_option("--threshold", eval_args.threshold, "Overlap threshold")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--basis", eval_args.basis, "Overlap basis: ground_truth or output");
  eval_cmd->add_option("--eval-top-k", eval_args.eval_top_k, "Targets consumed per case")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--serial", eval_args.serial, "Use the serial reference kernels");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP grounding service");
  std::string bind = "127.0.0.1:8080";
  std::string screens_dir;
  std::string seed_policy = "per-request";
  add_db_options(serve_cmd, common);
  add_pipeline_options(serve_cmd, common);
  serve_cmd->add_option("--bind", bind, "host:port");
  serve_cmd->add_option("--screens", screens_dir, "Directory of screen annotations");
  serve_cmd->add_option("--seed-policy", seed_policy, "fixed or per-request");
  auto* serve_seed = serve_cmd->add_option("--seed", common.seed, "Seed used by the fixed policy");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_db_stats(common, stats_top, stats_json);
    if (snapshot->parsed()) {
      load_db(common).save_snapshot(snapshot_out);
      std::cout << "snapshot written to " << snapshot_out << "\n";
      return 0;
    }
    if (classify_cmd->parsed()) {
      if (words_path.empty() && classify_intent.empty()) throw Error("classify needs --words or --intent");
      return cmd_classify(common, words_path, classify_intent, format);
    }
    if (ground_cmd->parsed()) return cmd_ground(common, intent_text, screen_path, mode, overlay);
    if (eval_cmd->parsed()) return cmd_eval(common, eval_args);
    if (serve_cmd->parsed()) return cmd_serve(common, bind, screens_dir, seed_policy, serve_seed->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
