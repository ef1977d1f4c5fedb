// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "mtmi/config.hpp"
#include "mtmi/csv.hpp"
#include "mtmi/data_model.hpp"
#include "mtmi/detectors.hpp"
#include "mtmi/dictionary.hpp"
#include "mtmi/errors.hpp"
#include "mtmi/evaluation.hpp"
#include "mtmi/learner.hpp"
#include "mtmi/simulator.hpp"
#include "mtmi/whitening.hpp"

namespace fs = std::filesystem;

namespace mtmi::cli {
namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct OptionSpec {
  std::string key;
  std::string default_value;  // empty means "unset"
  std::string help;
};

const std::vector<OptionSpec> kSimulateOptions = {
    {"library", "", "spectral library CSV (name,b1..bD)"},
    {"targets", "", "comma-separated target names from the library"},
    {"backgrounds", "", "comma-separated background names from the library"},
    {"pos-bags", "10", "number of positive bags"},
    {"neg-bags", "20", "number of negative bags"},
    {"points", "500", "instances per bag"},
    {"targets-per-bag", "250", "target-bearing instances per positive bag"},
    {"proportion", "0.3", "mean target abundance in target-bearing instances"},
    {"snr", "20", "signal-to-noise ratio in dB (inf disables noise)"},
    {"assignment", "per-bag", "target choice: per-bag or per-instance"},
    {"seed", "0", "random seed"},
};

const std::vector<OptionSpec> kTrainOptions = {
    {"bags", "", "training bag CSV (bag_id,label,b1..bD)"},
    {"k", "1", "initial number of target signatures"},
    {"alpha", "0", "uniqueness weight"},
    {"detector", "ace", "ace or smf"},
    {"background", "neg", "background statistics from neg (negative bags) or all instances"},
    {"clusters", "0", "k-means clusters for initialization (0 = 10*k)"},
    {"kmeans-iter", "100", "k-means iteration cap"},
    {"max-iter", "1000", "optimization iteration cap"},
    {"floor-ratio", "1e-08", "eigenvalue floor relative to the largest eigenvalue"},
    {"seed", "0", "random seed"},
};

const std::vector<OptionSpec> kDetectOptions = {
    {"bags", "", "bag CSV to score"},
    {"dictionary", "", "target dictionary CSV (target_index,b1..bD)"},
    {"stats", "", "background statistics CSV written by train"},
    {"detector", "ace", "ace or smf"},
    {"fusion", "max", "combine per-signature scores with max or mean"},
    {"per-signature", "false", "also write scores_per_signature.csv"},
};

const std::vector<OptionSpec> kEvalOptions = {
    {"scores", "", "detection CSV (bag_id,instance_index,score)"},
    {"truth", "", "ground-truth CSV written by simulate"},
    {"far", "0.001", "false-positive rate cutoff for NAUC"},
    {"target", "", "restrict the main ROC to one target (other targets' instances are dropped)"},
    {"per-signature-scores", "", "optional per-signature detection CSV for per-signature NAUC"},
};

std::vector<OptionSpec> pipeline_options() {
  std::vector<OptionSpec> all;
  std::set<std::string> seen;
  auto add = [&](const std::vector<OptionSpec>& specs, std::set<std::string> skip) {
    for (const auto& s : specs) {
      if (skip.count(s.key) || !seen.insert(s.key).second) continue;
      all.push_back(s);
    }
  };
  add(kSimulateOptions, {});
  add(kTrainOptions, {"bags"});
  add(kDetectOptions, {"bags", "dictionary", "stats"});
  add(kEvalOptions, {"scores", "truth", "per-signature-scores"});
  return all;
}

// Typed view over resolved settings. Conversion failures are usage errors.
class Settings {
 public:
  explicit Settings(const KeyValueConfig& c) : c_(c) {}

  std::string str(const std::string& key) const { return c_.get(key).value_or(""); }
  std::string required(const std::string& key) const {
    auto v = str(key);
    if (v.empty()) throw UsageError("missing required option --" + key);
    return v;
  }
  double real(const std::string& key) const {
    const auto v = csv::parse_double(str(key));
    if (!v) throw bad(key);
    return *v;
  }
  long long integer(const std::string& key) const {
    const auto v = csv::parse_int(str(key));
    if (!v) throw bad(key);
    return *v;
  }
  std::size_t count(const std::string& key) const {
    const auto v = integer(key);
    if (v < 0) throw bad(key);
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed(const std::string& key) const {
    const std::string v = str(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) throw bad(key);
    return out;
  }
  bool flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw bad(key);
  }
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : str(key) + ",") {
      if (ch != ',') {
        cur += ch;
      } else if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
    return out;
  }
  // Parse with a library parser, reporting failures against the flag.
  template <class F>
  auto parsed(const std::string& key, F&& parse) const {
    try {
      return parse(str(key));
    } catch (const Error&) {
      throw bad(key);
    }
  }

 private:
  UsageError bad(const std::string& key) const {
    return UsageError("invalid value for --" + key + ": '" + str(key) + "'");
  }
  const KeyValueConfig& c_;
};

std::string join(const fs::path& dir, const char* name) { return (dir / name).string(); }

// Configuration phase: anything thrown here is reported as a usage error.
template <class F>
auto configure(F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

SimConfig sim_config(const Settings& s) {
  return configure([&] {
    SimConfig c;
    c.targets = s.list("targets");
    c.backgrounds = s.list("backgrounds");
    if (c.targets.empty()) throw UsageError("missing required option --targets");
    if (c.backgrounds.empty()) throw UsageError("missing required option --backgrounds");
    c.num_pos_bags = s.count("pos-bags");
    c.num_neg_bags = s.count("neg-bags");
    c.points_per_bag = s.count("points");
    c.targets_per_pos_bag = s.count("targets-per-bag");
    c.mean_target_proportion = s.real("proportion");
    c.snr_db = s.real("snr");
    c.assignment = s.parsed("assignment", parse_target_assignment);
    c.seed = s.seed("seed");
    c.validate();
    return c;
  });
}

LearnerConfig learner_config(const Settings& s) {
  return configure([&] {
    LearnerConfig c;
    c.initial_targets = s.count("k");
    c.uniqueness_weight = s.real("alpha");
    c.detector = s.parsed("detector", parse_detector);
    const std::string bg = s.str("background");
    if (bg == "neg") {
      c.background_source = BackgroundSource::NegativeBagsOnly;
    } else if (bg == "all") {
      c.background_source = BackgroundSource::AllInstances;
    } else {
      throw UsageError("invalid value for --background: '" + bg + "' (expected neg or all)");
    }
    c.kmeans_clusters = s.count("clusters");
    c.kmeans_max_iter = s.count("kmeans-iter");
    c.max_iter = s.count("max-iter");
    c.eigenvalue_floor_ratio = s.real("floor-ratio");
    c.seed = s.seed("seed");
    c.validate();
    return c;
  });
}

double far_cutoff(const Settings& s) {
  const double far = s.real("far");
  if (!(far > 0.0 && far <= 1.0)) throw UsageError("--far must be in (0, 1]");
  return far;
}

// ---- command bodies; inputs and output directory are already resolved ----

void do_simulate(const Settings& s, const fs::path& out_dir) {
  const std::string library_path = s.required("library");
  SimConfig config = sim_config(s);
  const SpectralLibrary library = load_library(library_path);
  std::mt19937_64 seeds(config.seed);
  config.seed = seeds();
  const SimulatedDataset train = generate_dataset(library, config);
  config.seed = seeds();
  const SimulatedDataset test = generate_dataset(library, config);
  save_bags(train.bags, join(out_dir, "train_bags.csv"));
  save_truth(train.truth, join(out_dir, "train_truth.csv"));
  save_bags(test.bags, join(out_dir, "test_bags.csv"));
  save_truth(test.truth, join(out_dir, "test_truth.csv"));
}

void do_train(const Settings& s, const fs::path& out_dir, std::ostream& out) {
  const std::string bags_path = s.required("bags");
  const LearnerConfig config = learner_config(s);
  const BagCollection bags = load_bags(bags_path);
  const TrainResult result = train(bags, config);
  save_signatures(result.dictionary.output, join(out_dir, "dictionary.csv"));
  save_signatures(result.dictionary.whitened, join(out_dir, "dictionary_whitened.csv"));
  save_trace(result.trace, join(out_dir, "trace.csv"));
  save_stats(result.stats, join(out_dir, "stats.csv"));
  out << "trained " << result.dictionary.size() << " signature(s) in " << result.trace.rows.size()
      << " iteration(s), stop: " << result.trace.stop_reason << "\n";
}

void do_detect(const Settings& s, const fs::path& out_dir) {
  const std::string bags_path = s.required("bags");
  const std::string dict_path = s.required("dictionary");
  const std::string stats_path = s.required("stats");
  const DetectorKind kind = configure([&] { return s.parsed("detector", parse_detector); });
  const Fusion fusion = configure([&] { return s.parsed("fusion", parse_fusion); });
  const bool per_signature = configure([&] { return s.flag("per-signature"); });

  const BagCollection bags = load_bags(bags_path);
  const RowMatrix dictionary = load_signatures(dict_path);
  const BackgroundStats stats = load_stats(stats_path);
  auto mismatch = [&](const std::string& a, std::size_t da, const std::string& b, std::size_t db) {
    if (da != db) {
      throw DimensionError("dimension mismatch: " + a + " has " + std::to_string(da) + " bands but " + b +
                           " has " + std::to_string(db));
    }
  };
  mismatch(dict_path, dictionary.cols(), stats_path, stats.mean.size());
  mismatch(bags_path, bags.dimensionality(), stats_path, stats.mean.size());

  save_detections(detect_batch(bags, dictionary, stats, kind, fusion), join(out_dir, "scores.csv"));
  if (per_signature) {
    save_signature_detections(detect_batch_per_signature(bags, dictionary, stats, kind),
                              join(out_dir, "scores_per_signature.csv"));
  }
}

std::vector<std::string> target_names(const std::vector<TruthRow>& truth) {
  std::set<std::string> names;
  for (const auto& t : truth) {
    if (!t.target_name.empty() && t.proportion > 0.0) names.insert(t.target_name);
  }
  return {names.begin(), names.end()};
}

void do_eval(const Settings& s, const fs::path& out_dir, std::ostream& out) {
  const std::string scores_path = s.required("scores");
  const std::string truth_path = s.required("truth");
  const double far = configure([&] { return far_cutoff(s); });
  const std::string target = s.str("target");
  const std::string per_sig_path = s.str("per-signature-scores");

  const auto detections = load_detections(scores_path);
  const auto truth = load_truth(truth_path);
  const auto selected = target.empty() ? std::nullopt : std::optional<std::string>(target);
  const auto scored = join_scores(detections, truth, selected);
  const RocCurve curve = roc_curve(scored);
  const NaucResult main = nauc_detail(curve, far);

  std::vector<SummaryMetric> metrics;
  auto add = [&](std::string name, double v) { metrics.push_back({std::move(name), csv::format_double(v)}); };
  add("far", far);
  add("nauc", main.value);
  metrics.push_back({"nauc_extrapolated", main.extrapolated ? "true" : "false"});
  add("auc", nauc(curve, 1.0));
  metrics.push_back({"num_positive", std::to_string(curve.num_positive)});
  metrics.push_back({"num_negative", std::to_string(curve.num_negative)});

  const auto names = target_names(truth);
  for (const auto& name : names) add("nauc_" + name, nauc(roc_curve(join_scores(detections, truth, name)), far));

  if (!per_sig_path.empty()) {
    const auto per_sig = load_signature_detections(per_sig_path);
    std::map<std::size_t, std::vector<Detection>> by_signature;
    for (const auto& d : per_sig) by_signature[d.target_index].push_back({d.bag_id, d.instance_index, d.score});
    for (const auto& name : names) {
      double best = 0.0;
      for (const auto& [k, dets] : by_signature) {
        const double v = nauc(roc_curve(join_scores(dets, truth, name)), far);
        add("nauc_" + name + "_signature_" + std::to_string(k + 1), v);
        best = std::max(best, v);
      }
      add("nauc_" + name + "_best_signature", best);
    }
  }

  save_roc(curve, join(out_dir, "roc.csv"));
  save_roc_plot_data(curve, far, join(out_dir, "roc_plot.csv"));
  save_summary(metrics, join(out_dir, "summary.csv"));
  out << "nauc@" << csv::format_double(far) << " = " << csv::format_double(main.value) << "\n";
}

void do_pipeline(const Settings& s, const fs::path& out_dir, std::ostream& out) {
  const fs::path sim_dir = out_dir / "simulate";
  const fs::path train_dir = out_dir / "train";
  const fs::path detect_dir = out_dir / "detect";
  const fs::path eval_dir = out_dir / "eval";
  // Validate every stage's settings before doing any work.
  s.required("library");
  sim_config(s);
  learner_config(s);
  configure([&] {
    s.parsed("fusion", parse_fusion);
    s.flag("per-signature");
    return far_cutoff(s);
  });
  for (const auto& d : {sim_dir, train_dir, detect_dir, eval_dir}) fs::create_directories(d);

  do_simulate(s, sim_dir);

  auto with = [&](std::initializer_list<std::pair<std::string, std::string>> extra) {
    KeyValueConfig c;
    for (const auto& spec : pipeline_options()) c.set(spec.key, s.str(spec.key));
    for (const auto& [k, v] : extra) c.set(k, v);
    return c;
  };

  const KeyValueConfig train_cfg = with({{"bags", join(sim_dir, "train_bags.csv")}});
  do_train(Settings(train_cfg), train_dir, out);

  const KeyValueConfig detect_cfg = with({{"bags", join(sim_dir, "test_bags.csv")},
                                          {"dictionary", join(train_dir, "dictionary.csv")},
                                          {"stats", join(train_dir, "stats.csv")}});
  do_detect(Settings(detect_cfg), detect_dir);

  const bool per_signature = s.flag("per-signature");
  const KeyValueConfig eval_cfg =
      with({{"scores", join(detect_dir, "scores.csv")},
            {"truth", join(sim_dir, "test_truth.csv")},
            {"per-signature-scores", per_signature ? join(detect_dir, "scores_per_signature.csv") : ""}});
  do_eval(Settings(eval_cfg), eval_dir, out);
}

struct Command {
  std::string name;
  std::string description;
  std::vector<OptionSpec> options;
  std::function<void(const Settings&, const fs::path&, std::ostream&)> body;
};

std::vector<Command> commands() {
  return {
      {"simulate", "generate train/test bag datasets from a spectral library", kSimulateOptions,
       [](const Settings& s, const fs::path& d, std::ostream&) { do_simulate(s, d); }},
      {"train", "learn a target dictionary from labeled bags", kTrainOptions,
       [](const Settings& s, const fs::path& d, std::ostream& o) { do_train(s, d, o); }},
      {"detect", "score every instance of a bag file against a dictionary", kDetectOptions,
       [](const Settings& s, const fs::path& d, std::ostream&) { do_detect(s, d); }},
      {"eval", "ROC curve and NAUC from scores and ground truth", kEvalOptions,
       [](const Settings& s, const fs::path& d, std::ostream& o) { do_eval(s, d, o); }},
      {"pipeline", "simulate, train, detect and eval in one run", pipeline_options(),
       [](const Settings& s, const fs::path& d, std::ostream& o) { do_pipeline(s, d, o); }},
  };
}

struct Parsed {
  std::string out_dir = ".";
  std::string config_path;
  std::string preset_name;
  std::map<std::string, std::string> flags;
};

// Precedence: defaults < preset < --config file < explicit flags.
KeyValueConfig resolve(const Command& cmd, const Parsed& p, const std::set<std::string>& given) {
  std::set<std::string> known;
  KeyValueConfig c;
  for (const auto& spec : cmd.options) {
    known.insert(spec.key);
    c.set(spec.key, spec.default_value);
  }
  if (!p.preset_name.empty()) {
    const KeyValueConfig pre = configure([&] { return preset(p.preset_name); });
    for (const auto& [k, v] : pre.entries()) {
      if (known.count(k)) c.set(k, v);
    }
  }
  if (!p.config_path.empty()) {
    KeyValueConfig file;
    try {
      file = load_config(p.config_path);
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    } catch (const IoError& e) {
      throw UsageError(e.what());
    }
    for (const auto& [k, v] : file.entries()) {
      if (!known.count(k)) throw UsageError("unknown key '" + k + "' in " + p.config_path);
      c.set(k, v);
    }
  }
  for (const auto& key : given) c.set(key, p.flags.at(key));
  return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-target multiple instance learning for sub-pixel target detection"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  const std::vector<Command> cmds = commands();
  std::vector<Parsed> parsed(cmds.size());
  std::vector<std::vector<std::pair<std::string, CLI::Option*>>> options(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto* sub = app.add_subcommand(cmds[i].name, cmds[i].description);
    Parsed& p = parsed[i];
    sub->add_option("--out-dir", p.out_dir, "output directory (created if missing)")->capture_default_str();
    sub->add_option("--config", p.config_path, "key=value file, e.g. a resolved config written by an earlier run");
    std::string presets;
    for (const auto& n : preset_names()) presets += (presets.empty() ? "" : ", ") + n;
    sub->add_option("--preset", p.preset_name, "parameter preset: " + presets);
    for (const auto& spec : cmds[i].options) {
      std::string help = spec.help;
      if (!spec.default_value.empty()) help += " [default: " + spec.default_value + "]";
      options[i].emplace_back(spec.key, sub->add_option("--" + spec.key, p.flags[spec.key], help));
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  std::size_t which = 0;
  while (which < subs.size() && !subs[which]->parsed()) ++which;
  const Command& cmd = cmds[which];
  const Parsed& p = parsed[which];
  std::set<std::string> given;
  for (const auto& [key, opt] : options[which]) {
    if (opt->count() > 0) given.insert(key);
  }

  try {
    const KeyValueConfig resolved = resolve(cmd, p, given);
    const Settings settings(resolved);
    const fs::path out_dir(p.out_dir);
    fs::create_directories(out_dir);
    save_config(resolved, join(out_dir, (cmd.name + "_config.txt").c_str()));
    cmd.body(settings, out_dir, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"mtmi"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mtmi::cli
