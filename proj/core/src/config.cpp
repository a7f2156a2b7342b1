#include "advforge/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "advforge/errors.hpp"
#include "json.hpp"

namespace advforge {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config " + where + ": " + what);
}

std::string quoted(const char* key) { return "key \"" + std::string(key) + "\""; }

/// Wraps one JSON object; every get() marks its key as consumed so finish()
/// can reject leftovers (typos and unknown settings).
class Section {
 public:
  Section(const ordered_json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) fail(name_, "must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    // nlohmann converts between numeric kinds silently (negative into
    // unsigned, float into int), so the kind checks here are load-bearing.
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) fail(name_, quoted(key) + " must be a boolean");
      out = it->get<bool>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) fail(name_, quoted(key) + " must be a number");
      out = it->get<double>();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned())
        fail(name_, quoted(key) + " must be a non-negative integer");
      std::uint64_t v = it->get<std::uint64_t>();
      if (v > std::uint64_t(std::numeric_limits<T>::max()))
        fail(name_, quoted(key) + " is out of range");
      out = T(v);
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) fail(name_, quoted(key) + " must be an integer");
      if (it->is_number_unsigned() &&
          it->get<std::uint64_t>() > std::uint64_t(std::numeric_limits<std::int64_t>::max()))
        fail(name_, quoted(key) + " is out of range");
      std::int64_t v = it->get<std::int64_t>();
      if (v < std::int64_t(std::numeric_limits<T>::min()) ||
          v > std::int64_t(std::numeric_limits<T>::max()))
        fail(name_, quoted(key) + " is out of range");
      out = T(v);
    } else {
      if (!it->is_string()) fail(name_, quoted(key) + " must be a string");
      out = it->get<T>();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(name_, "unknown key \"" + it.key() + "\"");
  }

 private:
  const ordered_json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_rules(const ordered_json& j, RuleParams& out) {
  Section s(j, "rules");
  s.get("long_body_factor", out.long_body_factor);
  s.get("short_body_factor", out.short_body_factor);
  s.get("long_shadow_factor", out.long_shadow_factor);
  s.get("trend_slope_threshold", out.trend_slope_threshold);
  s.get("inverted_hammer_upper_shadow", out.inverted_hammer_upper_shadow);
  s.finish();
}

void read_generator(const ordered_json& j, GeneratorConfig& out) {
  Section s(j, "generator");
  s.get("per_class", out.per_class);
  s.get("base_price", out.base_price);
  s.get("volatility", out.volatility);
  s.get("seed", out.seed);
  s.finish();
}

void read_train(const ordered_json& j, TrainConfig& out, std::uint64_t& model_seed) {
  Section s(j, "train");
  s.get("epochs", out.epochs);
  s.get("batch_size", out.batch_size);
  s.get("learning_rate", out.learning_rate);
  s.get("momentum", out.momentum);
  s.get("split_fraction", out.split_fraction);
  s.get("seed", out.seed);
  s.get("model_seed", model_seed);
  s.finish();
}

void read_attack(const ordered_json& j, AttackConfig& out) {
  Section s(j, "attack");
  s.get("episodes", out.episodes);
  s.get("reset_period", out.reset_period);
  s.get("scale_low", out.scale_low);
  s.get("scale_high", out.scale_high);
  s.get("share_channel_draws", out.share_channel_draws);
  s.get("collect_only_rule_consistent", out.collect_only_rule_consistent);
  s.get("seed", out.seed);
  s.finish();
}

void read_merge(const ordered_json& j, MergeConfig& out) {
  Section s(j, "merge");
  s.get("clean_fraction", out.clean_fraction);
  s.get("seed", out.seed);
  s.finish();
}

void read_experiment(const ordered_json& j, ExperimentConfig& out) {
  Section s(j, "experiment");
  s.get("n_runs", out.n_runs);
  s.get("seed", out.seed);
  s.get("per_run_pool", out.per_run_pool);
  std::string dir;
  s.get("checkpoint_dir", dir);
  if (!dir.empty()) out.checkpoint_dir = dir;
  s.finish();
}

}  // namespace

AppConfig parse_config(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) fail("file", "not valid JSON");
  if (!j.is_object()) fail("file", "top level must be a JSON object");

  AppConfig cfg;
  static const std::set<std::string> known = {"rules",  "generator", "train",
                                             "attack", "merge",     "experiment"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) fail("file", "unknown section \"" + it.key() + "\"");

  if (j.contains("rules")) read_rules(j["rules"], cfg.experiment.generator.rule_params);
  if (j.contains("generator")) read_generator(j["generator"], cfg.experiment.generator);
  if (j.contains("train")) read_train(j["train"], cfg.experiment.train, cfg.model_seed);
  if (j.contains("attack")) read_attack(j["attack"], cfg.experiment.attack);
  if (j.contains("merge")) read_merge(j["merge"], cfg.experiment.merge);
  if (j.contains("experiment")) read_experiment(j["experiment"], cfg.experiment);

  validate(cfg.experiment);  // covers every component config
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config file not readable: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string default_config_json() {
  const AppConfig cfg;
  const RuleParams& r = cfg.experiment.generator.rule_params;
  const GeneratorConfig& g = cfg.experiment.generator;
  const TrainConfig& t = cfg.experiment.train;
  const AttackConfig& a = cfg.experiment.attack;
  const MergeConfig& m = cfg.experiment.merge;
  ordered_json j;
  j["rules"] = {{"long_body_factor", r.long_body_factor},
                {"short_body_factor", r.short_body_factor},
                {"long_shadow_factor", r.long_shadow_factor},
                {"trend_slope_threshold", r.trend_slope_threshold},
                {"inverted_hammer_upper_shadow", r.inverted_hammer_upper_shadow}};
  j["generator"] = {{"per_class", g.per_class},
                    {"base_price", g.base_price},
                    {"volatility", g.volatility},
                    {"seed", g.seed}};
  j["train"] = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"momentum", t.momentum},
                {"split_fraction", t.split_fraction},
                {"seed", t.seed},
                {"model_seed", cfg.model_seed}};
  j["attack"] = {{"episodes", a.episodes},
                 {"reset_period", a.reset_period},
                 {"scale_low", a.scale_low},
                 {"scale_high", a.scale_high},
                 {"share_channel_draws", a.share_channel_draws},
                 {"collect_only_rule_consistent", a.collect_only_rule_consistent},
                 {"seed", a.seed}};
  j["merge"] = {{"clean_fraction", m.clean_fraction}, {"seed", m.seed}};
  j["experiment"] = {{"n_runs", cfg.experiment.n_runs},
                     {"seed", cfg.experiment.seed},
                     {"per_run_pool", cfg.experiment.per_run_pool},
                     {"checkpoint_dir", ""}};
  return j.dump(2) + "\n";
}

}  // namespace advforge
