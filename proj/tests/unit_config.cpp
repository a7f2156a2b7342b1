#include "advforge/config.hpp"

#include <string>

#include "advforge/errors.hpp"
#include "advforge/log.hpp"
#include "advforge/manifest.hpp"
#include "doctest.h"
#include "support/util.hpp"

namespace {

using namespace advforge;
using test_util::TempDir;
using test_util::write_file;

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty object keeps every default") {
    AppConfig cfg = parse_config("{}");
    CHECK(cfg.experiment.generator.per_class == 200);
    CHECK(cfg.experiment.generator.base_price == 1.10);
    CHECK(cfg.experiment.generator.volatility == 0.002);
    CHECK(cfg.experiment.generator.rule_params.long_body_factor == 1.2);
    CHECK(cfg.experiment.generator.rule_params.short_body_factor == 0.6);
    CHECK(cfg.experiment.train.epochs == 30);
    CHECK(cfg.experiment.train.batch_size == 64);
    CHECK(cfg.experiment.train.learning_rate == 1e-3);
    CHECK(cfg.experiment.attack.episodes == 10);
    CHECK(cfg.experiment.attack.reset_period == 3);
    CHECK(cfg.experiment.attack.scale_low == 0.99);
    CHECK(cfg.experiment.attack.scale_high == 1.01);
    CHECK(cfg.experiment.merge.clean_fraction == 0.5);
    CHECK(cfg.experiment.n_runs == 20);
    CHECK(cfg.experiment.per_run_pool == false);
    CHECK(cfg.model_seed == 0);
  }

  TEST_CASE("bundled default document parses back to the defaults") {
    std::string text = default_config_json();
    AppConfig cfg = parse_config(text);
    AppConfig defaults;
    CHECK(cfg.experiment.generator.per_class == defaults.experiment.generator.per_class);
    CHECK(cfg.experiment.train.momentum == defaults.experiment.train.momentum);
    CHECK(cfg.experiment.attack.scale_high == defaults.experiment.attack.scale_high);
    CHECK(cfg.experiment.merge.seed == defaults.experiment.merge.seed);
    CHECK(cfg.experiment.n_runs == defaults.experiment.n_runs);
    CHECK(cfg.experiment.checkpoint_dir.empty());
  }

  TEST_CASE("every section overrides its fields") {
    const char* text = R"({
      "rules": {"long_body_factor": 1.5, "short_body_factor": 0.4,
                "long_shadow_factor": 1.1, "trend_slope_threshold": 0.2,
                "inverted_hammer_upper_shadow": true},
      "generator": {"per_class": 12, "base_price": 2.5, "volatility": 0.01, "seed": 9},
      "train": {"epochs": 5, "batch_size": 16, "learning_rate": 0.01,
                "momentum": 0.8, "split_fraction": 0.75, "seed": 10, "model_seed": 11},
      "attack": {"episodes": 4, "reset_period": 2, "scale_low": 0.95,
                 "scale_high": 1.05, "share_channel_draws": true,
                 "collect_only_rule_consistent": true, "seed": 12},
      "merge": {"clean_fraction": 0.4, "seed": 13},
      "experiment": {"n_runs": 3, "seed": 14, "per_run_pool": true,
                     "checkpoint_dir": "runs"}
    })";
    AppConfig cfg = parse_config(text);
    CHECK(cfg.experiment.generator.rule_params.long_body_factor == 1.5);
    CHECK(cfg.experiment.generator.rule_params.inverted_hammer_upper_shadow);
    CHECK(cfg.experiment.generator.per_class == 12);
    CHECK(cfg.experiment.generator.base_price == 2.5);
    CHECK(cfg.experiment.generator.seed == 9);
    CHECK(cfg.experiment.train.epochs == 5);
    CHECK(cfg.experiment.train.split_fraction == 0.75);
    CHECK(cfg.experiment.train.seed == 10);
    CHECK(cfg.model_seed == 11);
    CHECK(cfg.experiment.attack.episodes == 4);
    CHECK(cfg.experiment.attack.share_channel_draws);
    CHECK(cfg.experiment.attack.collect_only_rule_consistent);
    CHECK(cfg.experiment.attack.seed == 12);
    CHECK(cfg.experiment.merge.clean_fraction == 0.4);
    CHECK(cfg.experiment.n_runs == 3);
    CHECK(cfg.experiment.seed == 14);
    CHECK(cfg.experiment.per_run_pool);
    CHECK(cfg.experiment.checkpoint_dir == std::filesystem::path("runs"));
  }

  TEST_CASE("typos and wrong types are rejected") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1,2]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"generater": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"epoch": 5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": "five"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": 2.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"seed": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"generator": {"per_class": -3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"attack": {"share_channel_draws": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rules": 3})"), ConfigError);
  }

  TEST_CASE("component validation runs on the parsed values") {
    CHECK_THROWS_AS(parse_config(R"({"rules": {"long_body_factor": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"attack": {"scale_low": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"merge": {"clean_fraction": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"n_runs": 1}})"), ConfigError);
  }

  TEST_CASE("load_config reads files and names missing paths") {
    TempDir dir;
    auto path = dir.path() / "cfg.json";
    write_file(path, R"({"generator": {"per_class": 7}})");
    AppConfig cfg = load_config(path);
    CHECK(cfg.experiment.generator.per_class == 7);

    auto missing = dir.path() / "nope.json";
    try {
      load_config(missing);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("nope.json") != std::string::npos);
    }
  }
}

TEST_SUITE("manifest") {
  TEST_CASE("sha256 matches published test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  }

  TEST_CASE("file hashing agrees with buffer hashing") {
    TempDir dir;
    auto path = dir.path() / "blob.bin";
    std::string payload(150000, '\0');
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = char(i * 31 % 251);
    write_file(path, payload);
    CHECK(sha256_file(path) == sha256_hex(payload));
    CHECK_THROWS_AS(sha256_file(dir.path() / "absent"), InvariantError);
  }

  TEST_CASE("record, verify, save and load round trip") {
    TempDir dir;
    auto artifact = dir.path() / "data.gafd";
    write_file(artifact, "payload-one");

    RunManifest m;
    m.config_path = "cfg.json";
    m.master_seed = 99;
    m.output_dir = dir.path();
    record_artifact(m, "synth", artifact);
    REQUIRE(m.artifacts.size() == 1);
    CHECK(m.artifacts[0].step == "synth");
    CHECK(m.artifacts[0].sha256 == sha256_hex("payload-one"));
    CHECK(find_artifact(m, artifact) == &m.artifacts[0]);
    CHECK(find_artifact(m, dir.path() / "other") == nullptr);
    CHECK_NOTHROW(verify_artifacts(m));

    auto manifest_path = dir.path() / "manifest.json";
    save_manifest(m, manifest_path);
    RunManifest loaded = load_manifest(manifest_path);
    CHECK(loaded.config_path == m.config_path);
    CHECK(loaded.master_seed == 99);
    CHECK(loaded.output_dir == m.output_dir);
    REQUIRE(loaded.artifacts.size() == 1);
    CHECK(loaded.artifacts[0].sha256 == m.artifacts[0].sha256);

    SUBCASE("re-recording the same path refreshes in place") {
      write_file(artifact, "payload-two");
      record_artifact(m, "merge", artifact);
      CHECK(m.artifacts.size() == 1);
      CHECK(m.artifacts[0].step == "merge");
      CHECK(m.artifacts[0].sha256 == sha256_hex("payload-two"));
    }
    SUBCASE("verification fails on modified or missing artifacts") {
      write_file(artifact, "corrupted");
      CHECK_THROWS_AS(verify_artifacts(m), InvariantError);
      std::filesystem::remove(artifact);
      CHECK_THROWS_AS(verify_artifacts(m), InvariantError);
    }
    SUBCASE("malformed manifest files are rejected") {
      write_file(manifest_path, "{]");
      CHECK_THROWS_AS(load_manifest(manifest_path), InvariantError);
      write_file(manifest_path, R"({"schema":"advforge-manifest/2"})");
      CHECK_THROWS_AS(load_manifest(manifest_path), InvariantError);
      CHECK_THROWS_AS(load_manifest(dir.path() / "absent.json"), InvariantError);
    }
  }
}

TEST_SUITE("log") {
  TEST_CASE("threshold can be read and overridden") {
    LogLevel before = log_level();
    set_log_level(LogLevel::Debug);
    CHECK(log_level() == LogLevel::Debug);
    log_debug("debug line");
    set_log_level(LogLevel::Off);
    CHECK(log_level() == LogLevel::Off);
    log_error("suppressed");  // Off filters everything, including errors
    set_log_level(before);
    CHECK(log_level() == before);
  }
}
