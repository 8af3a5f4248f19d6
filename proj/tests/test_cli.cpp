// Copyright 2026 The timbreid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// End-to-end CLI checks driven through the real binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "timbreid/audio_io.hpp"
#include "test_util.hpp"

using namespace timbreid;
using namespace timbreid::test;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd =
      std::string(TIMBREID_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(log_path);
  return r;
}

// One shared pipeline built once: dataset -> timbre model -> corpus ->
// speaker model -> verifier model. Individual cases assert on the pieces.
struct CliFixture {
  TempDir tmp{"cli"};
  std::string log;

  CliFixture() {
    log = tmp.str("log.txt");
    RunResult r = run_cli(
        "synth-data --seed 1 --rows 24 --noise-sd 1.0 --out " + tmp.str("data"),
        log);
    REQUIRE(r.exit_code == 0);

    // Small forests keep the fixture fast.
    write_file(tmp.str("config.json"), R"({
  // test pipeline: small forests
  "classifier": {"n_trees": 20, "rng_seed": 5},
  "regressor": {"n_trees": 20, "features_per_split": 2, "rng_seed": 6}
})");

    r = run_cli("train-timbre --dataset " + tmp.str("data") +
                    "/dataset.csv --config " + tmp.str("config.json") +
                    " --out " + tmp.str("timbre.json"),
                log);
    REQUIRE(r.exit_code == 0);

    r = run_cli("synth-corpus --seed 3 --speakers 3 --streams 4 "
                "--stream-seconds 1.2 --out " +
                    tmp.str("corpus"),
                log);
    REQUIRE(r.exit_code == 0);

    r = run_cli("enroll --corpus " + tmp.str("corpus") + " --timbre-model " +
                    tmp.str("timbre.json") + " --config " +
                    tmp.str("config.json") + " --out " + tmp.str("spk.json"),
                log);
    REQUIRE(r.exit_code == 0);

    r = run_cli("enroll-verifier --corpus " + tmp.str("corpus") +
                    " --target spk01 --timbre-model " + tmp.str("timbre.json") +
                    " --config " + tmp.str("config.json") + " --out " +
                    tmp.str("ver.json"),
                log);
    REQUIRE(r.exit_code == 0);
  }

  std::string training_wav(const std::string& speaker, int k) const {
    return tmp.str("corpus") + "/" + speaker + "/stream_00" +
           std::to_string(k) + ".wav";
  }
};

CliFixture& fixture() {
  static CliFixture f;
  return f;
}

}  // namespace

TEST_CASE("help output lists subcommands and defaults") {
  CliFixture& f = fixture();
  RunResult r = run_cli("--help", f.log);
  CHECK(r.exit_code == 0);
  for (const char* sub : {"synth-data", "synth-corpus", "train-timbre",
                          "enroll", "enroll-verifier", "identify", "verify",
                          "evaluate"}) {
    CHECK(r.output.find(sub) != std::string::npos);
  }

  r = run_cli("synth-data --help", f.log);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("--noise-sd") != std::string::npos);
  CHECK(r.output.find("[2]") != std::string::npos);      // default noise sd
  CHECK(r.output.find("--rows") != std::string::npos);
  CHECK(r.output.find("[400]") != std::string::npos);    // paper-sized default

  r = run_cli("evaluate --help", f.log);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("--split") != std::string::npos);
  CHECK(r.output.find("[0.7]") != std::string::npos);
}

TEST_CASE("synth-data output is loadable and sized as asked") {
  CliFixture& f = fixture();
  CHECK(std::filesystem::exists(f.tmp.str("data") + "/dataset.csv"));
  const std::string csv = read_file(f.tmp.str("data") + "/dataset.csv");
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 25);  // header + 24 rows
  CHECK(std::filesystem::exists(f.tmp.str("data") + "/audio/row_00000.wav"));
}

TEST_CASE("identify prints a label and exits 0") {
  CliFixture& f = fixture();
  RunResult r = run_cli("identify --model " + f.tmp.str("spk.json") +
                            " --audio " + f.training_wav("spk01", 0),
                        f.log);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("label: spk01") != std::string::npos);
  CHECK(r.output.find("frames_used:") != std::string::npos);

  SUBCASE("per-frame flag adds frame lines") {
    r = run_cli("identify --model " + f.tmp.str("spk.json") + " --audio " +
                    f.training_wav("spk01", 1) + " --per-frame",
                f.log);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("frame 0:") != std::string::npos);
  }
}

TEST_CASE("identify on an all-silent WAV exits 2 with NoAcceptedFrames") {
  CliFixture& f = fixture();
  AudioStream silence;
  silence.sample_rate = 16000.0;
  silence.samples.assign(16000, 0.0);
  write_wav(f.tmp.str("silence.wav"), silence);
  RunResult r = run_cli("identify --model " + f.tmp.str("spk.json") +
                            " --audio " + f.tmp.str("silence.wav"),
                        f.log);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("NoAcceptedFrames") != std::string::npos);
}

TEST_CASE("verify exit codes follow the accept/reject/error contract") {
  CliFixture& f = fixture();
  RunResult r = run_cli("verify --model " + f.tmp.str("ver.json") +
                            " --audio " + f.training_wav("spk01", 0),
                        f.log);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("accept") != std::string::npos);
  CHECK(r.output.find("score:") != std::string::npos);

  r = run_cli("verify --model " + f.tmp.str("ver.json") + " --audio " +
                  f.training_wav("spk00", 0),
              f.log);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("reject") != std::string::npos);

  // A vacuous threshold accepts any scoreable stream.
  r = run_cli("verify --model " + f.tmp.str("ver.json") + " --audio " +
                  f.training_wav("spk00", 0) + " --threshold 0.0",
              f.log);
  CHECK(r.exit_code == 0);

  r = run_cli("verify --model " + f.tmp.str("ver.json") +
                  " --audio /nonexistent.wav",
              f.log);
  CHECK(r.exit_code == 2);
}

TEST_CASE("evaluate writes report artifacts") {
  CliFixture& f = fixture();
  RunResult r = run_cli(
      "evaluate --corpus " + f.tmp.str("corpus") + " --mode identify" +
          " --timbre-model " + f.tmp.str("timbre.json") + " --config " +
          f.tmp.str("config.json") + " --populations 2,3 --seeds 1,2 --out " +
          f.tmp.str("rep_id"),
      f.log);
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(f.tmp.str("rep_id") + "/report.json"));
  CHECK(std::filesystem::exists(f.tmp.str("rep_id") +
                                "/accuracy_vs_population.csv"));

  r = run_cli("evaluate --corpus " + f.tmp.str("corpus") + " --mode verify" +
                  " --timbre-model " + f.tmp.str("timbre.json") + " --config " +
                  f.tmp.str("config.json") + " --targets spk00 --seeds 1 "
                  "--out " +
                  f.tmp.str("rep_ver"),
              f.log);
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(f.tmp.str("rep_ver") + "/report.json"));
  CHECK(std::filesystem::exists(f.tmp.str("rep_ver") + "/roc_spk00.csv"));
  CHECK(std::filesystem::exists(f.tmp.str("rep_ver") + "/roc_spk00.svg"));
}

TEST_CASE("bad config files are rejected") {
  CliFixture& f = fixture();
  write_file(f.tmp.str("bad_config.json"), R"({"framing": {"bogus_key": 1}})");
  RunResult r = run_cli("train-timbre --dataset " + f.tmp.str("data") +
                            "/dataset.csv --config " +
                            f.tmp.str("bad_config.json") + " --out " +
                            f.tmp.str("nope.json"),
                        f.log);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("bogus_key") != std::string::npos);

  SUBCASE("invalid values are rejected too") {
    write_file(f.tmp.str("bad_fft.json"), R"({"dsp": {"fft_size": 500}})");
    r = run_cli("train-timbre --dataset " + f.tmp.str("data") +
                    "/dataset.csv --config " + f.tmp.str("bad_fft.json") +
                    " --out " + f.tmp.str("nope.json"),
                f.log);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("power of two") != std::string::npos);
  }
}

TEST_CASE("a foreign feature convention is surfaced as a warning") {
  CliFixture& f = fixture();
  // Rewrite the extractor's convention string and re-enroll against it.
  std::string model = read_file(f.tmp.str("timbre.json"));
  const std::string needle = "\"feature_convention\":\"ws-axes/1\"";
  const auto pos = model.find(needle);
  REQUIRE(pos != std::string::npos);
  model.replace(pos, needle.size(), "\"feature_convention\":\"ws-axes/0\"");
  write_file(f.tmp.str("timbre_old.json"), model);

  RunResult r = run_cli("enroll --corpus " + f.tmp.str("corpus") +
                            " --timbre-model " + f.tmp.str("timbre_old.json") +
                            " --config " + f.tmp.str("config.json") +
                            " --out " + f.tmp.str("nope.json"),
                        f.log);
  CHECK(r.output.find("warning: VersionMismatch") != std::string::npos);
  // The hard stop then comes from the extraction path.
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("ConventionMismatch") != std::string::npos);
}
