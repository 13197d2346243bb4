// Copyright 2026 The ppkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ppkm: command-line front end. Subcommands run, oracle, plan-params,
// analyze and serve. Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "ppkm/analysis.h"
#include "ppkm/csv.h"
#include "ppkm/oracle.h"
#include "ppkm/params.h"
#include "ppkm/protocol.h"
#include "ppkm/report.h"
#include "ppkm/rng.h"
#include "ppkm/session.h"

extern char** environ;

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown for flag combinations CLI11 cannot express.
struct UsageError {
  std::string message;
};

int Fail(const absl::Status& status) {
  std::cerr << "ppkm: " << status << "\n";
  return kExitRuntime;
}

// --config: a JSON object whose keys are long flag names of the subcommand.
// Flags given on the command line win.
void ApplyJsonConfig(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError{absl::StrCat("cannot read config ", path)};
  json config = json::parse(in, nullptr, false);
  if (config.is_discarded() || !config.is_object()) {
    throw UsageError{absl::StrCat(path, ": expected a JSON object")};
  }
  for (const auto& [key, value] : config.items()) {
    if (key == "config") continue;
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw UsageError{absl::StrCat(path, ": unknown key '", key, "'")};
    }
    if (opt->count() > 0) continue;
    auto text = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    opt->clear();
    if (value.is_array()) {
      for (const json& v : value) opt->add_result(text(v));
    } else {
      opt->add_result(text(value));
    }
    opt->run_callback();
  }
}

struct DataFlags {
  std::string data;
  bool header = false;
  int id_column = -1;

  void Register(CLI::App* app) {
    app->add_option("--data", data, "CSV dataset, one point per row");
    app->add_flag("--header", header, "first CSV row is a header");
    app->add_option("--id-column", id_column, "zero-based column holding point ids");
  }

  absl::StatusOr<ppkm::Dataset> Load() const {
    if (data.empty()) throw UsageError{"--data is required"};
    ppkm::CsvSchema schema;
    schema.has_header = header;
    if (id_column >= 0) schema.id_column = id_column;
    return ppkm::LoadCsv(data, schema);
  }
};

struct RunFlags {
  DataFlags data;
  std::string config;
  int k = 2;
  int t = 3;
  std::string mode = "strict";
  double w = 1.0;
  int ell1 = 64;
  int ell2 = 32;
  uint64_t seed = 0;
  double tolerance = 1e-9;
  int64_t max_iters = 100;
  std::string partition = "round-robin";
  std::string scale_mode = "uniform";
  std::string transport = "in-process";
  std::vector<std::string> servers;
  std::string aggregator;
  bool spawn = false;
  std::string out = "ppkm-out";
  bool with_oracle = false;
  int64_t idle_timeout_ms = 60000;

  void Register(CLI::App* app, bool protocol) {
    data.Register(app);
    app->add_option("--config", config, "JSON file with flag values");
    app->add_option("--k", k, "number of clusters")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "run seed")->envname("PPKM_SEED");
    app->add_option("--tolerance", tolerance, "relative center movement tolerance")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--max-iters", max_iters, "iteration cap")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--out", out, "output directory");
    app->add_option("--mode", mode, "parameter bounds")
        ->check(CLI::IsMember({"strict", "weak"}));
    app->add_option("--w", w, "weak-mode bound w")->check(CLI::PositiveNumber);
    app->add_option("--ell1", ell1, "bit length of r");
    app->add_option("--ell2", ell2, "bit length of eps");
    app->add_option("--scale-mode", scale_mode, "one common scale or one per attribute")
        ->check(CLI::IsMember({"uniform", "independent"}));
    if (!protocol) return;
    app->add_option("--t", t, "servers including the aggregator (t >= 2)")
        ->check(CLI::Range(2, 1 << 16));
    app->add_option("--partition", partition, "how points are split across servers")
        ->check(CLI::IsMember({"round-robin", "contiguous", "seeded-shuffle"}));
    app->add_option("--transport", transport, "message transport")
        ->check(CLI::IsMember({"in-process", "tcp"}));
    app->add_option("--servers", servers, "compute server host:port, in index order")
        ->delimiter(',');
    app->add_option("--aggregator", aggregator, "aggregator host:port");
    app->add_flag("--spawn", spawn, "tcp: start local serve processes");
    app->add_flag("--with-oracle", with_oracle, "compare against plaintext Lloyd's");
    app->add_option("--idle-timeout-ms", idle_timeout_ms, "tcp: give up after this long idle")
        ->check(CLI::PositiveNumber);
  }

  ppkm::PrepareOptions Prepare() const {
    ppkm::PrepareOptions p;
    p.mode = mode == "weak" ? ppkm::BoundMode::kWeak : ppkm::BoundMode::kStrict;
    p.w = w;
    p.sampling.ell1 = ell1;
    p.sampling.ell2 = ell2;
    p.sampling.seed = seed;
    p.sampling.scale_mode = scale_mode == "independent" ? ppkm::ScaleMode::kIndependent
                                                        : ppkm::ScaleMode::kUniform;
    return p;
  }

  ppkm::RunConfig Config() const {
    ppkm::RunConfig c;
    c.k = k;
    c.t = t;
    c.max_iters = max_iters;
    c.tolerance = tolerance;
    c.ell1 = ell1;
    c.seed = seed;
    c.partition = *ppkm::ParsePartitionStrategy(partition);
    return c;
  }
};

std::string SelfExe() {
  std::error_code ec;
  auto path = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::string("ppkm") : path.string();
}

// Local serve processes for `run --transport tcp --spawn`.
class SpawnedCluster {
 public:
  ~SpawnedCluster() {
    for (pid_t pid : pids_) {
      if (pid > 0) {
        kill(pid, SIGTERM);
        waitpid(pid, nullptr, 0);
      }
    }
    std::error_code ec;
    if (!dir_.empty()) std::filesystem::remove_all(dir_, ec);
  }

  absl::StatusOr<ppkm::TcpTopology> Start(int t, int64_t idle_timeout_ms) {
    char tmpl[] = "/tmp/ppkm-spawn-XXXXXX";
    if (mkdtemp(tmpl) == nullptr) return absl::UnavailableError("mkdtemp failed");
    dir_ = tmpl;
    const std::string idle = std::to_string(idle_timeout_ms);
    ppkm::TcpTopology topology;
    topology.idle_timeout = std::chrono::milliseconds(idle_timeout_ms);
    auto aggregator_port = Launch({"serve", "--role", "aggregator", "--index",
                                   std::to_string(t), "--listen", "127.0.0.1:0",
                                   "--idle-timeout-ms", idle},
                                  "aggregator.port");
    if (!aggregator_port.ok()) return aggregator_port.status();
    topology.aggregator = {"127.0.0.1", *aggregator_port};
    for (int i = 1; i < t; ++i) {
      auto port = Launch({"serve", "--role", "server", "--index", std::to_string(i),
                          "--listen", "127.0.0.1:0", "--aggregator",
                          topology.aggregator.ToString(), "--idle-timeout-ms", idle},
                         absl::StrCat("server", i, ".port"));
      if (!port.ok()) return port.status();
      topology.servers.push_back({"127.0.0.1", *port});
    }
    return topology;
  }

  // Waits for every child; nonzero exits are failures.
  absl::Status Wait() {
    absl::Status first = absl::OkStatus();
    for (pid_t& pid : pids_) {
      int status = 0;
      if (waitpid(pid, &status, 0) < 0) continue;
      if ((!WIFEXITED(status) || WEXITSTATUS(status) != 0) && first.ok()) {
        first = absl::InternalError(absl::StrCat("serve process ", pid, " failed"));
      }
      pid = -1;
    }
    return first;
  }

 private:
  absl::StatusOr<uint16_t> Launch(std::vector<std::string> args,
                                  const std::string& port_file) {
    const std::string path = (std::filesystem::path(dir_) / port_file).string();
    args.push_back("--port-file");
    args.push_back(path);
    const std::string exe = SelfExe();
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (std::string& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawn(&pid, exe.c_str(), nullptr, nullptr, argv.data(), environ) != 0) {
      return absl::UnavailableError("posix_spawn failed");
    }
    pids_.push_back(pid);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    while (std::chrono::steady_clock::now() < deadline) {
      std::ifstream in(path);
      unsigned port = 0;
      if (in >> port && port > 0) return static_cast<uint16_t>(port);
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == pid) {
        pids_.back() = -1;
        return absl::UnavailableError(absl::StrCat(args[2], " process exited early"));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return absl::DeadlineExceededError("serve process did not report its port");
  }

  std::string dir_;
  std::vector<pid_t> pids_;
};

int CmdRun(const RunFlags& f) {
  if (f.transport == "in-process" &&
      (f.spawn || !f.servers.empty() || !f.aggregator.empty())) {
    throw UsageError{"--spawn/--servers/--aggregator need --transport tcp"};
  }
  if (f.transport == "tcp" && !f.spawn &&
      (f.servers.size() != static_cast<size_t>(f.t - 1) || f.aggregator.empty())) {
    throw UsageError{absl::StrCat("--transport tcp needs --spawn, or ", f.t - 1,
                                  " --servers and an --aggregator")};
  }
  auto input = f.data.Load();
  if (!input.ok()) return Fail(input.status());
  const ppkm::PrepareOptions prepare = f.Prepare();
  auto prepared = ppkm::PrepareData(*input, prepare);
  if (!prepared.ok()) return Fail(prepared.status());
  const ppkm::RunConfig config = f.Config();

  absl::StatusOr<ppkm::RunResult> result;
  if (f.transport == "in-process") {
    result = ppkm::RunInProcess(prepared->data, prepared->params, config);
  } else if (f.spawn) {
    SpawnedCluster cluster;
    auto topology = cluster.Start(f.t, f.idle_timeout_ms);
    if (!topology.ok()) return Fail(topology.status());
    result = ppkm::RunOverTcp(prepared->data, prepared->params, config, *topology);
    if (result.ok()) {
      if (absl::Status s = cluster.Wait(); !s.ok()) return Fail(s);
    }
  } else {
    ppkm::TcpTopology topology;
    topology.idle_timeout = std::chrono::milliseconds(f.idle_timeout_ms);
    for (const std::string& s : f.servers) {
      auto hp = ppkm::ParseHostPort(s);
      if (!hp.ok()) throw UsageError{std::string(hp.status().message())};
      topology.servers.push_back(*hp);
    }
    auto hp = ppkm::ParseHostPort(f.aggregator);
    if (!hp.ok()) throw UsageError{std::string(hp.status().message())};
    topology.aggregator = *hp;
    result = ppkm::RunOverTcp(prepared->data, prepared->params, config, topology);
  }
  if (!result.ok()) return Fail(result.status());

  ppkm::ReportInputs in;
  in.transport = f.transport;
  in.config = config;
  in.prepare = prepare;
  in.prepared = &*prepared;
  in.result = &*result;
  if (f.with_oracle) {
    auto oracle = ppkm::Lloyd(prepared->data, result->initial_center_ids,
                              config.tolerance, config.max_iters);
    if (!oracle.ok()) return Fail(oracle.status());
    in.oracle = ppkm::CompareWithOracle(*result, *oracle);
  }
  if (absl::Status s = ppkm::WriteRunOutputs(f.out, in); !s.ok()) return Fail(s);
  std::cout << ppkm::BuildReport(in).dump(2) << "\n";
  return kExitOk;
}

int CmdOracle(const RunFlags& f) {
  auto input = f.data.Load();
  if (!input.ok()) return Fail(input.status());
  ppkm::Dataset data = *input;
  bool negative = false;
  for (const ppkm::Point& p : data.points()) {
    for (double v : p.coords) negative = negative || v < 0.0;
  }
  if (negative) {
    auto moved = ppkm::TranslateNonNegative(data);
    if (!moved.ok()) return Fail(moved.status());
    data = moved->dataset;
  }
  auto ids = ppkm::SampleInitialCenterIds(
      data.ids(), f.k, ppkm::DeriveSeed(f.seed, ppkm::SeedStream::kInitialCenters));
  if (!ids.ok()) return Fail(ids.status());
  auto result = ppkm::Lloyd(data, *ids, f.tolerance, f.max_iters);
  if (!result.ok()) return Fail(result.status());
  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  if (absl::Status s = ppkm::WriteTextFile(
          (std::filesystem::path(f.out) / "labels.csv").string(),
          ppkm::FormatLabelsCsv(result->labels));
      !s.ok()) {
    return Fail(s);
  }
  json centers = json::array();
  for (const ppkm::Point& c : result->centers.centers) centers.push_back(c.coords);
  auto cost = ppkm::ComputeBaselineCost(static_cast<int64_t>(input->size()), f.k,
                                        static_cast<int64_t>(input->dim()),
                                        result->iterations);
  json out = {{"k", f.k},
              {"seed", f.seed},
              {"initial_center_ids", *ids},
              {"iterations", result->iterations},
              {"converged", result->converged},
              {"centers", centers},
              {"objective", result->objective_history.empty()
                                ? json(nullptr)
                                : json(result->objective_history.back())},
              {"op_counts",
               {{"distance_evaluations", result->op_counts.distance_evaluations},
                {"multiplications", result->op_counts.multiplications},
                {"inversions", result->op_counts.inversions},
                {"comparisons", result->op_counts.comparisons}}},
              {"baseline_cost", cost.ok() ? cost->ToJson() : json(nullptr)}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct PlanFlags {
  DataFlags data;
  std::string config;
  std::string mode = "weak";
  double w = 1.0;
  int ell1 = 64;
  int ell2 = 32;
  uint64_t seed = 0;
  uint64_t n = 0;
  uint64_t d = 0;
  bool table = false;
};

json PlanJson(const ppkm::SecurityPlan& p) {
  return {{"n", p.n},
          {"d", p.d},
          {"ell1", p.ell1},
          {"ell2", p.ell2},
          {"log2_p_guess_point", p.log2_p_guess_point},
          {"log2_p_guess_quotient", p.log2_p_guess_quotient},
          {"ell1_exceeds_ell2", p.ell1_exceeds_ell2},
          {"secure", p.secure}};
}

json BoundsJson(const ppkm::BoundReport& b) {
  json q = json::array();
  for (double v : b.eps_quotients) q.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  return {{"mode", std::string(ppkm::BoundModeName(b.mode))},
          {"r_lower", b.r_lower},
          {"eps_upper", b.eps_upper},
          {"w", b.w},
          {"r_relaxed", b.r_relaxed},
          {"eps_quotients", q}};
}

int CmdPlan(const PlanFlags& f) {
  json out = json::object();
  uint64_t n = f.n;
  uint64_t d = f.d;
  if (!f.data.data.empty()) {
    auto input = f.data.Load();
    if (!input.ok()) return Fail(input.status());
    ppkm::PrepareOptions prepare;
    prepare.mode = f.mode == "strict" ? ppkm::BoundMode::kStrict : ppkm::BoundMode::kWeak;
    prepare.w = f.w;
    prepare.sampling.ell1 = f.ell1;
    prepare.sampling.ell2 = f.ell2;
    prepare.sampling.seed = f.seed;
    auto prepared = ppkm::PrepareData(*input, prepare);
    if (!prepared.ok()) return Fail(prepared.status());
    out["bounds"] = BoundsJson(prepared->bounds);
    out["sampled"] = {{"r_min", prepared->params.min_scale()},
                      {"eps_max", prepared->params.eps_max}};
    if (n == 0) n = input->size();
    if (d == 0) d = input->dim();
  } else if (f.mode == "strict") {
    throw UsageError{"--mode strict needs --data"};
  } else {
    auto bounds = ppkm::WeakBounds(f.w);
    if (!bounds.ok()) return Fail(bounds.status());
    out["bounds"] = BoundsJson(*bounds);
  }
  if (n == 0 || d == 0) throw UsageError{"--n and --d (or --data) are required"};
  const ppkm::SecurityPlan plan = ppkm::MakeSecurityPlan(n, d, f.ell1, f.ell2);
  const ppkm::BitLengthThresholds th = ppkm::RequiredBitLengths(n, d);
  out["security_plan"] = PlanJson(plan);
  out["required_bits"] = {{"two_ell1_plus_ell2", th.two_ell1_plus_ell2},
                          {"ell1_plus_three_ell2", th.ell1_plus_three_ell2},
                          {"target_log2", ppkm::kSecurityTargetLog2}};
  if (f.table) {
    std::cout << absl::StrFormat("%6s %6s %22s %22s %8s\n", "ell1", "ell2",
                                 "log2 P(point guess)", "log2 P(quotient guess)",
                                 "secure");
    std::cout << absl::StrFormat("%6d %6d %22.4f %22.4f %8s\n", plan.ell1, plan.ell2,
                                 plan.log2_p_guess_point, plan.log2_p_guess_quotient,
                                 plan.secure ? "yes" : "no");
    std::cout << absl::StrFormat("required: 2*ell1 + ell2 >= %.4f, ell1 + 3*ell2 >= %.4f\n",
                                 th.two_ell1_plus_ell2, th.ell1_plus_three_ell2);
    return kExitOk;
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct AnalyzeFlags {
  std::string config;
  bool attack_table = false;
  bool kl = false;
  bool table = false;
  std::string transcript;
  std::optional<double> x11, x21, x31, x41, r1, eps;
  int64_t d = 1;
  std::optional<double> x, y, sum_d_over_m;
  std::optional<double> x1, x2, z;
  // Attack cost for one setting.
  std::optional<double> K, R, c;
  // Cost model.
  bool cost = false;
  int64_t n = 0, k = 0, m = 0, t = 0;
  double modulus = 0.0;
};

int CmdAnalyze(const AnalyzeFlags& f) {
  json out = json::object();
  bool any = false;
  if (f.attack_table) {
    any = true;
    const auto rows = ppkm::AttackTable();
    if (f.table) {
      std::cout << absl::StrFormat("%6s %7s %4s %10s %8s\n", "R", "c", "d", "log2 x",
                                   "printed");
      for (const auto& row : rows) {
        std::cout << absl::StrFormat("%6g %7g %4d %10.3f %8d\n", row.cost.R, row.cost.c,
                                     row.cost.d, row.cost.log2_x, row.printed_exponent);
      }
    }
    json table = json::array();
    for (const auto& row : rows) {
      json r = row.cost.ToJson();
      r["exponent"] = static_cast<int>(std::lround(row.cost.log2_x));
      r["printed_exponent"] = row.printed_exponent;
      table.push_back(r);
    }
    out["attack_table"] = table;
  }
  if (f.K || f.R || f.c) {
    any = true;
    if (!f.K || !f.R || !f.c) throw UsageError{"--K, --R and --c go together"};
    auto cost = ppkm::AttackCost(*f.K, *f.R, *f.c, f.d);
    if (!cost.ok()) return Fail(cost.status());
    out["attack_cost"] = cost->ToJson();
  }
  if (f.kl) {
    any = true;
    json kl = json::object();
    if (!f.transcript.empty()) {
      std::ifstream in(f.transcript);
      if (!in) return Fail(absl::NotFoundError(absl::StrCat("cannot read ", f.transcript)));
      std::vector<std::string> lines;
      for (std::string line; std::getline(in, line);) {
        if (!line.empty()) lines.push_back(line);
      }
      auto leakage = ppkm::AnalyzeTranscript(lines);
      if (!leakage.ok()) return Fail(leakage.status());
      kl["transcript"] = leakage->ToJson();
    }
    const bool quotient = f.x11 || f.x21 || f.x31 || f.x41 || f.r1 || f.eps;
    if (quotient) {
      if (!(f.x11 && f.x21 && f.x31 && f.x41 && f.r1 && f.eps)) {
        throw UsageError{"--x11 --x21 --x31 --x41 --r1 --eps go together"};
      }
      auto v = ppkm::KdQuotientBound(*f.x11, *f.x21, *f.x31, *f.x41, *f.r1, *f.eps, f.d);
      if (!v.ok()) return Fail(v.status());
      kl["kd_quotient_bound"] = {{"x11", *f.x11}, {"x21", *f.x21}, {"x31", *f.x31},
                                 {"x41", *f.x41}, {"r1", *f.r1},   {"eps", *f.eps},
                                 {"d", f.d},      {"value", *v}};
    }
    if (f.x || f.y || f.sum_d_over_m) {
      if (!(f.x && f.y && f.sum_d_over_m)) {
        throw UsageError{"--x --y --sum-d-over-m go together"};
      }
      const ppkm::SignedKd v = ppkm::KdAggregator(*f.x, *f.y, *f.sum_d_over_m);
      kl["kd_aggregator_ratio"] = {{"value", v.value}, {"abs", v.magnitude}};
    }
    if (f.x1 || f.x2 || f.z) {
      if (!(f.x1 && f.x2 && f.z)) throw UsageError{"--x1 --x2 --z go together"};
      const ppkm::SignedKd v = ppkm::KdSameMask(*f.x1, *f.x2, *f.z);
      kl["kd_same_mask"] = {{"value", v.value}, {"abs", v.magnitude}};
    }
    if (kl.empty()) throw UsageError{"--kl needs --transcript or explicit inputs"};
    out["kl"] = kl;
  }
  if (f.cost) {
    any = true;
    auto baseline = ppkm::ComputeBaselineCost(f.n, f.k, f.d, f.m);
    if (!baseline.ok()) return Fail(baseline.status());
    out["baseline_cost"] = baseline->ToJson();
    if (f.t > 0 && f.modulus > 0.0) {
      auto shatter = ppkm::ComputeShatterCost(f.n, f.t, f.modulus, f.m);
      if (!shatter.ok()) return Fail(shatter.status());
      out["shatter_cost"] = shatter->ToJson();
    }
  }
  if (!any) throw UsageError{"nothing to analyze; see --help"};
  if (!(f.table && f.attack_table && out.size() == 1)) std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct ServeFlags {
  std::string role = "server";
  int index = 0;
  int t = 0;
  std::string listen = "127.0.0.1:0";
  std::string aggregator;
  std::string port_file;
  int64_t idle_timeout_ms = 60000;
};

int CmdServe(const ServeFlags& f) {
  ppkm::ServeOptions options;
  options.role = f.role == "aggregator" ? ppkm::RoleKind::kAggregator
                                        : ppkm::RoleKind::kServer;
  options.index = f.index;
  if (options.role == ppkm::RoleKind::kAggregator && options.index == 0) {
    options.index = f.t;
  }
  if (options.index < 1) throw UsageError{"--index (or --t for the aggregator) is required"};
  auto listen = ppkm::ParseHostPort(f.listen);
  if (!listen.ok()) throw UsageError{std::string(listen.status().message())};
  options.listen = *listen;
  if (options.role == ppkm::RoleKind::kServer) {
    auto agg = ppkm::ParseHostPort(f.aggregator);
    if (!agg.ok()) throw UsageError{"servers need --aggregator host:port"};
    options.aggregator = *agg;
  }
  options.idle_timeout = std::chrono::milliseconds(f.idle_timeout_ms);
  absl::Status port_status = absl::OkStatus();
  absl::Status s = ppkm::ServeRole(options, [&](uint16_t port) {
    std::cerr << "listening on " << options.listen.host << ":" << port << "\n";
    if (f.port_file.empty()) return;
    const std::string tmp = f.port_file + ".tmp";
    port_status = ppkm::WriteTextFile(tmp, absl::StrCat(port, "\n"));
    std::error_code ec;
    if (port_status.ok()) std::filesystem::rename(tmp, f.port_file, ec);
    if (ec) port_status = absl::UnavailableError(ec.message());
  });
  if (!port_status.ok()) return Fail(port_status);
  if (!s.ok()) return Fail(s);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving multi-server k-means over randomized data"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run the protocol and write its outputs");
  run_flags.Register(run, /*protocol=*/true);

  RunFlags oracle_flags;
  CLI::App* oracle = app.add_subcommand("oracle", "plaintext Lloyd's with the run's seeding");
  oracle_flags.Register(oracle, /*protocol=*/false);

  PlanFlags plan_flags;
  CLI::App* plan = app.add_subcommand("plan-params", "parameter bounds and bit-length security");
  plan_flags.data.Register(plan);
  plan->add_option("--config", plan_flags.config, "JSON file with flag values");
  plan->add_option("--mode", plan_flags.mode, "bounds")
      ->check(CLI::IsMember({"strict", "weak"}));
  plan->add_option("--w", plan_flags.w, "weak bound w")->check(CLI::PositiveNumber);
  plan->add_option("--ell1", plan_flags.ell1, "bit length of r");
  plan->add_option("--ell2", plan_flags.ell2, "bit length of eps");
  plan->add_option("--seed", plan_flags.seed, "sampling seed")->envname("PPKM_SEED");
  plan->add_option("--n", plan_flags.n, "number of points");
  plan->add_option("--d", plan_flags.d, "dimension");
  plan->add_flag("--table", plan_flags.table, "aligned text instead of JSON");

  AnalyzeFlags an;
  CLI::App* analyze = app.add_subcommand("analyze", "leakage bounds and attack cost");
  analyze->add_option("--config", an.config, "JSON file with flag values");
  analyze->add_flag("--attack-table", an.attack_table, "attack cost for the ten reference settings");
  analyze->add_flag("--kl", an.kl, "divergence bounds");
  analyze->add_flag("--table", an.table, "aligned text for the attack table");
  analyze->add_option("--transcript", an.transcript, "transcript.jsonl of an in-process run");
  analyze->add_option("--x11", an.x11);
  analyze->add_option("--x21", an.x21);
  analyze->add_option("--x31", an.x31);
  analyze->add_option("--x41", an.x41);
  analyze->add_option("--r1", an.r1);
  analyze->add_option("--eps", an.eps);
  analyze->add_option("--d", an.d, "dimension")->check(CLI::PositiveNumber);
  analyze->add_option("--x", an.x, "sum mask");
  analyze->add_option("--y", an.y, "count mask");
  analyze->add_option("--sum-d-over-m", an.sum_d_over_m);
  analyze->add_option("--x1", an.x1);
  analyze->add_option("--x2", an.x2);
  analyze->add_option("--z", an.z, "number of points");
  analyze->add_option("--K", an.K, "known-sample size");
  analyze->add_option("--R", an.R, "data range");
  analyze->add_option("--c", an.c, "cell length");
  analyze->add_flag("--cost", an.cost, "operation-count model (--n --k --d --m, optional --t --modulus)");
  analyze->add_option("--n", an.n);
  analyze->add_option("--k", an.k);
  analyze->add_option("--m", an.m, "iterations");
  analyze->add_option("--t", an.t, "shares per point in the shatter model");
  analyze->add_option("--modulus", an.modulus, "CRT modulus N");

  ServeFlags sf;
  CLI::App* serve = app.add_subcommand("serve", "serve one compute server or the aggregator over TCP");
  serve->add_option("--role", sf.role)->check(CLI::IsMember({"server", "aggregator"}));
  serve->add_option("--index", sf.index, "server index in 1..t-1, or t for the aggregator");
  serve->add_option("--t", sf.t, "total servers (aggregator index default)");
  serve->add_option("--listen", sf.listen, "host:port; port 0 picks one");
  serve->add_option("--aggregator", sf.aggregator, "aggregator host:port (servers)");
  serve->add_option("--port-file", sf.port_file, "write the bound port here");
  serve->add_option("--idle-timeout-ms", sf.idle_timeout_ms)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    if (*run) {
      if (!run_flags.config.empty()) ApplyJsonConfig(run, run_flags.config);
      return CmdRun(run_flags);
    }
    if (*oracle) {
      if (!oracle_flags.config.empty()) ApplyJsonConfig(oracle, oracle_flags.config);
      return CmdOracle(oracle_flags);
    }
    if (*plan) {
      if (!plan_flags.config.empty()) ApplyJsonConfig(plan, plan_flags.config);
      return CmdPlan(plan_flags);
    }
    if (*analyze) {
      if (!an.config.empty()) ApplyJsonConfig(analyze, an.config);
      return CmdAnalyze(an);
    }
    return CmdServe(sf);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "ppkm: " << e.message << "\n";
    return kExitUsage;
  }
}
