#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rgate/config.hpp"
#include "rgate/evals.hpp"
#include "rgate/gateway.hpp"
#include "rgate/mock_backend.hpp"
#include "rgate/upstream.hpp"

namespace {

using nlohmann::json;

std::pair<std::string, int> parse_listen(const std::string& listen) {
  const size_t colon = listen.rfind(':');
  if (colon == std::string::npos)
    throw rgate::Error(rgate::ErrorCode::invalid_config,
                       "listen address must be host:port, got '" + listen + "'");
  return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
}

void write_or_print(const std::string& out_path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out)
    throw rgate::Error(rgate::ErrorCode::parse_error, "cannot write '" + out_path + "'");
  out << text;
}

rgate::GatewayConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return rgate::validate_config(rgate::GatewayConfig{});
  return rgate::load_gateway_config(path);
}

int run_serve(const std::string& config_path, const std::string& listen) {
  rgate::GatewayConfig config = load_config_or_default(config_path);
  auto client = std::make_shared<rgate::HttpChatClient>();
  static rgate::Gateway gateway(config, client);

  auto [host, port] = parse_listen(listen);
  const int bound = gateway.start(host, port);
  std::cout << "gateway listening on " << host << ":" << bound << "\n";

  std::signal(SIGINT, [](int) { std::exit(0); });
  std::signal(SIGTERM, [](int) { std::exit(0); });
  gateway.wait();
  return 0;
}

int run_mock_server(const std::string& script_path, const std::string& listen) {
  auto script = rgate::MockScript::load_file(script_path);
  static rgate::MockServer server(script);

  auto [host, port] = parse_listen(listen);
  const int bound = server.start(host, port);
  std::cout << "mock upstream listening on " << host << ":" << bound << "\n";

  std::signal(SIGINT, [](int) { std::exit(0); });
  std::signal(SIGTERM, [](int) { std::exit(0); });
  while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

int run_eval_command(const std::string& benchmark_path, const std::string& config_path,
                     const std::string& mock_script_path, const std::string& modes_arg,
                     int runs, int workers, bool disable_plan, std::optional<long long> seed,
                     const std::string& out_path, const std::string& baseline_path) {
  std::vector<rgate::BenchmarkRecord> records = rgate::load_benchmark(benchmark_path);

  rgate::GatewayConfig config = load_config_or_default(config_path);
  std::shared_ptr<rgate::ChatClient> client;
  if (!mock_script_path.empty()) {
    auto script =
        rgate::MockScript::load_file(mock_script_path);
    client = std::make_shared<rgate::MockChatClient>(script);
  } else {
    client = std::make_shared<rgate::HttpChatClient>();
  }

  std::set<rgate::AblationMode> modes;
  std::stringstream mode_stream(modes_arg);
  std::string mode_name;
  while (std::getline(mode_stream, mode_name, ',')) {
    if (mode_name == "all") {
      modes.insert({rgate::AblationMode::base, rgate::AblationMode::plan_only,
                    rgate::AblationMode::bo3, rgate::AblationMode::plan_bo3});
    } else if (!mode_name.empty()) {
      modes.insert(rgate::ablation_mode_from_string(mode_name));
    }
  }
  if (modes.empty())
    throw rgate::Error(rgate::ErrorCode::invalid_config, "mode: none given");

  rgate::EvalOptions options;
  options.runs = runs;
  options.workers = workers;
  options.disable_plan = disable_plan;
  options.seed = seed;
  options.benchmark_label = benchmark_path;

  std::optional<rgate::RunMatrix> baseline;
  if (!baseline_path.empty()) {
    std::ifstream in(baseline_path);
    if (!in)
      throw rgate::Error(rgate::ErrorCode::parse_error,
                         "cannot open baseline '" + baseline_path + "'");
    json doc;
    in >> doc;
    baseline = rgate::run_matrix_from_report_json(doc);
  }

  auto reports = rgate::run_ablation(records, modes, config.pipeline, *client, options);

  json out;
  for (auto& [mode, report] : reports) {
    if (baseline) {
      rgate::TokenStats stats = rgate::token_stats(report.matrix, &*baseline);
      report.token_reduction_vs_baseline = stats.reduction_vs_baseline_percent;
    }
    std::cout << "mode " << report.mode << ": pass1_avg=" << report.pass1_avg
              << " avg_tokens=" << report.avg_tokens << " errors=" << report.error_count
              << "\n";
    if (reports.size() == 1) {
      out = rgate::score_report_to_json(report);
    } else {
      out[report.mode] = rgate::score_report_to_json(report);
    }
  }
  write_or_print(out_path, out);
  return 0;
}

int run_safety(const std::string& scores_path, const std::string& out_path) {
  std::ifstream in(scores_path);
  if (!in)
    throw rgate::Error(rgate::ErrorCode::parse_error, "cannot open '" + scores_path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw rgate::Error(rgate::ErrorCode::parse_error,
                       "scores file '" + scores_path + "': " + e.what());
  }
  std::map<std::string, std::map<std::string, double>> scores;
  for (auto aspect = doc.begin(); aspect != doc.end(); ++aspect) {
    for (auto dataset = aspect.value().begin(); dataset != aspect.value().end(); ++dataset) {
      scores[aspect.key()][dataset.key()] = dataset.value().get<double>();
    }
  }
  rgate::SafetyReport report = rgate::safety_aggregate(scores);
  write_or_print(out_path, rgate::safety_report_to_json(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan + best-of-N reasoning gateway and evaluation harness"};
  app.require_subcommand(1);

  // serve
  std::string serve_config, serve_listen = "127.0.0.1:8080";
  CLI::App* serve = app.add_subcommand("serve", "Run the reasoning gateway");
  serve->add_option("--config", serve_config, "Config file (JSON)");
  serve->add_option("--listen", serve_listen, "host:port to listen on");

  // eval
  std::string eval_benchmark, eval_config, eval_mock, eval_mode = "plan+bo3";
  std::string eval_out, eval_baseline;
  int eval_runs = 16, eval_workers = 4;
  bool eval_disable_plan = false;
  long long eval_seed = 0;
  CLI::App* eval = app.add_subcommand("eval", "Run a benchmark through the pipeline");
  eval->add_option("--benchmark", eval_benchmark, "Benchmark JSONL file")->required();
  eval->add_option("--config", eval_config, "Config file (JSON)");
  eval->add_option("--mock-script", eval_mock, "Run against an in-process scripted backend");
  eval->add_option("--mode", eval_mode, "base|plan|bo3|plan+bo3|all (comma-separated)");
  eval->add_option("--runs", eval_runs, "Independent runs per question");
  eval->add_option("--workers", eval_workers, "Worker threads");
  eval->add_flag("--disable-plan", eval_disable_plan, "Force the plan stage off");
  eval->add_option("--seed", eval_seed, "Base sampling seed");
  eval->add_option("--out", eval_out, "Report output path (default: stdout)");
  eval->add_option("--baseline", eval_baseline, "Baseline report for token reduction");

  // safety
  std::string safety_scores, safety_out;
  CLI::App* safety = app.add_subcommand("safety", "Aggregate safety scores");
  safety->add_option("--scores", safety_scores, "Aspect/dataset score file (JSON)")->required();
  safety->add_option("--out", safety_out, "Report output path (default: stdout)");

  // passk
  long long passk_n = 0, passk_c = 0, passk_k = 0;
  CLI::App* passk = app.add_subcommand("passk", "Unbiased pass@k estimate");
  passk->add_option("--n", passk_n, "Total samples")->required();
  passk->add_option("--c", passk_c, "Correct samples")->required();
  passk->add_option("--k", passk_k, "Sampling budget")->required();

  // mock-server
  std::string mock_script, mock_listen = "127.0.0.1:18080";
  CLI::App* mock = app.add_subcommand("mock-server", "Run the scripted upstream server");
  mock->add_option("--script", mock_script, "Mock script file (JSON)")->required();
  mock->add_option("--listen", mock_listen, "host:port to listen on");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) return run_serve(serve_config, serve_listen);
    if (eval->parsed()) {
      const std::optional<long long> seed =
          eval->count("--seed") > 0 ? std::optional<long long>(eval_seed) : std::nullopt;
      return run_eval_command(eval_benchmark, eval_config, eval_mock, eval_mode, eval_runs,
                              eval_workers, eval_disable_plan, seed, eval_out, eval_baseline);
    }
    if (safety->parsed()) return run_safety(safety_scores, safety_out);
    if (passk->parsed()) {
      std::printf("%.12g\n", rgate::pass_at_k(passk_n, passk_c, passk_k));
      return 0;
    }
    if (mock->parsed()) return run_mock_server(mock_script, mock_listen);
  } catch (const rgate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
