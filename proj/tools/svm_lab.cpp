#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "svm/config.hpp"
#include "svm/errors.hpp"
#include "svm/run.hpp"

namespace {

enum ExitCode { kOk = 0, kChecksFailed = 1, kConfig = 2, kNumerical = 3 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

unsigned env_threads() {
  const char* v = std::getenv("SVM_LAB_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw svm::ConfigError("SVM_LAB_THREADS must be a positive integer");
  return static_cast<unsigned>(n);
}

svm::RunConfig load(const std::string& path, const Overrides& o) {
  auto cfg = svm::parse_config(svm::ConfigFile::load(path));
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  // --threads, then SVM_LAB_THREADS, then run.threads.
  if (o.threads) {
    cfg.threads = *o.threads;
  } else if (const unsigned t = env_threads(); t > 0) {
    cfg.threads = t;
  }
  return cfg;
}

int report(const svm::RunResult& result, double seconds) {
  for (const auto& c : result.checks) std::cout << svm::format_check(c) << '\n';
  for (const auto& a : result.artifacts) std::cerr << "wrote " << a.string() << '\n';
  std::fprintf(stderr, "elapsed %.2f s\n", seconds);
  return result.all_pass() ? kOk : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic variational method laboratory"};
  app.require_subcommand(1);
  Overrides o;
  std::string config;
  const auto add = [&](const char* name, const char* what) {
    auto* sub = app.add_subcommand(name, what);
    sub->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override ensemble.seed");
    sub->add_option("--out", o.out, "Override output.dir");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    return sub;
  };
  auto* run = add("run", "Run the configured scenario");
  auto* scan = add("scan", "Scan the (alpha1, alpha2) plane");
  auto* verify = add("verify", "Run the acceptance criteria listed in verify.criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const auto cfg = load(config, o);
    const auto start = std::chrono::steady_clock::now();
    svm::RunResult result;
    if (run->parsed()) {
      result = svm::run(cfg);
    } else if (scan->parsed()) {
      result = svm::scan_params(cfg);
    } else if (verify->parsed()) {
      result = svm::verify_suite(cfg);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report(result, seconds);
  } catch (const svm::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const svm::InvalidParameters& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const svm::BoxTooSmall& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const svm::ParameterMismatch& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const svm::ConfigMismatch& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kNumerical;
  }
}
