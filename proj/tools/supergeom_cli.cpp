// supergeom: batch driver for scenario files.
//
//   supergeom verify <file> [--out <file>] [--tol <x>]
//   supergeom scalar <file> --seed <u64> --count <k>
//   supergeom forced <file>
//   supergeom sample <file> --seed <u64>
//
// Exit codes: 0 success, 1 invariant failure or numerical error, 2 bad input.
// Reports go to --out, else to $SUPERGEOM_OUT_DIR/<scenario>.<command>.json,
// else to stdout.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "supergeom/report.hpp"

namespace {

using namespace supergeom;
using report::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr const char* kOutDirEnv = "SUPERGEOM_OUT_DIR";

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Returns the destination path, or nullopt for stdout.
std::optional<std::string> destination(const std::string& out, const io::ScenarioFile& file,
                                       const std::string& command) {
  if (!out.empty()) return out;
  if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / (file.geometry.name + "." + command + ".json")).string();
  }
  return std::nullopt;
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const SingularBlock*>(&e)) return "SingularBlock";
  if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
  if (dynamic_cast<const NonSymmetric*>(&e)) return "NonSymmetric";
  if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
  if (dynamic_cast<const IncompatibleConnection*>(&e)) return "IncompatibleConnection";
  if (dynamic_cast<const IncompatibleFrame*>(&e)) return "IncompatibleFrame";
  if (dynamic_cast<const OutsideChartDomain*>(&e)) return "OutsideChartDomain";
  if (dynamic_cast<const ExtractionAmbiguous*>(&e)) return "ExtractionAmbiguous";
  return "Error";
}

struct Invocation {
  std::string command, path, out;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  int count = 0;
};

int run(const Invocation& inv) {
  const auto start = std::chrono::steady_clock::now();
  io::ScenarioFile file = io::load_scenario(inv.path);
  if (inv.tol) {
    if (!(*inv.tol > 0.0)) throw ScenarioError("--tol must be positive");
    file.tolerances["default"] = *inv.tol;
  }

  report::CommandResult res;
  if (inv.command == "verify") {
    res = report::verify(file);
  } else if (inv.command == "scalar") {
    res = report::scalar(file, inv.seed, inv.count);
  } else if (inv.command == "forced") {
    res = report::forced(file);
    for (const auto& p : res.report["points"]) {
      if (p["forced"].get<bool>()) {
        std::cout << "K1=K2=L3 forced to 0; K3 free dimension = " << p["k3_free_dim"].get<long>() << "\n";
      } else {
        std::cout << "K1=K2=L3 not forced; nullspace dimension = " << p["nullspace_dim"].get<long>() << "\n";
      }
    }
  } else {
    res = report::sample(file, inv.seed);
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.report["run"] = {{"timestamp", utc_timestamp()}, {"wall_clock_s", wall}};
  const std::string text = res.report.dump(2) + "\n";
  if (const auto dest = destination(inv.out, file, inv.command)) {
    io::write_file(*dest, text);
  } else if (inv.command != "forced") {
    std::cout << text;
  }

  for (const auto& f : res.failures) std::cerr << "FAIL " << f << "\n";
  return res.ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded curvature checks on scenario files"};
  app.require_subcommand(1);
  Invocation inv;

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("file", inv.path, "Scenario file")->required();
  verify->add_option("--out", inv.out, "Report path");
  verify->add_option("--tol", inv.tol, "Default tolerance");

  auto* scalar = app.add_subcommand("scalar", "Scalar curvature over sampled superconnections");
  scalar->add_option("file", inv.path, "Scenario file")->required();
  scalar->add_option("--seed", inv.seed, "Sampler seed")->required();
  scalar->add_option("--count", inv.count, "Number of samples")->required()->check(CLI::NonNegativeNumber);
  scalar->add_option("--out", inv.out, "Report path");

  auto* forced = app.add_subcommand("forced", "Forced-vanishing certificate");
  forced->add_option("file", inv.path, "Scenario file")->required();
  forced->add_option("--out", inv.out, "Report path");

  auto* sample = app.add_subcommand("sample", "Draw one compatible superconnection");
  sample->add_option("file", inv.path, "Scenario file")->required();
  sample->add_option("--seed", inv.seed, "Sampler seed")->required();
  sample->add_option("--out", inv.out, "Report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  inv.command = app.get_subcommands().front()->get_name();

  try {
    return run(inv);
  } catch (const io::ParseError& e) {
    std::cerr << inv.path << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const ScenarioError& e) {
    std::cerr << inv.path << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << error_kind(e) << ": " << e.what() << "\n";
    return kExitFailure;
  }
}
