#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hoi/hypothesis.hpp"
#include "hoi/kernel.hpp"
#include "hoi/lattice.hpp"

namespace hoi {

// Work behind the CLI subcommands, kept in the library so tests can drive it.

enum class Generator { Xor, Sigma1, Sigma2, Null };

Generator parse_generator(const std::string& s);
const char* to_string(Generator g);

struct GeneratorSpec {
  Generator generator = Generator::Xor;
  int n = 80;
  double proportion = 1.0;  // Xor
  double beta = 0.0;        // Sigma1 / Sigma2
  int modulus = 4;          // Xor
  int d = 5;                // Null
};

Dataset generate(const GeneratorSpec& spec, std::uint64_t seed);

/// Maps a --kind name to a test configuration. With `joint_null` the kind
/// names the statistic used to test joint independence instead.
/// Kinds: streitberg, lancaster, joint (alias dhsic), modified-dhsic.
TestConfig config_for_kind(const std::string& kind, bool joint_null, const TestConfig& base);

/// Seed of trial `trial`: splitmix of base XOR trial.
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial);

struct SweepSpec {
  GeneratorSpec generator;
  std::string parameter = "proportion";  // proportion | beta | n
  std::vector<double> grid;
  int trials = 100;
  std::vector<std::string> kinds;
  bool joint_null = false;
  TestConfig base;  // alpha, permutations, seed, correction, early_exit
  int workers = 1;  // across trials
};

struct SweepRow {
  double value = 0.0;
  std::string kind;
  double rejection_rate = 0.0;
  int trials = 0;
  int rejections = 0;
  double mean_statistic = 0.0;
  double wall_seconds = 0.0;
};

/// Every kind sees the same datasets at a grid point, so rates are paired.
std::vector<SweepRow> run_power_sweep(const SweepSpec& spec);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
nlohmann::json sweep_json(const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// Counts for the lattice of `kind`; matrices only when requested (d <= 6).
nlohmann::json lattice_summary(int d, const LatticeKind& kind, bool matrices);
std::string lattice_text(const nlohmann::json& summary);

struct BenchSpec {
  std::vector<int> ds{4, 5};
  std::vector<int> ns{100, 200, 400};
  int repeats = 3;
  std::uint64_t seed = 0;
  bool naive = true;  // brute-force rows, skipped past the resource guard
};

struct BenchRow {
  int d = 0;
  int n = 0;
  std::string estimator;  // streitberg | lancaster
  std::string mode;       // cached | uncached | naive
  double seconds = 0.0;   // best of the repeats
  double value = 0.0;
};

struct ScalingFit {
  int d = 0;
  std::string estimator;
  std::string mode;
  double exponent = 0.0;  // least-squares slope of log time on log n
};

std::vector<BenchRow> run_bench(const BenchSpec& spec);
std::vector<ScalingFit> fit_scaling(const std::vector<BenchRow>& rows);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const std::vector<ScalingFit>& fits);

}  // namespace hoi
