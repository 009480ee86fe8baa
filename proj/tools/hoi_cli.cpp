// hoi: command-line front end for the interaction tests.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "hoi/commands.hpp"
#include "hoi/error.hpp"
#include "hoi/io.hpp"
#include "hoi/runtime.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kResource = 4 };

struct Common {
  std::string kind = "streitberg";
  std::string statistic = "auto";
  std::string correction = "bonferroni";
  double alpha = 0.05;
  int permutations = 500;
  std::uint64_t seed = 0;
  int trials = 100;
  int workers = 1;
  bool early_exit = false;
  std::string output;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c, bool trials) {
  app->add_option("--kind", c.kind, "streitberg | lancaster | joint | modified-dhsic")->capture_default_str();
  app->add_option("--alpha", c.alpha, "significance level before correction")->capture_default_str();
  app->add_option("--permutations", c.permutations, "permutation replicates per sub-test")->capture_default_str();
  app->add_option("--seed", c.seed, "base seed")->capture_default_str();
  app->add_option("--workers", c.workers, "worker threads")->capture_default_str();
  app->add_option("--statistic", c.statistic, "auto | streitberg | lancaster | dhsic | block-hsic")->capture_default_str();
  app->add_option("--correction", c.correction, "bonferroni | none")->capture_default_str();
  app->add_flag("--early-exit", c.early_exit, "stop at the first non-rejected sub-hypothesis");
  app->add_option("--output", c.output, "output file (default stdout)");
  app->add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json", "text"}))->capture_default_str();
  if (trials) app->add_option("--trials", c.trials, "datasets per grid point")->capture_default_str();
}

hoi::TestConfig base_config(const Common& c) {
  hoi::TestConfig t;
  t.alpha = c.alpha;
  t.permutations = c.permutations;
  t.seed = c.seed;
  t.workers = c.workers;
  t.early_exit = c.early_exit;
  if (c.correction == "bonferroni") {
    t.correction = hoi::Correction::Bonferroni;
  } else if (c.correction == "none") {
    t.correction = hoi::Correction::None;
  } else {
    throw hoi::ParameterError("unknown correction '" + c.correction + "'");
  }
  return t;
}

// Writes to --output when given, stdout otherwise.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw hoi::DataError("cannot write '" + path + "'");
  out << text;
}

struct GeneratorArgs {
  std::string generator = "xor";
  int n = 80;
  double proportion = 1.0;
  double beta = 0.0;
  int modulus = 4;
  int d = 5;
};

void add_generator(CLI::App* app, GeneratorArgs& g) {
  app->add_option("--generator", g.generator, "xor | sigma1 | sigma2 | null")->capture_default_str();
  app->add_option("--n", g.n, "samples")->capture_default_str();
  app->add_option("--proportion", g.proportion, "XOR interaction proportion")->capture_default_str();
  app->add_option("--beta", g.beta, "Gaussian interaction level")->capture_default_str();
  app->add_option("--modulus", g.modulus, "XOR modulus")->capture_default_str();
  app->add_option("--d", g.d, "variables for the null generator")->capture_default_str();
}

hoi::GeneratorSpec to_spec(const GeneratorArgs& g) {
  hoi::GeneratorSpec s;
  s.generator = hoi::parse_generator(g.generator);
  s.n = g.n;
  s.proportion = g.proportion;
  s.beta = g.beta;
  s.modulus = g.modulus;
  s.d = g.d;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  hoi::tune_allocator();
  CLI::App app{"Kernel tests for higher-order interactions"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.require_subcommand(1);

  Common test_c, power_c, bench_c;
  test_c.format = "json";
  power_c.format = "csv";
  bench_c.format = "csv";

  auto* test = app.add_subcommand("test", "run a composite test on a CSV dataset");
  std::string input, variables;
  test->add_option("--input", input, "CSV file")->required();
  test->add_option("--variables", variables, "comma-separated names or 1-based indices");
  add_common(test, test_c, false);

  auto* power = app.add_subcommand("power", "rejection-rate sweep over synthetic data");
  GeneratorArgs power_g;
  std::string parameter = "proportion", null_kind = "composite";
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::string> kinds{"streitberg", "lancaster", "joint"};
  add_generator(power, power_g);
  power->add_option("--param", parameter, "swept parameter: proportion | beta | n")->capture_default_str();
  power->add_option("--grid", grid, "grid values")->delimiter(',');
  power->add_option("--kinds", kinds, "kinds to compare")->delimiter(',');
  power->add_option("--null", null_kind, "composite | joint")
      ->check(CLI::IsMember({"composite", "joint"}))
      ->capture_default_str();
  add_common(power, power_c, true);

  auto* synth = app.add_subcommand("synth", "dump a synthetic dataset as CSV");
  GeneratorArgs synth_g;
  std::uint64_t synth_seed = 0;
  std::string synth_output;
  add_generator(synth, synth_g);
  synth->add_option("--seed", synth_seed, "seed")->capture_default_str();
  synth->add_option("--output", synth_output, "output file (default stdout)");

  auto* lattice = app.add_subcommand("lattice", "partition-lattice counts and matrices");
  int lattice_d = 4;
  std::string lattice_kind = "streitberg", lattice_format = "text", lattice_output;
  bool matrices = false;
  lattice->add_option("--d", lattice_d, "number of variables")->capture_default_str();
  lattice->add_option("--kind", lattice_kind, "streitberg | lancaster | joint")->capture_default_str();
  lattice->add_flag("--matrices", matrices, "print Zeta and Mobius matrices (d <= 6)");
  lattice->add_option("--format", lattice_format, "text | json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  lattice->add_option("--output", lattice_output, "output file (default stdout)");

  auto* bench = app.add_subcommand("bench", "estimator timings and scaling exponents");
  hoi::BenchSpec bench_spec;
  bool no_naive = false;
  bench->add_option("--d", bench_spec.ds, "dimensions")->delimiter(',');
  bench->add_option("--n", bench_spec.ns, "sample sizes")->delimiter(',');
  bench->add_option("--repeats", bench_spec.repeats, "timing repeats (best is kept)")->capture_default_str();
  bench->add_flag("--no-naive", no_naive, "skip the brute-force rows");
  add_common(bench, bench_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*test) {
      const hoi::Dataset all = hoi::read_csv_file(input);
      const hoi::Dataset data = all.select(hoi::resolve_variables(all, variables));
      if (data.n() < 20) std::cerr << "warning: only " << data.n() << " samples; permutation p-values will be coarse\n";
      hoi::TestConfig config = hoi::config_for_kind(test_c.kind, false, base_config(test_c));
      if (test_c.statistic != "auto") config.statistic = hoi::parse_statistic(test_c.statistic);
      const hoi::TestReport report = hoi::composite_test(data, config);
      if (test_c.format == "json") {
        auto j = hoi::to_json(report);
        j["input"] = input;
        j["variables"] = nlohmann::json::array();
        for (const auto& v : data.variables()) j["variables"].push_back(v.name);
        emit(test_c.output, j.dump(2) + "\n");
      } else {
        std::ostringstream out;
        out << "partition,statistic,p_value,level,rejected,exceedances\n";
        for (const auto& r : report.sub_results) {
          out << r.partition.to_string() << ',' << r.statistic << ',' << r.p_value << ',' << r.level << ','
              << (r.rejected ? 1 : 0) << ',' << r.exceedances << '\n';
        }
        emit(test_c.output, out.str());
      }
    } else if (*power) {
      hoi::SweepSpec spec;
      spec.generator = to_spec(power_g);
      spec.parameter = parameter;
      spec.grid = grid;
      spec.trials = power_c.trials;
      spec.kinds = kinds;
      spec.joint_null = null_kind == "joint";
      spec.base = base_config(power_c);
      spec.base.workers = 1;
      spec.workers = power_c.workers;
      const auto rows = hoi::run_power_sweep(spec);
      if (power_c.format == "json") {
        emit(power_c.output, hoi::sweep_json(spec, rows).dump(2) + "\n");
      } else {
        std::ostringstream out;
        hoi::write_sweep_csv(out, rows);
        emit(power_c.output, out.str());
      }
    } else if (*synth) {
      const hoi::Dataset data = hoi::generate(to_spec(synth_g), synth_seed);
      std::ostringstream out;
      hoi::write_csv(out, data);
      emit(synth_output, out.str());
    } else if (*lattice) {
      hoi::LatticeKind kind = hoi::config_for_kind(lattice_kind, false, {}).kind;
      const auto summary = hoi::lattice_summary(lattice_d, kind, matrices);
      emit(lattice_output, lattice_format == "json" ? summary.dump(2) + "\n" : hoi::lattice_text(summary));
    } else if (*bench) {
      bench_spec.seed = bench_c.seed;
      bench_spec.naive = !no_naive;
      const auto rows = hoi::run_bench(bench_spec);
      const auto fits = hoi::fit_scaling(rows);
      if (bench_c.format == "json") {
        nlohmann::json j;
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rows) {
          j["rows"].push_back({{"d", r.d}, {"n", r.n}, {"estimator", r.estimator}, {"mode", r.mode},
                               {"seconds", r.seconds}, {"value", r.value}});
        }
        j["exponents"] = nlohmann::json::array();
        for (const auto& f : fits) {
          j["exponents"].push_back({{"d", f.d}, {"estimator", f.estimator}, {"mode", f.mode}, {"exponent", f.exponent}});
        }
        emit(bench_c.output, j.dump(2) + "\n");
      } else {
        std::ostringstream out;
        hoi::write_bench_csv(out, rows, fits);
        emit(bench_c.output, out.str());
      }
    }
  } catch (const hoi::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const hoi::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kData;
  } catch (const hoi::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const hoi::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kUsage;
  } catch (const hoi::BoundsError& e) {
    std::cerr << "out of bounds: " << e.what() << '\n';
    return kUsage;
  } catch (const hoi::UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
