#include "hoi/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hoi/error.hpp"
#include "hoi/estimator.hpp"
#include "hoi/parallel.hpp"
#include "hoi/rng.hpp"
#include "hoi/synth.hpp"

namespace hoi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

GeneratorSpec at_grid_point(const SweepSpec& spec, double value) {
  GeneratorSpec g = spec.generator;
  if (spec.parameter == "proportion") {
    g.proportion = value;
  } else if (spec.parameter == "beta") {
    g.beta = value;
  } else if (spec.parameter == "n") {
    if (value != std::floor(value)) throw ParameterError("sample sizes on the grid must be integers");
    g.n = static_cast<int>(value);
  } else {
    throw ParameterError("unknown sweep parameter '" + spec.parameter + "' (use proportion, beta or n)");
  }
  return g;
}

void check_generator(const GeneratorSpec& g) {
  if (g.n < 2) throw ParameterError("need at least 2 samples, got " + std::to_string(g.n));
  switch (g.generator) {
    case Generator::Xor:
      if (!(g.proportion >= 0.0 && g.proportion <= 1.0)) throw ParameterError("XOR proportion must lie in [0, 1]");
      if (g.modulus < 2) throw ParameterError("XOR modulus must be at least 2");
      break;
    case Generator::Sigma1:
      gaussian_covariance(GaussianCase::Variant::Sigma1, g.beta);
      break;
    case Generator::Sigma2:
      gaussian_covariance(GaussianCase::Variant::Sigma2, g.beta);
      break;
    case Generator::Null:
      if (g.d < 2 || g.d > kMaxVariables) throw ParameterError("null generator needs 2 <= d <= 12");
      break;
  }
}

double report_statistic(const TestReport& r) {
  if (r.config.resolved_statistic() != Statistic::BlockHsic || r.sub_results.empty()) return r.observed_statistic;
  double sum = 0.0;
  for (const auto& s : r.sub_results) sum += s.statistic;
  return sum / static_cast<double>(r.sub_results.size());
}

template <typename Fn>
double best_time(int repeats, Fn&& fn, double& value) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto start = Clock::now();
    value = fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

}  // namespace

Generator parse_generator(const std::string& s) {
  if (s == "xor") return Generator::Xor;
  if (s == "sigma1") return Generator::Sigma1;
  if (s == "sigma2") return Generator::Sigma2;
  if (s == "null") return Generator::Null;
  throw ParameterError("unknown generator '" + s + "' (use xor, sigma1, sigma2 or null)");
}

const char* to_string(Generator g) {
  switch (g) {
    case Generator::Xor: return "xor";
    case Generator::Sigma1: return "sigma1";
    case Generator::Sigma2: return "sigma2";
    case Generator::Null: return "null";
  }
  return "?";
}

Dataset generate(const GeneratorSpec& spec, std::uint64_t seed) {
  check_generator(spec);
  switch (spec.generator) {
    case Generator::Xor:
      return gen_xor({spec.n, spec.proportion, spec.modulus, seed});
    case Generator::Sigma1:
      return gen_gaussian({GaussianCase::Variant::Sigma1, spec.beta, spec.n, seed});
    case Generator::Sigma2:
      return gen_gaussian({GaussianCase::Variant::Sigma2, spec.beta, spec.n, seed});
    case Generator::Null:
      return gen_null(spec.n, spec.d, seed);
  }
  throw ParameterError("unknown generator");
}

TestConfig config_for_kind(const std::string& kind, bool joint_null, const TestConfig& base) {
  TestConfig c = base;
  c.statistic = Statistic::Auto;
  if (joint_null) {
    c.kind = LatticeKind::joint_independence();
    if (kind == "streitberg") {
      c.statistic = Statistic::Streitberg;
    } else if (kind == "lancaster") {
      c.statistic = Statistic::Lancaster;
    } else if (kind == "joint" || kind == "dhsic") {
      c.statistic = Statistic::Dhsic;
    } else if (kind == "modified-dhsic") {
      throw UnsupportedError("modified-dhsic has no joint-independence form");
    } else {
      throw ParameterError("unknown kind '" + kind + "'");
    }
    return c;
  }
  if (kind == "streitberg") {
    c.kind = LatticeKind::streitberg();
  } else if (kind == "lancaster") {
    c.kind = LatticeKind::lancaster();
  } else if (kind == "joint" || kind == "dhsic") {
    c.kind = LatticeKind::joint_independence();
  } else if (kind == "modified-dhsic") {
    c.kind = LatticeKind::streitberg();
    c.statistic = Statistic::BlockHsic;
  } else {
    throw ParameterError("unknown kind '" + kind + "' (use streitberg, lancaster, joint or modified-dhsic)");
  }
  return c;
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) { return splitmix_mix(base ^ trial); }

std::vector<SweepRow> run_power_sweep(const SweepSpec& spec) {
  if (spec.trials < 1) throw ParameterError("trials must be positive");
  if (spec.kinds.empty()) throw ParameterError("no kinds to sweep");
  if (spec.grid.empty()) throw ParameterError("empty sweep grid");
  std::vector<GeneratorSpec> points;
  for (double v : spec.grid) {
    points.push_back(at_grid_point(spec, v));
    check_generator(points.back());
  }
  std::vector<TestConfig> configs;
  for (const auto& k : spec.kinds) {
    configs.push_back(config_for_kind(k, spec.joint_null, spec.base));
    configs.back().workers = 1;
    configs.back().validate();
  }

  std::vector<SweepRow> rows;
  const auto trials = static_cast<std::size_t>(spec.trials);
  for (std::size_t g = 0; g < points.size(); ++g) {
    const std::size_t kinds = configs.size();
    std::vector<char> rejected(trials * kinds, 0);
    std::vector<double> statistic(trials * kinds, 0.0);
    std::vector<double> elapsed(trials * kinds, 0.0);
    parallel_for(trials, spec.workers, [&](std::size_t t) {
      const std::uint64_t ts = trial_seed(spec.base.seed, t);
      const Dataset data = generate(points[g], derive_seed(ts, g));
      const PreparedData prepared = PreparedData::from(data);
      for (std::size_t k = 0; k < kinds; ++k) {
        TestConfig c = configs[k];
        c.seed = derive_seed(ts, g, 1);
        const auto start = Clock::now();
        const TestReport r = composite_test(prepared, c);
        elapsed[t * kinds + k] = seconds_since(start);
        rejected[t * kinds + k] = r.composite_rejected ? 1 : 0;
        statistic[t * kinds + k] = report_statistic(r);
      }
    });
    for (std::size_t k = 0; k < kinds; ++k) {
      SweepRow row;
      row.value = spec.grid[g];
      row.kind = spec.kinds[k];
      row.trials = spec.trials;
      double stat_sum = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        row.rejections += rejected[t * kinds + k];
        stat_sum += statistic[t * kinds + k];
        row.wall_seconds += elapsed[t * kinds + k];
      }
      row.rejection_rate = static_cast<double>(row.rejections) / spec.trials;
      row.mean_statistic = stat_sum / spec.trials;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,kind,rejection_rate,trials,rejections,mean_statistic,wall_seconds\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    out << r.value << ',' << r.kind << ',' << r.rejection_rate << ',' << r.trials << ',' << r.rejections << ','
        << r.mean_statistic << ',' << r.wall_seconds << '\n';
  }
  out.precision(old);
}

nlohmann::json sweep_json(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  nlohmann::json j;
  j["generator"] = to_string(spec.generator.generator);
  j["parameter"] = spec.parameter;
  j["n"] = spec.generator.n;
  j["trials"] = spec.trials;
  j["joint_null"] = spec.joint_null;
  j["alpha"] = spec.base.alpha;
  j["permutations"] = spec.base.permutations;
  j["seed"] = spec.base.seed;
  j["correction"] = to_string(spec.base.correction);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"value", r.value},
                         {"kind", r.kind},
                         {"rejection_rate", r.rejection_rate},
                         {"trials", r.trials},
                         {"rejections", r.rejections},
                         {"mean_statistic", r.mean_statistic},
                         {"wall_seconds", r.wall_seconds}});
  }
  return j;
}

nlohmann::json lattice_summary(int d, const LatticeKind& kind, bool matrices) {
  if (d < 1 || d > kMaxVariables) throw BoundsError("d must lie in [1, 12]");
  nlohmann::json j;
  j["d"] = d;
  j["kind"] = to_string(kind.tag);
  j["bell"] = bell_number(d);
  j["no_singleton"] = d >= 2 ? enumerate_no_singleton(d).size() : 0;
  const auto elements = lattice_elements(kind, d);
  j["lattice_size"] = elements.size();
  const auto subs = d >= 2 ? second_level(kind, d) : std::vector<Partition>{};
  j["sub_hypotheses"] = subs.size();
  j["second_level"] = nlohmann::json::array();
  for (const auto& p : subs) j["second_level"].push_back(p.to_string());
  if (matrices) {
    if (d > 6) throw BoundsError("full Zeta/Mobius matrices are limited to d <= 6");
    j["elements"] = nlohmann::json::array();
    for (const auto& p : elements) j["elements"].push_back(p.to_string());
    const IntMatrix z = zeta_matrix(elements);
    const IntMatrix m = mobius_matrix(elements);
    auto rows = [](const IntMatrix& a) {
      nlohmann::json out = nlohmann::json::array();
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        std::vector<std::int64_t> row(a.cols());
        for (Eigen::Index c = 0; c < a.cols(); ++c) row[static_cast<std::size_t>(c)] = a(r, c);
        out.push_back(row);
      }
      return out;
    };
    j["zeta"] = rows(z);
    j["mobius"] = rows(m);
  }
  return j;
}

std::string lattice_text(const nlohmann::json& s) {
  std::ostringstream out;
  out << "d = " << s["d"] << ", kind = " << s["kind"].get<std::string>() << '\n';
  out << "B_d (all partitions)          " << s["bell"] << '\n';
  out << "F_d (no-singleton partitions) " << s["no_singleton"] << '\n';
  out << "lattice elements              " << s["lattice_size"] << '\n';
  out << "sub-hypotheses                " << s["sub_hypotheses"] << '\n';
  for (const auto& p : s["second_level"]) out << "  " << p.get<std::string>() << '\n';
  if (s.contains("elements")) {
    out << "elements:\n";
    int i = 0;
    for (const auto& p : s["elements"]) out << "  [" << i++ << "] " << p.get<std::string>() << '\n';
    for (const char* name : {"zeta", "mobius"}) {
      out << name << ":\n";
      for (const auto& row : s[name]) {
        for (const auto& v : row) {
          const auto x = v.get<std::int64_t>();
          out << (x < 0 ? "" : " ") << x << ' ';
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
  std::vector<BenchRow> rows;
  for (int d : spec.ds) {
    if (d < 2 || d > kMaxVariables) throw BoundsError("bench needs 2 <= d <= 12");
    for (int n : spec.ns) {
      const Dataset data = gen_null(n, d, derive_seed(spec.seed, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n)));
      const GramSet centred = build_grams(data, true);
      const GramSet raw = build_grams(data, false);
      const StreitbergEvaluator evaluator(d);
      auto add = [&](const char* est, const char* mode, auto&& fn) {
        BenchRow r{d, n, est, mode, 0.0, 0.0};
        try {
          r.seconds = best_time(spec.repeats, fn, r.value);
        } catch (const ResourceError&) {
          return;
        }
        rows.push_back(r);
      };
      add("streitberg", "cached", [&] {
        InnerProductCache cache;
        return evaluator(centred, &cache);
      });
      add("streitberg", "uncached", [&] { return evaluator(centred, nullptr); });
      add("lancaster", "optimized", [&] { return lancaster_stat(centred); });
      if (spec.naive) {
        add("streitberg", "naive", [&] { return streitberg_stat_naive(centred); });
        const auto lancaster = expansion_for(LatticeKind::lancaster(), d, false);
        add("lancaster", "naive", [&] { return generic_norm(lancaster, raw); });
      }
    }
  }
  return rows;
}

std::vector<ScalingFit> fit_scaling(const std::vector<BenchRow>& rows) {
  std::vector<ScalingFit> fits;
  std::vector<std::tuple<int, std::string, std::string>> groups;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.d, r.estimator, r.mode);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [d, est, mode] : groups) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (r.d == d && r.estimator == est && r.mode == mode && r.seconds > 0.0) {
        x.push_back(std::log(static_cast<double>(r.n)));
        y.push_back(std::log(r.seconds));
      }
    }
    if (x.size() < 2) continue;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) continue;
    fits.push_back({d, est, mode, sxy / sxx});
  }
  return fits;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const std::vector<ScalingFit>& fits) {
  out << "d,n,estimator,mode,seconds,value\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    out << r.d << ',' << r.n << ',' << r.estimator << ',' << r.mode << ',' << r.seconds << ',' << r.value << '\n';
  }
  out << "\n# scaling exponents (slope of log seconds on log n)\n";
  out << "d,estimator,mode,exponent\n";
  for (const auto& f : fits) out << f.d << ',' << f.estimator << ',' << f.mode << ',' << f.exponent << '\n';
  out.precision(old);
}

}  // namespace hoi
