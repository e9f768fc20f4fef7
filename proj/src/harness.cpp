#include "ldw/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "ldw/bounds.hpp"
#include "ldw/distances.hpp"
#include "ldw/error.hpp"
#include "ldw/matching.hpp"
#include "ldw/models.hpp"
#include "ldw/normal.hpp"
#include "ldw/parallel.hpp"
#include "ldw/summary.hpp"

namespace ldw {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(value, &used, 0);
    if (used == value.size() && value.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  std::uint64_t v = parse_count(key, value);
  require(v <= 1000000, key + ": value too large");
  return static_cast<int>(v);
}

std::vector<std::uint64_t> parse_grid(const std::string& value) {
  std::vector<std::uint64_t> grid;
  if (auto dots = value.find(".."); dots != std::string::npos) {
    auto power = [&](const std::string& part) {
      std::string t = trim(part);
      require(t.rfind("2^", 0) == 0, "grid range must be written 2^a..2^b");
      return parse_int("grid", t.substr(2));
    };
    int lo = power(value.substr(0, dots)), hi = power(value.substr(dots + 2));
    require(lo <= hi && hi < 63, "grid range 2^a..2^b needs a <= b < 63");
    for (int k = lo; k <= hi; ++k) grid.push_back(std::uint64_t{1} << k);
    return grid;
  }
  for (const auto& item : split(value, ',')) grid.push_back(parse_count("grid", item));
  return grid;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  ModelSpec& model = config.model;
  if (key == "model") {
    require(value == "iid" || value == "mdep" || value == "ustat" || value == "erg" || value == "matching",
            "model: expected iid|mdep|ustat|erg|matching, got '" + value + "'");
    model.kind = value;
  } else if (key == "base") {
    BaseLaw::parse(value);
    model.base = value;
  } else if (key == "m") {
    model.m = parse_int(key, value);
  } else if (key == "coefficients") {
    model.coefficients.clear();
    for (const auto& item : split(value, ',')) model.coefficients.push_back(parse_rational(item));
  } else if (key == "kernel") {
    model.kernel = value;
  } else if (key == "kernel_order") {
    model.kernel_order = parse_int(key, value);
  } else if (key == "kernel_weight") {
    model.kernel_weight = parse_rational(value);
  } else if (key == "motif") {
    model.motif = value;
  } else if (key == "p") {
    model.p = parse_rational(value);
  } else if (key == "beta") {
    model.beta = parse_rational(value);
  } else if (key == "grid") {
    config.n_grid = parse_grid(value);
  } else if (key == "replicates") {
    config.replicates = parse_count(key, value);
  } else if (key == "samples") {
    config.samples = parse_count(key, value);
  } else if (key == "distance") {
    require(value == "w1" || value == "w2" || value == "w3" || value == "kolmogorov" ||
                value == "zolotarev",
            "distance: expected w1|w2|w3|kolmogorov|zolotarev, got '" + value + "'");
    config.distance = value;
  } else if (key == "seed") {
    config.seed = parse_count(key, value);
  } else if (key == "output") {
    config.output = value;
  } else if (key == "format") {
    require(value == "csv" || value == "json", "format: expected csv|json");
    config.format = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

void validate_config(const ExperimentConfig& config) {
  if (config.model.kind != "matching") {
    require(!config.n_grid.empty(), "n grid is empty");
    for (std::size_t k = 1; k < config.n_grid.size(); ++k)
      require(config.n_grid[k] > config.n_grid[k - 1], "n grid must be strictly increasing");
  }
  require(config.replicates >= 1, "replicates must be >= 1");
  require(config.samples >= 100, "samples per replicate must be >= 100");
}

std::vector<Rational> mdep_coefficients(const ModelSpec& spec) {
  if (!spec.coefficients.empty()) return spec.coefficients;
  return std::vector<Rational>(static_cast<std::size_t>(std::max(spec.m, 0)) + 1, Rational(1));
}

LocalModel build_model(const ModelSpec& spec, std::uint64_t n, int depth) {
  BaseLaw base = BaseLaw::parse(spec.base);
  if (spec.kind == "iid") return iid_model(n, base, depth);
  if (spec.kind == "mdep") return mdep_model(n, spec.m, base, mdep_coefficients(spec), depth);
  if (spec.kind == "ustat") {
    UStatSpec u;
    u.n = n;
    u.m = spec.kernel_order;
    u.kernel = spec.kernel;
    u.weight = spec.kernel_weight;
    u.base = base;
    return ustat_model(u, 1, depth);
  }
  if (spec.kind == "erg") {
    require(n <= 100000, "erg: n too large");
    return erg_model(GraphSpec{load_motif(spec.motif), static_cast<int>(n), spec.p}, depth);
  }
  if (spec.kind == "matching") throw ConfigError("matching laws are not local models; use the law command");
  throw ConfigError("unknown model kind '" + spec.kind + "'");
}

namespace {

// A built model for one n: how to draw W, the bound column and the row labels.
struct GridPoint {
  std::uint64_t n = 0;
  std::function<double(Rng&)> draw;
  double bound = 0.0;
  std::string param;
};

std::string coefficient_list(const std::vector<Rational>& c) {
  std::string out;
  for (std::size_t k = 0; k < c.size(); ++k) out += (k ? ":" : "") + to_string(c[k]);
  return out;
}

// E|X_0|^k of a standardized model whose summands all share one law.
double scaled_abs_moment(const LocalModel& model, unsigned k) {
  std::vector<Index> idx(k, 0);
  Rational raw = exact_expectation(model.exact_support(), idx, true);
  return raw.get_d() * std::pow(model.scale(), static_cast<double>(k));
}

GridPoint wrap(const LocalModel& model, std::uint64_t n, double bound, std::string param) {
  auto shared = std::make_shared<LocalModel>(model);
  return GridPoint{n, [shared](Rng& rng) { return shared->sample_sum(rng); }, bound, std::move(param)};
}

GridPoint build_point(const ModelSpec& spec, std::uint64_t n) {
  BaseLaw base = BaseLaw::parse(spec.base);
  LocalModel model = build_model(spec, n, 3);
  if (spec.kind == "iid") {
    double fourth = base.finite ? scaled_abs_moment(model, 4) : 3.0 / (double(n) * double(n));
    std::vector<double> moments(n, fourth);
    return wrap(model, n, iid_wp_bound(moments, 2.0), "base=" + spec.base);
  }
  if (spec.kind == "mdep") {
    std::vector<Rational> c = mdep_coefficients(spec);
    double third, fourth;
    if (base.finite) {
      third = scaled_abs_moment(model, 3);
      fourth = scaled_abs_moment(model, 4);
    } else {
      Rational v(0);
      for (const auto& q : c) v += q * q;
      double sd = std::sqrt(v.get_d()) * model.scale();
      third = 2.0 * std::sqrt(2.0 / 3.141592653589793) * sd * sd * sd;
      fourth = 3.0 * sd * sd * sd * sd;
    }
    std::string param = "m=" + std::to_string(spec.m) + ";c=" + coefficient_list(c) + ";base=" + spec.base;
    double bound;
    if (spec.m == 0) {
      std::vector<double> moments(n, fourth);
      bound = iid_wp_bound(moments, 2.0);
    } else {
      std::vector<double> t(n, third), f(n, fourth);
      bound = mdep_bound_functional(t, f, spec.m);
    }
    return wrap(model, n, bound, param);
  }
  if (spec.kind == "ustat") {
    return wrap(model, n, 1.0 / std::sqrt(static_cast<double>(n)),
                "kernel=" + spec.kernel + ";order=" + std::to_string(spec.kernel_order) +
                    ";weight=" + to_string(spec.kernel_weight) + ";base=" + spec.base);
  }
  // erg
  Motif motif = load_motif(spec.motif);
  int vertices = static_cast<int>(n);
  double p = spec.p.get_d();
  return wrap(model, n, graph_bound_functional(vertices, p, motif),
              "motif=" + motif.name + ";p=" + to_string(spec.p) +
                  ";psi=" + format_double(psi(vertices, p, motif)));
}

GridPoint build_matching(const ModelSpec& spec) {
  DiscreteLaw law = four_point_law(spec.beta);
  std::string param = "beta=" + to_string(spec.beta);
  if (!law.n_selected)
    return GridPoint{0, [](Rng& rng) { return rng.normal(); }, 0.0, param};
  const std::uint64_t n = *law.n_selected;
  FiniteLawSampler xi([&] {
    std::vector<Rational> atoms = law.atoms;
    // Sampling only needs double probabilities; carry them through a rational
    // approximation when sqrt(n) is irrational.
    std::vector<Rational> probs;
    for (const auto& p : law.probs) probs.emplace_back(p.to_double());
    Rational total(0);
    for (const auto& q : probs) total += q;
    probs.back() += 1 - total;
    return FiniteLaw::make(atoms, probs);
  }());
  double fourth = law.moment(4).to_double() / static_cast<double>(n);
  double scale = 1.0 / std::sqrt(static_cast<double>(n));
  auto draw = [xi, n, scale](Rng& rng) {
    double total = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) total += xi(rng);
    return scale * total;
  };
  std::vector<double> moments{fourth};
  return GridPoint{n, draw, iid_wp_bound(moments, 2.0), param};
}

double row_distance(const std::string& distance, const EmpiricalSample& sample) {
  if (distance == "w1") return wp_vs_normal(sample, 1.0);
  if (distance == "w2") return wp_vs_normal(sample, 2.0);
  if (distance == "w3") return wp_vs_normal(sample, 3.0);
  if (distance == "kolmogorov") return kolmogorov_vs_normal(sample);
  return zolotarev_lower_bound(sample, 2, test_functions::family(2));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  ExperimentResult result;
  std::vector<GridPoint> points;
  if (config.model.kind == "matching") {
    try {
      points.push_back(build_matching(config.model));
    } catch (const std::exception& e) {
      result.errors.push_back({0, e.what()});
    }
  } else {
    for (std::uint64_t n : config.n_grid) {
      try {
        points.push_back(build_point(config.model, n));
      } catch (const std::exception& e) {
        result.errors.push_back({n, e.what()});
      }
    }
  }
  const std::string model_name = config.model.kind;
  const std::size_t reps = config.replicates;
  const std::size_t s = config.samples;
  std::vector<ResultRow> rows(points.size() * reps);
  parallel_for(rows.size(), [&](std::size_t task) {
    const GridPoint& point = points[task / reps];
    const std::uint64_t r = task % reps;
    const std::uint64_t row_seed = derive_stream({config.seed, point.n, r});
    std::vector<double> draws(s);
    for (std::size_t k = 0; k < s; ++k) {
      Rng rng(row_seed, stream_id(k, 0));
      draws[k] = point.draw(rng);
    }
    EmpiricalSample sample(std::move(draws), {row_seed, model_name});
    EmpiricalSample control = normal_control_sample(s, row_seed, derive_stream({row_seed, 1}));
    rows[task] = ResultRow{model_name,   point.n,
                           point.param,  r,
                           row_distance(config.distance, sample), point.bound,
                           row_distance(config.distance, control), row_seed};
  });
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.n != b.n ? a.n < b.n : a.replicate < b.replicate;
  });
  result.rows = std::move(rows);
  return result;
}

RateFit fit_rate(std::span<const ResultRow> rows) {
  std::map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>> by_n;
  for (const auto& row : rows) {
    by_n[row.n].first.push_back(row.distance);
    by_n[row.n].second.push_back(row.baseline);
  }
  RateFit fit;
  std::vector<double> xs, ys;
  for (const auto& [n, values] : by_n) {
    double distance = summarize(values.first).mean;
    double floor = summarize(values.second).mean;
    bool usable = n > 0 && distance > 0.0 && distance >= 3.0 * floor;
    fit.n.push_back(n);
    fit.mean_distance.push_back(distance);
    fit.baseline_floor.push_back(floor);
    fit.usable.push_back(usable);
    if (usable) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(distance));
    }
  }
  if (xs.size() < 3) throw NumericalError("signal below sampling floor; increase s");
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / k, my += ys[i] / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

void emit(std::span<const ResultRow> rows, std::ostream& out, const std::string& format) {
  require(!rows.empty(), "nothing to emit: the result table is empty");
  if (format == "csv") {
    out << "model,n,param,replicate,distance,bound,baseline,seed\n";
    for (const auto& r : rows)
      out << r.model << ',' << r.n << ',' << r.param << ',' << r.replicate << ','
          << format_double(r.distance) << ',' << format_double(r.bound) << ','
          << format_double(r.baseline) << ',' << r.seed << '\n';
    return;
  }
  require(format == "json", "format must be csv or json");
  out << "[\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    out << "  {\"model\": " << nlohmann::json(r.model).dump() << ", \"n\": " << r.n
        << ", \"param\": " << nlohmann::json(r.param).dump() << ", \"replicate\": " << r.replicate
        << ", \"distance\": " << format_double(r.distance) << ", \"bound\": " << format_double(r.bound)
        << ", \"baseline\": " << format_double(r.baseline) << ", \"seed\": " << r.seed << "}"
        << (k + 1 < rows.size() ? ",\n" : "\n");
  }
  out << "]\n";
}

void emit_file(std::span<const ResultRow> rows, const std::string& path, const std::string& format) {
  std::ostringstream buffer;
  emit(rows, buffer, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << buffer.str();
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

}  // namespace ldw
