#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldw/models.hpp"
#include "ldw/rational.hpp"

namespace ldw {

struct ModelSpec {
  std::string kind = "iid";  // iid | mdep | ustat | erg | matching
  std::string base = "rademacher";
  int m = 2;                          // mdep lag
  std::vector<Rational> coefficients;  // mdep; empty means all ones
  std::string kernel = "mixed";        // ustat
  int kernel_order = 2;
  Rational kernel_weight{1, 10};
  std::string motif = "triangle";  // erg: motif name or edge-list file
  Rational p{3, 10};
  Rational beta{1, 10};  // matching: four-point law parameter
};

// mdep coefficients with the empty default expanded to m + 1 ones.
std::vector<Rational> mdep_coefficients(const ModelSpec& spec);

// Standardized model of the given kind and size (not for matching).
LocalModel build_model(const ModelSpec& spec, std::uint64_t n, int depth = kDefaultDepth);

struct ExperimentConfig {
  ModelSpec model;
  std::vector<std::uint64_t> n_grid;
  std::uint64_t replicates = 20;
  std::uint64_t samples = 10000;
  std::string distance = "w2";  // w1 | w2 | w3 | kolmogorov | zolotarev
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "csv";  // csv | json
};

// Recognized keys: model, base, m, coefficients, kernel, kernel_order,
// kernel_weight, motif, p, beta, grid, replicates, samples, distance, seed,
// output, format. Grids are comma lists or powers of two "2^a..2^b".
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

// "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

// Throws ConfigError unless the grid is strictly increasing, R >= 1, s >= 100.
void validate_config(const ExperimentConfig& config);

struct ResultRow {
  std::string model;
  std::uint64_t n = 0;
  std::string param;
  std::uint64_t replicate = 0;
  double distance = 0.0;
  double bound = 0.0;
  double baseline = 0.0;
  std::uint64_t seed = 0;
};

struct RowError {
  std::uint64_t n = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sorted by (n, replicate)
  std::vector<RowError> errors;
};

// For each n and replicate: s fresh draws of W, their distance to N(0,1), the
// constant-free bound functional and an i.i.d. normal control with the same s.
// Model builds that fail become error records; the run continues.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::uint64_t> n;
  std::vector<double> mean_distance;
  std::vector<double> baseline_floor;
  std::vector<bool> usable;  // mean distance >= 3 * baseline floor
};

// Least-squares slope of log mean distance against log n over usable points.
// Fewer than 3 usable points is a NumericalError.
RateFit fit_rate(std::span<const ResultRow> rows);

void emit(std::span<const ResultRow> rows, std::ostream& out, const std::string& format);
void emit_file(std::span<const ResultRow> rows, const std::string& path, const std::string& format);

}  // namespace ldw
