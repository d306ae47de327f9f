#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdplab/laws.hpp"
#include "mdplab/markov_chain.hpp"
#include "mdplab/speed.hpp"

namespace mdplab {

enum class Family { iid, linear_process, kernel_row, exponential_counterexample, dependent_blocks };

Family parse_family(const std::string& tag);
std::string to_string(Family f);

/// Innovation law xi of i.i.d. and linear-process families.
struct Innovation {
  enum class Kind { gaussian, rademacher, centered_exponential, uniform, zero };
  Kind kind = Kind::gaussian;
  double scale = 1.0;   // sd, half-range, or exponential scale
  bool mc_only = false; // hide closed forms (tails, mgf) behind Monte Carlo

  static Innovation from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
  /// Law of c * xi.
  [[nodiscard]] LawPtr scaled(double c) const;
  [[nodiscard]] double variance() const;
  /// K with E|xi|^m <= m! K^m for all m >= 1.
  [[nodiscard]] double moment_constant() const;
};

/// k_n as a function of n.
struct RowSize {
  enum class Form { identity, constant, power };
  Form form = Form::identity;
  double scale = 1.0;
  double exponent = 1.0;

  static RowSize from_json(const nlohmann::json& j);
  [[nodiscard]] long long operator()(long long n) const;
};

/// Linear-process coefficients c_nj.
struct Coefficients {
  enum class Form { table, constant };
  Form form = Form::constant;
  double value = 1.0;
  std::vector<double> table;

  static Coefficients from_json(const nlohmann::json& j);
  [[nodiscard]] double at(long long n, long long j) const;  // j is 1-based
  [[nodiscard]] double max_abs(long long k) const;
  [[nodiscard]] double sum_squares(long long k) const;
};

/// h_n = value, or scale * n^{-exponent}.
struct Bandwidth {
  double scale = 0.1;
  double exponent = 0.0;

  static Bandwidth from_json(const nlohmann::json& j);
  [[nodiscard]] double operator()(long long n) const;
};

struct KernelSetup {
  KernelShape shape = KernelShape::uniform;
  double density_mean = 0.0;
  double density_sd = 1.0;
  double x = 0.0;
  Bandwidth bandwidth;

  [[nodiscard]] double density_at_x() const;
  [[nodiscard]] double density_sup() const;
  /// The constant C of int |K|^m <= m! C^m.
  [[nodiscard]] double moment_constant() const { return 1.0; }
};

/// E|X_nk|^m <= m! A_nk^m B_n for m >= 3.
struct MomentEnvelope {
  std::vector<double> A;  // A_nk, k = 1..k_n
  double B = 0.0;
};

/// Distinct entry laws of one row with their multiplicities, in row order.
struct LawGroup {
  LawPtr law;
  long long count = 0;
};

/// A row's entry laws resolved once, for repeated sampling.
struct RowPlan {
  long long n = 0;
  std::vector<const EntryLaw*> entries;  // points into `groups`
  std::vector<LawGroup> groups;
};

struct RowSample {
  long long n = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

struct RowMoments {
  std::vector<double> variances;  // sigma^2_nj
  double total = 0.0;             // s^2_n
  std::vector<double> partials;   // s^2_ni, i = 1..k_n
};

/// Row-indexed family of independent centered entries. Immutable after
/// construction; every accessor is safe to call concurrently.
class TriangularArrayModel {
 public:
  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] const nlohmann::json& spec() const { return spec_; }
  [[nodiscard]] const SpeedSequence& speed() const { return speed_; }
  [[nodiscard]] const std::vector<long long>& n_grid() const { return n_grid_; }
  [[nodiscard]] bool on_grid(long long n) const;

  [[nodiscard]] long long row_size(long long n) const;
  [[nodiscard]] LawPtr entry_law(long long n, long long j) const;
  [[nodiscard]] std::vector<LawGroup> row_laws(long long n) const;
  [[nodiscard]] RowPlan plan(long long n) const;
  /// True when the entry laws do not depend on n (only k_n does).
  [[nodiscard]] bool laws_independent_of_n() const;
  [[nodiscard]] double total_variance(long long n) const;

  [[nodiscard]] std::optional<MomentEnvelope> moment_envelope(long long n) const;
  [[nodiscard]] const std::optional<Innovation>& innovation() const { return innovation_; }
  [[nodiscard]] const std::optional<Coefficients>& coefficients() const { return coefficients_; }
  [[nodiscard]] const std::optional<KernelSetup>& kernel() const { return kernel_; }
  [[nodiscard]] const std::optional<FiniteMarkovChain>& chain() const { return chain_; }
  /// Big-block length and count of the dependent-blocks family at row n.
  [[nodiscard]] std::pair<long long, long long> block_shape(long long n) const;

  /// Stable 64-bit digest of the canonical spec.
  [[nodiscard]] std::uint64_t digest() const;

  friend TriangularArrayModel build_model(const nlohmann::json& spec);

 private:
  Family family_ = Family::iid;
  nlohmann::json spec_;
  SpeedSequence speed_ = SpeedSequence::power(0.5);
  std::vector<long long> n_grid_;
  RowSize row_size_;
  std::optional<Innovation> innovation_;
  std::optional<Coefficients> coefficients_;
  std::optional<KernelSetup> kernel_;
  std::optional<FiniteMarkovChain> chain_;
  std::optional<long long> block_length_;
  std::optional<long long> block_count_;
  std::optional<double> block_epsilon_;
};

/// Builds a model from {"family", "params", "speed", "n_grid"}.
/// Throws std::invalid_argument for unknown families, non-positive
/// bandwidths, or coefficient tables shorter than k_n on the grid.
TriangularArrayModel build_model(const nlohmann::json& spec);

/// Deterministic in (model, n, seed): entry j draws from the sub-stream
/// derive_key(seed, {n, j}). Throws std::out_of_range for n off the grid.
RowSample sample_row(const TriangularArrayModel& model, long long n, std::uint64_t seed);

/// Plan-based fast path used by the Monte Carlo engine; no grid check.
void sample_row(const RowPlan& plan, std::uint64_t seed, std::span<double> out);
void sample_row_tilted(const RowPlan& plan, double theta, std::uint64_t seed, std::span<double> out);

/// Throws std::domain_error("zero total variance") when s^2_n == 0.
RowMoments row_moments(const TriangularArrayModel& model, long long n);

/// P(|X_nj| > x); exact when the family has a closed-form tail.
Estimate tail_prob(const TriangularArrayModel& model, long long n, long long j, double x);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace mdplab
