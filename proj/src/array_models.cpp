#include "mdplab/array_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mdplab/dependence.hpp"
#include "mdplab/numeric.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

using nlohmann::json;

Family parse_family(const std::string& tag) {
  if (tag == "iid") return Family::iid;
  if (tag == "linear-process") return Family::linear_process;
  if (tag == "kernel-row") return Family::kernel_row;
  if (tag == "exponential-counterexample") return Family::exponential_counterexample;
  if (tag == "dependent-blocks-derived") return Family::dependent_blocks;
  throw std::invalid_argument("unknown family '" + tag + "'");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::iid: return "iid";
    case Family::linear_process: return "linear-process";
    case Family::kernel_row: return "kernel-row";
    case Family::exponential_counterexample: return "exponential-counterexample";
    case Family::dependent_blocks: return "dependent-blocks-derived";
  }
  return "?";
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ULL;
  return h;
}

// ---------------------------------------------------------------- Innovation

Innovation Innovation::from_json(const json& j) {
  Innovation in;
  const std::string law = j.at("law").get<std::string>();
  if (law == "gaussian") {
    in.kind = Kind::gaussian;
    in.scale = j.value("sigma", 1.0);
  } else if (law == "rademacher") {
    in.kind = Kind::rademacher;
    in.scale = j.value("scale", 1.0);
  } else if (law == "centered_exponential") {
    in.kind = Kind::centered_exponential;
    in.scale = j.value("scale", 1.0);
  } else if (law == "uniform") {
    in.kind = Kind::uniform;
    in.scale = j.value("half_width", 1.0);
  } else if (law == "zero") {
    in.kind = Kind::zero;
    in.scale = 0.0;
  } else {
    throw std::invalid_argument("unknown innovation law '" + law + "'");
  }
  if (in.kind != Kind::zero && !(in.scale > 0.0))
    throw std::invalid_argument("innovation scale must be positive");
  in.mc_only = !j.value("exact", true);
  return in;
}

json Innovation::to_json() const {
  switch (kind) {
    case Kind::gaussian: return {{"law", "gaussian"}, {"sigma", scale}, {"exact", !mc_only}};
    case Kind::rademacher: return {{"law", "rademacher"}, {"scale", scale}, {"exact", !mc_only}};
    case Kind::centered_exponential:
      return {{"law", "centered_exponential"}, {"scale", scale}, {"exact", !mc_only}};
    case Kind::uniform: return {{"law", "uniform"}, {"half_width", scale}, {"exact", !mc_only}};
    case Kind::zero: return {{"law", "zero"}};
  }
  return {};
}

LawPtr Innovation::scaled(double c) const {
  if (kind == Kind::zero || c == 0.0) return std::make_shared<ZeroLaw>();
  LawPtr law;
  switch (kind) {
    case Kind::gaussian: law = std::make_shared<GaussianLaw>(std::abs(c) * scale); break;
    case Kind::rademacher: law = TwoPointLaw::rademacher(std::abs(c) * scale); break;
    case Kind::centered_exponential: law = std::make_shared<CenteredExponentialLaw>(c * scale); break;
    case Kind::uniform: law = std::make_shared<UniformLaw>(std::abs(c) * scale); break;
    case Kind::zero: break;
  }
  if (mc_only) return std::make_shared<McOnlyLaw>(law);
  return law;
}

double Innovation::variance() const {
  switch (kind) {
    case Kind::gaussian:
    case Kind::rademacher:
    case Kind::centered_exponential: return scale * scale;
    case Kind::uniform: return scale * scale / 3.0;
    case Kind::zero: return 0.0;
  }
  return 0.0;
}

double Innovation::moment_constant() const {
  // E|Z|^m <= m! for the standard gaussian; |E - 1|^m <= E^m + 1 <= 2 m!.
  switch (kind) {
    case Kind::gaussian:
    case Kind::rademacher:
    case Kind::uniform: return scale;
    case Kind::centered_exponential: return 2.0 * scale;
    case Kind::zero: return 0.0;
  }
  return 0.0;
}

// ------------------------------------------------------------ small params

RowSize RowSize::from_json(const json& j) {
  RowSize r;
  const std::string form = j.at("form").get<std::string>();
  if (form == "identity") {
    r.form = Form::identity;
  } else if (form == "constant") {
    r.form = Form::constant;
    r.scale = j.at("value").get<double>();
  } else if (form == "power") {
    r.form = Form::power;
    r.scale = j.value("scale", 1.0);
    r.exponent = j.at("exponent").get<double>();
  } else {
    throw std::invalid_argument("row_size: unknown form '" + form + "'");
  }
  if (!(r.scale > 0.0)) throw std::invalid_argument("row_size: scale must be positive");
  return r;
}

long long RowSize::operator()(long long n) const {
  switch (form) {
    case Form::identity: return n;
    case Form::constant: return std::max(1LL, robust_floor(scale));
    case Form::power: return std::max(1LL, robust_floor(scale * std::pow(static_cast<double>(n), exponent)));
  }
  return n;
}

Coefficients Coefficients::from_json(const json& j) {
  Coefficients c;
  const std::string form = j.at("form").get<std::string>();
  if (form == "constant") {
    c.form = Form::constant;
    c.value = j.at("value").get<double>();
  } else if (form == "table") {
    c.form = Form::table;
    c.table = j.at("values").get<std::vector<double>>();
    if (c.table.empty()) throw std::invalid_argument("coefficients: empty table");
  } else {
    throw std::invalid_argument("coefficients: unknown form '" + form + "'");
  }
  return c;
}

double Coefficients::at(long long /*n*/, long long j) const {
  if (form == Form::constant) return value;
  if (j < 1 || j > static_cast<long long>(table.size()))
    throw std::out_of_range("coefficient table shorter than k_n (index " + std::to_string(j) + ")");
  return table[static_cast<std::size_t>(j - 1)];
}

double Coefficients::max_abs(long long k) const {
  if (form == Form::constant) return std::abs(value);
  double m = 0.0;
  for (long long j = 1; j <= k; ++j) m = std::max(m, std::abs(at(0, j)));
  return m;
}

double Coefficients::sum_squares(long long k) const {
  if (form == Form::constant) return static_cast<double>(k) * value * value;
  CompensatedSum s;
  for (long long j = 1; j <= k; ++j) s.add(at(0, j) * at(0, j));
  return s.value();
}

Bandwidth Bandwidth::from_json(const json& j) {
  Bandwidth b;
  const std::string form = j.at("form").get<std::string>();
  if (form == "constant") {
    b.scale = j.at("value").get<double>();
    b.exponent = 0.0;
  } else if (form == "power") {
    b.scale = j.value("scale", 1.0);
    b.exponent = j.at("exponent").get<double>();
  } else {
    throw std::invalid_argument("bandwidth: unknown form '" + form + "'");
  }
  if (!(b.scale > 0.0)) throw std::invalid_argument("non-positive bandwidth");
  return b;
}

double Bandwidth::operator()(long long n) const {
  return scale * std::pow(static_cast<double>(n), -exponent);
}

double KernelSetup::density_at_x() const {
  return normal_pdf((x - density_mean) / density_sd) / density_sd;
}

double KernelSetup::density_sup() const { return normal_pdf(0.0) / density_sd; }

// ------------------------------------------------------------------- model

namespace {

LawPtr kernel_entry_law(const KernelSetup& k, double h) {
  if (k.shape == KernelShape::uniform) {
    // K((x - X)/h) is the indicator of |X - x| <= h/2; the centered, scaled
    // entry is two-point.
    const double lo = (k.x - h / 2.0 - k.density_mean) / k.density_sd;
    const double hi = (k.x + h / 2.0 - k.density_mean) / k.density_sd;
    const double m = normal_q(lo) - normal_q(hi);
    const double root = std::sqrt(h);
    if (m <= 0.0 || m >= 1.0) return std::make_shared<ZeroLaw>();
    return std::make_shared<TwoPointLaw>((1.0 - m) / root, m, -m / root);
  }
  return std::make_shared<KernelLaw>(k.shape, k.density_mean, k.density_sd, k.x, h);
}

}  // namespace

bool TriangularArrayModel::on_grid(long long n) const {
  return std::find(n_grid_.begin(), n_grid_.end(), n) != n_grid_.end();
}

std::pair<long long, long long> TriangularArrayModel::block_shape(long long n) const {
  if (family_ != Family::dependent_blocks) throw std::logic_error("block_shape: not a dependent-blocks model");
  if (block_length_) {
    const long long k = block_count_ ? *block_count_ : std::max(1LL, n / *block_length_);
    return {*block_length_, k};
  }
  const BlockScheme s = plan_blocks(n, speed_(n), block_epsilon_);
  return {s.p, s.k};
}

long long TriangularArrayModel::row_size(long long n) const {
  if (n < 1) throw std::out_of_range("row index must be >= 1");
  if (family_ == Family::dependent_blocks) return block_shape(n).second;
  return row_size_(n);
}

LawPtr TriangularArrayModel::entry_law(long long n, long long j) const {
  const long long k = row_size(n);
  if (j < 1 || j > k) throw std::out_of_range("entry index outside 1..k_n");
  switch (family_) {
    case Family::iid: return innovation_->scaled(1.0);
    case Family::linear_process:
    case Family::exponential_counterexample: return innovation_->scaled(coefficients_->at(n, j));
    case Family::kernel_row: return kernel_entry_law(*kernel_, kernel_->bandwidth(n));
    case Family::dependent_blocks:
      return std::make_shared<ChainBlockLaw>(*chain_, static_cast<int>(block_shape(n).first));
  }
  throw std::logic_error("unreachable");
}

std::vector<LawGroup> TriangularArrayModel::row_laws(long long n) const {
  const long long k = row_size(n);
  const bool varying = coefficients_ && coefficients_->form == Coefficients::Form::table &&
                       (family_ == Family::linear_process || family_ == Family::exponential_counterexample);
  if (!varying) return {{entry_law(n, 1), k}};
  std::vector<LawGroup> groups;
  std::map<double, std::size_t> index;
  for (long long j = 1; j <= k; ++j) {
    const double c = coefficients_->at(n, j);
    auto it = index.find(c);
    if (it == index.end()) {
      index.emplace(c, groups.size());
      groups.push_back({innovation_->scaled(c), 1});
    } else {
      ++groups[it->second].count;
    }
  }
  return groups;
}

RowPlan TriangularArrayModel::plan(long long n) const {
  RowPlan p;
  p.n = n;
  const long long k = row_size(n);
  p.entries.resize(static_cast<std::size_t>(k));
  const bool varying = coefficients_ && coefficients_->form == Coefficients::Form::table &&
                       (family_ == Family::linear_process || family_ == Family::exponential_counterexample);
  if (!varying) {
    p.groups = {{entry_law(n, 1), k}};
    std::fill(p.entries.begin(), p.entries.end(), p.groups[0].law.get());
    return p;
  }
  p.groups = row_laws(n);
  std::map<double, const EntryLaw*> by_coef;
  std::size_t g = 0;
  for (long long j = 1; j <= k; ++j) {
    const double c = coefficients_->at(n, j);
    auto it = by_coef.find(c);
    if (it == by_coef.end()) it = by_coef.emplace(c, p.groups[g++].law.get()).first;
    p.entries[static_cast<std::size_t>(j - 1)] = it->second;
  }
  return p;
}

bool TriangularArrayModel::laws_independent_of_n() const {
  switch (family_) {
    case Family::iid: return true;
    case Family::linear_process:
    case Family::exponential_counterexample: return true;
    case Family::kernel_row: return kernel_->bandwidth.exponent == 0.0;
    case Family::dependent_blocks: return block_length_.has_value();
  }
  return false;
}

double TriangularArrayModel::total_variance(long long n) const {
  const long long k = row_size(n);
  switch (family_) {
    case Family::iid: return static_cast<double>(k) * innovation_->variance();
    case Family::linear_process:
    case Family::exponential_counterexample: return innovation_->variance() * coefficients_->sum_squares(k);
    default: {
      CompensatedSum s;
      for (const auto& g : row_laws(n)) s.add(static_cast<double>(g.count) * g.law->variance());
      return s.value();
    }
  }
}

std::optional<MomentEnvelope> TriangularArrayModel::moment_envelope(long long n) const {
  const long long k = row_size(n);
  MomentEnvelope env;
  switch (family_) {
    case Family::iid:
      env.A.assign(static_cast<std::size_t>(k), innovation_->moment_constant());
      env.B = 1.0;
      return env;
    case Family::linear_process:
    case Family::exponential_counterexample:
      env.A.resize(static_cast<std::size_t>(k));
      for (long long j = 1; j <= k; ++j)
        env.A[static_cast<std::size_t>(j - 1)] = std::abs(coefficients_->at(n, j)) * innovation_->moment_constant();
      env.B = 1.0;
      return env;
    case Family::kernel_row: {
      const double h = kernel_->bandwidth(n);
      env.A.assign(static_cast<std::size_t>(k), 2.0 * kernel_->moment_constant() / std::sqrt(h));
      env.B = h * kernel_->density_sup();
      return env;
    }
    case Family::dependent_blocks: return std::nullopt;
  }
  return std::nullopt;
}

std::uint64_t TriangularArrayModel::digest() const { return fnv1a(spec_.dump()); }

TriangularArrayModel build_model(const json& spec) {
  TriangularArrayModel m;
  m.family_ = parse_family(spec.at("family").get<std::string>());
  const json params = spec.value("params", json::object());
  if (spec.contains("speed")) m.speed_ = SpeedSequence::from_json(spec.at("speed"));
  if (spec.contains("n_grid")) m.n_grid_ = spec.at("n_grid").get<std::vector<long long>>();
  for (long long n : m.n_grid_)
    if (n < 1) throw std::invalid_argument("n_grid entries must be >= 1");
  if (params.contains("row_size")) m.row_size_ = RowSize::from_json(params.at("row_size"));

  switch (m.family_) {
    case Family::iid:
      m.innovation_ = Innovation::from_json(params.at("innovation"));
      break;
    case Family::linear_process:
      m.innovation_ = Innovation::from_json(params.at("innovation"));
      m.coefficients_ = Coefficients::from_json(params.at("coefficients"));
      break;
    case Family::exponential_counterexample: {
      Innovation in;
      in.kind = Innovation::Kind::centered_exponential;
      in.mc_only = !params.value("exact", true);
      m.innovation_ = in;
      m.coefficients_ = params.contains("coefficients") ? Coefficients::from_json(params.at("coefficients"))
                                                        : Coefficients{};
      break;
    }
    case Family::kernel_row: {
      KernelSetup k;
      k.shape = parse_kernel(params.value("kernel", std::string("uniform")));
      const json density = params.value("density", json::object());
      k.density_mean = density.value("mean", 0.0);
      k.density_sd = density.value("sd", 1.0);
      if (!(k.density_sd > 0.0)) throw std::invalid_argument("density sd must be positive");
      k.x = params.value("x", 0.0);
      k.bandwidth = Bandwidth::from_json(params.at("bandwidth"));
      m.kernel_ = k;
      break;
    }
    case Family::dependent_blocks: {
      const json& c = params.at("chain");
      m.chain_ = FiniteMarkovChain(c.at("values").get<std::vector<double>>(),
                                   c.at("transition").get<std::vector<std::vector<double>>>());
      if (params.contains("block_length")) {
        m.block_length_ = params.at("block_length").get<long long>();
        if (*m.block_length_ < 1) throw std::invalid_argument("block_length must be >= 1");
      }
      if (params.contains("block_count")) {
        m.block_count_ = params.at("block_count").get<long long>();
        if (*m.block_count_ < 1) throw std::invalid_argument("block_count must be >= 1");
      }
      if (params.contains("epsilon")) m.block_epsilon_ = params.at("epsilon").get<double>();
      break;
    }
  }

  // Coefficient tables must cover k_n on the whole grid.
  if (m.coefficients_ && m.coefficients_->form == Coefficients::Form::table)
    for (long long n : m.n_grid_)
      if (m.row_size(n) > static_cast<long long>(m.coefficients_->table.size()))
        throw std::invalid_argument("coefficient table shorter than k_n (n = " + std::to_string(n) +
                                    ", k_n = " + std::to_string(m.row_size(n)) + ")");

  json canonical = spec;
  canonical["family"] = to_string(m.family_);
  if (!canonical.contains("params")) canonical["params"] = json::object();
  if (!canonical["params"].contains("row_size") && m.family_ != Family::dependent_blocks)
    canonical["params"]["row_size"] = {{"form", "identity"}};
  m.spec_ = canonical;
  return m;
}

RowSample sample_row(const TriangularArrayModel& model, long long n, std::uint64_t seed) {
  if (!model.on_grid(n)) throw std::out_of_range("n = " + std::to_string(n) + " is outside the configured grid");
  const RowPlan plan = model.plan(n);
  RowSample row;
  row.n = n;
  row.seed = seed;
  row.values.resize(plan.entries.size());
  sample_row(plan, seed, row.values);
  return row;
}

void sample_row(const RowPlan& plan, std::uint64_t seed, std::span<double> out) {
  if (out.size() != plan.entries.size()) throw std::invalid_argument("sample_row: output length mismatch");
  const auto n = static_cast<std::uint64_t>(plan.n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    Stream rng(derive_key(seed, {n, j + 1}));
    out[j] = plan.entries[j]->sample(rng);
  }
}

void sample_row_tilted(const RowPlan& plan, double theta, std::uint64_t seed, std::span<double> out) {
  if (out.size() != plan.entries.size()) throw std::invalid_argument("sample_row: output length mismatch");
  const auto n = static_cast<std::uint64_t>(plan.n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    Stream rng(derive_key(seed, {n, j + 1}));
    out[j] = plan.entries[j]->sample_tilted(theta, rng);
  }
}

RowMoments row_moments(const TriangularArrayModel& model, long long n) {
  const RowPlan plan = model.plan(n);
  RowMoments rm;
  rm.variances.reserve(plan.entries.size());
  rm.partials.reserve(plan.entries.size());
  CompensatedSum total;
  for (const EntryLaw* law : plan.entries) {
    const double v = law->variance();
    if (!std::isfinite(v)) throw UnavailableError("entry variance undefined; estimate it by Monte Carlo");
    rm.variances.push_back(v);
    total.add(v);
    rm.partials.push_back(total.value());
  }
  rm.total = total.value();
  if (!(rm.total > 0.0)) throw std::domain_error("zero total variance");
  return rm;
}

Estimate tail_prob(const TriangularArrayModel& model, long long n, long long j, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("tail_prob: negative threshold");
  return model.entry_law(n, j)->prob(Band::above(x));
}

}  // namespace mdplab
