#include "usdlab/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "usdlab/errors.hpp"
#include "usdlab/parallel.hpp"
#include "usdlab/random.hpp"

namespace usdlab {

namespace {

double abs_pow(Complex z, double p) {
  if (p == 2.0) return std::norm(z);
  if (p == 4.0) {
    const double n = std::norm(z);
    return n * n;
  }
  return std::pow(std::abs(z), p);
}

// |z|^{p-2}, zero where z vanishes (the gradient weight is continuous there
// for p >= 2).
double gradient_weight(Complex z, double p) {
  if (p == 2.0) return 1.0;
  if (p == 4.0) return std::norm(z);
  const double a = std::abs(z);
  return a > 0.0 ? std::pow(a, p - 2.0) : 0.0;
}

double mean_abs_pow(const Eigen::VectorXcd& y, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += abs_pow(y(i), p);
  return s / static_cast<double>(y.size());
}

// Value and Wirtinger-style gradient (times 2) of mean |M c|^p.
double power_mean_with_gradient(const Eigen::MatrixXcd& M,
                                const Eigen::VectorXcd& c, double p,
                                Eigen::VectorXcd& grad) {
  const Eigen::VectorXcd y = M * c;
  Eigen::VectorXcd w(y.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    s += abs_pow(y(i), p);
    w(i) = gradient_weight(y(i), p) * y(i);
  }
  const double n = static_cast<double>(y.size());
  grad = (p / n) * (M.adjoint() * w);
  return s / n;
}

struct SpanData {
  Eigen::MatrixXcd sample;  // m x v values at the points
  Eigen::MatrixXcd grid;    // nodes x v values on the quadrature grid
  Eigen::MatrixXcd gram;    // continuous Gram
};

struct EigenExtremes {
  double min_value = 0.0;
  double max_value = 0.0;
  Eigen::VectorXcd min_vector;  // unit L_2 norm
  Eigen::VectorXcd max_vector;
};

EigenExtremes eigen_extremes(const SpanData& span) {
  const Eigen::Index v = span.gram.rows();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gram_eigs(span.gram,
                                                                  Eigen::EigenvaluesOnly);
  const auto& ev = gram_eigs.eigenvalues();
  if (v == 0 || !(ev(0) > 1e-12 * std::max(ev(v - 1), 1e-300)))
    throw RankDeficient("span basis is linearly dependent (Gram eigenvalue " +
                        std::to_string(v ? ev(0) : 0.0) + ")");
  const Eigen::LLT<Eigen::MatrixXcd> llt(span.gram);
  const Eigen::MatrixXcd L = llt.matrixL();
  const double m = static_cast<double>(span.sample.rows());
  const Eigen::MatrixXcd empirical = span.sample.adjoint() * span.sample / m;
  const Eigen::MatrixXcd Y = L.triangularView<Eigen::Lower>().solve(empirical);
  Eigen::MatrixXcd M =
      L.triangularView<Eigen::Lower>().solve(Y.adjoint()).adjoint();
  M = (M + M.adjoint()).eval() / 2.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  EigenExtremes out;
  out.min_value = std::max(es.eigenvalues()(0), 0.0);
  out.max_value = es.eigenvalues()(v - 1);
  const auto U = L.adjoint().triangularView<Eigen::Upper>();
  out.min_vector = U.solve(es.eigenvectors().col(0));
  out.max_vector = U.solve(es.eigenvectors().col(v - 1));
  return out;
}

struct ClimbResult {
  double ratio = 0.0;
  Eigen::VectorXcd c;
  bool converged = false;
};

// Projected gradient ascent (direction = +1) or descent (-1) of the
// scale-invariant ratio mean|Ac|^p / mean|Bc|^p on the unit l2 sphere.
ClimbResult climb(const SpanData& span, Eigen::VectorXcd c, double p,
                  double direction, const RatioOptions& opts) {
  auto evaluate = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& grad) {
    Eigen::VectorXcd gn, gd;
    const double num = power_mean_with_gradient(span.sample, x, p, gn);
    const double den = power_mean_with_gradient(span.grid, x, p, gd);
    grad = (gn * den - gd * num) / (den * den);
    return num / den;
  };
  c.normalize();
  Eigen::VectorXcd grad;
  double ratio = evaluate(c, grad);
  double step = 1.0 / std::max(ratio, 1e-3);
  ClimbResult out;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    const double gnorm = grad.norm();
    if (gnorm <= opts.gradient_tol * std::max(ratio, 1e-12)) {
      out.converged = true;
      break;
    }
    bool moved = false;
    while (step * gnorm > 1e-16) {
      Eigen::VectorXcd trial = c + direction * step * grad;
      trial.normalize();
      Eigen::VectorXcd trial_grad;
      const double trial_ratio = evaluate(trial, trial_grad);
      if (direction * (trial_ratio - ratio) >= 1e-4 * step * gnorm * gnorm) {
        c = trial;
        grad = trial_grad;
        ratio = trial_ratio;
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // No representable ascent step: stationary to working precision.
      out.converged = true;
      break;
    }
  }
  out.ratio = ratio;
  out.c = c;
  return out;
}

int multistart_grid_level(std::int64_t K, double p, int requested) {
  if (requested >= 0) return requested;
  const bool even_integer = p == std::floor(p) && static_cast<long>(p) % 2 == 0;
  const auto exact_nodes = static_cast<std::int64_t>(std::ceil(p)) * K + 1;
  const int level = grid_level_for(std::max(exact_nodes, 2 * K + 1));
  return even_integer ? std::max(level, 4) : std::max(level, kDefaultGridLevel);
}

RatioBounds bounds_from_span(const SpanData& span, double p,
                             const RatioOptions& opts, std::uint64_t stream) {
  const EigenExtremes eig = eigen_extremes(span);
  RatioBounds out;
  if (p == 2.0) {
    out.method = VerificationMethod::eigen_exact;
    out.min_ratio = eig.min_value;
    out.max_ratio = eig.max_value;
    out.min_vector = eig.min_vector;
    out.max_vector = eig.max_vector;
    return out;
  }
  out.method = VerificationMethod::multistart;
  out.heuristic = true;
  out.converged = true;
  out.starts = opts.starts + 2;
  std::vector<Eigen::VectorXcd> starts{eig.min_vector, eig.max_vector};
  Rng rng = make_rng(opts.seed, stream);
  const Eigen::Index v = span.gram.rows();
  for (std::size_t s = 0; s < opts.starts; ++s) {
    Eigen::VectorXcd c(v);
    for (Eigen::Index i = 0; i < v; ++i) c(i) = complex_normal(rng);
    starts.push_back(std::move(c));
  }
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    const ClimbResult lo = climb(span, start, p, -1.0, opts);
    const ClimbResult hi = climb(span, start, p, +1.0, opts);
    out.converged = out.converged && lo.converged && hi.converged;
    if (lo.ratio < out.min_ratio) {
      out.min_ratio = lo.ratio;
      out.min_vector = lo.c;
    }
    if (hi.ratio > out.max_ratio) {
      out.max_ratio = hi.ratio;
      out.max_vector = hi.c;
    }
  }
  auto to_unit_lp = [&](Eigen::VectorXcd& c) {
    const double den = mean_abs_pow(span.grid * c, p);
    if (den > 0.0) c /= std::pow(den, 1.0 / p);
  };
  to_unit_lp(out.min_vector);
  to_unit_lp(out.max_vector);
  return out;
}

SpanData extract_span(std::span<const std::size_t> J, const Dictionary& dictionary,
                      const Eigen::MatrixXcd& sample, const Eigen::MatrixXcd& grid) {
  SpanData span;
  const auto v = static_cast<Eigen::Index>(J.size());
  span.sample.resize(sample.rows(), v);
  if (grid.size() > 0) span.grid.resize(grid.rows(), v);
  for (Eigen::Index j = 0; j < v; ++j) {
    const auto col = static_cast<Eigen::Index>(J[static_cast<std::size_t>(j)]);
    if (col >= sample.cols()) throw InvalidArgument("dictionary index out of range");
    span.sample.col(j) = sample.col(col);
    if (grid.size() > 0) span.grid.col(j) = grid.col(col);
  }
  span.gram = dictionary.gram(J);
  return span;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

}  // namespace

std::string to_string(VerificationMethod method) {
  return method == VerificationMethod::eigen_exact ? "eigen_exact" : "multistart";
}

double discrete_lp_norm(std::span<const Complex> values, double p) {
  if (values.empty()) throw InvalidArgument("discrete norm needs values");
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  double s = 0.0;
  for (const Complex& z : values) s += abs_pow(z, p);
  return std::pow(s / static_cast<double>(values.size()), 1.0 / p);
}

double discrete_lp_norm(const Eigen::VectorXcd& values, double p) {
  return discrete_lp_norm(
      std::span<const Complex>(values.data(), static_cast<std::size_t>(values.size())), p);
}

double mu_xi_norm(const TrigPolynomial& f, const PointSet& xi, double p,
                  int grid_level) {
  const double continuous = lp_norm_pow(f, p, grid_level);
  const double discrete = std::pow(discrete_lp_norm(evaluate(f, xi), p), p);
  return std::pow(0.5 * continuous + 0.5 * discrete, 1.0 / p);
}

SubspaceCollection SubspaceCollection::all(Dictionary dictionary, std::size_t v) {
  if (v < 1 || v > dictionary.size())
    throw InvalidArgument("subspace dimension v must lie in [1, N]");
  return SubspaceCollection{std::move(dictionary), v, true, {}};
}

SubspaceCollection SubspaceCollection::listed(
    Dictionary dictionary, std::vector<std::vector<std::size_t>> subsets) {
  if (subsets.empty()) throw InvalidArgument("subspace collection is empty");
  const std::size_t v = subsets.front().size();
  for (auto& J : subsets) {
    if (J.size() != v) throw InvalidArgument("all subsets must have size v");
    std::sort(J.begin(), J.end());
    if (std::adjacent_find(J.begin(), J.end()) != J.end())
      throw InvalidArgument("subset has repeated indices");
    if (!J.empty() && J.back() >= dictionary.size())
      throw InvalidArgument("subset index out of range");
  }
  if (v < 1 || v > dictionary.size())
    throw InvalidArgument("subspace dimension v must lie in [1, N]");
  return SubspaceCollection{std::move(dictionary), v, false, std::move(subsets)};
}

double SubspaceCollection::count() const {
  return all_subsets ? binomial(dictionary.size(), v)
                     : static_cast<double>(subsets.size());
}

void SubspaceCollection::for_each(
    const std::function<void(std::size_t, const std::vector<std::size_t>&)>& fn) const {
  if (!all_subsets) {
    for (std::size_t i = 0; i < subsets.size(); ++i) fn(i, subsets[i]);
    return;
  }
  const std::size_t N = dictionary.size();
  std::vector<std::size_t> J(v);
  for (std::size_t i = 0; i < v; ++i) J[i] = i;
  std::size_t index = 0;
  for (;;) {
    fn(index++, J);
    std::size_t i = v;
    while (i > 0 && J[i - 1] == N - v + (i - 1)) --i;
    if (i == 0) return;
    ++J[i - 1];
    for (std::size_t j = i; j < v; ++j) J[j] = J[j - 1] + 1;
  }
}

std::vector<std::vector<std::size_t>> SubspaceCollection::materialize(double cap) const {
  const double n = count();
  if (n > cap) throw CapExceeded("subspace collection", n, cap);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(static_cast<std::size_t>(n));
  for_each([&](std::size_t, const std::vector<std::size_t>& J) { out.push_back(J); });
  return out;
}

RatioBounds subspace_ratio_bounds(std::span<const std::size_t> J,
                                  const Dictionary& dictionary, const PointSet& xi,
                                  double p, const RatioOptions& opts) {
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  const Eigen::MatrixXcd sample = dictionary.sample(xi);
  Eigen::MatrixXcd grid;
  if (p != 2.0)
    grid = dictionary.sample_grid(
        multistart_grid_level(dictionary.max_frequency(), p, opts.grid_level));
  return bounds_from_span(extract_span(J, dictionary, sample, grid), p, opts, 0);
}

UsdCertificate check_usd(const PointSet& xi, const SubspaceCollection& collection,
                         double p, const RatioOptions& opts) {
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0))
    throw InvalidArgument("epsilon must lie in (0, 1)");
  const auto subsets = collection.materialize(opts.subset_cap);
  if (subsets.empty()) throw InvalidArgument("subspace collection is empty");
  const Dictionary& dictionary = collection.dictionary;
  const Eigen::MatrixXcd sample = dictionary.sample(xi);
  Eigen::MatrixXcd grid;
  if (p != 2.0)
    grid = dictionary.sample_grid(
        multistart_grid_level(dictionary.max_frequency(), p, opts.grid_level));

  std::vector<RatioBounds> bounds(subsets.size());
  parallel_for(subsets.size(), opts.threads, [&](std::size_t i) {
    bounds[i] = bounds_from_span(extract_span(subsets[i], dictionary, sample, grid),
                                 p, opts, i);
  });

  UsdCertificate cert;
  cert.p = p;
  cert.epsilon = opts.epsilon;
  cert.method = p == 2.0 ? VerificationMethod::eigen_exact : VerificationMethod::multistart;
  cert.heuristic = p != 2.0;
  cert.starts = p == 2.0 ? 0 : opts.starts + 2;
  cert.gradient_tol = opts.gradient_tol;
  cert.max_iters = opts.max_iters;
  cert.points = xi.size();
  cert.min_ratio = std::numeric_limits<double>::infinity();
  cert.max_ratio = -std::numeric_limits<double>::infinity();
  cert.pass = true;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const auto& b = bounds[i];
    cert.entries.push_back({subsets[i], b.min_ratio, b.max_ratio, b.converged});
    cert.all_converged = cert.all_converged && b.converged;
    cert.min_ratio = std::min(cert.min_ratio, b.min_ratio);
    cert.max_ratio = std::max(cert.max_ratio, b.max_ratio);
    if (b.min_ratio < 1.0 - opts.epsilon || b.max_ratio > 1.0 + opts.epsilon)
      cert.pass = false;
  }
  cert.one_sided_constant = cert.min_ratio > 0.0
                                ? std::pow(cert.min_ratio, -1.0 / p)
                                : std::numeric_limits<double>::infinity();
  cert.worst_deviation = std::max(1.0 - cert.min_ratio, cert.max_ratio - 1.0);
  return cert;
}

double usd_theory_order(std::size_t v, std::size_t N) {
  const double lv = std::log2(2.0 * static_cast<double>(v));
  const double llN = std::log2(std::log2(2.0 * static_cast<double>(N)));
  const double lN = std::log2(static_cast<double>(N));
  return static_cast<double>(v) * (lv + llN) * (lv + llN) * lN * lN;
}

UsdSearchResult find_usd_points(const SubspaceCollection& collection, double p,
                                std::size_t m, std::size_t max_trials,
                                std::uint64_t seed, const RatioOptions& opts) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (max_trials < 1) throw InvalidArgument("max_trials must be >= 1");
  UsdSearchResult result;
  result.theory_order = usd_theory_order(collection.v, collection.dictionary.size());
  for (std::size_t trial = 0; trial < max_trials; ++trial) {
    PointSet xi = PointSet::uniform(m, collection.dictionary.dim(), seed, trial);
    UsdCertificate cert = check_usd(xi, collection, p, opts);
    result.trials_run = trial + 1;
    const bool better = !result.points ||
                        cert.worst_deviation < result.certificate.worst_deviation;
    if (cert.pass || better) {
      result.points = std::move(xi);
      result.certificate = std::move(cert);
      result.draw_index = trial;
    }
    if (result.certificate.pass) {
      result.found = true;
      break;
    }
  }
  return result;
}

double discretization_error_finite(std::span<const TrigPolynomial> W,
                                   const PointSet& xi, double p, int grid_level) {
  if (W.empty()) throw InvalidArgument("function family W must be nonempty");
  double worst = 0.0;
  for (const auto& f : W) {
    const double continuous = lp_norm_pow(f, p, grid_level);
    const double discrete = std::pow(discrete_lp_norm(evaluate(f, xi), p), p);
    worst = std::max(worst, std::abs(continuous - discrete));
  }
  return worst;
}

std::vector<double> discretization_error_trials(std::span<const TrigPolynomial> W,
                                                double p, std::size_t m,
                                                std::size_t mc_trials,
                                                std::uint64_t seed, int grid_level,
                                                std::size_t threads) {
  if (W.empty()) throw InvalidArgument("function family W must be nonempty");
  if (m < 1) throw InvalidArgument("m must be >= 1");
  const std::size_t dim = W.front().dim();
  std::map<Frequency, Eigen::Index> slots;
  for (const auto& f : W) {
    if (f.dim() != dim) throw DimensionMismatch("W mixes dimensions");
    for (const auto& [k, c] : f.coefficients()) slots.emplace(k, 0);
  }
  std::vector<Frequency> freqs;
  for (auto& [k, slot] : slots) {
    slot = static_cast<Eigen::Index>(freqs.size());
    freqs.push_back(k);
  }
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(freqs.size()),
                                              static_cast<Eigen::Index>(W.size()));
  std::vector<double> norms(W.size());
  for (std::size_t w = 0; w < W.size(); ++w) {
    for (const auto& [k, c] : W[w].coefficients())
      C(slots[k], static_cast<Eigen::Index>(w)) = c;
    norms[w] = lp_norm_pow(W[w], p, grid_level);
  }
  std::vector<double> errors(mc_trials);
  parallel_for(mc_trials, threads, [&](std::size_t t) {
    const PointSet xi = PointSet::uniform(m, dim, seed, t);
    const Eigen::MatrixXcd values = exponential_matrix(freqs, xi) * C;
    double worst = 0.0;
    for (Eigen::Index w = 0; w < values.cols(); ++w) {
      const double discrete = mean_abs_pow(values.col(w), p);
      worst = std::max(worst, std::abs(norms[static_cast<std::size_t>(w)] - discrete));
    }
    errors[t] = worst;
  });
  return errors;
}

MonteCarloEstimate expected_sup_estimate(std::span<const TrigPolynomial> W,
                                         double p, std::size_t m,
                                         std::size_t mc_trials,
                                         std::uint64_t seed, int grid_level,
                                         std::size_t threads) {
  if (mc_trials < 2) throw InvalidArgument("mc_trials must be >= 2");
  const std::vector<double> errors =
      discretization_error_trials(W, p, m, mc_trials, seed, grid_level, threads);
  MonteCarloEstimate out;
  out.trials = mc_trials;
  double sum = 0.0;
  for (double e : errors) sum += e;
  out.mean = sum / static_cast<double>(mc_trials);
  double ss = 0.0;
  for (double e : errors) ss += (e - out.mean) * (e - out.mean);
  out.standard_error =
      std::sqrt(ss / static_cast<double>(mc_trials - 1)) / std::sqrt(static_cast<double>(mc_trials));
  return out;
}

}  // namespace usdlab
