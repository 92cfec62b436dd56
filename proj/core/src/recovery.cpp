#include "usdlab/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "usdlab/errors.hpp"
#include "usdlab/parallel.hpp"

namespace usdlab {

namespace {

std::int64_t pow2(int level) { return std::int64_t{1} << level; }

void check_grid(std::size_t dim, int grid_level, std::int64_t max_frequency) {
  if (grid_level < 0 || grid_level > 30) throw InvalidArgument("grid level out of range");
  const std::int64_t per_dim = pow2(grid_level);
  if (per_dim < 2 * max_frequency + 1) throw GridTooCoarse(per_dim, 2 * max_frequency + 1);
  double total = 1.0;
  for (std::size_t j = 0; j < dim; ++j) total *= static_cast<double>(per_dim);
  if (total > static_cast<double>(kMaxGridNodes))
    throw CapExceeded("quadrature grid", total, static_cast<double>(kMaxGridNodes));
}

Eigen::VectorXcd to_vector(const std::vector<Complex>& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Eigen::MatrixXcd columns_of(const Eigen::MatrixXcd& A, std::span<const std::size_t> J) {
  Eigen::MatrixXcd out(A.rows(), static_cast<Eigen::Index>(J.size()));
  for (std::size_t i = 0; i < J.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = A.col(static_cast<Eigen::Index>(J[i]));
  return out;
}

Eigen::VectorXd sqrt_weights(const DiscreteInstance& inst) {
  const auto m = static_cast<Eigen::Index>(inst.rows());
  if (inst.weights.size() == 0)
    return Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  return inst.weights.cwiseSqrt();
}

double weighted_pow_sum(const Eigen::VectorXcd& r, const Eigen::VectorXd& w, double p) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < r.size(); ++j) s += w(j) * std::pow(std::abs(r(j)), p);
  return s;
}

Eigen::VectorXd effective_weights(const DiscreteInstance& inst) {
  const auto m = static_cast<Eigen::Index>(inst.rows());
  if (inst.weights.size() == 0) return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  return inst.weights;
}

// Weighted least squares min sum u_j |f_j - (A c)_j|^2.
Eigen::VectorXcd weighted_ls(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& f,
                             const Eigen::VectorXd& u, bool allow_rank_deficient,
                             bool check_rank) {
  const Eigen::VectorXd s = u.cwiseSqrt();
  const Eigen::MatrixXcd As = s.asDiagonal() * A;
  const Eigen::VectorXcd fs = s.asDiagonal() * f;
  if (allow_rank_deficient) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(As);
    return cod.solve(fs);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(As);
  if (check_rank && qr.rank() < A.cols())
    throw RankDeficient("restricted dictionary values have rank " +
                        std::to_string(qr.rank()) + " < " + std::to_string(A.cols()));
  return qr.solve(fs);
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(out);
}

std::vector<std::vector<std::size_t>> all_subsets(std::size_t N, std::size_t v) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> J(v);
  std::iota(J.begin(), J.end(), std::size_t{0});
  for (;;) {
    out.push_back(J);
    std::size_t i = v;
    while (i > 0 && J[i - 1] == N - v + (i - 1)) --i;
    if (i == 0) return out;
    ++J[i - 1];
    for (std::size_t j = i; j < v; ++j) J[j] = J[j - 1] + 1;
  }
}

SparseApproximant wcga_l2(const DiscreteInstance& inst, const WcgaOptions& opts) {
  const Eigen::VectorXd s = sqrt_weights(inst);
  const Eigen::MatrixXcd A = s.asDiagonal() * inst.dict_values;
  const Eigen::VectorXcd f = s.asDiagonal() * inst.f_values;
  const auto m = A.rows();
  const auto N = static_cast<std::size_t>(A.cols());
  const std::size_t iters = std::min(opts.max_iter, N);

  Eigen::MatrixXcd Q(m, static_cast<Eigen::Index>(iters));
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(iters),
                                              static_cast<Eigen::Index>(iters));
  Eigen::VectorXcd z(static_cast<Eigen::Index>(iters));
  Eigen::VectorXcd r = f;
  std::vector<char> used(N, 0);

  SparseApproximant out;
  out.method = "wcga";
  double norm = r.norm();
  for (std::size_t it = 0; it < iters; ++it) {
    if (norm <= opts.stop_tol || norm == 0.0) break;
    const Eigen::VectorXcd corr = A.adjoint() * r;
    std::size_t best = N;
    double best_value = -1.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (used[i]) continue;
      const double value = std::abs(corr(static_cast<Eigen::Index>(i))) / norm;
      if (value > best_value) {
        best_value = value;
        best = i;
      }
    }
    if (best == N || best_value <= 1e-13) break;

    const auto k = static_cast<Eigen::Index>(out.support.size());
    Eigen::VectorXcd q = A.col(static_cast<Eigen::Index>(best));
    const double original = q.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < k; ++i) {
        const Complex c = Q.col(i).dot(q);
        R(i, k) += c;
        q -= c * Q.col(i);
      }
    }
    const double qn = q.norm();
    if (!(qn > 1e-12 * original))
      throw RankDeficient("wcga iteration " + std::to_string(it + 1) + ": element " +
                          std::to_string(best) + " is dependent on the selected ones");
    q /= qn;
    R(k, k) = qn;
    Q.col(k) = q;
    z(k) = q.dot(f);
    r -= q.dot(r) * q;
    norm = r.norm();
    used[best] = 1;
    out.support.push_back(best);
    out.trace.push_back({best, best_value, norm});
  }

  const auto k = static_cast<Eigen::Index>(out.support.size());
  if (k > 0) {
    out.coefficients = R.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(z.head(k));
  } else {
    out.coefficients.resize(0);
  }
  const Eigen::MatrixXcd AS = columns_of(inst.dict_values, out.support);
  out.residual = inst.f_values - AS * out.coefficients;
  out.residual_norm = inst.norm(out.residual);
  // Trace norms were taken in the sqrt(w)-scaled Euclidean metric, which is
  // the weighted discrete L_2 norm; the last one is refreshed from c.
  if (!out.trace.empty()) out.trace.back().residual_norm = out.residual_norm;
  return out;
}


// Newton direction for sum_j w_j |f_j - (A c)_j|^p in the real coordinates
// (Re c, Im c). Returns an empty vector when the Hessian is not positive
// definite.
Eigen::VectorXcd newton_direction(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& r,
                                  const Eigen::VectorXd& w, double p, double floor) {
  const Eigen::Index n = A.cols();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * n);
  Eigen::MatrixXd B(2, 2 * n);
  for (Eigen::Index j = 0; j < A.rows(); ++j) {
    // d(Re r, Im r) / d(Re c, Im c).
    B.row(0) << -A.row(j).real(), A.row(j).imag();
    B.row(1) << -A.row(j).imag(), -A.row(j).real();
    const Eigen::Vector2d rho(r(j).real(), r(j).imag());
    const double a = std::max(rho.norm(), floor);
    const double s = w(j) * p * std::pow(a, p - 2.0);
    Eigen::Matrix2d Hphi = Eigen::Matrix2d::Identity();
    if (rho.norm() > floor) Hphi += (p - 2.0) * rho * rho.transpose() / (a * a);
    grad.noalias() += s * B.transpose() * rho;
    H.noalias() += s * B.transpose() * Hphi * B;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) return {};
  const Eigen::VectorXd d = llt.solve(-grad);
  if (!d.allFinite()) return {};
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = Complex(d(i), d(n + i));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

DiscreteInstance DiscreteInstance::sample(const TrigPolynomial& f, const Dictionary& dictionary,
                                          const PointSet& xi, double p) {
  if (f.dim() != dictionary.dim() || xi.dim() != dictionary.dim())
    throw DimensionMismatch("function, dictionary and points must share a dimension");
  DiscreteInstance inst;
  inst.f_values = to_vector(evaluate(f, xi));
  inst.dict_values = dictionary.sample(xi);
  inst.p = p;
  inst.validate();
  return inst;
}

DiscreteInstance DiscreteInstance::mu_xi(const TrigPolynomial& f, const Dictionary& dictionary,
                                         const PointSet& xi, double p, int grid_level) {
  if (f.dim() != dictionary.dim() || xi.dim() != dictionary.dim())
    throw DimensionMismatch("function, dictionary and points must share a dimension");
  check_grid(f.dim(), grid_level,
             std::max(f.max_frequency(), dictionary.max_frequency()));
  const Eigen::VectorXcd fg = evaluate_on_grid(f, pow2(grid_level));
  const Eigen::MatrixXcd Dg = dictionary.sample_grid(grid_level);
  const Eigen::VectorXcd fx = to_vector(evaluate(f, xi));
  const Eigen::MatrixXcd Dx = dictionary.sample(xi);
  const auto G = fg.size();
  const auto m = fx.size();
  DiscreteInstance inst;
  inst.f_values.resize(G + m);
  inst.f_values << fg, fx;
  inst.dict_values.resize(G + m, Dg.cols());
  inst.dict_values << Dg, Dx;
  inst.weights.resize(G + m);
  inst.weights.head(G).setConstant(0.5 / static_cast<double>(G));
  inst.weights.tail(m).setConstant(0.5 / static_cast<double>(m));
  inst.p = p;
  inst.validate();
  return inst;
}

DiscreteInstance DiscreteInstance::continuous(const TrigPolynomial& f,
                                              const Dictionary& dictionary, double p,
                                              int grid_level) {
  if (f.dim() != dictionary.dim())
    throw DimensionMismatch("function and dictionary must share a dimension");
  check_grid(f.dim(), grid_level,
             std::max(f.max_frequency(), dictionary.max_frequency()));
  DiscreteInstance inst;
  inst.f_values = evaluate_on_grid(f, pow2(grid_level));
  inst.dict_values = dictionary.sample_grid(grid_level);
  inst.p = p;
  inst.validate();
  return inst;
}

double DiscreteInstance::weight(Eigen::Index j) const {
  if (weights.size() == 0) return 1.0 / static_cast<double>(f_values.size());
  return weights(j);
}

double DiscreteInstance::norm(const Eigen::VectorXcd& r) const {
  if (r.size() != f_values.size()) throw DimensionMismatch("residual length differs from instance");
  return std::pow(weighted_pow_sum(r, effective_weights(*this), p), 1.0 / p);
}

void DiscreteInstance::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("p must be a finite value >= 1");
  if (f_values.size() == 0) throw InvalidArgument("instance has no nodes");
  if (dict_values.rows() != f_values.size())
    throw DimensionMismatch("dictionary values and target values differ in length");
  if (weights.size() != 0) {
    if (weights.size() != f_values.size())
      throw DimensionMismatch("weights and target values differ in length");
    if ((weights.array() < 0.0).any()) throw InvalidArgument("weights must be nonnegative");
    if (std::abs(weights.sum() - 1.0) > 1e-9) throw InvalidArgument("weights must sum to 1");
  }
}

Projection chebyshev_projection(const DiscreteInstance& inst, std::span<const std::size_t> J,
                                const ProjectionOptions& opts,
                                const Eigen::VectorXcd* warm_start) {
  inst.validate();
  for (auto j : J)
    if (j >= inst.columns()) throw InvalidArgument("projection index out of range");
  Projection out;
  if (J.empty()) {
    out.coefficients.resize(0);
    out.residual = inst.f_values;
    out.residual_norm = inst.norm(out.residual);
    return out;
  }
  const Eigen::MatrixXcd A = columns_of(inst.dict_values, J);
  const Eigen::VectorXd w = effective_weights(inst);
  const double p = inst.p;

  Eigen::VectorXcd c;
  const bool use_warm = warm_start != nullptr && warm_start->size() == A.cols() && p != 2.0;
  if (use_warm) {
    if (!opts.allow_rank_deficient) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(w.cwiseSqrt().asDiagonal() * A);
      if (qr.rank() < A.cols())
        throw RankDeficient("restricted dictionary values have rank " +
                            std::to_string(qr.rank()) + " < " + std::to_string(A.cols()));
    }
    c = *warm_start;
  } else {
    c = weighted_ls(A, inst.f_values, w, opts.allow_rank_deficient, true);
  }
  Eigen::VectorXcd r = inst.f_values - A * c;
  double obj = weighted_pow_sum(r, w, p);

  if (p != 2.0) {
    const double scale = std::max(1.0, inst.f_values.cwiseAbs().maxCoeff());
    const double floor = opts.weight_floor * scale;
    double gamma = 1.0;
    bool polish = false;
    out.converged = false;
    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
      out.iterations = it;
      if (obj == 0.0) {
        out.converged = true;
        break;
      }
      Eigen::VectorXcd step;
      if (polish) step = newton_direction(A, r, w, p, floor);
      if (step.size() == 0) {
        Eigen::VectorXd u(r.size());
        for (Eigen::Index j = 0; j < r.size(); ++j)
          u(j) = w(j) * std::pow(std::max(std::abs(r(j)), floor), p - 2.0);
        step = weighted_ls(A, inst.f_values, u, true, false) - c;
      }
      double g = polish ? 1.0 : std::min(1.0, 2.0 * gamma);
      bool accepted = false;
      Eigen::VectorXcd c_new, r_new;
      double obj_new = obj;
      for (int back = 0; back < 40; ++back, g *= 0.5) {
        c_new = c + g * step;
        r_new = inst.f_values - A * c_new;
        obj_new = weighted_pow_sum(r_new, w, p);
        if (obj_new <= obj) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // No descent along the direction: stationary to rounding.
        out.converged = true;
        break;
      }
      if (!polish) gamma = g;
      const double norm_old = std::pow(obj, 1.0 / p);
      const double norm_new = std::pow(obj_new, 1.0 / p);
      const double moved = g * step.norm();
      c = std::move(c_new);
      r = std::move(r_new);
      obj = obj_new;
      // The norm is flat at the minimizer, so a small norm change alone
      // leaves the coefficients off by about its square root; Newton steps
      // on the convex objective then settle them.
      if (std::abs(norm_old - norm_new) <= opts.rel_tol * std::max(norm_old, 1e-300)) {
        if (moved <= opts.coef_tol * std::max(c.norm(), 1e-300)) {
          out.converged = true;
          break;
        }
        polish = true;
      }
    }
  }
  out.coefficients = std::move(c);
  out.residual = std::move(r);
  out.residual_norm = std::pow(obj, 1.0 / p);
  return out;
}

Complex norming_functional_action(const Eigen::VectorXcd& residual, const Eigen::VectorXcd& g,
                                  double p, const Eigen::VectorXd& weights) {
  if (residual.size() != g.size()) throw DimensionMismatch("residual and g differ in length");
  if (weights.size() != 0 && weights.size() != residual.size())
    throw DimensionMismatch("weights and residual differ in length");
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  const auto m = residual.size();
  const Eigen::VectorXd w = weights.size() == 0
                                ? Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m))
                                : weights;
  const double norm = std::pow(weighted_pow_sum(residual, w, p), 1.0 / p);
  if (norm == 0.0) throw InvalidArgument("norming functional of the zero residual");
  Complex s = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double a = std::abs(residual(j));
    if (a == 0.0) continue;
    s += w(j) * std::pow(a, p - 1.0) * (std::conj(residual(j)) / a) * g(j);
  }
  return s * std::pow(norm, 1.0 - p);
}

SparseApproximant wcga(const DiscreteInstance& inst, const WcgaOptions& opts) {
  inst.validate();
  if (!(opts.t > 0.0 && opts.t <= 1.0)) throw InvalidArgument("weakness parameter t must lie in (0, 1]");
  if (inst.p == 2.0) return wcga_l2(inst, opts);

  const Eigen::VectorXd w = effective_weights(inst);
  const double p = inst.p;
  const std::size_t N = inst.columns();
  const std::size_t iters = std::min(opts.max_iter, N);
  std::vector<char> used(N, 0);

  SparseApproximant out;
  out.method = "wcga";
  out.coefficients.resize(0);
  out.residual = inst.f_values;
  out.residual_norm = inst.norm(out.residual);
  for (std::size_t it = 0; it < iters; ++it) {
    if (out.residual_norm <= opts.stop_tol || out.residual_norm == 0.0) break;
    const Eigen::VectorXcd& r = out.residual;
    Eigen::VectorXcd u(r.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      const double a = std::abs(r(j));
      u(j) = a == 0.0 ? Complex(0.0) : w(j) * std::pow(a, p - 2.0) * std::conj(r(j));
    }
    const Eigen::VectorXcd F =
        (inst.dict_values.transpose() * u) * std::pow(out.residual_norm, 1.0 - p);
    std::size_t best = N;
    double best_value = -1.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (used[i]) continue;
      const double value = std::abs(F(static_cast<Eigen::Index>(i)));
      if (value > best_value) {
        best_value = value;
        best = i;
      }
    }
    if (best == N || best_value <= 1e-13) break;
    used[best] = 1;
    out.support.push_back(best);
    Eigen::VectorXcd warm(static_cast<Eigen::Index>(out.support.size()));
    warm.head(out.coefficients.size()) = out.coefficients;
    warm(warm.size() - 1) = 0.0;
    Projection proj;
    try {
      proj = chebyshev_projection(inst, out.support, opts.projection, &warm);
    } catch (const RankDeficient& e) {
      throw RankDeficient("wcga iteration " + std::to_string(it + 1) + ": " + e.what());
    }
    out.converged = out.converged && proj.converged;
    out.coefficients = std::move(proj.coefficients);
    out.residual = std::move(proj.residual);
    out.residual_norm = proj.residual_norm;
    out.trace.push_back({best, best_value, out.residual_norm});
  }
  return out;
}

double wcga_iteration_budget(double D, double K, std::size_t v, double c) {
  if (!(D > 0.0 && K > 0.0) || v == 0) throw InvalidArgument("budget needs D, K > 0 and v >= 1");
  const double V = D * std::sqrt(K);
  const double l = std::max(std::log(V * static_cast<double>(v)), 0.0);
  return c * std::ceil(V * V * l * static_cast<double>(v));
}

SparseApproximant best_v_term_oracle(const DiscreteInstance& inst, std::size_t v,
                                     const OracleOptions& opts) {
  inst.validate();
  const std::size_t N = inst.columns();
  if (v > N) throw InvalidArgument("oracle sparsity v must not exceed N");
  if (v == 0) {
    SparseApproximant out;
    out.method = "oracle";
    out.coefficients.resize(0);
    out.residual = inst.f_values;
    out.residual_norm = inst.norm(out.residual);
    return out;
  }
  const double count = binomial(N, v);
  if (count > opts.cap) throw CapExceeded("best v-term oracle subsets", count, opts.cap);
  const auto subsets = all_subsets(N, v);
  std::vector<double> norms(subsets.size());
  std::vector<char> conv(subsets.size(), 1);
  parallel_for(subsets.size(), opts.threads, [&](std::size_t i) {
    const Projection proj = chebyshev_projection(inst, subsets[i], opts.projection);
    norms[i] = proj.residual_norm;
    conv[i] = proj.converged ? 1 : 0;
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < subsets.size(); ++i)
    if (norms[i] < norms[best] * (1.0 - 1e-13)) best = i;
  const Projection proj = chebyshev_projection(inst, subsets[best], opts.projection);
  SparseApproximant out;
  out.method = "oracle";
  out.support = subsets[best];
  out.coefficients = proj.coefficients;
  out.residual = proj.residual;
  out.residual_norm = proj.residual_norm;
  out.converged = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> block_schedule(int n, double beta, std::size_t d, int max_level) {
  if (n < 0) throw InvalidArgument("block index n must be >= 0");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  std::vector<std::size_t> out;
  for (int j = n; j <= max_level; ++j) {
    const double value = std::exp2(static_cast<double>(n) - beta * static_cast<double>(j - n)) *
                         std::pow(static_cast<double>(j), static_cast<double>(d - 1));
    out.push_back(static_cast<std::size_t>(std::floor(value)));
  }
  return out;
}

double target_norm(const TrigPolynomial& residual, double p, const BlockTarget& target) {
  switch (target.kind) {
    case TargetKind::continuous:
      return lp_norm(residual, p, lp_grid_level(residual, target.grid_level));
    case TargetKind::discrete:
      if (!target.xi) throw InvalidArgument("discrete target needs points");
      return discrete_lp_norm(evaluate(residual, *target.xi), p);
    case TargetKind::mu_xi:
      if (!target.xi) throw InvalidArgument("mu_xi target needs points");
      return mu_xi_norm(residual, *target.xi, p, lp_grid_level(residual, target.grid_level));
  }
  throw InvalidArgument("unknown target kind");
}

namespace {

TrigPolynomial largest_terms(const TrigPolynomial& fj, std::size_t count) {
  std::vector<std::pair<Frequency, Complex>> terms(fj.coefficients().begin(),
                                                   fj.coefficients().end());
  // Stable sort keeps lexicographic order among equal moduli.
  std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) > std::abs(b.second);
  });
  TrigPolynomial out(fj.dim());
  for (std::size_t i = 0; i < std::min(count, terms.size()); ++i)
    out.set(terms[i].first, terms[i].second);
  return out;
}

TrigPolynomial wcga_terms(const TrigPolynomial& fj, std::size_t count, double p,
                          const BlockTarget& target) {
  const Dictionary D = Dictionary::exponentials(fj.support());
  DiscreteInstance inst;
  const int level = lp_grid_level(fj, target.grid_level);
  switch (target.kind) {
    case TargetKind::continuous:
      inst = DiscreteInstance::continuous(fj, D, p, level);
      break;
    case TargetKind::discrete:
      inst = DiscreteInstance::sample(fj, D, *target.xi, p);
      break;
    case TargetKind::mu_xi:
      inst = DiscreteInstance::mu_xi(fj, D, *target.xi, p, level);
      break;
  }
  WcgaOptions opts;
  opts.max_iter = count;
  opts.projection.allow_rank_deficient = true;
  const SparseApproximant g = wcga(inst, opts);
  return D.combine(g.support, g.coefficients);
}

}  // namespace

BlockGreedyResult block_greedy_av(std::span<const TrigPolynomial> levels, int n, double beta,
                                  double p, const BlockTarget& target,
                                  const BlockGreedyOptions& opts) {
  if (levels.empty()) throw InvalidArgument("level decomposition is empty");
  if ((target.kind != TargetKind::continuous) && !target.xi)
    throw InvalidArgument("discrete targets need points");
  const std::size_t d = levels.front().dim();
  const int max_level = static_cast<int>(levels.size()) - 1;
  BlockGreedyResult out;
  out.n = n;
  out.beta = beta;
  out.approximant = TrigPolynomial(d);
  out.schedule = block_schedule(n, beta, d, max_level);
  TrigPolynomial f(d);
  for (int j = 0; j <= max_level; ++j) {
    const TrigPolynomial& fj = levels[static_cast<std::size_t>(j)];
    if (fj.dim() != d) throw DimensionMismatch("levels differ in dimension");
    f += fj;
    if (fj.empty()) continue;
    if (j < n) {
      out.approximant += fj;
      out.total_terms += fj.size();
      continue;
    }
    const std::size_t vj = out.schedule[static_cast<std::size_t>(j - n)];
    if (vj == 0) continue;
    const TrigPolynomial hj = opts.rule == BlockRule::largest_coefficients
                                  ? largest_terms(fj, vj)
                                  : wcga_terms(fj, std::min(vj, fj.size()), p, target);
    out.approximant += hj;
    out.total_terms += std::min(vj, fj.size());
  }
  out.error = target_norm(f - out.approximant, p, target);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(RecoveryMethod method) {
  switch (method) {
    case RecoveryMethod::wcga: return "wcga";
    case RecoveryMethod::oracle: return "oracle";
    case RecoveryMethod::block: return "block";
  }
  return "unknown";
}

RecoveryReport recovery_pipeline(const TrigPolynomial& f, const Dictionary& dictionary,
                                 const PointSet& xi, std::size_t v, double p,
                                 const RecoveryOptions& opts,
                                 const std::optional<UsdCertificate>& certificate) {
  if (v < 1) throw InvalidArgument("v must be >= 1");
  const DiscreteInstance inst = DiscreteInstance::sample(f, dictionary, xi, p);
  RecoveryReport rep;
  rep.method = opts.method;
  rep.p = p;
  rep.v = v;
  rep.m = xi.size();
  rep.approximant = TrigPolynomial(f.dim());

  switch (opts.method) {
    case RecoveryMethod::wcga: {
      WcgaOptions w;
      w.t = opts.t;
      w.max_iter = opts.iterations == 0 ? v : opts.iterations;
      const SparseApproximant g = wcga(inst, w);
      rep.approximant = dictionary.combine(g.support, g.coefficients);
      rep.support = g.support;
      rep.trace = g.trace;
      rep.terms = g.support.size();
      break;
    }
    case RecoveryMethod::oracle: {
      OracleOptions o;
      o.threads = opts.threads;
      const SparseApproximant g = best_v_term_oracle(inst, v, o);
      rep.approximant = dictionary.combine(g.support, g.coefficients);
      rep.support = g.support;
      rep.terms = g.support.size();
      break;
    }
    case RecoveryMethod::block: {
      const auto levels = level_decomposition(f);
      const double beta = opts.block_beta > 0.0 ? opts.block_beta : opts.block_a / 2.0;
      BlockTarget target{TargetKind::discrete, xi, opts.grid_level};
      const BlockGreedyResult b = block_greedy_av(levels, opts.block_n, beta, p, target);
      rep.approximant = b.approximant;
      rep.terms = b.total_terms;
      break;
    }
  }

  const TrigPolynomial diff = f - rep.approximant;
  rep.continuous_error = lp_norm(diff, p, lp_grid_level(diff, opts.grid_level));
  rep.discrete_residual = discrete_lp_norm(evaluate(diff, xi), p);

  if (certificate) {
    if (certificate->points != xi.size())
      throw InvalidArgument("certificate was issued for a different number of points");
    rep.certificate = certificate;
    rep.certified = certificate->pass;
    rep.one_sided_constant = certificate->one_sided_constant;
  }

  if (opts.compute_oracle && binomial(dictionary.size(), v) <= opts.oracle_cap &&
      v <= dictionary.size()) {
    OracleOptions o;
    o.threads = opts.threads;
    o.cap = opts.oracle_cap;
    rep.sigma_v_discrete = best_v_term_oracle(inst, v, o).residual_norm;
    const int level = std::max(
        opts.grid_level,
        grid_level_for(2 * std::max(f.max_frequency(), dictionary.max_frequency()) + 1));
    const DiscreteInstance mu = DiscreteInstance::mu_xi(f, dictionary, xi, p, level);
    rep.sigma_v_mu_xi = best_v_term_oracle(mu, v, o).residual_norm;
    if (rep.certified)
      rep.bound_mu_xi = std::pow(2.0, 1.0 / p) * (2.0 * rep.one_sided_constant + 1.0) *
                        *rep.sigma_v_mu_xi;
    if (opts.sup_oracle_exponent > 0.0) {
      const DiscreteInstance cont =
          DiscreteInstance::continuous(f, dictionary, opts.sup_oracle_exponent, level);
      rep.sigma_v_sup_lower = best_v_term_oracle(cont, v, o).residual_norm;
      if (rep.certified)
        rep.bound_sup = (2.0 * rep.one_sided_constant + 1.0) * *rep.sigma_v_sup_lower;
    }
  }
  return rep;
}

}  // namespace usdlab
