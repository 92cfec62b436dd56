#include "usdlab/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_io.hpp"
#include "usdlab/errors.hpp"

namespace usdlab {

namespace detail {

std::string format_json_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

bool is_scalar(const Json& v) { return !v.is_array() && !v.is_object(); }

bool is_flat(const Json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (e.is_object()) return false;
    if (e.is_array())
      for (const auto& x : e)
        if (!is_scalar(x)) return false;
  }
  return true;
}

void write(std::ostringstream& os, const Json& v, int indent, int depth);

void write_inline(std::ostringstream& os, const Json& v) {
  if (v.is_array()) {
    os << '[';
    bool first = true;
    for (const auto& e : v) {
      if (!first) os << ", ";
      first = false;
      write_inline(os, e);
    }
    os << ']';
    return;
  }
  write(os, v, 0, 0);
}

void newline(std::ostringstream& os, int indent, int depth) {
  if (indent <= 0) return;
  os << '\n' << std::string(static_cast<std::size_t>(indent * depth), ' ');
}

void write(std::ostringstream& os, const Json& v, int indent, int depth) {
  switch (v.type()) {
    case Json::value_t::null: os << "null"; return;
    case Json::value_t::boolean: os << (v.get<bool>() ? "true" : "false"); return;
    case Json::value_t::number_integer: os << v.get<std::int64_t>(); return;
    case Json::value_t::number_unsigned: os << v.get<std::uint64_t>(); return;
    case Json::value_t::number_float: os << format_json_double(v.get<double>()); return;
    case Json::value_t::string: os << v.dump(); return;
    case Json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      if (is_flat(v) || indent <= 0) {
        write_inline(os, v);
        return;
      }
      os << '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) os << ',';
        first = false;
        newline(os, indent, depth + 1);
        write(os, e, indent, depth + 1);
      }
      newline(os, indent, depth);
      os << ']';
      return;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ',';
        first = false;
        if (indent > 0) newline(os, indent, depth + 1);
        os << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, depth + 1);
      }
      newline(os, indent, depth);
      os << '}';
      return;
    }
    default:
      throw InvalidArgument("unsupported JSON value");
  }
}

Json provenance_value(const Provenance& p) {
  Json out = Json::object();
  if (std::holds_alternative<ExplicitProvenance>(p)) {
    out["kind"] = "explicit";
  } else if (const auto* s = std::get_if<SeededProvenance>(&p)) {
    out["kind"] = "seeded";
    out["seed"] = s->seed;
    out["draw_index"] = s->draw_index;
  } else if (const auto* e = std::get_if<EquispacedProvenance>(&p)) {
    out["kind"] = "equispaced";
    out["per_dim"] = e->per_dim;
  }
  return out;
}

Json complex_vector(const Eigen::VectorXcd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Json trace_value(const std::vector<TraceStep>& trace) {
  Json out = Json::array();
  for (const auto& s : trace)
    out.push_back({{"index", s.index},
                   {"functional_value", s.functional_value},
                   {"residual_norm", s.residual_norm}});
  return out;
}

Json optional_value(const std::optional<double>& x) {
  return x ? Json(*x) : Json(nullptr);
}

Frequency frequency_from_value(const Json& k, std::size_t dim) {
  if (!k.is_array() || k.size() != dim) throw InvalidArgument("frequency must be an array of length d");
  std::vector<std::int64_t> c;
  for (const auto& x : k) {
    if (!x.is_number_integer()) throw InvalidArgument("frequency components must be integers");
    c.push_back(x.get<std::int64_t>());
  }
  return Frequency(std::move(c));
}

Json parse(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string dump(const Json& value, int indent) {
  std::ostringstream os;
  write(os, value, indent, 0);
  return os.str();
}

Json to_value(const TrigPolynomial& f) {
  Json terms = Json::array();
  for (const auto& [k, c] : f.coefficients())
    terms.push_back({Json(k.components()), c.real(), c.imag()});
  return {{"dim", f.dim()}, {"terms", terms}};
}

Json to_value(const FrequencySet& s) {
  Json idx = Json::array();
  for (const auto& k : s) idx.push_back(k.components());
  return {{"dim", s.dim()}, {"indices", idx}};
}

Json to_value(const PointSet& xi) {
  Json pts = Json::array();
  for (std::size_t j = 0; j < xi.size(); ++j) {
    const auto p = xi.point(j);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return {{"dim", xi.dim()},
          {"size", xi.size()},
          {"provenance", provenance_value(xi.provenance())},
          {"points", pts}};
}

Json to_value(const UsdCertificate& c) {
  Json entries = Json::array();
  for (const auto& e : c.entries)
    entries.push_back({{"subset", e.subset},
                       {"min_ratio", e.min_ratio},
                       {"max_ratio", e.max_ratio},
                       {"converged", e.converged}});
  return {{"p", c.p},
          {"epsilon", c.epsilon},
          {"method", to_string(c.method)},
          {"heuristic", c.heuristic},
          {"starts", c.starts},
          {"gradient_tol", c.gradient_tol},
          {"max_iters", c.max_iters},
          {"points", c.points},
          {"pass", c.pass},
          {"all_converged", c.all_converged},
          {"min_ratio", c.min_ratio},
          {"max_ratio", c.max_ratio},
          {"one_sided_constant", c.one_sided_constant},
          {"worst_deviation", c.worst_deviation},
          {"entries", entries}};
}

Json to_value(const UsdSearchResult& r) {
  return {{"found", r.found},
          {"draw_index", r.draw_index},
          {"trials_run", r.trials_run},
          {"theory_order", r.theory_order},
          {"points", r.points ? to_value(*r.points) : Json(nullptr)},
          {"certificate", to_value(r.certificate)}};
}

Json to_value(const EntropyProfile& e) {
  return {{"method", e.method},
          {"representatives", e.representatives},
          {"n_max", e.n_max()},
          {"eps", e.eps},
          {"e", e.e},
          {"caveats", e.caveats}};
}

Json to_value(const SparseApproximant& a) {
  return {{"method", a.method},
          {"support", a.support},
          {"coefficients", complex_vector(a.coefficients)},
          {"residual_norm", a.residual_norm},
          {"converged", a.converged},
          {"trace", trace_value(a.trace)}};
}

Json to_value(const RecoveryReport& r) {
  Json cert = nullptr;
  if (r.certificate)
    cert = {{"points", r.certificate->points},
            {"p", r.certificate->p},
            {"method", to_string(r.certificate->method)},
            {"heuristic", r.certificate->heuristic},
            {"pass", r.certificate->pass},
            {"subspaces", r.certificate->entries.size()},
            {"one_sided_constant", r.certificate->one_sided_constant}};
  return {{"method", to_string(r.method)},
          {"p", r.p},
          {"v", r.v},
          {"m", r.m},
          {"terms", r.terms},
          {"support", r.support},
          {"discrete_residual", r.discrete_residual},
          {"continuous_error", r.continuous_error},
          {"certified", r.certified},
          {"one_sided_constant", r.one_sided_constant},
          {"certificate", cert},
          {"sigma_v_discrete", optional_value(r.sigma_v_discrete)},
          {"sigma_v_mu_xi", optional_value(r.sigma_v_mu_xi)},
          {"bound_mu_xi", optional_value(r.bound_mu_xi)},
          {"sigma_v_sup_lower", optional_value(r.sigma_v_sup_lower)},
          {"bound_sup", optional_value(r.bound_sup)},
          {"trace", trace_value(r.trace)},
          {"approximant", to_value(r.approximant)}};
}

Json to_value(const RateFit& f) {
  Json pts = Json::array();
  for (const auto& [x, y] : f.points) pts.push_back({x, y});
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"rms_residual", f.rms_residual},
          {"slope_halfwidth", f.slope_halfwidth},
          {"log2_points", pts}};
}

TrigPolynomial polynomial_from_value(const Json& v) {
  const Json* terms = &v;
  std::size_t dim = 0;
  if (v.is_object()) {
    if (!v.contains("terms") || !v.contains("dim")) throw InvalidArgument("polynomial needs dim and terms");
    dim = v.at("dim").get<std::size_t>();
    terms = &v.at("terms");
  }
  if (!terms->is_array()) throw InvalidArgument("polynomial terms must be an array");
  if (dim == 0) {
    if (terms->empty()) throw InvalidArgument("cannot infer the dimension of an empty polynomial");
    dim = terms->front().at(0).size();
  }
  TrigPolynomial f(dim);
  for (const auto& t : *terms) {
    if (!t.is_array() || t.size() != 3) throw InvalidArgument("term must be [[k...], re, im]");
    const Frequency k = frequency_from_value(t.at(0), dim);
    if (f.coefficients().count(k)) throw InvalidArgument("duplicate frequency in polynomial");
    f.set(k, Complex(t.at(1).get<double>(), t.at(2).get<double>()));
  }
  return f;
}

FrequencySet frequency_set_from_value(const Json& v) {
  if (!v.is_object() || !v.contains("dim") || !v.contains("indices"))
    throw InvalidArgument("frequency set needs dim and indices");
  const auto dim = v.at("dim").get<std::size_t>();
  std::vector<Frequency> idx;
  for (const auto& k : v.at("indices")) idx.push_back(frequency_from_value(k, dim));
  return FrequencySet(dim, std::move(idx));
}

PointSet point_set_from_value(const Json& v) {
  const Json& pts = v.is_object() ? v.at("points") : v;
  if (!pts.is_array() || pts.empty()) throw InvalidArgument("point set must be a nonempty array");
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) rows.push_back(p.get<std::vector<double>>());
  if (!v.is_object() || !v.contains("provenance")) return PointSet(rows);
  const Json& prov = v.at("provenance");
  const std::string kind = prov.value("kind", "explicit");
  const std::size_t dim = rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != dim) throw DimensionMismatch("points differ in dimension");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  if (kind == "seeded")
    return PointSet(dim, std::move(flat),
                    SeededProvenance{prov.at("seed").get<std::uint64_t>(),
                                     prov.at("draw_index").get<std::uint64_t>()});
  if (kind == "equispaced")
    return PointSet(dim, std::move(flat),
                    EquispacedProvenance{prov.at("per_dim").get<std::int64_t>()});
  return PointSet(dim, std::move(flat), ExplicitProvenance{});
}

}  // namespace detail

namespace {

template <typename T>
std::string json_of(const T& x) {
  return detail::dump(detail::to_value(x)) + "\n";
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON document: ") + e.what());
  }
}

}  // namespace

std::string to_json(const TrigPolynomial& f) { return json_of(f); }
std::string to_json(const FrequencySet& s) { return json_of(s); }
std::string to_json(const PointSet& xi) { return json_of(xi); }
std::string to_json(const UsdCertificate& c) { return json_of(c); }
std::string to_json(const UsdSearchResult& r) { return json_of(r); }
std::string to_json(const EntropyProfile& e) { return json_of(e); }
std::string to_json(const SparseApproximant& a) { return json_of(a); }
std::string to_json(const RecoveryReport& r) { return json_of(r); }
std::string to_json(const RateFit& f) { return json_of(f); }

TrigPolynomial trig_polynomial_from_json(std::string_view text) {
  return guarded([&] { return detail::polynomial_from_value(detail::parse(text)); });
}

FrequencySet frequency_set_from_json(std::string_view text) {
  return guarded([&] { return detail::frequency_set_from_value(detail::parse(text)); });
}

PointSet point_set_from_json(std::string_view text) {
  return guarded([&] { return detail::point_set_from_value(detail::parse(text)); });
}

std::string entropy_profile_csv(const EntropyProfile& e) {
  std::string out = "n,eps_n\n";
  for (std::size_t n = 0; n < e.eps.size(); ++n)
    out += std::to_string(n) + "," + format_double(e.eps[n]) + "\n";
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace usdlab
