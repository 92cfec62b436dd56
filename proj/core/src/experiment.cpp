#include "usdlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "usdlab/discretization.hpp"
#include "usdlab/entropy.hpp"
#include "usdlab/errors.hpp"
#include "usdlab/parallel.hpp"
#include "usdlab/random.hpp"
#include "usdlab/recovery.hpp"
#include "usdlab/serialization.hpp"

namespace usdlab {

using detail::Json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::usd_search: return "usd_search";
    case ExperimentKind::usd_verify: return "usd_verify";
    case ExperimentKind::entropy_profile: return "entropy_profile";
    case ExperimentKind::er_rate: return "er_rate";
    case ExperimentKind::recovery_rate: return "recovery_rate";
    case ExperimentKind::chaining_compare: return "chaining_compare";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::usd_search, ExperimentKind::usd_verify,
                 ExperimentKind::entropy_profile, ExperimentKind::er_rate,
                 ExperimentKind::recovery_rate, ExperimentKind::chaining_compare})
    if (to_string(k) == name) return k;
  throw ConfigError("kind", "unknown experiment kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Typed access to one JSON object; remembers which keys were read so the
// leftovers can be reported as unknown fields.
class Reader {
 public:
  Reader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  std::string path(const std::string& key) const { return join_path(path_, key); }
  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ConfigError(path(key), "expected a nonnegative integer");
    return v.get<std::size_t>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::uint64_t seed(const std::string& key) {
    const Json& v = obj_.at(key);
    seen_.insert(key);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
      return v.get<std::uint64_t>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      try {
        std::size_t used = 0;
        const auto x = std::stoull(s, &used, 0);
        if (used == s.size()) return x;
      } catch (const std::exception&) {
      }
    }
    throw ConfigError(path(key), "expected an unsigned 64-bit integer");
  }
  template <typename T, typename F>
  std::vector<T> list(const std::string& key, F&& element) {
    if (!has(key)) return {};
    const Json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(element(v[i], path(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::size_t as_count(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::int64_t as_integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

template <typename T>
void require_increasing(const std::vector<T>& xs, const std::string& path) {
  if (xs.empty()) throw ConfigError(path, "sweep must be nonempty");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i - 1] < xs[i]))
      throw ConfigError(path + "[" + std::to_string(i) + "]", "sweep must be strictly increasing");
}

bool needs_seed(const ExperimentConfig& c) {
  return c.kind != ExperimentKind::usd_verify || c.points.type == "uniform";
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  Reader r(doc, "");
  ExperimentConfig c;
  if (!r.has("kind")) throw ConfigError("kind", "missing required field");
  c.kind = experiment_kind_from_string(r.string("kind", ""));
  if (r.has("seed")) c.seed = r.seed("seed");
  c.output = r.string("output", c.output);
  c.threads = r.count("threads", default_thread_count());
  c.strict = r.boolean("strict", c.strict);
  c.svg = r.boolean("svg", c.svg);
  c.grid_level = static_cast<int>(r.integer("grid_level", c.grid_level));
  c.p = r.number("p", c.p);

  if (r.has("dictionary")) {
    Reader d(r.raw("dictionary"), "dictionary");
    c.dictionary.type = d.string("type", c.dictionary.type);
    c.dictionary.N = d.integer("N", c.dictionary.N);
    c.dictionary.d = d.count("d", c.dictionary.d);
    c.dictionary.indices = d.list<std::vector<std::int64_t>>(
        "indices", [](const Json& v, const std::string& path) {
          if (!v.is_array()) throw ConfigError(path, "expected an array of integers");
          std::vector<std::int64_t> k;
          for (std::size_t i = 0; i < v.size(); ++i)
            k.push_back(as_integer(v[i], path + "[" + std::to_string(i) + "]"));
          return k;
        });
    d.finish();
  }

  c.v = r.count("v", c.v);
  c.subsets = r.list<std::vector<std::size_t>>("subsets", [](const Json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of indices");
    std::vector<std::size_t> J;
    for (std::size_t i = 0; i < v.size(); ++i)
      J.push_back(as_count(v[i], path + "[" + std::to_string(i) + "]"));
    return J;
  });
  if (r.has("m")) {
    if (r.has("m_sweep")) throw ConfigError("m", "give either m or m_sweep, not both");
    c.m_sweep = {r.count("m", 0)};
  } else {
    c.m_sweep = r.list<std::size_t>("m_sweep", as_count);
    if (r.has("m_sweep") && c.m_sweep.empty()) throw ConfigError("m_sweep", "sweep must be nonempty");
  }
  c.max_trials = r.count("max_trials", c.max_trials);
  c.epsilon = r.number("epsilon", c.epsilon);
  c.subset_cap = r.number("subset_cap", c.subset_cap);
  if (r.has("verification")) {
    Reader v(r.raw("verification"), "verification");
    c.starts = v.count("starts", c.starts);
    c.gradient_tol = v.number("gradient_tol", c.gradient_tol);
    c.max_iters = v.count("max_iters", c.max_iters);
    c.verification_grid_level = static_cast<int>(v.integer("grid_level", c.verification_grid_level));
    v.finish();
  }
  if (r.has("points")) {
    Reader pt(r.raw("points"), "points");
    c.points.type = pt.string("type", c.points.type);
    c.points.m = pt.count("m", c.points.m);
    c.points.draw_index = pt.count("draw_index", c.points.draw_index);
    c.points.per_dim = pt.integer("per_dim", c.points.per_dim);
    c.points.path = pt.string("path", c.points.path);
    c.points.points = pt.list<std::vector<double>>("points", [](const Json& v, const std::string& path) {
      if (!v.is_array()) throw ConfigError(path, "expected an array of coordinates");
      std::vector<double> x;
      for (std::size_t i = 0; i < v.size(); ++i)
        x.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
      return x;
    });
    pt.finish();
  }

  if (r.has("class")) {
    Reader cl(r.raw("class"), "class");
    c.class_size = cl.count("size", c.class_size);
    c.max_terms = cl.count("max_terms", c.max_terms);
    cl.finish();
  }
  c.n_max = static_cast<int>(r.integer("n_max", c.n_max));
  if (r.has("fit")) {
    Reader f(r.raw("fit"), "fit");
    c.fit_min = static_cast<int>(f.integer("min", c.fit_min));
    c.fit_max = static_cast<int>(f.integer("max", c.fit_max));
    f.finish();
  }
  c.mc_trials = r.count("mc_trials", c.mc_trials);
  if (r.has("sup_bound")) c.sup_bound = r.number("sup_bound", 1.0);

  c.a_values = r.list<double>("a_values", as_number);
  c.b = r.number("b", c.b);
  c.d = r.count("d", c.d);
  c.max_level = static_cast<int>(r.integer("max_level", c.max_level));
  c.terms_per_level = r.count("terms_per_level", c.terms_per_level);
  c.instances = r.count("instances", c.instances);
  c.method = r.string("method", c.method);
  c.v_sweep = r.list<std::size_t>("v_sweep", as_count);
  c.n_sweep = r.list<int>("n_sweep", [](const Json& v, const std::string& path) {
    return static_cast<int>(as_integer(v, path));
  });
  c.oversampling = r.number("oversampling", c.oversampling);
  c.slope_tolerance = r.number("slope_tolerance", c.slope_tolerance);
  if (r.has("slope_range")) {
    const auto range = r.list<double>("slope_range", as_number);
    if (range.size() != 2) throw ConfigError("slope_range", "expected [low, high]");
    c.slope_range = std::make_pair(range[0], range[1]);
  }
  r.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  if (needs_seed(c) && !c.seed) throw ConfigError("seed", "randomized experiments need an explicit seed");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw ConfigError("p", "must be a finite number >= 1");
  if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
  if (c.grid_level < 1 || c.grid_level > 24) throw ConfigError("grid_level", "must lie in [1, 24]");
  const auto& dict = c.dictionary;
  if (dict.type != "exponentials_1d" && dict.type != "hyperbolic_cross" && dict.type != "frequencies")
    throw ConfigError("dictionary.type", "expected exponentials_1d, hyperbolic_cross or frequencies");
  if (dict.type != "frequencies" && dict.N < 1) throw ConfigError("dictionary.N", "must be >= 1");
  if (dict.d < 1) throw ConfigError("dictionary.d", "must be >= 1");
  if (dict.type == "frequencies" && dict.indices.empty())
    throw ConfigError("dictionary.indices", "must be nonempty");

  switch (c.kind) {
    case ExperimentKind::usd_search:
      require_increasing(c.m_sweep, "m_sweep");
      if (c.m_sweep.front() < 1) throw ConfigError("m_sweep[0]", "m must be >= 1");
      if (c.max_trials < 1) throw ConfigError("max_trials", "must be >= 1");
      [[fallthrough]];
    case ExperimentKind::usd_verify:
      if (c.subsets.empty() && c.v < 1) throw ConfigError("v", "must be >= 1");
      if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
      if (c.starts < 1) throw ConfigError("verification.starts", "must be >= 1");
      if (c.kind == ExperimentKind::usd_verify) {
        const auto& pt = c.points;
        if (pt.type == "uniform" && pt.m < 1) throw ConfigError("points.m", "must be >= 1");
        else if (pt.type == "equispaced" && pt.per_dim < 1)
          throw ConfigError("points.per_dim", "must be >= 1");
        else if (pt.type == "file" && pt.path.empty()) throw ConfigError("points.path", "missing");
        else if (pt.type == "explicit" && pt.points.empty())
          throw ConfigError("points.points", "must be nonempty");
        else if (pt.type != "uniform" && pt.type != "equispaced" && pt.type != "file" &&
                 pt.type != "explicit")
          throw ConfigError("points.type", "expected uniform, equispaced, file or explicit");
      }
      break;
    case ExperimentKind::entropy_profile:
      if (c.class_size < 1) throw ConfigError("class.size", "must be >= 1");
      if (c.n_max < 1) throw ConfigError("n_max", "must be >= 1");
      if (!(c.fit_min >= 1 && c.fit_min < c.fit_max)) throw ConfigError("fit", "need 1 <= min < max");
      break;
    case ExperimentKind::er_rate:
    case ExperimentKind::chaining_compare:
      require_increasing(c.m_sweep, "m_sweep");
      if (c.m_sweep.front() < 1) throw ConfigError("m_sweep[0]", "m must be >= 1");
      if (c.class_size < 1) throw ConfigError("class.size", "must be >= 1");
      if (c.mc_trials < 2) throw ConfigError("mc_trials", "must be >= 2");
      break;
    case ExperimentKind::recovery_rate:
      require_increasing(c.a_values, "a_values");
      if (!(c.a_values.front() > 0.0)) throw ConfigError("a_values[0]", "must be positive");
      if (c.method != "wcga" && c.method != "oracle" && c.method != "block")
        throw ConfigError("method", "expected wcga, oracle or block");
      if (c.method == "block") {
        require_increasing(c.n_sweep, "n_sweep");
        if (c.n_sweep.front() < 0) throw ConfigError("n_sweep[0]", "must be >= 0");
      } else {
        require_increasing(c.v_sweep, "v_sweep");
        if (c.v_sweep.front() < 1) throw ConfigError("v_sweep[0]", "must be >= 1");
      }
      if (c.max_level < 0 || c.max_level > 20) throw ConfigError("max_level", "must lie in [0, 20]");
      if (c.instances < 1) throw ConfigError("instances", "must be >= 1");
      if (!(c.oversampling > 0.0)) throw ConfigError("oversampling", "must be positive");
      if (c.d < 1) throw ConfigError("d", "must be >= 1");
      break;
  }
  if (c.slope_range && !(c.slope_range->first < c.slope_range->second))
    throw ConfigError("slope_range", "need low < high");
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  double number(std::size_t row, const std::string& name) const {
    return std::strtod(rows[row][column(name)].c_str(), nullptr);
  }
  const std::string& text(std::size_t row, const std::string& name) const {
    return rows[row][column(name)];
  }
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split(line, ',');
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) throw InvalidArgument("ragged CSV row");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw InvalidArgument("CSV is empty");
  return t;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { add(header); }
  void add(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }
  const std::string& str() const { return out_; }

 private:
  std::size_t columns_;
  std::string out_;
};

std::string num(double x) { return format_double(x); }
std::string num(std::size_t x) { return std::to_string(x); }

std::string join_subset(const std::vector<std::size_t>& J) {
  std::string s;
  for (std::size_t i = 0; i < J.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(J[i]);
  }
  return s;
}

}  // namespace

RateFit fit_csv_columns(std::string_view csv, const std::string& x, const std::string& y) {
  const CsvTable t = parse_csv(csv);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) pts.emplace_back(t.number(i, x), t.number(i, y));
  return fit_rate(pts);
}

// ---------------------------------------------------------------------------
// Runners

namespace {

Dictionary make_dictionary(const DictionarySpec& spec) {
  if (spec.type == "exponentials_1d") return exponential_dictionary_1d(static_cast<std::size_t>(spec.N));
  if (spec.type == "hyperbolic_cross") return Dictionary::exponentials(hyperbolic_cross(spec.N, spec.d));
  std::vector<Frequency> idx;
  for (const auto& k : spec.indices) {
    if (k.size() != spec.d) throw ConfigError("dictionary.indices", "index length differs from d");
    idx.emplace_back(k);
  }
  try {
    return Dictionary::exponentials(FrequencySet(spec.d, std::move(idx)));
  } catch (const InvalidArgument& e) {
    throw ConfigError("dictionary.indices", e.what());
  }
}

SubspaceCollection make_collection(const ExperimentConfig& c, const Dictionary& D) {
  if (!c.subsets.empty()) {
    try {
      return SubspaceCollection::listed(D, c.subsets);
    } catch (const InvalidArgument& e) {
      throw ConfigError("subsets", e.what());
    }
  }
  if (c.v > D.size()) throw ConfigError("v", "exceeds the dictionary size");
  return SubspaceCollection::all(D, c.v);
}

RatioOptions ratio_options(const ExperimentConfig& c) {
  RatioOptions o;
  o.starts = c.starts;
  o.gradient_tol = c.gradient_tol;
  o.max_iters = c.max_iters;
  o.grid_level = c.verification_grid_level;
  o.seed = c.seed.value_or(0);
  o.threads = c.threads;
  o.epsilon = c.epsilon;
  o.subset_cap = c.subset_cap;
  return o;
}

PointSet make_points(const ExperimentConfig& c, std::size_t dim) {
  const auto& pt = c.points;
  if (pt.type == "uniform") return PointSet::uniform(pt.m, dim, *c.seed, pt.draw_index);
  if (pt.type == "equispaced") return PointSet::equispaced(pt.per_dim, dim);
  if (pt.type == "explicit") return PointSet(pt.points);
  std::ifstream in(pt.path);
  if (!in) throw ConfigError("points.path", "cannot read " + pt.path);
  std::stringstream ss;
  ss << in.rdbuf();
  return point_set_from_json(ss.str());
}

std::vector<TrigPolynomial> a1_class(const Dictionary& D, std::size_t size, std::uint64_t seed,
                                     std::size_t max_terms) {
  const Eigen::MatrixXcd coeffs = random_a1_coefficients(D.size(), size, seed, max_terms);
  std::vector<std::size_t> all(D.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<TrigPolynomial> W;
  for (Eigen::Index r = 0; r < coeffs.cols(); ++r) W.push_back(D.combine(all, coeffs.col(r)));
  return W;
}

ExperimentResult run_usd_search(const ExperimentConfig& c) {
  const Dictionary D = make_dictionary(c.dictionary);
  const SubspaceCollection coll = make_collection(c, D);
  const RatioOptions opts = ratio_options(c);
  ExperimentResult res;
  CsvWriter csv({"m", "trial", "pass", "min_ratio", "max_ratio", "worst_deviation",
                 "one_sided_constant", "heuristic"});
  for (std::size_t m : c.m_sweep) {
    std::optional<PointSet> best_points;
    UsdCertificate best;
    for (std::size_t trial = 0; trial < c.max_trials; ++trial) {
      PointSet xi = PointSet::uniform(m, D.dim(), *c.seed, trial);
      UsdCertificate cert = check_usd(xi, coll, c.p, opts);
      res.heuristic = res.heuristic || cert.heuristic;
      csv.add({num(m), num(trial), cert.pass ? "1" : "0", num(cert.min_ratio), num(cert.max_ratio),
               num(cert.worst_deviation), num(cert.one_sided_constant), cert.heuristic ? "1" : "0"});
      if (cert.pass || !best_points || cert.worst_deviation < best.worst_deviation) {
        best_points = std::move(xi);
        best = std::move(cert);
      }
      if (best.pass) break;
    }
    res.artifacts["points_m" + std::to_string(m) + ".json"] = to_json(*best_points);
    res.artifacts["certificate_m" + std::to_string(m) + ".json"] = to_json(best);
  }
  res.csv = csv.str();
  return res;
}

ExperimentResult run_usd_verify(const ExperimentConfig& c) {
  const Dictionary D = make_dictionary(c.dictionary);
  const SubspaceCollection coll = make_collection(c, D);
  const PointSet xi = make_points(c, D.dim());
  const UsdCertificate cert = check_usd(xi, coll, c.p, ratio_options(c));
  ExperimentResult res;
  res.heuristic = cert.heuristic;
  CsvWriter csv({"subset_index", "subset", "min_ratio", "max_ratio", "converged", "heuristic"});
  for (std::size_t i = 0; i < cert.entries.size(); ++i) {
    const auto& e = cert.entries[i];
    csv.add({num(i), join_subset(e.subset), num(e.min_ratio), num(e.max_ratio),
             e.converged ? "1" : "0", cert.heuristic ? "1" : "0"});
  }
  res.csv = csv.str();
  res.artifacts["certificate.json"] = to_json(cert);
  res.artifacts["points.json"] = to_json(xi);
  return res;
}

ExperimentResult run_entropy(const ExperimentConfig& c) {
  const Dictionary D = make_dictionary(c.dictionary);
  const Eigen::MatrixXcd coeffs = random_a1_coefficients(D.size(), c.class_size, *c.seed, c.max_terms);
  const SampledClass S = SampledClass::from_combinations(D, coeffs, c.grid_level);
  const EntropyProfile profile = entropy_numbers(S, c.n_max);
  ExperimentResult res;
  res.csv = entropy_profile_csv(profile);
  res.artifacts["profile.json"] = to_json(profile);
  return res;
}

ExperimentResult run_er_rate(const ExperimentConfig& c) {
  const Dictionary D = make_dictionary(c.dictionary);
  const auto W = a1_class(D, c.class_size, *c.seed, c.max_terms);
  ExperimentResult res;
  CsvWriter csv({"m", "trial", "error"});
  for (std::size_t m : c.m_sweep) {
    const auto errors = discretization_error_trials(W, c.p, m, c.mc_trials, derive_seed(*c.seed, m),
                                                    c.grid_level, c.threads);
    for (std::size_t t = 0; t < errors.size(); ++t) csv.add({num(m), num(t), num(errors[t])});
  }
  res.csv = csv.str();
  return res;
}

ExperimentResult run_chaining(const ExperimentConfig& c) {
  const Dictionary D = make_dictionary(c.dictionary);
  const auto W = a1_class(D, c.class_size, *c.seed, c.max_terms);
  const SampledClass S = SampledClass::from_polynomials(W, c.grid_level);
  int n_max = c.n_max;
  while ((std::size_t{1} << std::min(n_max, 62)) < S.size()) ++n_max;
  const EntropyProfile profile = entropy_numbers(S, n_max);
  const double M = c.sup_bound.value_or(D.uniform_bound());
  ExperimentResult res;
  CsvWriter csv({"m", "mc_mean", "mc_stderr", "entropy_sum", "dyadic_sum", "chaining_bound"});
  for (std::size_t m : c.m_sweep) {
    const MonteCarloEstimate mc = expected_sup_estimate(W, c.p, m, c.mc_trials, derive_seed(*c.seed, m),
                                                        c.grid_level, c.threads);
    csv.add({num(m), num(mc.mean), num(mc.standard_error), num(entropy_sum(profile, c.p, m)),
             num(dyadic_entropy_sum(profile, c.p, m)), num(chaining_bound(profile, c.p, M, m))});
  }
  res.csv = csv.str();
  res.artifacts["profile.json"] = to_json(profile);
  return res;
}

ExperimentResult run_recovery(const ExperimentConfig& c) {
  std::vector<Frequency> freqs;
  for (int j = 0; j <= c.max_level; ++j)
    for (const auto& k : dyadic_level_set(j, c.d)) freqs.push_back(k);
  const Dictionary D = Dictionary::exponentials(FrequencySet(c.d, std::move(freqs)));
  const bool block = c.method == "block";
  const std::size_t sweep_len = block ? c.n_sweep.size() : c.v_sweep.size();

  struct Task {
    std::size_t a_index, instance;
  };
  std::vector<Task> tasks;
  for (std::size_t ai = 0; ai < c.a_values.size(); ++ai)
    for (std::size_t i = 0; i < c.instances; ++i) tasks.push_back({ai, i});
  std::vector<std::vector<std::vector<std::string>>> rows(tasks.size());

  parallel_for(tasks.size(), c.threads, [&](std::size_t t) {
    const auto [ai, inst] = tasks[t];
    const double a = c.a_values[ai];
    const std::uint64_t fseed = derive_seed(derive_seed(*c.seed, ai), inst);
    SmoothnessBudget budget{a, c.b, c.d, c.max_level};
    SupportRule rule;
    rule.max_terms_per_level = c.terms_per_level;
    const WabElement w = wab_element(budget, rule, fseed);
    for (std::size_t s = 0; s < sweep_len; ++s) {
      RecoveryOptions o;
      o.compute_oracle = false;
      o.grid_level = c.grid_level;
      std::size_t v = 0;
      std::size_t key = 0;
      if (block) {
        o.method = RecoveryMethod::block;
        o.block_n = c.n_sweep[s];
        o.block_a = a;
        key = static_cast<std::size_t>(c.n_sweep[s]);
        v = std::size_t{1} << std::min(c.n_sweep[s], 40);
      } else {
        o.method = c.method == "oracle" ? RecoveryMethod::oracle : RecoveryMethod::wcga;
        v = c.v_sweep[s];
        key = v;
      }
      const auto m = static_cast<std::size_t>(std::ceil(c.oversampling * static_cast<double>(v)));
      const PointSet xi = PointSet::uniform(m, c.d, derive_seed(fseed, 1000003 + key), 0);
      const RecoveryReport rep = recovery_pipeline(w.f, D, xi, v, c.p, o, std::nullopt);
      rows[t].push_back({format_double(a), num(inst), num(key), num(rep.terms), num(m),
                         num(rep.continuous_error)});
    }
  });
  ExperimentResult res;
  CsvWriter csv({"a", "instance", block ? "n" : "v", "terms", "m", "error"});
  for (const auto& task_rows : rows)
    for (const auto& row : task_rows) csv.add(row);
  res.csv = csv.str();
  return res;
}

// ---------------------------------------------------------------------------
// Summaries (pure functions of config + CSV)

struct Group {
  double key = 0.0;
  std::vector<double> values;
  std::vector<double> aux;
};

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void add_slope_assertion(Summary& s, const std::string& name, const RateFit& fit, double lo,
                         double hi) {
  const bool ok = fit.slope >= lo && fit.slope <= hi;
  s.assertions.push_back({name, ok,
                          "slope " + fmt(fit.slope) + " in [" + fmt(lo) + ", " + fmt(hi) + "]"});
}

Json fit_json(const RateFit& f) { return detail::to_value(f); }

}  // namespace

Summary summarize(const ExperimentConfig& c, std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  Summary s;
  Json table = Json::array();

  switch (c.kind) {
    case ExperimentKind::usd_search: {
      for (std::size_t m : c.m_sweep) {
        std::size_t trials = 0;
        std::optional<std::size_t> success;
        bool heuristic = false;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          if (static_cast<std::size_t>(t.number(i, "m")) != m) continue;
          ++trials;
          heuristic = heuristic || t.text(i, "heuristic") == "1";
          best = std::min(best, t.number(i, "worst_deviation"));
          if (t.text(i, "pass") == "1" && !success)
            success = static_cast<std::size_t>(t.number(i, "trial"));
        }
        table.push_back({{"m", m},
                         {"trials", trials},
                         {"found", success.has_value()},
                         {"draw_index", success ? Json(*success) : Json(nullptr)},
                         {"best_worst_deviation", best},
                         {"heuristic", heuristic}});
        if (m == c.m_sweep.back())
          s.assertions.push_back({"usd set found at m=" + std::to_string(m), success.has_value(),
                                  success ? "passed at draw " + std::to_string(*success)
                                          : "no certified set in " + std::to_string(trials) + " draws"});
      }
      break;
    }
    case ExperimentKind::usd_verify: {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        lo = std::min(lo, t.number(i, "min_ratio"));
        hi = std::max(hi, t.number(i, "max_ratio"));
      }
      const bool ok = lo >= 1.0 - c.epsilon && hi <= 1.0 + c.epsilon;
      table.push_back({{"subspaces", t.rows.size()},
                       {"min_ratio", lo},
                       {"max_ratio", hi},
                       {"one_sided_constant", lo > 0.0 ? std::pow(lo, -1.0 / c.p)
                                                       : std::numeric_limits<double>::infinity()}});
      s.assertions.push_back({"ratios within [1-eps, 1+eps]", ok,
                              "min " + fmt(lo) + ", max " + fmt(hi) + ", eps " + fmt(c.epsilon)});
      break;
    }
    case ExperimentKind::entropy_profile: {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double n = t.number(i, "n");
        const double e = t.number(i, "eps_n");
        if (n >= c.fit_min && n <= c.fit_max && e > 0.0) pts.emplace_back(n, e);
      }
      table.push_back({{"fit_points", pts.size()}});
      if (pts.size() >= 3) {
        const RateFit fit = fit_rate(pts);
        s.fits.emplace_back("eps_n_vs_n", fit);
        if (c.slope_range)
          add_slope_assertion(s, "entropy decay slope", fit, c.slope_range->first,
                              c.slope_range->second);
      } else if (c.slope_range) {
        s.assertions.push_back({"entropy decay slope", false,
                                "fewer than 3 positive eps_n inside the fit window"});
      }
      break;
    }
    case ExperimentKind::er_rate: {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t m : c.m_sweep) {
        std::vector<double> errs;
        for (std::size_t i = 0; i < t.rows.size(); ++i)
          if (static_cast<std::size_t>(t.number(i, "m")) == m) errs.push_back(t.number(i, "error"));
        const double mu = mean(errs);
        table.push_back({{"m", m}, {"mean", mu}, {"stderr", stderr_of(errs)}, {"trials", errs.size()}});
        pts.emplace_back(static_cast<double>(m), mu);
      }
      if (pts.size() >= 3) {
        const RateFit fit = fit_rate(pts);
        s.fits.emplace_back("mean_error_vs_m", fit);
        if (c.slope_range)
          add_slope_assertion(s, "discretization error slope", fit, c.slope_range->first,
                              c.slope_range->second);
      } else if (c.slope_range) {
        s.assertions.push_back({"discretization error slope", false, "fewer than 3 sweep points"});
      }
      break;
    }
    case ExperimentKind::chaining_compare: {
      bool remark_ok = true;
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double dy = t.number(i, "dyadic_sum");
        const double es = t.number(i, "entropy_sum");
        remark_ok = remark_ok && dy <= 2.0 * std::sqrt(2.0) * es * (1.0 + 1e-12);
        const double mu = t.number(i, "mc_mean");
        const double cb = t.number(i, "chaining_bound");
        table.push_back({{"m", t.number(i, "m")},
                         {"mc_mean", mu},
                         {"chaining_bound", cb},
                         {"ratio", cb > 0.0 ? mu / cb : 0.0}});
        if (mu > 0.0) pts.emplace_back(t.number(i, "m"), mu);
      }
      if (pts.size() >= 3) s.fits.emplace_back("mc_mean_vs_m", fit_rate(pts));
      s.assertions.push_back({"dyadic entropy sum <= 2 sqrt(2) entropy sum", remark_ok,
                              remark_ok ? "holds at every m" : "violated"});
      if (c.slope_range && pts.size() >= 3)
        add_slope_assertion(s, "Monte-Carlo slope", s.fits.back().second, c.slope_range->first,
                            c.slope_range->second);
      break;
    }
    case ExperimentKind::recovery_rate: {
      const std::string key = c.method == "block" ? "n" : "v";
      for (double a : c.a_values) {
        std::map<double, Group> groups;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          if (std::abs(t.number(i, "a") - a) > 1e-12) continue;
          Group& g = groups[t.number(i, key)];
          g.values.push_back(std::log2(t.number(i, "error")));
          g.aux.push_back(t.number(i, "terms"));
        }
        std::vector<std::pair<double, double>> pts;
        for (const auto& [k, g] : groups) {
          const double err = std::exp2(mean(g.values));
          const double v = mean(g.aux);
          table.push_back({{"a", a}, {key, k}, {"mean_terms", v}, {"geometric_mean_error", err}});
          pts.emplace_back(v, err);
        }
        const std::string name = "a=" + fmt(a);
        if (pts.size() >= 3) {
          const RateFit fit = fit_rate(pts);
          s.fits.emplace_back("error_vs_v " + name, fit);
          const double target = -(a + 0.5);
          add_slope_assertion(s, "recovery slope " + name, fit, target - c.slope_tolerance,
                              target + c.slope_tolerance);
        } else {
          s.assertions.push_back({"recovery slope " + name, false, "fewer than 3 sweep points"});
        }
      }
      break;
    }
  }

  for (const auto& a : s.assertions) s.pass = s.pass && a.pass;
  Json fits = Json::object();
  for (const auto& [name, f] : s.fits) fits[name] = fit_json(f);
  Json asserts = Json::array();
  for (const auto& a : s.assertions)
    asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  Json doc = {{"kind", to_string(c.kind)},
              {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
              {"p", c.p},
              {"pass", s.pass},
              {"assertions", asserts},
              {"fits", fits},
              {"table", table}};
  s.json = detail::dump(doc) + "\n";
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::string make_svg(const ExperimentConfig& c, const std::string& csv_text) {
  const CsvTable t = parse_csv(csv_text);
  std::vector<SvgSeries> series;
  switch (c.kind) {
    case ExperimentKind::er_rate: {
      SvgSeries s{"mean error", {}};
      for (std::size_t m : c.m_sweep) {
        std::vector<double> errs;
        for (std::size_t i = 0; i < t.rows.size(); ++i)
          if (static_cast<std::size_t>(t.number(i, "m")) == m) errs.push_back(t.number(i, "error"));
        if (mean(errs) > 0.0) s.points.emplace_back(static_cast<double>(m), mean(errs));
      }
      series.push_back(s);
      return svg_loglog_chart("discretization error", "m", "E sup error", series);
    }
    case ExperimentKind::entropy_profile: {
      SvgSeries s{"eps_n", {}};
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (t.number(i, "n") >= 1 && t.number(i, "eps_n") > 0)
          s.points.emplace_back(t.number(i, "n"), t.number(i, "eps_n"));
      series.push_back(s);
      return svg_loglog_chart("entropy profile", "n", "eps_n", series);
    }
    case ExperimentKind::chaining_compare: {
      SvgSeries mc{"Monte-Carlo mean", {}}, cb{"chaining bound", {}};
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.number(i, "mc_mean") > 0) mc.points.emplace_back(t.number(i, "m"), t.number(i, "mc_mean"));
        if (t.number(i, "chaining_bound") > 0)
          cb.points.emplace_back(t.number(i, "m"), t.number(i, "chaining_bound"));
      }
      series = {mc, cb};
      return svg_loglog_chart("chaining bound vs Monte-Carlo", "m", "error", series);
    }
    case ExperimentKind::recovery_rate: {
      const std::string key = c.method == "block" ? "n" : "v";
      for (double a : c.a_values) {
        std::map<double, Group> groups;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          if (std::abs(t.number(i, "a") - a) > 1e-12) continue;
          Group& g = groups[t.number(i, key)];
          g.values.push_back(std::log2(t.number(i, "error")));
          g.aux.push_back(t.number(i, "terms"));
        }
        SvgSeries s{"a=" + fmt(a), {}};
        for (const auto& [k, g] : groups) s.points.emplace_back(mean(g.aux), std::exp2(mean(g.values)));
        series.push_back(s);
      }
      return svg_loglog_chart("recovery error", "v", "L_p error", series);
    }
    default:
      return {};
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult res;
  switch (config.kind) {
    case ExperimentKind::usd_search: res = run_usd_search(config); break;
    case ExperimentKind::usd_verify: res = run_usd_verify(config); break;
    case ExperimentKind::entropy_profile: res = run_entropy(config); break;
    case ExperimentKind::er_rate: res = run_er_rate(config); break;
    case ExperimentKind::recovery_rate: res = run_recovery(config); break;
    case ExperimentKind::chaining_compare: res = run_chaining(config); break;
  }
  res.kind = config.kind;
  res.summary = summarize(config, res.csv);
  if (config.svg) res.svg = make_svg(config, res.csv);
  return res;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  put("results.csv", result.csv);
  put("summary.json", result.summary.json);
  for (const auto& [name, text] : result.artifacts) put(name, text);
  if (!result.svg.empty()) put("plot.svg", result.svg);
}

int exit_code(const ExperimentResult& result, bool strict) {
  if (!result.summary.pass) return 1;
  if (strict && result.heuristic) return 1;
  return 0;
}

std::string svg_loglog_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<SvgSeries>& series) {
  const double W = 640, H = 420, L = 70, R = 150, T = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!(x > 0 && y > 0)) continue;
      x0 = std::min(x0, std::log2(x));
      x1 = std::max(x1, std::log2(x));
      y0 = std::min(y0, std::log2(y));
      y1 = std::max(y1, std::log2(y));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x1 = x0 + 1;
  if (y1 - y0 < 1e-9) y1 = y0 + 1;
  auto px = [&](double x) { return L + (std::log2(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (std::log2(y) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
    << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int tick = static_cast<int>(std::ceil(x0)); tick <= static_cast<int>(std::floor(x1)); ++tick) {
    const double x = px(std::exp2(tick));
    o << "<line x1=\"" << x << "\" y1=\"" << H - B << "\" x2=\"" << x << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\">2^" << tick << "</text>\n";
  }
  for (int tick = static_cast<int>(std::ceil(y0)); tick <= static_cast<int>(std::floor(y1)); ++tick) {
    const double y = py(std::exp2(tick));
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
      << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\">2^" << tick << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << x_label << " (log2)</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << y_label << " (log2)</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 5];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points)
      if (x > 0 && y > 0) o << px(x) << "," << py(y) << " ";
    o << "\"/>\n";
    for (const auto& [x, y] : series[i].points)
      if (x > 0 && y > 0)
        o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (i + 1) << "\" fill=\"" << color << "\">"
      << series[i].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace usdlab
