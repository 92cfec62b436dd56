#pragma once

// JSON and CSV forms of the library's value types. Every floating-point
// number is written with 17 significant digits, so values round-trip.

#include <string>
#include <string_view>

#include "usdlab/discretization.hpp"
#include "usdlab/entropy.hpp"
#include "usdlab/point_set.hpp"
#include "usdlab/rate_fit.hpp"
#include "usdlab/recovery.hpp"
#include "usdlab/trig.hpp"

namespace usdlab {

/// {"dim": d, "terms": [[[k_1, ..., k_d], re, im], ...]} in lexicographic order.
std::string to_json(const TrigPolynomial& f);
/// {"dim": d, "indices": [[k_1, ..., k_d], ...]}, sorted.
std::string to_json(const FrequencySet& s);
std::string to_json(const PointSet& xi);
/// Includes the per-subset ratio arrays.
std::string to_json(const UsdCertificate& c);
std::string to_json(const UsdSearchResult& r);
std::string to_json(const EntropyProfile& e);
std::string to_json(const SparseApproximant& a);
std::string to_json(const RecoveryReport& r);
std::string to_json(const RateFit& f);

/// Accepts the object form above or a bare array of terms.
TrigPolynomial trig_polynomial_from_json(std::string_view text);
FrequencySet frequency_set_from_json(std::string_view text);
/// Accepts the object form or a bare array of points.
PointSet point_set_from_json(std::string_view text);

/// "n,eps_n" rows with a header line.
std::string entropy_profile_csv(const EntropyProfile& e);

/// %.17g; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double x);

}  // namespace usdlab
