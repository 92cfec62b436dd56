#pragma once

// Internal JSON plumbing shared by serialization and the experiment runner.
// Documents are built with nlohmann::json and written by a dumper that
// prints every double with 17 significant digits.

#include <string>

#include <json.hpp>

#include "usdlab/discretization.hpp"
#include "usdlab/entropy.hpp"
#include "usdlab/point_set.hpp"
#include "usdlab/rate_fit.hpp"
#include "usdlab/recovery.hpp"
#include "usdlab/trig.hpp"

namespace usdlab::detail {

using Json = nlohmann::ordered_json;

/// %.17g, with "null" for non-finite values.
std::string format_json_double(double x);
std::string dump(const Json& value, int indent = 2);

Json to_value(const TrigPolynomial& f);
Json to_value(const FrequencySet& s);
Json to_value(const PointSet& xi);
Json to_value(const UsdCertificate& c);
Json to_value(const EntropyProfile& e);
Json to_value(const SparseApproximant& a);
Json to_value(const RecoveryReport& r);
Json to_value(const RateFit& f);
Json to_value(const UsdSearchResult& r);

TrigPolynomial polynomial_from_value(const Json& v);
FrequencySet frequency_set_from_value(const Json& v);
PointSet point_set_from_value(const Json& v);

}  // namespace usdlab::detail
