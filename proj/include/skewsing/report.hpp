#pragma once

#include <string>

#include "skewsing/fisher.hpp"
#include "skewsing/inference.hpp"
#include "skewsing/reparam.hpp"

namespace skewsing {

// JSON renderings with sorted keys. Non-finite numbers become null and the
// enclosing object carries a "status" field saying so.

std::string to_json(const SingularityReport& r);
std::string to_json(const FisherMatrix3& m);
std::string to_json(const LMResult& r, double alpha);
std::string to_json(const MLEFit& f);
std::string to_json(const RateResult& r);
std::string to_json(const ThetaCP& c);
std::string to_json(const ThetaOriginal& t);
std::string to_json(const AppendixReport& r);

/// Per-replication estimates: header "n,replication,delta_hat,loglik,converged,failed".
std::string rate_raw_csv(const RateResult& r);

/// Shortest round-trip decimal for a finite double.
std::string format_double(double v);

}  // namespace skewsing
