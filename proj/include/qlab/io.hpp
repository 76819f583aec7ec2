#pragma once

// JSON interchange. Complex numbers are [re, im] pairs; matrices are arrays
// of rows. Every parse failure is an InputError naming the offending field.

#include "qlab/channels.hpp"
#include "qlab/fidelity.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qlab::io {

using Json = nlohmann::ordered_json;

/// Reads and parses a file; diagnostics carry the parser's line and column.
Json load_json(const std::string& path);

/// {dim, states: [[[re, im], ...], ...], weights?}. State norms must be within
/// 1e-9 of one (they are then normalized); weights default to uniform.
Ensemble parse_ensemble(const Json& j, const std::string& where = "ensemble");
Ensemble load_ensemble(const std::string& path);

/// {representation: "kraus", in_dim, out_dim, operators: [matrix, ...]} or
/// {representation: "holevo", in_dim, out_dim, terms: [{R, X}, ...]}.
CpMap parse_channel(const Json& j);
CpMap load_channel(const std::string& path);

/// {p: [[...], ...], states1: {dim, states}, states2: {dim, states}}.
struct JointFile {
  JointDistribution p;
  std::vector<PureState> states1;
  std::vector<PureState> states2;
};
JointFile parse_joint(const Json& j);
JointFile load_joint(const std::string& path);

Json to_json(Complex z);
Json to_json(const CVector& v);
Json to_json(const CMatrix& m);
Json to_json(const HermitianOp& a);
Json to_json(const PureState& s);
Json to_json(const Povm& p);
Json to_json(const Ensemble& e);
Json to_json(const EavesdropStrategy& s);
Json to_json(const Certificate& c);

/// Shortest round-trip decimal form (std::to_chars), locale independent.
std::string format_double(double x);

}  // namespace qlab::io
