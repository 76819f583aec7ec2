#include "qlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qlab::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw InputError(where + ": " + what); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

int positive_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<long long>() > 64) {
    fail(where, "expected an integer between 1 and 64");
  }
  return j.get<int>();
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "not finite");
  return x;
}

Complex complex(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected an [re, im] pair");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

CVector vector(const Json& j, int dim, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [re, im] pairs");
  if (static_cast<int>(j.size()) != dim) {
    fail(where, "has " + std::to_string(j.size()) + " entries, expected " + std::to_string(dim));
  }
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = complex(j[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
  return v;
}

CMatrix matrix(const Json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    fail(where, "expected " + std::to_string(rows) + " rows");
  }
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    m.row(r) = vector(j[static_cast<std::size_t>(r)], cols, row_where).transpose();
  }
  return m;
}

HermitianOp hermitian(const Json& j, int dim, const std::string& where) {
  try {
    return HermitianOp(matrix(j, dim, dim, where));
  } catch (const InputError& e) {
    if (std::string(e.what()).rfind(where, 0) == 0) throw;
    fail(where, e.what());
  }
}

std::vector<PureState> states(const Json& j, const std::string& where, int& dim) {
  dim = positive_int(field(j, "dim", where), where + ".dim");
  const Json& list = field(j, "states", where);
  if (!list.is_array() || list.empty()) fail(where + ".states", "expected a nonempty array");
  std::vector<PureState> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = where + ".states[" + std::to_string(i) + "]";
    const CVector v = vector(list[i], dim, w);
    if (std::abs(v.norm() - 1.0) > 1e-9) fail(w, "norm differs from 1 by more than 1e-9");
    out.emplace_back(v);
  }
  return out;
}

}  // namespace

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

Ensemble parse_ensemble(const Json& j, const std::string& where) {
  int dim = 0;
  std::vector<PureState> s = states(j, where, dim);
  std::vector<double> w;
  auto it = j.find("weights");
  if (it == j.end() || it->is_null()) {
    w.assign(s.size(), 1.0 / static_cast<double>(s.size()));
  } else {
    if (!it->is_array() || it->size() != s.size()) fail(where + ".weights", "expected one weight per state");
    for (std::size_t i = 0; i < it->size(); ++i) w.push_back(number((*it)[i], where + ".weights[" + std::to_string(i) + "]"));
  }
  try {
    return Ensemble(std::move(w), std::move(s));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

Ensemble load_ensemble(const std::string& path) { return parse_ensemble(load_json(path), path); }

CpMap parse_channel(const Json& j) {
  const std::string where = "channel";
  const Json& rep = field(j, "representation", where);
  if (!rep.is_string()) fail(where + ".representation", "expected \"kraus\" or \"holevo\"");
  const int in_dim = positive_int(field(j, "in_dim", where), where + ".in_dim");
  const int out_dim = positive_int(field(j, "out_dim", where), where + ".out_dim");
  const std::string kind = rep.get<std::string>();
  if (kind == "kraus") {
    const Json& ops = field(j, "operators", where);
    if (!ops.is_array() || ops.empty()) fail(where + ".operators", "expected a nonempty array");
    std::vector<CMatrix> list;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      list.push_back(matrix(ops[k], out_dim, in_dim, where + ".operators[" + std::to_string(k) + "]"));
    }
    return CpMap::kraus(in_dim, out_dim, std::move(list));
  }
  if (kind == "holevo") {
    const Json& terms = field(j, "terms", where);
    if (!terms.is_array() || terms.empty()) fail(where + ".terms", "expected a nonempty array");
    std::vector<HolevoTerm> list;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const std::string w = where + ".terms[" + std::to_string(k) + "]";
      list.push_back({hermitian(field(terms[k], "R", w), out_dim, w + ".R"),
                      hermitian(field(terms[k], "X", w), in_dim, w + ".X")});
    }
    try {
      return CpMap::holevo(in_dim, out_dim, std::move(list));
    } catch (const InputError& e) {
      fail(where, e.what());
    }
  }
  fail(where + ".representation", "unknown representation '" + kind + "'");
}

CpMap load_channel(const std::string& path) {
  try {
    return parse_channel(load_json(path));
  } catch (const InputError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) throw;
    throw InputError(path + ": " + e.what());
  }
}

JointFile parse_joint(const Json& j) {
  const std::string where = "joint";
  int d1 = 0;
  int d2 = 0;
  std::vector<PureState> s1 = states(field(j, "states1", where), where + ".states1", d1);
  std::vector<PureState> s2 = states(field(j, "states2", where), where + ".states2", d2);
  const Json& p = field(j, "p", where);
  const int rows = static_cast<int>(s1.size());
  const int cols = static_cast<int>(s2.size());
  if (!p.is_array() || static_cast<int>(p.size()) != rows) fail(where + ".p", "expected one row per state in states1");
  RMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Json& row = p[static_cast<std::size_t>(r)];
    const std::string w = where + ".p[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != cols) fail(w, "expected one entry per state in states2");
    for (int c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], w + "[" + std::to_string(c) + "]");
  }
  try {
    return JointFile{JointDistribution(m), std::move(s1), std::move(s2)};
  } catch (const InputError& e) {
    fail(where + ".p", e.what());
  }
}

JointFile load_joint(const std::string& path) {
  try {
    return parse_joint(load_json(path));
  } catch (const InputError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) throw;
    throw InputError(path + ": " + e.what());
  }
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(Complex(v(i))));
  return out;
}

Json to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(CVector(m.row(r).transpose())));
  return out;
}

Json to_json(const HermitianOp& a) { return to_json(a.matrix()); }
Json to_json(const PureState& s) { return to_json(s.amplitudes()); }

Json to_json(const Povm& p) {
  Json out = Json::array();
  for (const HermitianOp& e : p.elements()) out.push_back(to_json(e));
  return out;
}

Json to_json(const Ensemble& e) {
  Json states = Json::array();
  for (const PureState& s : e.states()) states.push_back(to_json(s));
  Json out;
  out["dim"] = e.dim();
  out["states"] = std::move(states);
  out["weights"] = e.weights();
  return out;
}

Json to_json(const EavesdropStrategy& s) {
  Json phis = Json::array();
  for (const PureState& p : s.resend_states) phis.push_back(to_json(p));
  Json out;
  out["povm"] = to_json(s.povm);
  out["resend_states"] = std::move(phis);
  return out;
}

Json to_json(const Certificate& c) {
  Json out;
  out["trace"] = c.trace();
  out["margin"] = c.margin;
  out["probe_count"] = c.probe_count;
  out["min_eigenvalue"] = min_eigenvalue(c.X);
  out["X"] = to_json(c.X);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace qlab::io
