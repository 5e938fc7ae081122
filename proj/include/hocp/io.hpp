#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hocp/drivers.hpp"
#include "hocp/model.hpp"
#include "hocp/problems.hpp"

namespace hocp {

using json = nlohmann::json;

/// C99 hexadecimal text ("%a"), which round-trips binary64 exactly.
std::string to_hex(double v);
double from_hex(const std::string& s);

json vec_to_json(const VecD& v);
VecD vec_from_json(const json& j);
json mat_to_json(const MatD& m);
MatD mat_from_json(const json& j, int rows, int cols);

/// Instance files. Matrices and vectors are stored row-major as hexfloat
/// strings. A file holding only seed/n/m is regenerated from the seed.
json sumabs_to_json(const SumAbsInstance& inst);
SumAbsInstance sumabs_from_json(const json& j);
json maxeig_to_json(const MaxEigInstance& inst, bool with_matrices = true);
MaxEigInstance maxeig_from_json(const json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Header of trace CSV files.
inline constexpr const char* kTraceHeader = "j,eps,f,dist,bundle_size,inner_iters,oracle_calls,boundary_active,gap,crit";

template <class Scalar>
void write_trace_csv(std::ostream& os, const std::vector<TraceRow<Scalar>>& rows) {
  os << kTraceHeader << '\n';
  for (const auto& r : rows) {
    os << r.j << ',' << format_scalar(r.eps) << ',' << format_scalar(r.f) << ',';
    if (r.dist) os << format_scalar(*r.dist);
    os << ',' << r.bundle_size << ',' << r.inner_iters << ',' << r.oracle_calls << ',' << (r.boundary_active ? 1 : 0)
       << ',' << format_scalar(r.gap) << ',' << format_scalar(r.crit) << '\n';
  }
}

/// One record per cut: center and tensor coefficients (decimal text for
/// bigfloat, hexfloat for binary64).
template <class Scalar>
json bundle_to_json(const Bundle<Scalar>& w) {
  auto num = [](const Scalar& v) -> json {
    if constexpr (std::is_same_v<Scalar, double>) return to_hex(v);
    else return format_scalar(v);
  };
  json cuts = json::array();
  for (const auto& c : w.cuts()) {
    json rec;
    json center = json::array();
    for (Eigen::Index i = 0; i < c.center().size(); ++i) center.push_back(num(c.center()[i]));
    rec["center"] = center;
    rec["flagged"] = c.flagged;
    json tensors = json::array();
    for (const auto& t : c.jet.tensors) {
      json coeffs = json::array();
      for (const auto& v : t.coeffs()) coeffs.push_back(num(v));
      tensors.push_back({{"order", t.order()}, {"coeffs", coeffs}});
    }
    rec["tensors"] = tensors;
    cuts.push_back(rec);
  }
  json region = json::array();
  for (Eigen::Index i = 0; i < w.region().center.size(); ++i) region.push_back(num(w.region().center[i]));
  return {{"dim", w.dim()},
          {"radius", num(w.region().radius)},
          {"norm", w.region().norm == Norm::Max ? "max" : "euclidean"},
          {"center", region},
          {"cuts", cuts}};
}

}  // namespace hocp
