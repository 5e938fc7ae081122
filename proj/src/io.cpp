#include "hocp/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hocp {

std::string to_hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double from_hex(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) throw config_error("bad floating-point text '" + s + "'");
  return v;
}

namespace {

double number_from_json(const json& j) {
  if (j.is_string()) return from_hex(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw config_error("expected a number or hexfloat string");
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw config_error(std::string("instance: missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

json vec_to_json(const VecD& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_hex(v[i]));
  return a;
}

VecD vec_from_json(const json& j) {
  if (!j.is_array()) throw config_error("expected an array of numbers");
  VecD v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i]);
  return v;
}

json mat_to_json(const MatD& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(to_hex(m(r, c)));
  return a;
}

MatD mat_from_json(const json& j, int rows, int cols) {
  const VecD flat = vec_from_json(j);
  if (flat.size() != static_cast<Eigen::Index>(rows) * cols) throw config_error("matrix has wrong number of entries");
  MatD m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<Eigen::Index>(r) * cols + c];
  return m;
}

json sumabs_to_json(const SumAbsInstance& inst) {
  json j;
  j["problem"] = "sumabs";
  j["seed"] = inst.seed;
  j["n"] = inst.n;
  j["m"] = inst.m;
  j["lambda"] = vec_to_json(inst.lambda);
  json g = json::array(), h = json::array();
  for (int i = 0; i < inst.m; ++i) {
    g.push_back(vec_to_json(inst.g[i]));
    h.push_back(mat_to_json(inst.H[i]));
  }
  j["g"] = g;
  j["H"] = h;
  j["c"] = vec_to_json(inst.c);
  return j;
}

SumAbsInstance sumabs_from_json(const json& j) {
  const auto seed = field(j, "seed").get<std::uint64_t>();
  const int n = field(j, "n").get<int>();
  const int m = field(j, "m").get<int>();
  if (!j.contains("g")) return generate_sumabs_instance(seed, n, m);
  SumAbsInstance inst;
  inst.seed = seed;
  inst.n = n;
  inst.m = m;
  inst.lambda = vec_from_json(field(j, "lambda"));
  inst.c = vec_from_json(field(j, "c"));
  const json& g = field(j, "g");
  const json& h = field(j, "H");
  if (g.size() != static_cast<std::size_t>(m) || h.size() != static_cast<std::size_t>(m))
    throw config_error("sumabs instance: expected m gradients and m Hessians");
  for (int i = 0; i < m; ++i) {
    inst.g.push_back(vec_from_json(g[i]));
    inst.H.push_back(mat_from_json(h[i], n, n));
  }
  return inst;
}

json maxeig_to_json(const MaxEigInstance& inst, bool with_matrices) {
  json j;
  j["problem"] = "maxeig";
  j["seed"] = inst.seed;
  j["n"] = inst.n;
  j["m"] = inst.m;
  if (with_matrices) {
    json a = json::array();
    for (const auto& mtx : inst.A) a.push_back(mat_to_json(mtx));
    j["A"] = a;
  }
  if (inst.reference_point) j["reference_point"] = vec_to_json(*inst.reference_point);
  return j;
}

MaxEigInstance maxeig_from_json(const json& j) {
  const auto seed = field(j, "seed").get<std::uint64_t>();
  const int n = field(j, "n").get<int>();
  const int m = field(j, "m").get<int>();
  MaxEigInstance inst;
  if (j.contains("A")) {
    inst.seed = seed;
    inst.n = n;
    inst.m = m;
    const json& a = j.at("A");
    if (a.size() != static_cast<std::size_t>(n) + 1) throw config_error("maxeig instance: expected n+1 matrices");
    for (const auto& mj : a) inst.A.push_back(mat_from_json(mj, m, m));
  } else {
    inst = generate_maxeig_instance(seed, n, m);
  }
  if (j.contains("reference_point")) {
    inst.reference_point = vec_from_json(j.at("reference_point"));
    if (inst.reference_point->size() != n) throw config_error("maxeig instance: reference point has wrong size");
  }
  return inst;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw config_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace hocp
