#include "conesep/io.hpp"

#include <fstream>
#include <sstream>

namespace conesep {

namespace {

Vector json_to_vector(const nlohmann::json& j) {
  if (!j.is_array()) throw input_error("io: expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

} // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("io: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw input_error("io: cannot write '" + path + "'");
  out << content;
}

Matrix read_matrix_text(const std::string& path) {
  std::istringstream in(read_text_file(path));
  Eigen::Index m = 0, d = 0;
  if (!(in >> m >> d) || m < 1 || d < 1)
    throw input_error("io: matrix file must start with 'm d'");
  Matrix out(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(in >> out(i, j))) throw input_error("io: matrix file truncated");
    }
  }
  return out;
}

void write_matrix_text(const std::string& path, const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf << (j + 1 < m.cols() ? " " : "");
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

Vector read_vector_text(const std::string& path) {
  Matrix m = read_matrix_text(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw input_error("io: vector file must be m x 1 or 1 x d");
}

nlohmann::json polytope_to_json(const Polytope& p) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : p.vertices) j["vertices"].push_back(vector_to_json(v));
  j["halfspaces"] = nlohmann::json::array();
  for (const auto& h : p.halfspaces) {
    j["halfspaces"].push_back({{"normal", vector_to_json(h.normal)}, {"offset", h.offset}});
  }
  return j;
}

Polytope polytope_from_json(const nlohmann::json& j) {
  Polytope p;
  for (const auto& v : j.at("vertices")) p.vertices.push_back(json_to_vector(v));
  for (const auto& h : j.at("halfspaces")) {
    p.halfspaces.push_back({json_to_vector(h.at("normal")), h.at("offset").get<double>()});
  }
  p.validate();
  return p;
}

nlohmann::json cone_to_json(const Cone& cone) {
  nlohmann::json j;
  j["variant"] = cone.variant_name();
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Subspace>) {
          j["basis"] = nlohmann::json::array();
          for (Eigen::Index k = 0; k < c.basis.cols(); ++k)
            j["basis"].push_back(vector_to_json(c.basis.col(k)));
          j["d"] = c.basis.rows();
        } else if constexpr (std::is_same_v<T, L1Descent>) {
          j["d"] = c.dim;
          j["support"] = c.support;
          j["signs"] = c.signs;
        } else if constexpr (std::is_same_v<T, Circular>) {
          j["d"] = c.dim;
          j["alpha"] = c.alpha;
          j["axis_sign"] = c.axis_sign;
        } else if constexpr (std::is_same_v<T, Generated>) {
          j["rays"] = nlohmann::json::array();
          for (Eigen::Index k = 0; k < c.rays.cols(); ++k)
            j["rays"].push_back(vector_to_json(c.rays.col(k)));
        } else if constexpr (std::is_same_v<T, PolytopeDescent>) {
          j["polytope"] = polytope_to_json(c.polytope);
          j["x0"] = vector_to_json(c.x0);
        } else {
          j["normals"] = nlohmann::json::array();
          for (Eigen::Index k = 0; k < c.normals.cols(); ++k)
            j["normals"].push_back(vector_to_json(c.normals.col(k)));
        }
      },
      cone.variant());
  return j;
}

Cone cone_from_json(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "subspace") {
    const auto& basis = j.at("basis");
    const auto d = j.at("d").get<Eigen::Index>();
    Matrix b(d, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k)
      b.col(static_cast<Eigen::Index>(k)) = json_to_vector(basis[k]);
    return Cone::subspace(b);
  }
  if (variant == "l1_descent") {
    if (j.contains("x0")) return Cone::l1_descent(json_to_vector(j.at("x0")));
    const auto d = j.at("d").get<Eigen::Index>();
    const auto support = j.at("support").get<std::vector<Eigen::Index>>();
    const auto signs = j.at("signs").get<std::vector<double>>();
    if (support.size() != signs.size()) throw input_error("io: support/signs size mismatch");
    Vector x0 = Vector::Zero(d);
    for (std::size_t k = 0; k < support.size(); ++k) x0(support[k]) = signs[k];
    return Cone::l1_descent(x0);
  }
  if (variant == "circular") {
    return Cone::circular(j.at("d").get<Eigen::Index>(), j.at("alpha").get<double>(),
                          j.value("axis_sign", 1));
  }
  if (variant == "generated") {
    std::vector<Vector> rays;
    for (const auto& r : j.at("rays")) rays.push_back(json_to_vector(r));
    return Cone::generated(rays);
  }
  if (variant == "polytope_descent") {
    return Cone::polytope_descent(polytope_from_json(j.at("polytope")), json_to_vector(j.at("x0")));
  }
  throw input_error("io: unknown cone variant '" + variant + "'");
}

Cone read_cone_json(const std::string& path) {
  return cone_from_json(nlohmann::json::parse(read_text_file(path)));
}

} // namespace conesep
