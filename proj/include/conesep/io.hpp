#pragma once

#include "conesep/cones.hpp"

#include <json.hpp>

#include <string>

namespace conesep {

/// Matrix text format: first line "m d", then m whitespace-separated rows of
/// d decimal floats.
Matrix read_matrix_text(const std::string& path);
void write_matrix_text(const std::string& path, const Matrix& m);

/// Vectors are stored as m x 1 (or 1 x d) matrices in the same format.
Vector read_vector_text(const std::string& path);

nlohmann::json cone_to_json(const Cone& cone);
Cone cone_from_json(const nlohmann::json& j);
Cone read_cone_json(const std::string& path);

nlohmann::json polytope_to_json(const Polytope& p);
Polytope polytope_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace conesep
