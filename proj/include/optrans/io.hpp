#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "optrans/frame.hpp"
#include "optrans/gabor_operator.hpp"
#include "optrans/qha.hpp"
#include "optrans/translates.hpp"

namespace optrans::io {

using json = nlohmann::ordered_json;

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

json to_json(const LatticePoint& p);
json to_json(const GaborOperator& op);
/// {"p", "d", "strategy", "capacities", "index_sets", "generator"}
json to_json(const FramePlan& plan);
json to_json(const qha::PhaseSpaceMap& f);

/// Throws ParseError on structural problems. Index sets sharing an index throw CollisionError.
LatticePoint lattice_point_from_json(const json& j, int d);
GaborOperator gabor_operator_from_json(const json& j);
/// The stored generator is kept as read, not rebuilt.
FramePlan plan_from_json(const json& j);
qha::PhaseSpaceMap phase_space_map_from_json(const json& j);

/// Parses text, mapping syntax errors to ParseError.
json parse(const std::string& text);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// "# N=<n>,L=<l>" then "x,w,re,im" rows.
void write_csv(std::ostream& os, const qha::PhaseSpaceMap& f);
qha::PhaseSpaceMap read_phase_space_csv(std::istream& is);

/// "M,target_id,residual" rows.
void write_csv(std::ostream& os, const ResidualReport& report);

}  // namespace optrans::io
