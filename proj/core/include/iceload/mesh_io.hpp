#pragma once

#include <filesystem>
#include <iosfwd>

#include "iceload/geometry.hpp"

namespace iceload {

// Plain-text mesh format, version 1:
//
//   iceload-mesh 1
//   nodes <N>
//   <x> <y> <depth>          N lines, metres, depth measured down from the top
//   tets <M>
//   <a> <b> <c> <d>          M lines, 0-based node indices
//   surface <K>
//   <a> <b> <c> <region>     K lines, region name (exterior_barrel, ...)
//   end
//
// Blank lines and lines starting with '#' are ignored. Coordinates are
// written in shortest round-trip form, so save/load is bit exact.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in, const std::string& source = "<stream>");

void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace iceload
