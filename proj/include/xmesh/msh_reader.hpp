#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xmesh/mesh.hpp"

namespace xmesh {

/// Reader for gmsh legacy ASCII MSH 2.2 files. Triangles (type 2) form the
/// mesh; line elements (type 1) define boundary node groups keyed by the
/// physical name when present, otherwise "tag<N>". z coordinates are dropped.
inline std::pair<MeshTopology, MeshState> parse_msh(std::istream& in) {
    MeshTopology topo;
    MeshState state;
    std::map<int, int> node_index;          // msh node id -> dense index
    std::map<int, std::string> phys_names;  // physical tag -> name
    std::string line;
    int line_no = 0;

    auto fail = [&line_no](const std::string& what) -> ParseError {
        return ParseError("msh parse error at line " + std::to_string(line_no) + ": " + what);
    };
    auto next_line = [&](const char* section) {
        if (!std::getline(in, line)) throw fail(std::string("truncated ") + section + " section");
        ++line_no;
        return line;
    };

    bool saw_format = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] != '$') continue;
        std::string section = line.substr(1);
        if (section == "MeshFormat") {
            std::istringstream ss(next_line("$MeshFormat"));
            double version = 0;
            int file_type = 0, data_size = 0;
            if (!(ss >> version >> file_type >> data_size)) throw fail("malformed $MeshFormat header");
            if (version != 2.2 || file_type != 0)
                throw fail("unsupported msh version (only ASCII 2.2 is supported)");
            if (next_line("$MeshFormat") != "$EndMeshFormat") throw fail("expected $EndMeshFormat");
            saw_format = true;
        } else if (section == "PhysicalNames") {
            int count = 0;
            std::istringstream ss(next_line("$PhysicalNames"));
            if (!(ss >> count)) throw fail("malformed $PhysicalNames count");
            for (int i = 0; i < count; ++i) {
                std::istringstream ls(next_line("$PhysicalNames"));
                int dim = 0, tag = 0;
                std::string name;
                if (!(ls >> dim >> tag >> name)) throw fail("malformed physical name entry");
                if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
                    name = name.substr(1, name.size() - 2);
                phys_names[tag] = name;
            }
            if (next_line("$PhysicalNames") != "$EndPhysicalNames") throw fail("expected $EndPhysicalNames");
        } else if (section == "Nodes") {
            int count = 0;
            std::istringstream ss(next_line("$Nodes"));
            if (!(ss >> count)) throw fail("malformed $Nodes count");
            for (int i = 0; i < count; ++i) {
                std::istringstream ls(next_line("$Nodes"));
                int id = 0;
                double x = 0, y = 0, z = 0;
                if (!(ls >> id >> x >> y >> z)) throw fail("malformed node entry");
                node_index[id] = static_cast<int>(state.reference_coords.size());
                state.reference_coords.emplace_back(x, y);
            }
            if (next_line("$Nodes") != "$EndNodes") throw fail("expected $EndNodes");
        } else if (section == "Elements") {
            int count = 0;
            std::istringstream ss(next_line("$Elements"));
            if (!(ss >> count)) throw fail("malformed $Elements count");
            for (int i = 0; i < count; ++i) {
                std::istringstream ls(next_line("$Elements"));
                int id = 0, type = 0, ntags = 0;
                if (!(ls >> id >> type >> ntags)) throw fail("malformed element entry");
                std::vector<int> tags(ntags);
                for (int& t : tags)
                    if (!(ls >> t)) throw fail("malformed element tags");
                int phys = ntags > 0 ? tags[0] : 0;
                if (type == 1) {
                    int a = 0, b = 0;
                    if (!(ls >> a >> b)) throw fail("malformed line element");
                    std::string group = phys_names.count(phys) ? phys_names[phys]
                                                               : "tag" + std::to_string(phys);
                    for (int n : {a, b}) {
                        auto it = node_index.find(n);
                        if (it == node_index.end()) throw fail("line element references unknown node");
                        auto& g = topo.dirichlet_tags[group];
                        if (std::find(g.begin(), g.end(), it->second) == g.end())
                            g.push_back(it->second);
                    }
                } else if (type == 2) {
                    int a = 0, b = 0, c = 0;
                    if (!(ls >> a >> b >> c)) throw fail("malformed triangle element");
                    std::array<int, 3> tri{};
                    int k = 0;
                    for (int n : {a, b, c}) {
                        auto it = node_index.find(n);
                        if (it == node_index.end()) throw fail("triangle references unknown node");
                        tri[k++] = it->second;
                    }
                    // normalize to CCW
                    if (signed_area(state.reference_coords[tri[0]], state.reference_coords[tri[1]],
                                    state.reference_coords[tri[2]]) < 0.0)
                        std::swap(tri[1], tri[2]);
                    topo.triangles.push_back(tri);
                } else if (type == 15) {
                    // isolated point elements are legal in gmsh output; skip
                } else {
                    throw fail("unsupported element type " + std::to_string(type) +
                               " (only lines and triangles)");
                }
            }
            if (next_line("$Elements") != "$EndElements") throw fail("expected $EndElements");
        } else {
            // skip unknown section
            std::string end = "$End" + section;
            while (next_line(section.c_str()) != end) {
            }
        }
    }
    if (!saw_format) throw ParseError("msh parse error: missing $MeshFormat section");
    if (topo.triangles.empty()) throw ParseError("msh parse error: no triangles found");
    topo.node_count = static_cast<int>(state.reference_coords.size());
    for (auto& [name, nodes] : topo.dirichlet_tags) std::sort(nodes.begin(), nodes.end());
    detail::finalize_topology(topo);
    detail::finalize_state(topo, state);
    return {std::move(topo), std::move(state)};
}

} // namespace xmesh
