#include "helfrich/errors.hpp"
#include "helfrich/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace helfrich {
namespace {

std::string extension(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int parse_obj_index(const std::string& tok, std::size_t nverts, const std::string& path, std::size_t line) {
  std::string head = tok.substr(0, tok.find('/'));
  long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw ParseError(path, line, "bad face index '" + tok + "'");
  }
  if (idx < 0) idx = static_cast<long>(nverts) + idx + 1;
  if (idx < 1) throw ParseError(path, line, "face index out of range");
  return static_cast<int>(idx - 1);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  TriangleMesh m;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ss(text);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    if (key == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw ParseError(path, line, "vertex needs three coordinates");
      m.vertices.emplace_back(x, y, z);
    } else if (key == "f") {
      std::vector<std::string> toks;
      for (std::string t; ss >> t;) toks.push_back(t);
      if (toks.size() < 3) throw ParseError(path, line, "face needs at least three indices");
      if (toks.size() != 3)
        throw UnsupportedFormatError(path + ":" + std::to_string(line) + ": face with " +
                                     std::to_string(toks.size()) + " vertices; only triangles are supported");
      Face f;
      for (int c = 0; c < 3; ++c) f[c] = parse_obj_index(toks[c], m.vertices.size(), path, line);
      m.faces.push_back(f);
    } else if (key == "vn" || key == "vt" || key == "g" || key == "o" || key == "s" || key == "usemtl" ||
               key == "mtllib") {
      continue;
    } else {
      throw ParseError(path, line, "unknown OBJ record '" + key + "'");
    }
  }
  for (const Face& f : m.faces)
    for (int v : f)
      if (v >= static_cast<int>(m.vertices.size())) throw ParseError(path, line, "face index out of range");
  return m;
}

TriangleMesh load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string text;
  std::size_t line = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, text)) throw ParseError(path, line + 1, std::string("unexpected end of file, expected ") + what);
    ++line;
  };

  next("'ply'");
  if (text.rfind("ply", 0) != 0) throw ParseError(path, line, "missing 'ply' magic");
  std::size_t nv = 0, nf = 0;
  std::vector<std::string> vprops;
  std::string current;
  bool ascii = false;
  for (;;) {
    next("end_header");
    std::istringstream ss(text);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "end_header") break;
    if (key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") throw UnsupportedFormatError(path + ": only ASCII PLY is supported (got " + fmt + ")");
      ascii = true;
    } else if (key == "element") {
      std::size_t count = 0;
      if (!(ss >> current >> count)) throw ParseError(path, line, "malformed element line");
      if (current == "vertex") nv = count;
      else if (current == "face") nf = count;
      else if (count != 0) throw UnsupportedFormatError(path + ": unsupported element '" + current + "'");
    } else if (key == "property") {
      std::string type, name;
      ss >> type;
      if (type == "list") {
        std::string ct, it;
        ss >> ct >> it >> name;
        if (current != "face") throw UnsupportedFormatError(path + ": list property outside face element");
      } else {
        ss >> name;
        if (current == "vertex") vprops.push_back(name);
        else if (current == "face") throw UnsupportedFormatError(path + ": extra face properties not supported");
      }
    } else {
      throw ParseError(path, line, "unknown header record '" + key + "'");
    }
  }
  if (!ascii) throw ParseError(path, line, "missing format line");
  auto find = [&](const char* n) {
    auto it = std::find(vprops.begin(), vprops.end(), n);
    if (it == vprops.end()) throw ParseError(path, line, std::string("vertex property '") + n + "' missing");
    return static_cast<std::size_t>(it - vprops.begin());
  };
  std::size_t ix = find("x"), iy = find("y"), iz = find("z");

  TriangleMesh m;
  m.vertices.reserve(nv);
  std::vector<double> vals(vprops.size());
  for (std::size_t i = 0; i < nv; ++i) {
    next("vertex");
    std::istringstream ss(text);
    for (double& v : vals)
      if (!(ss >> v)) throw ParseError(path, line, "vertex line has too few values");
    m.vertices.emplace_back(vals[ix], vals[iy], vals[iz]);
  }
  m.faces.reserve(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    next("face");
    std::istringstream ss(text);
    long count = 0;
    if (!(ss >> count)) throw ParseError(path, line, "face line is empty");
    if (count != 3)
      throw UnsupportedFormatError(path + ":" + std::to_string(line) + ": face with " + std::to_string(count) +
                                   " vertices; only triangles are supported");
    Face f;
    for (int c = 0; c < 3; ++c) {
      long v = -1;
      if (!(ss >> v)) throw ParseError(path, line, "face line has too few indices");
      if (v < 0 || v >= static_cast<long>(nv)) throw ParseError(path, line, "face index out of range");
      f[c] = static_cast<int>(v);
    }
    m.faces.push_back(f);
  }
  return m;
}

void save_obj(const TriangleMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  for (const Vec3& p : m.vertices) out << "v " << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << '\n';
  for (const Face& f : m.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw ValidationError("write failed for " + path);
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  std::string ext = extension(path);
  if (ext == "obj") return load_obj(path);
  if (ext == "ply") return load_ply(path);
  throw UnsupportedFormatError("unsupported mesh extension '" + ext + "' for " + path);
}

void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  std::string ext = extension(path);
  if (ext == "obj") return save_obj(mesh, path);
  if (ext == "ply") return save_ply(mesh, path);
  throw UnsupportedFormatError("unsupported mesh extension '" + ext + "' for " + path);
}

void save_ply(const TriangleMesh& m, const std::string& path,
              const std::vector<std::pair<std::string, std::vector<double>>>& vertex_scalars) {
  for (const auto& [name, vals] : vertex_scalars)
    if (vals.size() != m.vertices.size())
      throw PreconditionError("vertex scalar '" + name + "' has wrong length");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << m.vertices.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& [name, vals] : vertex_scalars) out << "property double " << name << '\n';
  out << "element face " << m.faces.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const Vec3& p = m.vertices[i];
    out << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z());
    for (const auto& [name, vals] : vertex_scalars) out << ' ' << fmt17(vals[i]);
    out << '\n';
  }
  for (const Face& f : m.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!out) throw ValidationError("write failed for " + path);
}

}  // namespace helfrich
