// SPDX-License-Identifier: Apache-2.0

#include "olc/ply_io.h"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace olc {

namespace {

enum class ScalarType { I8, U8, I16, U16, I32, U32, F32, F64 };

size_t scalarSize(ScalarType t) {
  switch (t) {
    case ScalarType::I8:
    case ScalarType::U8: return 1;
    case ScalarType::I16:
    case ScalarType::U16: return 2;
    case ScalarType::I32:
    case ScalarType::U32:
    case ScalarType::F32: return 4;
    case ScalarType::F64: return 8;
  }
  return 0;
}

bool parseScalarType(const std::string& tok, ScalarType& out) {
  if (tok == "char" || tok == "int8") out = ScalarType::I8;
  else if (tok == "uchar" || tok == "uint8") out = ScalarType::U8;
  else if (tok == "short" || tok == "int16") out = ScalarType::I16;
  else if (tok == "ushort" || tok == "uint16") out = ScalarType::U16;
  else if (tok == "int" || tok == "int32") out = ScalarType::I32;
  else if (tok == "uint" || tok == "uint32") out = ScalarType::U32;
  else if (tok == "float" || tok == "float32") out = ScalarType::F32;
  else if (tok == "double" || tok == "float64") out = ScalarType::F64;
  else return false;
  return true;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::F32;
  bool isList = false;
  ScalarType countType = ScalarType::U8;
};

struct Element {
  std::string name;
  uint64_t count = 0;
  std::vector<Property> props;
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
  size_t headerEnd = 0;
};

Header parseHeader(const std::string& data, const std::string& path) {
  std::istringstream in(data);
  std::string line;
  if (!std::getline(in, line)) throw PlyParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw PlyParseError(path + ": malformed header, missing 'ply' magic");

  Header hdr;
  bool haveFormat = false;
  bool ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt == "ascii") hdr.binary = false;
      else if (fmt == "binary_little_endian") hdr.binary = true;
      else throw PlyParseError(path + ": unsupported format '" + fmt + "'");
      haveFormat = true;
    } else if (kw == "element") {
      Element el;
      if (!(ls >> el.name >> el.count)) throw PlyParseError(path + ": malformed element line");
      hdr.elements.push_back(el);
    } else if (kw == "property") {
      if (hdr.elements.empty()) throw PlyParseError(path + ": property before any element");
      Property p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, vt;
        if (!(ls >> ct >> vt >> p.name)) throw PlyParseError(path + ": malformed list property");
        p.isList = true;
        if (!parseScalarType(ct, p.countType) || !parseScalarType(vt, p.type))
          throw PlyParseError(path + ": unknown property type in list");
      } else {
        if (!parseScalarType(t, p.type)) throw PlyParseError(path + ": unknown property type '" + t + "'");
        if (!(ls >> p.name)) throw PlyParseError(path + ": property missing name");
      }
      hdr.elements.back().props.push_back(p);
    } else if (kw == "end_header") {
      ended = true;
      hdr.headerEnd = static_cast<size_t>(in.tellg());
      break;
    } else {
      throw PlyParseError(path + ": unexpected header keyword '" + kw + "'");
    }
  }
  if (!ended) throw PlyParseError(path + ": malformed header, no end_header");
  if (!haveFormat) throw PlyParseError(path + ": malformed header, no format line");
  return hdr;
}

class BinaryCursor {
public:
  BinaryCursor(const std::string& data, size_t pos, const std::string& path)
      : data_(data), pos_(pos), path_(path) {}

  double readScalar(ScalarType t) {
    size_t n = scalarSize(t);
    if (pos_ + n > data_.size()) throw PlyParseError(path_ + ": unexpected end of binary data");
    const char* p = data_.data() + pos_;
    pos_ += n;
    switch (t) {
      case ScalarType::I8: return static_cast<int8_t>(p[0]);
      case ScalarType::U8: return static_cast<uint8_t>(p[0]);
      case ScalarType::I16: { int16_t v; std::memcpy(&v, p, 2); return v; }
      case ScalarType::U16: { uint16_t v; std::memcpy(&v, p, 2); return v; }
      case ScalarType::I32: { int32_t v; std::memcpy(&v, p, 4); return v; }
      case ScalarType::U32: { uint32_t v; std::memcpy(&v, p, 4); return v; }
      case ScalarType::F32: { float v; std::memcpy(&v, p, 4); return v; }
      case ScalarType::F64: { double v; std::memcpy(&v, p, 8); return v; }
    }
    return 0.0;
  }

  void skip(size_t n) {
    if (pos_ + n > data_.size()) throw PlyParseError(path_ + ": unexpected end of binary data");
    pos_ += n;
  }

private:
  const std::string& data_;
  size_t pos_;
  const std::string& path_;
};

}  // namespace

PointCloud loadPly(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PlyParseError(path + ": cannot open file");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Header hdr = parseHeader(data, path);

  const Element* vertex = nullptr;
  for (const auto& el : hdr.elements) {
    if (el.name == "vertex") vertex = &el;
    else std::cerr << "warning: " << path << ": ignoring element '" << el.name << "'\n";
  }
  if (!vertex) throw PlyParseError(path + ": missing coordinate property (no vertex element)");
  if (vertex->count == 0) throw PlyParseError(path + ": zero vertices");

  int ix = -1, iy = -1, iz = -1;
  for (size_t i = 0; i < vertex->props.size(); ++i) {
    const auto& p = vertex->props[i];
    if (p.isList) continue;
    if (p.name == "x") ix = static_cast<int>(i);
    else if (p.name == "y") iy = static_cast<int>(i);
    else if (p.name == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw PlyParseError(path + ": missing coordinate property");

  PointCloud pc;
  pc.points.reserve(vertex->count);

  if (hdr.binary) {
    BinaryCursor cur(data, hdr.headerEnd, path);
    for (const auto& el : hdr.elements) {
      if (&el == vertex) {
        for (uint64_t v = 0; v < el.count; ++v) {
          Vec3d pt;
          for (size_t i = 0; i < el.props.size(); ++i) {
            const auto& p = el.props[i];
            if (p.isList) {
              auto n = static_cast<uint64_t>(cur.readScalar(p.countType));
              cur.skip(n * scalarSize(p.type));
            } else {
              double val = cur.readScalar(p.type);
              if (static_cast<int>(i) == ix) pt.x = val;
              else if (static_cast<int>(i) == iy) pt.y = val;
              else if (static_cast<int>(i) == iz) pt.z = val;
            }
          }
          pc.points.push_back(pt);
        }
      } else {
        for (uint64_t v = 0; v < el.count; ++v) {
          for (const auto& p : el.props) {
            if (p.isList) {
              auto n = static_cast<uint64_t>(cur.readScalar(p.countType));
              cur.skip(n * scalarSize(p.type));
            } else {
              cur.skip(scalarSize(p.type));
            }
          }
        }
      }
    }
  } else {
    std::istringstream in(data.substr(hdr.headerEnd));
    for (const auto& el : hdr.elements) {
      for (uint64_t v = 0; v < el.count; ++v) {
        if (&el == vertex) {
          Vec3d pt;
          for (size_t i = 0; i < el.props.size(); ++i) {
            const auto& p = el.props[i];
            if (p.isList) {
              uint64_t n;
              if (!(in >> n)) throw PlyParseError(path + ": truncated vertex data");
              double tmp;
              for (uint64_t j = 0; j < n; ++j) in >> tmp;
            } else {
              double val;
              if (!(in >> val)) throw PlyParseError(path + ": truncated vertex data");
              if (static_cast<int>(i) == ix) pt.x = val;
              else if (static_cast<int>(i) == iy) pt.y = val;
              else if (static_cast<int>(i) == iz) pt.z = val;
            }
          }
          pc.points.push_back(pt);
        } else {
          for (const auto& p : el.props) {
            if (p.isList) {
              uint64_t n;
              if (!(in >> n)) throw PlyParseError(path + ": truncated element data");
              double tmp;
              for (uint64_t j = 0; j < n; ++j) in >> tmp;
            } else {
              double tmp;
              if (!(in >> tmp)) throw PlyParseError(path + ": truncated element data");
            }
          }
        }
      }
    }
  }

  pc.recomputeBbox();
  return pc;
}

void savePly(const std::string& path, const PointCloud& pc, bool binary) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OlcError(path + ": cannot open for writing");

  f << "ply\n"
    << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
    << "element vertex " << pc.size() << "\n"
    << "property double x\n"
    << "property double y\n"
    << "property double z\n"
    << "end_header\n";

  if (binary) {
    for (const auto& p : pc.points) {
      double v[3] = {p.x, p.y, p.z};
      f.write(reinterpret_cast<const char*>(v), sizeof(v));
    }
  } else {
    char buf[96];
    for (const auto& p : pc.points) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x, p.y, p.z);
      f << buf;
    }
  }
  if (!f) throw OlcError(path + ": write failed");
}

}  // namespace olc
