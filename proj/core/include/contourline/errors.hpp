#pragma once

#include <stdexcept>
#include <string>

namespace contourline {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// OBJ or config syntax error; carries the 1-based line number.
struct ParseError : Error {
  ParseError(int line_, const std::string& what_)
      : Error("parse error at line " + std::to_string(line_) + ": " + what_), line(line_) {}
  int line;
};

struct NonManifoldError : Error {
  using Error::Error;
};

struct OrientationError : Error {
  using Error::Error;
};

/// Base for conditions that a generic-position perturbation can cure.
struct DegenerateGeometry : Error {
  using Error::Error;
};

struct DegenerateFacing : DegenerateGeometry {
  explicit DegenerateFacing(int face_)
      : DegenerateGeometry("face " + std::to_string(face_) + " is exactly edge-on"), face(face_) {}
  int face;
};

struct CoplanarFaces : DegenerateGeometry {
  explicit CoplanarFaces(int edge_)
      : DegenerateGeometry("coplanar faces at edge " + std::to_string(edge_)), edge(edge_) {}
  int edge;
};

struct ZeroOrientation : DegenerateGeometry {
  ZeroOrientation() : DegenerateGeometry("orientation test is exactly zero") {}
};

struct SharedEndpoint : Error {
  SharedEndpoint() : Error("segments share an endpoint; handle as a logical intersection") {}
};

struct BehindCamera : Error {
  BehindCamera() : Error("point is behind the camera") {}
};

struct ZeroNormal : Error {
  explicit ZeroNormal(int vertex_)
      : Error("area-weighted normal vanishes at vertex " + std::to_string(vertex_)), vertex(vertex_) {}
  int vertex;
};

/// Ray met a triangle edge or vertex exactly; callers nudge the query point
/// along its curve and retry.
struct GrazingHit : DegenerateGeometry {
  explicit GrazingHit(int face_)
      : DegenerateGeometry("ray grazes triangle " + std::to_string(face_)), face(face_) {}
  int face;
};

struct DegenerateDepthTie : DegenerateGeometry {
  DegenerateDepthTie() : DegenerateGeometry("equal depths at an image-space crossing") {}
};

struct UnresolvedVisibility : Error {
  UnresolvedVisibility() : Error("segment visibility still unknown") {}
};

}  // namespace contourline
