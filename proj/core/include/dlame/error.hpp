#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dlame {

enum class ErrorKind {
  NullVector,
  NonVectorResult,
  AtInfinity,
  DegenerateBasis,
  OutOfBounds,
  OrderTooLarge,
  DomainViolation,
  DegenerateHexahedron,
  NonPlanarQuad,
  DegenerateEdges,
  ImmersionFailure,
  FrameDrift,
  SqrtDomain,
  OutsideDomain,
  CoincidentPoints,
  SingularPoint,
  DegenerateFit,
  ConfigError,
  IoError,
  NonPlanarExport,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the lattice driver when a step rule leaves its domain. `cause`
// keeps the kind the rule reported (SqrtDomain, DegenerateHexahedron, ...).
class DomainViolation : public Error {
 public:
  DomainViolation(std::vector<int> site, int component, int direction,
                  ErrorKind cause, const std::string& detail);

  const std::vector<int>& site() const noexcept { return site_; }
  int component() const noexcept { return component_; }
  int direction() const noexcept { return direction_; }
  ErrorKind cause() const noexcept { return cause_; }

 private:
  std::vector<int> site_;
  int component_;
  int direction_;
  ErrorKind cause_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace dlame
