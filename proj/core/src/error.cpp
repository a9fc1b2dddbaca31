#include "dlame/error.hpp"

#include <sstream>

namespace dlame {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NullVector: return "NullVector";
    case ErrorKind::NonVectorResult: return "NonVectorResult";
    case ErrorKind::AtInfinity: return "AtInfinity";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::DegenerateHexahedron: return "DegenerateHexahedron";
    case ErrorKind::NonPlanarQuad: return "NonPlanarQuad";
    case ErrorKind::DegenerateEdges: return "DegenerateEdges";
    case ErrorKind::ImmersionFailure: return "ImmersionFailure";
    case ErrorKind::FrameDrift: return "FrameDrift";
    case ErrorKind::SqrtDomain: return "SqrtDomain";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NonPlanarExport: return "NonPlanarExport";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

namespace {

std::string describe_violation(const std::vector<int>& site, int component,
                               int direction, ErrorKind cause,
                               const std::string& detail) {
  std::ostringstream os;
  os << "site (";
  for (std::size_t i = 0; i < site.size(); ++i) os << (i ? "," : "") << site[i];
  os << ") component " << component << " direction " << direction << " ["
     << to_string(cause) << "] " << detail;
  return os.str();
}

}  // namespace

DomainViolation::DomainViolation(std::vector<int> site, int component,
                                 int direction, ErrorKind cause,
                                 const std::string& detail)
    : Error(ErrorKind::DomainViolation,
            describe_violation(site, component, direction, cause, detail)),
      site_(std::move(site)),
      component_(component),
      direction_(direction),
      cause_(cause) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace dlame
