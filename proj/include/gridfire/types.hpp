#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gridfire {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelBuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ComponentKind : uint8_t { Bus = 0, Generator = 1, Line = 2 };

/// A component of the system: bus, generator or line. `index` is the
/// position within the owning vector of the PowerCase.
struct ComponentId {
  ComponentKind kind;
  int index;

  friend bool operator==(const ComponentId&, const ComponentId&) = default;
};

std::string to_string(ComponentKind kind);

}  // namespace gridfire
