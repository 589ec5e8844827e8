#pragma once

#include <stdexcept>
#include <string>

namespace reebvol {

enum class ErrorCode {
  Dimension,
  SingularSystem,
  UnsupportedGeometry,
  NotReebField,
  InvalidBasis,
  DegeneratePolytope,
  InvalidFiltration,
  UnsupportedDegree,
  QuasiRegularRequired,
  EmptyDegree,
  InvalidDirection,
  Parse,
};

const char* to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception. `code()` is
/// machine readable; parse failures additionally carry the JSON field path.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  bool is_parse_error() const noexcept {
    return code_ == ErrorCode::Parse || !field_.empty();
  }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace reebvol
