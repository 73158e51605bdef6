#pragma once

#include <stdexcept>
#include <string>

namespace semilab {

enum class ErrorCode {
  invalid_argument,
  parse,
  validation,
  depth_exceeded,
  cap_exceeded,
  undefined_posterior,
  not_a_measure,
  not_a_measure_row,
  not_dominated,
  normalization,
  approximable_not_measure,
  hypothesis_failed,
  invalid_k0,
  inconclusive_configuration,
  needs_larger_tmax,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semilab
