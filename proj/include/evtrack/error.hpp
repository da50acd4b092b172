#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evtrack {

enum class Errc {
  malformed_header,
  malformed_record,
  out_of_bounds_event,
  non_monotone_timestamp,
  truncated_record,
  io_failure,
  malformed_row,
  non_positive_dt,
  missing_pre_occlusion_size,
  out_of_range,
  empty_ground_truth,
  invalid_spec,
  invalid_config,
};

std::string_view to_string(Errc code);

/// Errors raised by parsers and tracker operations. Carries a code so callers
/// (the CLI in particular) can map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  // True for failures caused by bad input data rather than internal state.
  bool is_input_error() const noexcept;

 private:
  Errc code_;
};

}  // namespace evtrack
