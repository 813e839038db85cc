#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

enum class Errc {
  invalid_argument,
  too_few_points,
  zero_pivot,
  non_convergence,
  all_masked,
  left_domain,
  branch_switch,
  normalization_blowup,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qlab
