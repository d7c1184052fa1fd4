#include "gfse/bkt_filter.hpp"

#include <string>

#include "gfse/errors.hpp"

namespace gfse {

namespace {

void check(double p, const char* name, bool open) {
  const bool ok = open ? (p > 0.0 && p < 1.0) : (p >= 0.0 && p <= 1.0);
  if (!ok) {
    throw InvalidInput(std::string("BKT parameter ") + name + " must lie in " +
                       (open ? "(0, 1)" : "[0, 1]"));
  }
}

}  // namespace

void BktParams::validate_closed() const {
  check(p_init, "p_init", false);
  check(p_learn, "p_learn", false);
  check(p_guess, "p_guess", false);
  check(p_slip, "p_slip", false);
}

void BktParams::validate_open() const {
  check(p_init, "p_init", true);
  check(p_learn, "p_learn", true);
  check(p_guess, "p_guess", true);
  check(p_slip, "p_slip", true);
}

}  // namespace gfse
