#pragma once

#include "doctest.h"
#include "extremal/error.hpp"
#include "oracles.hpp"

namespace testing {

// Code of the extremal::Error thrown by fn; fails the test if none is thrown.
template <class F>
extremal::ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const extremal::Error& e) {
    return e.code();
  }
  FAIL("expected an extremal::Error");
  return extremal::ErrorCode::usage_error;
}

}  // namespace testing
