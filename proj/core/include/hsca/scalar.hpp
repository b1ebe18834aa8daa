#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace hsca {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

}  // namespace hsca
