// Copyright 2026 The instgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "instgame/error.hpp"

namespace instgame {

// Exact non-overflowing-for-our-sizes rational in lowest terms, den > 0.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
    normalize();
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / den_; }
  bool is_integer() const { return den_ == 1; }

  // Round half away from zero.
  std::int64_t round() const {
    const std::int64_t twice = 2 * num_ + (num_ >= 0 ? den_ : -den_);
    return twice / (2 * den_);
  }

  friend Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(Rational a, Rational b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num_ == 0) throw Error(ErrorCode::kInvalidArgument, "division by zero");
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  Rational& operator+=(Rational o) { return *this = *this + o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend auto operator<=>(Rational a, Rational b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "3", "3/2" or a terminating decimal such as "1.5".
  static Rational parse(const std::string& text) {
    try {
      if (auto slash = text.find('/'); slash != std::string::npos) {
        return {std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1))};
      }
      if (auto dot = text.find('.'); dot != std::string::npos) {
        const std::string frac = text.substr(dot + 1);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t whole = dot == 0 ? 0 : std::stoll(text.substr(0, dot));
        const std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
        const bool negative = !text.empty() && text[0] == '-';
        return {whole * den + (negative ? -part : part), den};
      }
      return {std::stoll(text), 1};
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParse, "not a rational: '" + text + "'");
    }
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace instgame
