/**
 * Copyright 2026 the hidmdi authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hidmdi/types.hpp"

namespace hidmdi {

using cplx = std::complex<double>;

enum class Parity { plus, minus };

// One measurement basis: rows of an N x N unitary, stored row-major.
// The Z basis is the identity; the X basis is either a real Hadamard-sign
// basis (entries +-1/sqrt(N), available when N is a power of two) or the
// complex Fourier basis otherwise. real_entries distinguishes the two.
struct BasisSet {
  BasisKind kind = BasisKind::z;
  int dimension = 0;
  bool real_entries = true;
  std::vector<cplx> m;  // row-major, dimension x dimension

  std::span<const cplx> row(int i) const {
    return {m.data() + static_cast<std::size_t>(i) * dimension,
            static_cast<std::size_t>(dimension)};
  }
};

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace detail

inline BasisSet build_basis(int n, BasisKind kind) {
  if (n < 2) throw std::invalid_argument("build_basis: dimension must be >= 2");

  BasisSet b;
  b.kind = kind;
  b.dimension = n;
  b.m.assign(static_cast<std::size_t>(n) * n, cplx{0.0, 0.0});

  if (kind == BasisKind::z) {
    for (int i = 0; i < n; ++i) b.m[static_cast<std::size_t>(i) * n + i] = 1.0;
    b.real_entries = true;
    return b;
  }

  const double w = 1.0 / std::sqrt(static_cast<double>(n));
  if (detail::is_power_of_two(n)) {
    // Sylvester doubling: sign(j,k) = (-1)^popcount(j & k).
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int bits = std::popcount(static_cast<unsigned>(j & k));
        b.m[static_cast<std::size_t>(j) * n + k] = (bits % 2 == 0) ? w : -w;
      }
    b.real_entries = true;
  } else {
    // Fourier rows exp(2*pi*i*j*k/N)/sqrt(N); no real sign basis exists.
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double arg =
            2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
        b.m[static_cast<std::size_t>(j) * n + k] = w * cplx{std::cos(arg), std::sin(arg)};
      }
    b.real_entries = false;
  }
  return b;
}

// The coincidence parity that ideal interference permits when the parties
// send a_state and b_state and Charlie announces bins {i, j}. The two-photon
// amplitudes compare a[i]b[j] against a[j]b[i], so the permitted parity is
// fixed by the phase of a[i] conj(a[j]) conj(b[i]) b[j]: +1 allows only
// equal ports, -1 only opposite ports. Any other phase (possible only for
// non-real bases) leaves both parities open and the prediction is
// indeterminate, as is a vanishing amplitude.
inline std::optional<Parity> expected_parity(std::span<const cplx> a_state,
                                             std::span<const cplx> b_state, int i, int j) {
  if (i == j) throw std::invalid_argument("expected_parity: bins must differ");
  const cplx prod = a_state[static_cast<std::size_t>(i)] *
                    std::conj(a_state[static_cast<std::size_t>(j)]) *
                    std::conj(b_state[static_cast<std::size_t>(i)]) *
                    b_state[static_cast<std::size_t>(j)];
  const double mag = std::abs(prod);
  if (mag < 1e-30) return std::nullopt;
  const cplx phase = prod / mag;
  constexpr double tol = 1e-9;
  if (std::abs(phase - cplx{1.0, 0.0}) < tol) return Parity::plus;
  if (std::abs(phase + cplx{1.0, 0.0}) < tol) return Parity::minus;
  return std::nullopt;
}

}  // namespace hidmdi
