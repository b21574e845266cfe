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

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "hidmdi/basis.hpp"
#include "hidmdi/types.hpp"

namespace hidmdi {

// One of the 2N detection modes. For the space encoding, bin is the beam
// splitter index and port one of its two output detectors; for the time
// encoding, bin is the time slot and port the detector. The conventional
// 1-based detector numbering assigns detectors 2*bin+1 and 2*bin+2 to bin.
struct DetectionMode {
  int bin = 0;
  int port = 0;

  int detector_index() const { return 2 * bin + port; }          // 0-based
  int detector_number() const { return detector_index() + 1; }   // 1-based

  friend bool operator==(const DetectionMode&, const DetectionMode&) = default;
};

inline DetectionMode mode_from_detector_number(int number_1based) {
  const int idx = number_1based - 1;
  return DetectionMode{idx / 2, idx % 2};
}

enum class EventKind {
  no_event,              // 0 or 1 clicks
  valid_coincidence,     // exactly two clicks in distinct bins
  same_bin_coincidence,  // two clicks in one bin, both ports (sifted out)
  bunched,               // both photons in one mode; reads as a single click
  multiclick,            // 3 or more clicks (discarded)
};

struct DetectionEvent {
  EventKind kind = EventKind::no_event;
  int bin_lo = -1;  // valid coincidences only, bin_lo < bin_hi
  int bin_hi = -1;
  Parity parity = Parity::plus;
};

// Deterministic, exhaustive classification of a round's click set. A mode
// clicks at most once per gate, so `clicked` holds distinct modes.
inline DetectionEvent classify_event(std::span<const DetectionMode> clicked, int dimension) {
  for (const auto& m : clicked) {
    if (m.bin < 0 || m.bin >= dimension || (m.port != 0 && m.port != 1))
      throw std::invalid_argument("classify_event: mode outside the 2N-mode layout");
  }
  DetectionEvent ev;
  if (clicked.size() < 2) {
    ev.kind = EventKind::no_event;
    return ev;
  }
  if (clicked.size() > 2) {
    ev.kind = EventKind::multiclick;
    return ev;
  }
  const DetectionMode a = clicked[0];
  const DetectionMode b = clicked[1];
  if (a == b) throw std::invalid_argument("classify_event: duplicate mode in click set");
  if (a.bin == b.bin) {
    ev.kind = EventKind::same_bin_coincidence;
    ev.bin_lo = ev.bin_hi = a.bin;
    return ev;
  }
  ev.kind = EventKind::valid_coincidence;
  ev.bin_lo = std::min(a.bin, b.bin);
  ev.bin_hi = std::max(a.bin, b.bin);
  ev.parity = (a.port == b.port) ? Parity::plus : Parity::minus;
  return ev;
}

inline DetectionEvent classify_event(const std::vector<DetectionMode>& clicked, int dimension) {
  return classify_event(std::span<const DetectionMode>{clicked.data(), clicked.size()}, dimension);
}

}  // namespace hidmdi
