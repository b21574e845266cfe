#include <catch2/catch.hpp>

#include <vector>

#include "hidmdi/detection.hpp"

using namespace hidmdi;

TEST_CASE("detector numbering matches the two-per-bin convention") {
  for (int n : {2, 4, 8}) {
    for (int bin = 0; bin < n; ++bin)
      for (int port = 0; port < 2; ++port) {
        const DetectionMode m{bin, port};
        CHECK(m.detector_number() == 2 * bin + port + 1);
        CHECK(mode_from_detector_number(m.detector_number()) == m);
      }
  }
}

TEST_CASE("coincidence parity follows the detector pairing") {
  // N = 4: detectors 1 and 7 sit on the same side of bins 0 and 3.
  const std::vector<DetectionMode> plus{mode_from_detector_number(1),
                                        mode_from_detector_number(7)};
  auto ev = classify_event(plus, 4);
  CHECK(ev.kind == EventKind::valid_coincidence);
  CHECK(ev.bin_lo == 0);
  CHECK(ev.bin_hi == 3);
  CHECK(ev.parity == Parity::plus);

  const std::vector<DetectionMode> minus{mode_from_detector_number(1),
                                         mode_from_detector_number(8)};
  ev = classify_event(minus, 4);
  CHECK(ev.kind == EventKind::valid_coincidence);
  CHECK(ev.parity == Parity::minus);

  const std::vector<DetectionMode> minus2{mode_from_detector_number(2),
                                          mode_from_detector_number(7)};
  CHECK(classify_event(minus2, 4).parity == Parity::minus);
}

TEST_CASE("same-bin coincidences are flagged for sifting out") {
  const std::vector<DetectionMode> same{mode_from_detector_number(1),
                                        mode_from_detector_number(2)};
  const auto ev = classify_event(same, 4);
  CHECK(ev.kind == EventKind::same_bin_coincidence);
  CHECK(ev.bin_lo == 0);
  CHECK(ev.bin_hi == 0);
}

TEST_CASE("zero, single and many clicks classify as non-events") {
  CHECK(classify_event(std::vector<DetectionMode>{}, 4).kind == EventKind::no_event);
  CHECK(classify_event(std::vector<DetectionMode>{{2, 1}}, 4).kind == EventKind::no_event);
  const std::vector<DetectionMode> three{{0, 0}, {1, 0}, {2, 1}};
  CHECK(classify_event(three, 4).kind == EventKind::multiclick);
}

TEST_CASE("classification is an exhaustive function of the click subset") {
  // Enumerate every subset of the 6 modes at N = 3 and check the full case
  // analysis independently.
  const int n = 3;
  for (unsigned mask = 0; mask < 64; ++mask) {
    std::vector<DetectionMode> clicked;
    for (int idx = 0; idx < 2 * n; ++idx)
      if (mask & (1u << idx)) clicked.push_back(DetectionMode{idx / 2, idx % 2});
    const auto ev = classify_event(clicked, n);
    switch (clicked.size()) {
      case 0:
      case 1:
        CHECK(ev.kind == EventKind::no_event);
        break;
      case 2: {
        const bool same_bin = clicked[0].bin == clicked[1].bin;
        CHECK(ev.kind == (same_bin ? EventKind::same_bin_coincidence
                                   : EventKind::valid_coincidence));
        if (!same_bin) {
          CHECK(ev.bin_lo < ev.bin_hi);
          const bool same_port = clicked[0].port == clicked[1].port;
          CHECK(ev.parity == (same_port ? Parity::plus : Parity::minus));
        }
        break;
      }
      default:
        CHECK(ev.kind == EventKind::multiclick);
    }
  }
}

TEST_CASE("modes outside the layout are rejected") {
  CHECK_THROWS_AS(classify_event(std::vector<DetectionMode>{{4, 0}, {0, 0}}, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(classify_event(std::vector<DetectionMode>{{0, 2}}, 4),
                  std::invalid_argument);
}
