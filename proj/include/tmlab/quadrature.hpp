#pragma once

#include <array>

namespace tmlab {

/// Symmetric 6-point rule on the reference triangle, exact for degree 4.
/// Points are barycentric triples; weights sum to 1 (multiply by the area).
template <typename Scalar = double>
struct Dunavant6 {
  static constexpr int size = 6;

  static constexpr std::array<std::array<Scalar, 3>, 6> points() {
    constexpr Scalar a = Scalar(0.44594849091596488632);
    constexpr Scalar b = Scalar(0.09157621350977074346);
    return {{{1 - 2 * a, a, a}, {a, 1 - 2 * a, a}, {a, a, 1 - 2 * a},
             {1 - 2 * b, b, b}, {b, 1 - 2 * b, b}, {b, b, 1 - 2 * b}}};
  }

  static constexpr std::array<Scalar, 6> weights() {
    constexpr Scalar wa = Scalar(0.22338158967801146570);
    constexpr Scalar wb = Scalar(0.10995174365532186764);
    return {wa, wa, wa, wb, wb, wb};
  }
};

/// Symmetric 16-point rule, exact for degree 8. Used for the exponential
/// integrands, which vary much faster than e^{2f}.
template <typename Scalar = double>
struct Dunavant16 {
  static constexpr int size = 16;

  static constexpr std::array<std::array<Scalar, 3>, 16> points() {
    constexpr Scalar t = Scalar(1) / 3;
    constexpr Scalar a = Scalar(0.459292588292723156);
    constexpr Scalar b = Scalar(0.170569307751760207);
    constexpr Scalar c = Scalar(0.050547228317030975);
    constexpr Scalar p = Scalar(0.008394777409957605), q = Scalar(0.263112829634638113),
                     r = Scalar(0.728492392955404282);
    return {{{t, t, t},
             {1 - 2 * a, a, a}, {a, 1 - 2 * a, a}, {a, a, 1 - 2 * a},
             {1 - 2 * b, b, b}, {b, 1 - 2 * b, b}, {b, b, 1 - 2 * b},
             {1 - 2 * c, c, c}, {c, 1 - 2 * c, c}, {c, c, 1 - 2 * c},
             {p, q, r}, {p, r, q}, {q, p, r}, {q, r, p}, {r, p, q}, {r, q, p}}};
  }

  static constexpr std::array<Scalar, 16> weights() {
    constexpr Scalar w0 = Scalar(0.144315607677787168);
    constexpr Scalar wa = Scalar(0.095091634267284625);
    constexpr Scalar wb = Scalar(0.103217370534718250);
    constexpr Scalar wc = Scalar(0.032458497623198080);
    constexpr Scalar wd = Scalar(0.027230314174434994);
    return {w0, wa, wa, wa, wb, wb, wb, wc, wc, wc, wd, wd, wd, wd, wd, wd};
  }
};

}  // namespace tmlab
