#include "snake/trig.hpp"

namespace snake {

void sincos_array(const double* __restrict x, double* __restrict s, double* __restrict c, std::size_t n) {
  constexpr double two_over_pi = 0.63661977236758134308;
  // pi/2 split into 33-bit pieces so k * piece is exact
  constexpr double p1 = 1.57079632673412561417e+00;
  constexpr double p2 = 6.07710050630396597660e-11;
  constexpr double p3 = 2.02226624871116645580e-21;
  constexpr double round_magic = 6755399441055744.0;  // 1.5 * 2^52
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    const double k = (v * two_over_pi + round_magic) - round_magic;
    const double r = ((v - k * p1) - k * p2) - k * p3;
    const double z = r * r;
    // minimax polynomials on [-pi/4, pi/4]
    double ps = 1.58962301576546568060e-10;
    ps = ps * z - 2.50507477628578072866e-8;
    ps = ps * z + 2.75573136213857245213e-6;
    ps = ps * z - 1.98412698295895385996e-4;
    ps = ps * z + 8.33333333332211858878e-3;
    ps = ps * z - 1.66666666666666307295e-1;
    const double sr = r + r * z * ps;
    double pc = -1.13585365213876817300e-11;
    pc = pc * z + 2.08757008419747316778e-9;
    pc = pc * z - 2.75573141792967388112e-7;
    pc = pc * z + 2.48015872888517045348e-5;
    pc = pc * z - 1.38888888888730564116e-3;
    pc = pc * z + 4.16666666666665929218e-2;
    const double cr = 1.0 - 0.5 * z + z * z * pc;
    // quadrant q = k mod 4 in {0, 1, 2, 3}
    const double k4 = k * 0.25;
    double m = (k4 + round_magic) - round_magic;
    m = m > k4 ? m - 1.0 : m;
    const double q = k - 4.0 * m;
    const double hi = q >= 2.0 ? 1.0 : 0.0;
    const double odd = q - 2.0 * hi;
    const double sv = odd != 0.0 ? cr : sr;
    const double cv = odd != 0.0 ? sr : cr;
    s[i] = hi != 0.0 ? -sv : sv;
    c[i] = hi != odd ? -cv : cv;
  }
}

}  // namespace snake
