#include <cmath>
#include <limits>

#include "bel/kernels/kernels.hpp"

namespace bel::kernels {

// Lower envelope of parabolas h_q(x) = w (x-q)^2 + f[q] (Felzenszwalb & Huttenlocher).
// Breakpoints are kept as fractions num/den with den > 0 and compared by
// cross-multiplication; with w = 1 and integer f every quantity is an integer
// well below 2^53, so the envelope and the squared distances are exact.
// A parabola is popped only when strictly dominated, which keeps every
// minimizer of every sample in the envelope and lets ties resolve by label.
void lower_envelope(std::int64_t n, double w, const double* f, const std::int32_t* lab_in,
                    double* d, std::int32_t* lab_out, EnvelopeScratch& s) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    s.v.resize(static_cast<std::size_t>(n));
    s.z_num.resize(static_cast<std::size_t>(n) + 1);
    s.z_den.resize(static_cast<std::size_t>(n) + 1);
    auto& v = s.v;
    auto& zn = s.z_num;
    auto& zd = s.z_den;

    std::int64_t k = -1;
    for (std::int64_t q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        const double hq = f[q] + w * double(q) * double(q);
        if (k < 0) {
            k = 0;
            v[0] = q;
            zn[0] = -inf;
            zd[0] = 1.0;
            continue;
        }
        double num = 0.0, den = 1.0;
        for (;;) {
            const std::int64_t p = v[k];
            num = hq - (f[p] + w * double(p) * double(p));
            den = 2.0 * w * double(q - p);
            // s < z[k]  <=>  num * zd[k] < zn[k] * den   (both denominators positive)
            if (k > 0 && num * zd[k] < zn[k] * den)
                --k;
            else
                break;
        }
        ++k;
        v[k] = q;
        zn[k] = num;
        zd[k] = den;
    }

    if (k < 0) {
        for (std::int64_t x = 0; x < n; ++x) {
            d[x] = inf;
            lab_out[x] = 0;
        }
        return;
    }

    const std::int64_t last = k;
    std::int64_t j = 0;
    for (std::int64_t x = 0; x < n; ++x) {
        const double xd = double(x);
        // advance while the next breakpoint lies strictly left of x
        while (j < last && zn[j + 1] < xd * zd[j + 1]) ++j;
        double best = f[v[j]] + w * (xd - double(v[j])) * (xd - double(v[j]));
        std::int32_t best_lab = lab_in[v[j]];
        for (std::int64_t t = j + 1; t <= last && zn[t] <= xd * zd[t]; ++t) {
            const double val = f[v[t]] + w * (xd - double(v[t])) * (xd - double(v[t]));
            if (val < best || (val == best && lab_in[v[t]] < best_lab)) {
                best = val;
                best_lab = lab_in[v[t]];
            }
        }
        d[x] = best;
        lab_out[x] = best_lab;
    }
}

}  // namespace bel::kernels
