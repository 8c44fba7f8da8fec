#include "nucleon/grid_ops.hpp"

#include "nucleon/errors.hpp"

namespace nucleon {

double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    if (n == 3) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
    std::size_t intervals = n - 1;
    std::size_t end = n - 1;
    double tail = 0.0;
    if (intervals % 2 == 1) {
        end = n - 4;
        tail = 3.0 * h / 8.0 * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[end + 3]);
    }
    double s = f[0] + f[end];
    for (std::size_t i = 1; i < end; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    return h / 3.0 * s + tail;
}

namespace {

double at(std::span<const double> f, long i, Parity parity) {
    const long n = static_cast<long>(f.size());
    if (i < 0) return parity == Parity::Even ? f[-i] : -f[-i];
    if (i >= n) return 0.0;
    return f[i];
}

}  // namespace

std::vector<double> fd6_first(std::span<const double> f, double h, Parity parity) {
    if (f.size() < 4) throw ParameterError("fd6_first: need at least 4 samples");
    static constexpr double c[] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    std::vector<double> out(f.size());
    for (long i = 0; i < static_cast<long>(f.size()); ++i) {
        double s = 0.0;
        for (long k = 1; k <= 3; ++k) s += c[k - 1] * (at(f, i + k, parity) - at(f, i - k, parity));
        out[i] = s / h;
    }
    return out;
}

std::vector<double> fd6_second(std::span<const double> f, double h, Parity parity) {
    if (f.size() < 4) throw ParameterError("fd6_second: need at least 4 samples");
    static constexpr double c[] = {3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
    std::vector<double> out(f.size());
    for (long i = 0; i < static_cast<long>(f.size()); ++i) {
        double s = -49.0 / 18.0 * f[i];
        for (long k = 1; k <= 3; ++k) s += c[k - 1] * (at(f, i + k, parity) + at(f, i - k, parity));
        out[i] = s / (h * h);
    }
    return out;
}

std::vector<double> uniform_grid(std::size_t n, double h) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<double>(i) * h;
    return r;
}

}  // namespace nucleon
