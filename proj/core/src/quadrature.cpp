#include "rmtcov/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "rmtcov/errors.hpp"

namespace rmtcov {

namespace {

// QUADPACK dqk15 nodes/weights on [-1, 1].
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct Panel {
    double a, b, integral, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double fsum = f(c - x) + f(c + x);
        kron += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    return Panel{a, b, kron, std::abs(kron - gauss)};
}

}  // namespace

double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol, double rel_tol) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    auto worse = [](const Panel& l, const Panel& r) { return l.error < r.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> queue(worse);
    Panel root = gk15(f, a, b);
    double total = root.integral;
    double err = root.error;
    queue.push(root);
    const int max_panels = 40000;
    int panels = 1;
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (panels >= max_panels || queue.empty())
            throw QuadratureFailure("adaptive quadrature exhausted its panel budget");
        Panel p = queue.top();
        queue.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b)
            throw QuadratureFailure("adaptive quadrature interval collapsed");
        Panel l = gk15(f, p.a, mid);
        Panel r = gk15(f, mid, p.b);
        total += l.integral + r.integral - p.integral;
        err += l.error + r.error - p.error;
        queue.push(l);
        queue.push(r);
        ++panels;
    }
    return sign * total;
}

}  // namespace rmtcov
