#pragma once

// Quadrature oracle for the Laplace fundamental-solution constant: the flux of
// grad(c |z|^{2-2m}) through a sphere of radius R in R^{2m} must equal 1.
// Tensor Gauss-Legendre in the polar angles, trapezoid in the periodic angle,
// radial derivative by central differences of the potential (kept independent
// of the library's analytic gradient path).

#include <cmath>
#include <numbers>
#include <vector>

namespace testsupport {

struct GaussLegendre24 {
    std::vector<double> nodes, weights;  // on [0, pi]
    GaussLegendre24() {
        static const double x[12] = {
            0.0640568928626056260850430826247450385909,
            0.1911188674736163091586398207570696318404,
            0.3150426796961633743867932913198102407864,
            0.4337935076260451384870842319133497124524,
            0.5454214713888395356583756172183723700107,
            0.6480936519369755692524957869107476266696,
            0.7401241915785543642438281030999784255232,
            0.8200019859739029219539498726697452080761,
            0.8864155270044010342131543419821967550873,
            0.9382745520027327585236490017087214496548,
            0.9747285559713094981983919930081690617411,
            0.9951872199970213601799974097007368118745};
        static const double w[12] = {
            0.1279381953467521569740561652246953718517,
            0.1258374563468282961213753825111836887264,
            0.1216704729278033912044631534762624256070,
            0.1155056680537256013533444839067835598622,
            0.1074442701159656347825773424466062227946,
            0.0976186521041138882698806644642471544279,
            0.0861901615319532759171852029837426671850,
            0.0733464814110803057340336152531165181193,
            0.0592985849154367807463677585001085845412,
            0.0442774388174198061686027482113382288593,
            0.0285313886289336631813078159518782864491,
            0.0123412297999871995468056670700372915759};
        const double half_pi = 0.5 * std::numbers::pi;
        for (int i = 0; i < 12; ++i) {
            nodes.push_back(half_pi * (1.0 - x[i]));
            weights.push_back(half_pi * w[i]);
            nodes.push_back(half_pi * (1.0 + x[i]));
            weights.push_back(half_pi * w[i]);
        }
    }
};

inline double kernel_potential(double c, int m, const std::vector<double>& z) {
    double r2 = 0.0;
    for (double v : z) r2 += v * v;
    double p = c;
    for (int i = 0; i < m - 1; ++i) p /= r2;
    return p;  // c * r^{2-2m}
}

inline double kernel_radial_derivative(double c, int m, const std::vector<double>& z, double R) {
    const double h = 1e-5;
    std::vector<double> zp = z, zm = z;
    for (std::size_t i = 0; i < z.size(); ++i) {
        zp[i] = z[i] * (1.0 + h / R);
        zm[i] = z[i] * (1.0 - h / R);
    }
    return (kernel_potential(c, m, zp) - kernel_potential(c, m, zm)) / (2.0 * h);
}

inline double flux_through_sphere(double c, int m, double R) {
    const GaussLegendre24 gl;
    const int n = 2 * m;
    const int nphi = 48;
    const int nang = n - 2;
    std::vector<int> idx(nang, 0);
    double total = 0.0;
    while (true) {
        double wpolar = 1.0;
        std::vector<double> theta(nang);
        for (int i = 0; i < nang; ++i) {
            theta[i] = gl.nodes[idx[i]];
            wpolar *= gl.weights[idx[i]] * std::pow(std::sin(theta[i]), nang - i);
        }
        for (int p = 0; p < nphi; ++p) {
            const double phi = 2.0 * std::numbers::pi * p / nphi;
            std::vector<double> z(n);
            double sprod = 1.0;
            for (int i = 0; i < nang; ++i) {
                z[i] = R * sprod * std::cos(theta[i]);
                sprod *= std::sin(theta[i]);
            }
            z[n - 2] = R * sprod * std::cos(phi);
            z[n - 1] = R * sprod * std::sin(phi);
            const double w = wpolar * (2.0 * std::numbers::pi / nphi) * std::pow(R, n - 1);
            total += w * kernel_radial_derivative(c, m, z, R);
        }
        int carry = nang - 1;
        while (carry >= 0 && ++idx[carry] == static_cast<int>(gl.nodes.size())) {
            idx[carry] = 0;
            --carry;
        }
        if (carry < 0) break;
    }
    return total;
}

} // namespace testsupport
