#include "vortexdyn/observables.hpp"

#include <stdexcept>

#include "vortexdyn/kernels.hpp"

namespace vortexdyn {

namespace {

void check_m(const Observable& o, const VortexSystem& sys) {
    if (o.required_m != 0 && o.required_m != sys.m)
        throw std::invalid_argument("observable '" + o.name + "' built for m=" +
                                    std::to_string(o.required_m) + ", evaluated at m=" +
                                    std::to_string(sys.m));
}

int merge_m(const Observable& f, const Observable& g) {
    if (f.required_m == 0) return g.required_m;
    if (g.required_m == 0 || g.required_m == f.required_m) return f.required_m;
    throw std::invalid_argument("combining observables with mismatched m");
}

} // namespace

double Observable::operator()(const VortexSystem& sys) const {
    check_m(*this, sys);
    return value(sys);
}

std::vector<double> Observable::grad(const VortexSystem& sys) const {
    check_m(*this, sys);
    return gradient(sys);
}

Observable operator+(const Observable& f, const Observable& g) {
    Observable out;
    out.name = f.name + "+" + g.name;
    out.required_m = merge_m(f, g);
    out.value = [fv = f.value, gv = g.value](const VortexSystem& s) { return fv(s) + gv(s); };
    out.gradient = [fg = f.gradient, gg = g.gradient](const VortexSystem& s) {
        auto a = fg(s);
        const auto b = gg(s);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
    };
    return out;
}

Observable operator*(const Observable& f, const Observable& g) {
    Observable out;
    out.name = f.name + "*" + g.name;
    out.required_m = merge_m(f, g);
    out.value = [fv = f.value, gv = g.value](const VortexSystem& s) { return fv(s) * gv(s); };
    out.gradient = [f, g](const VortexSystem& s) {
        const double fval = f.value(s);
        const double gval = g.value(s);
        auto fg = f.gradient(s);
        const auto gg = g.gradient(s);
        for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = gval * fg[i] + fval * gg[i];
        return fg;
    };
    return out;
}

Observable operator*(double c, const Observable& f) {
    Observable out;
    out.name = std::to_string(c) + "*" + f.name;
    out.required_m = f.required_m;
    out.value = [c, fv = f.value](const VortexSystem& s) { return c * fv(s); };
    out.gradient = [c, fg = f.gradient](const VortexSystem& s) {
        auto g = fg(s);
        for (auto& v : g) v *= c;
        return g;
    };
    return out;
}

Observable obs_coordinate_x(int j, int alpha) {
    Observable o;
    o.name = "x" + std::to_string(j + 1) + "_" + std::to_string(alpha + 1);
    o.value = [j, alpha](const VortexSystem& s) { return s.x(j, alpha); };
    o.gradient = [j, alpha](const VortexSystem& s) {
        std::vector<double> g(s.state_size(), 0.0);
        g[j * s.dim() + 2 * alpha] = 1.0;
        return g;
    };
    return o;
}

Observable obs_coordinate_y(int j, int alpha) {
    Observable o;
    o.name = "y" + std::to_string(j + 1) + "_" + std::to_string(alpha + 1);
    o.value = [j, alpha](const VortexSystem& s) { return s.y(j, alpha); };
    o.gradient = [j, alpha](const VortexSystem& s) {
        std::vector<double> g(s.state_size(), 0.0);
        g[j * s.dim() + 2 * alpha + 1] = 1.0;
        return g;
    };
    return o;
}

Observable obs_Q(int alpha, int m) {
    Observable o;
    o.name = "Q" + std::to_string(alpha + 1);
    o.required_m = m;
    o.value = [alpha](const VortexSystem& s) {
        double q = 0.0;
        for (int j = 0; j < s.N; ++j) q += s.strengths[j] * s.x(j, alpha);
        return q;
    };
    o.gradient = [alpha](const VortexSystem& s) {
        std::vector<double> g(s.state_size(), 0.0);
        for (int j = 0; j < s.N; ++j) g[j * s.dim() + 2 * alpha] = s.strengths[j];
        return g;
    };
    return o;
}

Observable obs_P(int alpha, int m) {
    Observable o;
    o.name = "P" + std::to_string(alpha + 1);
    o.required_m = m;
    o.value = [alpha](const VortexSystem& s) {
        double p = 0.0;
        for (int j = 0; j < s.N; ++j) p += s.strengths[j] * s.y(j, alpha);
        return p;
    };
    o.gradient = [alpha](const VortexSystem& s) {
        std::vector<double> g(s.state_size(), 0.0);
        for (int j = 0; j < s.N; ++j) g[j * s.dim() + 2 * alpha + 1] = s.strengths[j];
        return g;
    };
    return o;
}

Observable obs_F_plus(int alpha, int beta, int m) {
    Observable o;
    o.name = "Fp" + std::to_string(alpha + 1) + std::to_string(beta + 1);
    o.required_m = m;
    o.value = [alpha, beta](const VortexSystem& s) {
        double f = 0.0;
        for (int j = 0; j < s.N; ++j)
            f += s.strengths[j] *
                 (s.x(j, alpha) * s.x(j, beta) + s.y(j, alpha) * s.y(j, beta));
        return f;
    };
    o.gradient = [alpha, beta](const VortexSystem& s) {
        std::vector<double> g(s.state_size(), 0.0);
        const int d = s.dim();
        for (int j = 0; j < s.N; ++j) {
            const double G = s.strengths[j];
            g[j * d + 2 * alpha] += G * s.x(j, beta);
            g[j * d + 2 * beta] += G * s.x(j, alpha);
            g[j * d + 2 * alpha + 1] += G * s.y(j, beta);
            g[j * d + 2 * beta + 1] += G * s.y(j, alpha);
        }
        return g;
    };
    return o;
}

Observable obs_F_minus(int alpha, int beta, int m) {
    Observable o;
    o.name = "Fm" + std::to_string(alpha + 1) + std::to_string(beta + 1);
    o.required_m = m;
    o.value = [alpha, beta](const VortexSystem& s) {
        double f = 0.0;
        for (int j = 0; j < s.N; ++j)
            f += s.strengths[j] *
                 (s.x(j, alpha) * s.y(j, beta) - s.x(j, beta) * s.y(j, alpha));
        return f;
    };
    o.gradient = [alpha, beta](const VortexSystem& s) {
        std::vector<double> g(s.state_size(), 0.0);
        const int d = s.dim();
        for (int j = 0; j < s.N; ++j) {
            const double G = s.strengths[j];
            g[j * d + 2 * alpha] += G * s.y(j, beta);
            g[j * d + 2 * beta + 1] += G * s.x(j, alpha);
            g[j * d + 2 * beta] -= G * s.y(j, alpha);
            g[j * d + 2 * alpha + 1] -= G * s.x(j, beta);
        }
        return g;
    };
    return o;
}

Observable obs_hamiltonian() {
    Observable o;
    o.name = "H";
    o.value = [](const VortexSystem& s) { return hamiltonian(s); };
    o.gradient = [](const VortexSystem& s) { return hamiltonian_gradient(s); };
    return o;
}

Observable obs_Q2P2(int alpha, int m) {
    const auto q = obs_Q(alpha, m);
    const auto p = obs_P(alpha, m);
    Observable o = q * q + p * p;
    o.name = "R" + std::to_string(alpha + 1);
    return o;
}

InvariantSuite standard_invariants(int m) {
    if (m < 1) throw std::invalid_argument("standard_invariants: m must be >= 1");
    InvariantSuite suite;
    suite.m = m;
    for (int a = 0; a < m; ++a) suite.standard.push_back(obs_Q(a, m));
    for (int a = 0; a < m; ++a) suite.standard.push_back(obs_P(a, m));
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) suite.standard.push_back(obs_F_plus(a, b, m));
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) suite.standard.push_back(obs_F_minus(a, b, m));
    suite.hamiltonian = obs_hamiltonian();
    suite.involutive = involutive_family(m);
    return suite;
}

std::vector<Observable> involutive_family(int m) {
    if (m < 1) throw std::invalid_argument("involutive_family: m must be >= 1");
    std::vector<Observable> fam;
    fam.push_back(obs_hamiltonian());
    for (int a = 0; a < m; ++a) fam.push_back(obs_F_plus(a, a, m));
    for (int a = 0; a < m; ++a) fam.push_back(obs_Q2P2(a, m));
    return fam;
}

std::vector<Observable> InvariantSuite::tracked() const {
    std::vector<Observable> all = standard;
    all.push_back(hamiltonian);
    return all;
}

double poisson_bracket(const Observable& f, const Observable& g, const VortexSystem& sys) {
    const auto gf = f.grad(sys);
    const auto gg = g.grad(sys);
    const int d = sys.dim();
    double sum = 0.0;
    for (int j = 0; j < sys.N; ++j) {
        double per = 0.0;
        for (int a = 0; a < sys.m; ++a) {
            const int ix = j * d + 2 * a;
            per += gf[ix] * gg[ix + 1] - gf[ix + 1] * gg[ix];
        }
        sum += per / sys.strengths[j];
    }
    return sum;
}

BracketTable bracket_table(const InvariantSuite& suite, const VortexSystem& sys) {
    const auto all = suite.tracked();
    const int n = static_cast<int>(all.size());
    BracketTable table;
    table.names.reserve(n);
    for (const auto& o : all) table.names.push_back(o.name);
    table.values.assign(static_cast<std::size_t>(n) * n, 0.0);

    // evaluate each gradient once
    std::vector<std::vector<double>> grads;
    grads.reserve(n);
    for (const auto& o : all) grads.push_back(o.grad(sys));

    const int d = sys.dim();
    for (int r = 0; r < n; ++r)
        for (int c = r + 1; c < n; ++c) {
            double sum = 0.0;
            for (int j = 0; j < sys.N; ++j) {
                double per = 0.0;
                for (int a = 0; a < sys.m; ++a) {
                    const int ix = j * d + 2 * a;
                    per += grads[r][ix] * grads[c][ix + 1] - grads[r][ix + 1] * grads[c][ix];
                }
                sum += per / sys.strengths[j];
            }
            table.values[static_cast<std::size_t>(r) * n + c] = sum;
            table.values[static_cast<std::size_t>(c) * n + r] = -sum;
        }
    return table;
}

Observable observable_by_name(const std::string& name, int m) {
    auto parse_axis = [&](std::size_t from) {
        const int a = std::stoi(name.substr(from));
        if (a < 1 || a > m) throw std::invalid_argument("observable '" + name + "': axis out of range");
        return a - 1;
    };
    if (name == "H") return obs_hamiltonian();
    if (name.size() >= 2 && (name[0] == 'Q' || name[0] == 'P' || name[0] == 'R')) {
        const int a = parse_axis(1);
        if (name[0] == 'Q') return obs_Q(a, m);
        if (name[0] == 'P') return obs_P(a, m);
        return obs_Q2P2(a, m);
    }
    if (name.size() == 4 && name[0] == 'F' && (name[1] == 'p' || name[1] == 'm')) {
        const int a = name[2] - '1';
        const int b = name[3] - '1';
        if (a < 0 || b < 0 || a >= m || b >= m)
            throw std::invalid_argument("observable '" + name + "': axis out of range");
        if (name[1] == 'p') {
            if (a > b) throw std::invalid_argument("observable '" + name + "': need alpha <= beta");
            return obs_F_plus(a, b, m);
        }
        if (a >= b) throw std::invalid_argument("observable '" + name + "': need alpha < beta");
        return obs_F_minus(a, b, m);
    }
    if (name.size() >= 4 && (name[0] == 'x' || name[0] == 'y')) {
        const auto sep = name.find('_');
        if (sep != std::string::npos) {
            const int j = std::stoi(name.substr(1, sep - 1)) - 1;
            const int a = std::stoi(name.substr(sep + 1)) - 1;
            if (j >= 0 && a >= 0 && a < m)
                return name[0] == 'x' ? obs_coordinate_x(j, a) : obs_coordinate_y(j, a);
        }
    }
    throw std::invalid_argument("unknown observable name '" + name +
                                "' (expected H, Q<a>, P<a>, R<a>, Fp<ab>, Fm<ab>, x<j>_<a>, y<j>_<a>)");
}

} // namespace vortexdyn
