#include "vortexdyn/field2d.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace vortexdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-thread FFTW plans and buffers for one resolution. Plan creation is
// serialized (the FFTW planner is not thread-safe); execution uses
// per-workspace buffers only.
class SpectralWorkspace {
public:
    SpectralWorkspace(int nx, int ny) : nx_(nx), ny_(ny), nk_(ny / 2 + 1) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(nx) * nk_);
        static std::mutex planner_mutex;
        std::lock_guard<std::mutex> lock(planner_mutex);
        fwd_ = fftw_plan_dft_r2c_2d(nx, ny, real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(nx, ny, spec_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
    }
    ~SpectralWorkspace() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nk() const { return nk_; }

    // normalized coefficients: f = sum f_k exp(i k.x)
    std::vector<std::complex<double>> forward(const std::vector<double>& field) {
        std::memcpy(real_, field.data(), sizeof(double) * field.size());
        fftw_execute(fwd_);
        const double scale = 1.0 / (static_cast<double>(nx_) * ny_);
        std::vector<std::complex<double>> out(static_cast<std::size_t>(nx_) * nk_);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::complex<double>(spec_[i][0] * scale, spec_[i][1] * scale);
        return out;
    }

    std::vector<double> inverse(const std::vector<std::complex<double>>& coeff) {
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            spec_[i][0] = coeff[i].real();
            spec_[i][1] = coeff[i].imag();
        }
        fftw_execute(bwd_);
        std::vector<double> out(static_cast<std::size_t>(nx_) * ny_);
        std::memcpy(out.data(), real_, sizeof(double) * out.size());
        return out;
    }

private:
    int nx_, ny_, nk_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

SpectralWorkspace& workspace(int nx, int ny) {
    thread_local std::vector<std::unique_ptr<SpectralWorkspace>> cache;
    for (auto& w : cache)
        if (w->nx() == nx && w->ny() == ny) return *w;
    cache.push_back(std::make_unique<SpectralWorkspace>(nx, ny));
    return *cache.back();
}

inline int wavenumber_x(int ix, int nx) { return ix <= nx / 2 ? ix : ix - nx; }

void check_grid(const VorticityGrid& g) {
    if (g.nx < 4 || g.ny < 4 || g.nx % 2 || g.ny % 2)
        throw std::invalid_argument("VorticityGrid: nx, ny must be even and >= 4");
    if (g.values.size() != static_cast<std::size_t>(g.nx) * g.ny)
        throw std::invalid_argument("VorticityGrid: values size mismatch");
    if (!(g.dealias_fraction > 0.0 && g.dealias_fraction <= 1.0))
        throw std::invalid_argument("VorticityGrid: dealias_fraction must be in (0,1]");
}

// spectral d/dx and d/dy; the Nyquist mode of the differentiated direction is
// zeroed (its derivative has no consistent sign on the real grid)
enum class Deriv { X, Y };

std::vector<std::complex<double>> derivative_coeff(const std::vector<std::complex<double>>& c,
                                                   int nx, int ny, Deriv which) {
    const int nk = ny / 2 + 1;
    std::vector<std::complex<double>> out(c.size());
    for (int ix = 0; ix < nx; ++ix) {
        const int kx = wavenumber_x(ix, nx);
        for (int iy = 0; iy < nk; ++iy) {
            const int ky = iy;
            double k = which == Deriv::X ? kx : ky;
            if (which == Deriv::X && ix == nx / 2) k = 0.0;
            if (which == Deriv::Y && iy == ny / 2) k = 0.0;
            out[static_cast<std::size_t>(ix) * nk + iy] =
                std::complex<double>(0.0, k) * c[static_cast<std::size_t>(ix) * nk + iy];
        }
    }
    return out;
}

void apply_dealias_mask(std::vector<std::complex<double>>& c, int nx, int ny, double fraction) {
    const int nk = ny / 2 + 1;
    const int cut_x = static_cast<int>(std::floor(fraction * (nx / 2)));
    const int cut_y = static_cast<int>(std::floor(fraction * (ny / 2)));
    for (int ix = 0; ix < nx; ++ix) {
        const int kx = std::abs(wavenumber_x(ix, nx));
        for (int iy = 0; iy < nk; ++iy)
            if (kx > cut_x || iy > cut_y) c[static_cast<std::size_t>(ix) * nk + iy] = 0.0;
    }
}

void subtract_mean(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    s /= static_cast<double>(v.size());
    for (double& x : v) x -= s;
}

bool grid_parallel(const VorticityGrid& g, ExecPolicy policy) {
    switch (policy) {
        case ExecPolicy::Serial: return false;
        case ExecPolicy::Parallel: return true;
        case ExecPolicy::Auto: break;
    }
    return static_cast<long long>(g.nx) * g.ny >= 128 * 128;
}

// dnu/dt = {psi, nu} with psi = Poisson(nu); also reports max flow speed
std::vector<double> vorticity_rhs(const std::vector<double>& nu_values,
                                  const VorticityGrid& proto, bool parallel,
                                  double* max_speed_out) {
    const int nx = proto.nx, ny = proto.ny;
    auto& ws = workspace(nx, ny);
    const int nk = ny / 2 + 1;

    auto nu_hat = ws.forward(nu_values);
    auto psi_hat = nu_hat;
    for (int ix = 0; ix < nx; ++ix) {
        const int kx = wavenumber_x(ix, nx);
        for (int iy = 0; iy < nk; ++iy) {
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(iy) * iy;
            auto& v = psi_hat[static_cast<std::size_t>(ix) * nk + iy];
            v = k2 == 0.0 ? 0.0 : -v / k2;
        }
    }

    const auto px = ws.inverse(derivative_coeff(psi_hat, nx, ny, Deriv::X));
    const auto py = ws.inverse(derivative_coeff(psi_hat, nx, ny, Deriv::Y));
    const auto vx = ws.inverse(derivative_coeff(nu_hat, nx, ny, Deriv::X));
    const auto vy = ws.inverse(derivative_coeff(nu_hat, nx, ny, Deriv::Y));

    const long long total = static_cast<long long>(nx) * ny;
    std::vector<double> prod(total);
    double vmax2 = 0.0;
    if (parallel) {
#pragma omp parallel for schedule(static) reduction(max : vmax2)
        for (long long i = 0; i < total; ++i) {
            prod[i] = px[i] * vy[i] - py[i] * vx[i];
            vmax2 = std::max(vmax2, px[i] * px[i] + py[i] * py[i]);
        }
    } else {
        for (long long i = 0; i < total; ++i) {
            prod[i] = px[i] * vy[i] - py[i] * vx[i];
            vmax2 = std::max(vmax2, px[i] * px[i] + py[i] * py[i]);
        }
    }
    if (max_speed_out) *max_speed_out = std::sqrt(vmax2);

    auto prod_hat = ws.forward(prod);
    apply_dealias_mask(prod_hat, nx, ny, proto.dealias_fraction);
    auto out = ws.inverse(prod_hat);
    subtract_mean(out);
    return out;
}

} // namespace

double VorticityGrid::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

void VorticityGrid::project_zero_mean() { subtract_mean(values); }

VorticityGrid VorticityGrid::from_function(int nx, int ny,
                                           const std::function<double(double, double)>& f,
                                           double dealias_fraction) {
    VorticityGrid g;
    g.nx = nx;
    g.ny = ny;
    g.dealias_fraction = dealias_fraction;
    g.values.resize(static_cast<std::size_t>(nx) * ny);
    for (int ix = 0; ix < nx; ++ix) {
        const double x = kTwoPi * ix / nx;
        for (int iy = 0; iy < ny; ++iy) {
            const double y = kTwoPi * iy / ny;
            g.values[static_cast<std::size_t>(ix) * ny + iy] = f(x, y);
        }
    }
    check_grid(g);
    return g;
}

VorticityGrid VorticityGrid::zeros(int nx, int ny, double dealias_fraction) {
    return from_function(nx, ny, [](double, double) { return 0.0; }, dealias_fraction);
}

StreamField solve_poisson(const VorticityGrid& grid, bool auto_project) {
    check_grid(grid);
    const double mu = grid.mean();
    if (std::fabs(mu) > 1e-12 && !auto_project)
        throw std::invalid_argument("solve_poisson: grid mean " + std::to_string(mu) +
                                    " exceeds 1e-12; project to zero mean first or pass "
                                    "auto_project");

    auto& ws = workspace(grid.nx, grid.ny);
    auto hat = ws.forward(grid.values);
    const int nk = grid.ny / 2 + 1;
    for (int ix = 0; ix < grid.nx; ++ix) {
        const int kx = wavenumber_x(ix, grid.nx);
        for (int iy = 0; iy < nk; ++iy) {
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(iy) * iy;
            auto& v = hat[static_cast<std::size_t>(ix) * nk + iy];
            v = k2 == 0.0 ? 0.0 : -v / k2;
        }
    }
    StreamField psi;
    psi.nx = grid.nx;
    psi.ny = grid.ny;
    psi.values = ws.inverse(hat);
    subtract_mean(psi.values);
    return psi;
}

std::vector<double> laplacian(const StreamField& psi) {
    auto& ws = workspace(psi.nx, psi.ny);
    auto hat = ws.forward(psi.values);
    const int nk = psi.ny / 2 + 1;
    for (int ix = 0; ix < psi.nx; ++ix) {
        const int kx = wavenumber_x(ix, psi.nx);
        for (int iy = 0; iy < nk; ++iy) {
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(iy) * iy;
            hat[static_cast<std::size_t>(ix) * nk + iy] *= -k2;
        }
    }
    return ws.inverse(hat);
}

std::vector<double> bracket(const StreamField& psi, const VorticityGrid& nu, ExecPolicy policy) {
    check_grid(nu);
    if (psi.nx != nu.nx || psi.ny != nu.ny)
        throw std::invalid_argument("bracket: resolution mismatch");

    const int nx = nu.nx, ny = nu.ny;
    auto& ws = workspace(nx, ny);
    const auto psi_hat = ws.forward(psi.values);
    const auto nu_hat = ws.forward(nu.values);

    const auto px = ws.inverse(derivative_coeff(psi_hat, nx, ny, Deriv::X));
    const auto py = ws.inverse(derivative_coeff(psi_hat, nx, ny, Deriv::Y));
    const auto vx = ws.inverse(derivative_coeff(nu_hat, nx, ny, Deriv::X));
    const auto vy = ws.inverse(derivative_coeff(nu_hat, nx, ny, Deriv::Y));

    const long long total = static_cast<long long>(nx) * ny;
    std::vector<double> prod(total);
    if (grid_parallel(nu, policy)) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < total; ++i) prod[i] = px[i] * vy[i] - py[i] * vx[i];
    } else {
        for (long long i = 0; i < total; ++i) prod[i] = px[i] * vy[i] - py[i] * vx[i];
    }

    auto prod_hat = ws.forward(prod);
    apply_dealias_mask(prod_hat, nx, ny, nu.dealias_fraction);
    return ws.inverse(prod_hat);
}

VorticityGrid step_vorticity(const VorticityGrid& grid, double dt, ExecPolicy policy) {
    check_grid(grid);
    if (dt <= 0.0) throw std::invalid_argument("step_vorticity: dt must be > 0");
    if (std::fabs(grid.mean()) > 1e-12)
        throw std::invalid_argument("step_vorticity: grid must be zero-mean");

    const bool parallel = grid_parallel(grid, policy);
    const long long total = static_cast<long long>(grid.nx) * grid.ny;

    double vmax = 0.0;
    const auto k1 = vorticity_rhs(grid.values, grid, parallel, &vmax);

    std::vector<double> stage(total);
    for (long long i = 0; i < total; ++i) stage[i] = grid.values[i] + 0.5 * dt * k1[i];
    const auto k2 = vorticity_rhs(stage, grid, parallel, nullptr);

    for (long long i = 0; i < total; ++i) stage[i] = grid.values[i] + 0.5 * dt * k2[i];
    const auto k3 = vorticity_rhs(stage, grid, parallel, nullptr);

    for (long long i = 0; i < total; ++i) stage[i] = grid.values[i] + dt * k3[i];
    const auto k4 = vorticity_rhs(stage, grid, parallel, nullptr);

    VorticityGrid out = grid;
    for (long long i = 0; i < total; ++i)
        out.values[i] = grid.values[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.project_zero_mean();
    out.cfl_warning = vmax * dt * std::max(grid.nx, grid.ny) / kTwoPi > 0.5;
    return out;
}

std::vector<double> casimirs(const VorticityGrid& grid, int k_max) {
    check_grid(grid);
    if (k_max < 1) throw std::invalid_argument("casimirs: k_max must be >= 1");
    const double cell = kTwoPi * kTwoPi / (static_cast<double>(grid.nx) * grid.ny);
    std::vector<double> out(k_max, 0.0);
    for (double v : grid.values) {
        double p = 1.0;
        for (int k = 0; k < k_max; ++k) {
            p *= v;
            out[k] += p;
        }
    }
    for (auto& v : out) v *= cell;
    return out;
}

double steady_residual(const VorticityGrid& grid) {
    const auto psi = solve_poisson(grid, true);
    const auto br = bracket(psi, grid);
    double worst = 0.0;
    for (double v : br) worst = std::max(worst, std::fabs(v));
    return worst;
}

double dirichlet_energy(const VorticityGrid& grid) {
    check_grid(grid);
    auto& ws = workspace(grid.nx, grid.ny);
    auto hat = ws.forward(grid.values);
    const int nk = grid.ny / 2 + 1;
    // D = (2pi)^2 sum_k |k|^2 |psi_k|^2 = (2pi)^2 sum_k |nu_k|^2 / |k|^2
    double sum = 0.0;
    for (int ix = 0; ix < grid.nx; ++ix) {
        const int kx = wavenumber_x(ix, grid.nx);
        for (int iy = 0; iy < nk; ++iy) {
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(iy) * iy;
            if (k2 == 0.0) continue;
            const double weight = (iy == 0 || iy == grid.ny / 2) ? 1.0 : 2.0;
            sum += weight * std::norm(hat[static_cast<std::size_t>(ix) * nk + iy]) / k2;
        }
    }
    return kTwoPi * kTwoPi * sum;
}

double max_speed(const VorticityGrid& grid) {
    const auto psi = solve_poisson(grid, true);
    auto& ws = workspace(grid.nx, grid.ny);
    const auto psi_hat = ws.forward(psi.values);
    const auto px = ws.inverse(derivative_coeff(psi_hat, grid.nx, grid.ny, Deriv::X));
    const auto py = ws.inverse(derivative_coeff(psi_hat, grid.nx, grid.ny, Deriv::Y));
    double worst = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i)
        worst = std::max(worst, px[i] * px[i] + py[i] * py[i]);
    return std::sqrt(worst);
}

FieldRecord evolve(VorticityGrid& grid, double dt, long long steps, int record_every,
                   int casimir_kmax, ExecPolicy policy) {
    if (record_every < 1) throw std::invalid_argument("evolve: record_every must be >= 1");
    FieldRecord rec;
    rec.casimir_kmax = casimir_kmax;
    auto sample = [&](double t) {
        rec.times.push_back(t);
        rec.energy.push_back(dirichlet_energy(grid));
        rec.casimir_series.push_back(casimirs(grid, casimir_kmax));
    };
    sample(0.0);
    for (long long k = 0; k < steps; ++k) {
        grid = step_vorticity(grid, dt, policy);
        rec.any_cfl_warning = rec.any_cfl_warning || grid.cfl_warning;
        if ((k + 1) % record_every == 0 || k + 1 == steps)
            sample(static_cast<double>(k + 1) * dt);
    }
    return rec;
}

// ------------------------------------------------------------------- io ---

namespace {
constexpr char kGridMagic[8] = {'V', 'D', 'Y', 'N', 'G', 'R', 'D', '1'};
}

void write_grid_binary(const std::string& path, const VorticityGrid& grid, double time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kGridMagic, 8);
    const std::uint32_t nx = grid.nx, ny = grid.ny;
    out.write(reinterpret_cast<const char*>(&nx), 4);
    out.write(reinterpret_cast<const char*>(&ny), 4);
    out.write(reinterpret_cast<const char*>(&time), 8);
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_grid_csv(const std::string& path, const VorticityGrid& grid, double time) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", time);
    out << "# nx=" << grid.nx << " ny=" << grid.ny << " time=" << buf << "\n";
    for (int ix = 0; ix < grid.nx; ++ix) {
        for (int iy = 0; iy < grid.ny; ++iy) {
            std::snprintf(buf, sizeof buf, "%.17g",
                          grid.values[static_cast<std::size_t>(ix) * grid.ny + iy]);
            out << buf << (iy + 1 == grid.ny ? "" : ",");
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

GridSnapshot read_grid_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    GridSnapshot snap;
    if (in && std::memcmp(magic, kGridMagic, 8) == 0) {
        std::uint32_t nx = 0, ny = 0;
        in.read(reinterpret_cast<char*>(&nx), 4);
        in.read(reinterpret_cast<char*>(&ny), 4);
        in.read(reinterpret_cast<char*>(&snap.time), 8);
        snap.grid.nx = static_cast<int>(nx);
        snap.grid.ny = static_cast<int>(ny);
        snap.grid.values.resize(static_cast<std::size_t>(nx) * ny);
        in.read(reinterpret_cast<char*>(snap.grid.values.data()),
                static_cast<std::streamsize>(snap.grid.values.size() * sizeof(double)));
        if (!in) throw std::runtime_error("truncated grid file: " + path);
        return snap;
    }
    // CSV fallback
    in.close();
    std::ifstream text(path);
    std::string header;
    std::getline(text, header);
    int nx = 0, ny = 0;
    double time = 0.0;
    if (std::sscanf(header.c_str(), "# nx=%d ny=%d time=%lf", &nx, &ny, &time) != 3)
        throw std::runtime_error("unrecognized grid file header: " + path);
    snap.time = time;
    snap.grid.nx = nx;
    snap.grid.ny = ny;
    snap.grid.values.reserve(static_cast<std::size_t>(nx) * ny);
    std::string line;
    while (std::getline(text, line)) {
        std::size_t from = 0;
        while (from < line.size()) {
            std::size_t to = line.find(',', from);
            if (to == std::string::npos) to = line.size();
            snap.grid.values.push_back(std::stod(line.substr(from, to - from)));
            from = to + 1;
        }
    }
    if (snap.grid.values.size() != static_cast<std::size_t>(nx) * ny)
        throw std::runtime_error("grid file value count mismatch: " + path);
    return snap;
}

} // namespace vortexdyn
