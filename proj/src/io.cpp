#include "geoxray/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace geoxray {

namespace {

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw ParameterError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw ParameterError("cannot open '" + path + "' for writing");
    return out;
}

int as_count(double v, const std::string& what) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) throw ParameterError("invalid " + what + " in header");
    return static_cast<int>(v);
}

void expect_count(const std::vector<double>& nums, std::size_t header, std::size_t body, const std::string& path) {
    if (nums.size() != header + body)
        throw ParameterError("'" + path + "': expected " + std::to_string(body) + " values, found " +
                             std::to_string(nums.size() >= header ? nums.size() - header : 0));
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> read_numbers(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
            throw ParameterError("'" + path + "': not a number: '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

LambdaGrid read_lambda_grid(const std::string& path) {
    const auto nums = read_numbers(path);
    if (nums.size() < 6) throw ParameterError("'" + path + "': truncated header");
    LambdaGrid g;
    g.nx = as_count(nums[0], "nx");
    g.ny = as_count(nums[1], "ny");
    g.xmin = nums[2];
    g.xmax = nums[3];
    g.ymin = nums[4];
    g.ymax = nums[5];
    expect_count(nums, 6, static_cast<std::size_t>(g.nx) * g.ny, path);
    g.values.assign(nums.begin() + 6, nums.end());
    return g;
}

void write_lambda_grid(const std::string& path, const LambdaGrid& g) {
    std::ofstream out = open_out(path);
    out << g.nx << ' ' << g.ny << ' ' << format_double(g.xmin) << ' ' << format_double(g.xmax) << ' '
        << format_double(g.ymin) << ' ' << format_double(g.ymax) << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) out << (i ? " " : "") << format_double(g.values[static_cast<std::size_t>(j) * g.nx + i]);
        out << '\n';
    }
}

ScalarField read_scalar_field(const std::string& path) {
    const LambdaGrid lg = read_lambda_grid(path);
    return ScalarField(Grid2D{lg.nx, lg.ny, lg.xmin, lg.xmax, lg.ymin, lg.ymax}, lg.values);
}

void write_scalar_field(const std::string& path, const ScalarField& f) {
    const Grid2D& g = f.grid();
    write_lambda_grid(path, LambdaGrid{g.nx, g.ny, g.xmin, g.xmax, g.ymin, g.ymax, f.values()});
}

Sinogram read_sinogram(const std::string& path) {
    const auto nums = read_numbers(path);
    if (nums.size() < 3) throw ParameterError("'" + path + "': truncated header");
    Sinogram s(as_count(nums[0], "ns"), as_count(nums[1], "nomega"), nums[2]);
    expect_count(nums, 3, s.values.size(), path);
    std::copy(nums.begin() + 3, nums.end(), s.values.begin());
    return s;
}

void write_sinogram(const std::string& path, const Sinogram& s) {
    std::ofstream out = open_out(path);
    out << s.ns << ' ' << s.nomega << ' ' << format_double(s.S) << '\n';
    for (int i = 0; i < s.ns; ++i) {
        for (int j = 0; j < s.nomega; ++j) out << (j ? " " : "") << format_double(s.at(i, j));
        out << '\n';
    }
}

FanBeamData read_fan_data(const std::string& path) {
    const auto nums = read_numbers(path);
    if (nums.size() < 2) throw ParameterError("'" + path + "': truncated header");
    FanBeamData d(FanGeometry{as_count(nums[0], "nbeta"), as_count(nums[1], "nalpha")});
    const std::size_t n = d.fan.size();
    expect_count(nums, 2, 2 * n, path);
    for (std::size_t k = 0; k < n; ++k) {
        d.values[k] = nums[2 + k];
        const double m = nums[2 + n + k];
        if (m != 0.0 && m != 1.0) throw ParameterError("'" + path + "': mask entries must be 0 or 1");
        d.mask[k] = m != 0.0;
        if (d.mask[k]) ++d.trapped;
    }
    return d;
}

void write_fan_data(const std::string& path, const FanBeamData& d) {
    std::ofstream out = open_out(path);
    out << d.fan.nbeta << ' ' << d.fan.nalpha << '\n';
    for (int i = 0; i < d.fan.nbeta; ++i) {
        for (int j = 0; j < d.fan.nalpha; ++j) out << (j ? " " : "") << format_double(d.at(i, j));
        out << '\n';
    }
    for (int i = 0; i < d.fan.nbeta; ++i) {
        for (int j = 0; j < d.fan.nalpha; ++j) out << (j ? " " : "") << int(d.mask[d.index(i, j)]);
        out << '\n';
    }
}

SMField read_sm_field(const std::string& path) {
    const auto nums = read_numbers(path);
    if (nums.size() < 4) throw ParameterError("'" + path + "': truncated header");
    const int nx = as_count(nums[0], "nx"), ny = as_count(nums[1], "ny");
    if (nx != ny) throw ParameterError("'" + path + "': SM grids are square, got " + std::to_string(nx) + "x" +
                                       std::to_string(ny));
    SMField u(SMGrid{nx, as_count(nums[2], "ntheta"), nums[3]});
    expect_count(nums, 4, u.values().size(), path);
    std::copy(nums.begin() + 4, nums.end(), u.values().begin());
    return u;
}

void write_sm_field(const std::string& path, const SMField& u) {
    const SMGrid& g = u.grid();
    std::ofstream out = open_out(path);
    out << g.n << ' ' << g.n << ' ' << g.ntheta << ' ' << format_double(g.extent) << '\n';
    for (std::size_t p = 0; p < u.values().size(); p += g.ntheta) {
        for (int k = 0; k < g.ntheta; ++k) out << (k ? " " : "") << format_double(u.values()[p + k]);
        out << '\n';
    }
}

LightRayData read_lightray_data(const std::string& path) {
    const auto nums = read_numbers(path);
    if (nums.size() < 6) throw ParameterError("'" + path + "': truncated header");
    LightRayData d;
    const int nrays = as_count(nums[0], "nrays");
    d.sigma = SigmaGrid{as_count(nums[1], "nsigma"), nums[2], nums[3]};
    d.sigma.validate();
    d.fan = FanGeometry{as_count(nums[4], "nbeta"), as_count(nums[5], "nalpha")};
    if (static_cast<std::size_t>(nrays) != d.fan.size())
        throw ParameterError("'" + path + "': ray count does not match the fan");
    const std::size_t nv = static_cast<std::size_t>(nrays) * d.sigma.n;
    expect_count(nums, 6, nv + 2 * static_cast<std::size_t>(nrays), path);
    d.values.assign(nums.begin() + 6, nums.begin() + 6 + nv);
    d.mask.resize(nrays);
    d.chord.resize(nrays);
    for (int r = 0; r < nrays; ++r) {
        const double m = nums[6 + nv + r];
        if (m != 0.0 && m != 1.0) throw ParameterError("'" + path + "': mask entries must be 0 or 1");
        d.mask[r] = m != 0.0;
        if (d.mask[r]) ++d.trapped;
        d.chord[r] = nums[6 + nv + nrays + r];
    }
    return d;
}

void write_lightray_data(const std::string& path, const LightRayData& d) {
    std::ofstream out = open_out(path);
    const std::size_t nrays = d.fan.size();
    out << nrays << ' ' << d.sigma.n << ' ' << format_double(d.sigma.min) << ' ' << format_double(d.sigma.max)
        << '\n' << d.fan.nbeta << ' ' << d.fan.nalpha << '\n';
    for (std::size_t r = 0; r < nrays; ++r) {
        for (int k = 0; k < d.sigma.n; ++k) out << (k ? " " : "") << format_double(d.at(r, k));
        out << '\n';
    }
    for (std::size_t r = 0; r < nrays; ++r) out << (r ? " " : "") << int(d.mask[r]);
    out << '\n';
    for (std::size_t r = 0; r < nrays; ++r) out << (r ? " " : "") << format_double(d.chord[r]);
    out << '\n';
}

void write_sigma_fourier(const std::string& path, const FanGeometry& fan, double rho,
                         const std::vector<Complex>& values) {
    if (values.size() != fan.size()) throw ParameterError("one Fourier value per ray expected");
    std::ofstream out = open_out(path);
    out << fan.size() << " 1 " << format_double(rho) << ' ' << format_double(rho) << '\n'
        << fan.nbeta << ' ' << fan.nalpha << '\n';
    for (const Complex& c : values) out << format_double(c.real()) << ' ' << format_double(c.imag()) << '\n';
}

void write_pgm(const std::string& path, const std::vector<double>& values, int width, int height, int bits) {
    if (bits != 8 && bits != 16) throw ParameterError("PGM depth must be 8 or 16 bits");
    if (width < 1 || height < 1 || values.size() != static_cast<std::size_t>(width) * height)
        throw ParameterError("PGM size does not match the value count");
    const int maxval = bits == 8 ? 255 : 65535;
    double lo = values.empty() ? 0.0 : values[0], hi = lo;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
    out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
    const double span = hi > lo ? hi - lo : 1.0;
    for (double v : values) {
        const int q = static_cast<int>(std::lround((v - lo) / span * maxval));
        if (bits == 8) {
            out.put(static_cast<char>(q));
        } else {
            out.put(static_cast<char>(q >> 8));
            out.put(static_cast<char>(q & 0xff));
        }
    }
}

void write_field_pgm(const std::string& path, const ScalarField& f, int bits) {
    const Grid2D& g = f.grid();
    std::vector<double> img(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) img[static_cast<std::size_t>(g.ny - 1 - j) * g.nx + i] = f.at(i, j);
    write_pgm(path, img, g.nx, g.ny, bits);
}

void write_sinogram_pgm(const std::string& path, const Sinogram& s, int bits) {
    write_pgm(path, s.values, s.nomega, s.ns, bits);
}

std::vector<int> read_pgm(const std::string& path, int& width, int& height, int& maxval) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    std::string magic;
    in >> magic >> width >> height >> maxval;
    if (magic != "P5" || !in || width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw ParameterError("'" + path + "': not a binary PGM");
    in.get();
    std::vector<int> out(static_cast<std::size_t>(width) * height);
    for (int& v : out) {
        if (maxval < 256) {
            v = static_cast<unsigned char>(in.get());
        } else {
            const int hi = static_cast<unsigned char>(in.get());
            v = hi * 256 + static_cast<unsigned char>(in.get());
        }
    }
    if (!in) throw ParameterError("'" + path + "': truncated PGM data");
    return out;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
    std::ofstream out = open_out(path);
    const Grid2D& g = f.grid();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) out << (i ? "," : "") << format_double(f.at(i, j));
        out << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            out << (k ? "," : "");
            if (std::isfinite(r[k])) out << format_double(r[k]);
            else out << "nan";
        }
        out << '\n';
    }
}

void write_convergence_log(const std::string& path, const std::vector<double>& residuals) {
    std::ofstream out = open_out(path);
    for (std::size_t k = 0; k < residuals.size(); ++k) out << k << ' ' << format_double(residuals[k]) << '\n';
}

std::vector<double> read_convergence_log(const std::string& path) {
    const auto nums = read_numbers(path);
    if (nums.size() % 2 != 0) throw ParameterError("'" + path + "': expected `iter residual` pairs");
    std::vector<double> out;
    for (std::size_t k = 0; k < nums.size(); k += 2) out.push_back(nums[k + 1]);
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("'" + path + "': " + e.what());
    }
}

}  // namespace geoxray
