#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "geoxray/grid.hpp"
#include "geoxray/lightray.hpp"
#include "geoxray/metric.hpp"
#include "geoxray/radon.hpp"
#include "geoxray/smfields.hpp"
#include "geoxray/xray.hpp"

namespace geoxray {

// Text formats. Headers are whitespace separated; values are written with
// 17 significant digits and parsed with strtod, so round trips are exact.

// `nx ny xmin xmax ymin ymax` then nx*ny values (y outer, x inner).
LambdaGrid read_lambda_grid(const std::string& path);
void write_lambda_grid(const std::string& path, const LambdaGrid& g);

// Same header layout for scalar fields.
ScalarField read_scalar_field(const std::string& path);
void write_scalar_field(const std::string& path, const ScalarField& f);

// `ns nomega S` then values (s outer, omega inner).
Sinogram read_sinogram(const std::string& path);
void write_sinogram(const std::string& path, const Sinogram& s);

// `nbeta nalpha` then values (beta outer), then the same number of 0/1
// mask entries (1 = trapped or failed).
FanBeamData read_fan_data(const std::string& path);
void write_fan_data(const std::string& path, const FanBeamData& d);

// `nx ny ntheta extent` then values, theta innermost (the in-memory order).
SMField read_sm_field(const std::string& path);
void write_sm_field(const std::string& path, const SMField& u);

// `nrays nsigma sigma_min sigma_max`, then `nbeta nalpha`, then values (ray
// outer, sigma inner), then per-ray 0/1 mask and chord lengths.
LightRayData read_lightray_data(const std::string& path);
void write_lightray_data(const std::string& path, const LightRayData& d);
// Same header with nsigma = 1 and sigma_min = sigma_max = rho, then one
// interleaved `re im` pair per ray.
void write_sigma_fourier(const std::string& path, const FanGeometry& fan, double rho,
                         const std::vector<Complex>& values);

// Portable graymap, min..max mapped to 0..maxval (8 or 16 bit). Row 0 of the
// image is the top (largest y).
void write_pgm(const std::string& path, const std::vector<double>& values, int width, int height, int bits = 8);
void write_field_pgm(const std::string& path, const ScalarField& f, int bits = 8);
void write_sinogram_pgm(const std::string& path, const Sinogram& s, int bits = 8);
// Reads back an 8/16-bit binary PGM as raw integer levels.
std::vector<int> read_pgm(const std::string& path, int& width, int& height, int& maxval);

// Raw CSV: one row per grid row (y outer).
void write_field_csv(const std::string& path, const ScalarField& f);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// `iter residual` lines.
void write_convergence_log(const std::string& path, const std::vector<double>& residuals);
std::vector<double> read_convergence_log(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// Shared helpers for the text formats.
std::vector<double> read_numbers(const std::string& path);
std::string format_double(double v);

}  // namespace geoxray
