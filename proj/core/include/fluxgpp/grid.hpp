#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluxgpp/drivers.hpp"

namespace fluxgpp {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr const char* kGppUnits = "g C m-2 d-1";

/// Regular latitude-longitude raster, row-major with row 0 northernmost.
/// lat0 is the northern edge of row 0 and lon0 the western edge of column
/// 0, both in degrees. Missing cells hold NaN internally and are written
/// as NA in the fluxgrid format.
struct GeoGrid {
    std::size_t n_lat = 0;
    std::size_t n_lon = 0;
    double lat0 = 90.0;
    double lon0 = -180.0;
    double d_lat = 1.0;
    double d_lon = 1.0;
    std::string units;
    std::vector<double> values; // n_lat * n_lon, NaN = missing

    static GeoGrid make(std::size_t n_lat, std::size_t n_lon, double lat0,
                        double lon0, double d_lat, double d_lon,
                        std::string units);
    /// Full 1-degree global grid, all cells missing.
    static GeoGrid global_one_degree(std::string units);

    double at(std::size_t r, std::size_t c) const {
        return values[r * n_lon + c];
    }
    void set(std::size_t r, std::size_t c, double v) {
        values[r * n_lon + c] = v;
    }
    bool is_missing(std::size_t r, std::size_t c) const;
    void set_missing(std::size_t r, std::size_t c);

    bool same_geometry(const GeoGrid& other) const;
    /// Throws InputError on inconsistent geometry (span > globe, edges
    /// beyond the poles, non-positive steps, wrong value count).
    void validate() const;
};

/// Exact spherical-cap cell areas (m^2) per latitude row:
/// A = R^2 * dlon_rad * (sin(lat_top) - sin(lat_bottom)).
std::vector<double> cell_areas_by_row(const GeoGrid& grid);

/// Area sum over the whole grid, Kahan-compensated (m^2).
double total_area(const GeoGrid& grid);

/// Total over non-missing cells of value * area * n_days * 1e-15, in Pg C.
/// Requires the grid units to be g C m-2 d-1; compensated row-major sum.
double global_total(const GeoGrid& grid, double n_days);

/// Area-weighted totals per latitude row (Pg C per band over n_days).
std::vector<double> lat_profile(const GeoGrid& grid, double n_days);
/// Same per longitude column.
std::vector<double> lon_profile(const GeoGrid& grid, double n_days);

/// Cell-wise (a - b) / a * 100. Cells where either input is missing or
/// |a| < 1e-9 become missing. Grids must share geometry exactly.
GeoGrid percent_diff(const GeoGrid& a, const GeoGrid& b);

// --- fluxgrid v1 text format ------------------------------------------------
//
//   #fluxgrid 1
//   #nlat <int>      #nlon <int>
//   #lat0 <deg>      #lon0 <deg>
//   #dlat <deg>      #dlon <deg>
//   #units <text>
//   #missing NA
// followed by n_lat CSV rows of n_lon values, row 0 = northernmost.

std::string to_fluxgrid(const GeoGrid& grid);
GeoGrid from_fluxgrid(const std::string& text);
void save_fluxgrid(const GeoGrid& grid, const std::string& path);
GeoGrid load_fluxgrid(const std::string& path);

/// One driver field per fluxgrid file plus a `pft` grid of integer codes
/// (0-11, alphabetical PFT order). All grids must share geometry.
struct DriverGridSet {
    GeoGrid geometry_template;       // geometry + units ignored
    std::map<std::string, GeoGrid> fields;

    /// Loads `<field>.fluxgrid` for the 11 numeric driver fields plus pft
    /// from a directory; missing file -> InputError.
    static DriverGridSet load_dir(const std::string& dir);

    /// Assembles the cell's DriverRecord, or nullopt when any field is
    /// missing there. Throws InputError for malformed cell values.
    std::optional<DriverRecord> cell_record(std::size_t r, std::size_t c,
                                            const std::string& date) const;
};

struct CellIssue {
    std::size_t row = 0;
    std::size_t col = 0;
    std::string message;
};

struct MapResult {
    GeoGrid grid;
    std::vector<CellIssue> issues;
};

/// Applies `model` to every assembled cell record. Missing cells stay
/// missing; malformed cells are reported in issues and left missing.
MapResult map_model(const DriverGridSet& drivers,
                    const std::function<double(const DriverRecord&)>& model,
                    const std::string& units, const std::string& date);

} // namespace fluxgpp
