#include "fluxgpp/grid.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "fluxgpp/errors.hpp"
#include "fluxgpp/numio.hpp"

namespace fluxgpp {

namespace {

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
constexpr double kGeomTol = 1e-9;

// Kahan-compensated accumulator; addition order is the caller's contract.
struct Kahan {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

} // namespace

GeoGrid GeoGrid::make(std::size_t n_lat, std::size_t n_lon, double lat0,
                      double lon0, double d_lat, double d_lon,
                      std::string units) {
    GeoGrid g;
    g.n_lat = n_lat;
    g.n_lon = n_lon;
    g.lat0 = lat0;
    g.lon0 = lon0;
    g.d_lat = d_lat;
    g.d_lon = d_lon;
    g.units = std::move(units);
    g.values.assign(n_lat * n_lon, kMissing);
    g.validate();
    return g;
}

GeoGrid GeoGrid::global_one_degree(std::string units) {
    return make(180, 360, 90.0, -180.0, 1.0, 1.0, std::move(units));
}

bool GeoGrid::is_missing(std::size_t r, std::size_t c) const {
    return std::isnan(at(r, c));
}

void GeoGrid::set_missing(std::size_t r, std::size_t c) {
    set(r, c, kMissing);
}

bool GeoGrid::same_geometry(const GeoGrid& other) const {
    return n_lat == other.n_lat && n_lon == other.n_lon &&
           lat0 == other.lat0 && lon0 == other.lon0 && d_lat == other.d_lat &&
           d_lon == other.d_lon;
}

void GeoGrid::validate() const {
    if (n_lat == 0 || n_lon == 0) throw InputError("GeoGrid: empty grid");
    if (!(d_lat > 0.0) || !(d_lon > 0.0)) {
        throw InputError("GeoGrid: cell sizes must be positive");
    }
    if (static_cast<double>(n_lat) * d_lat > 180.0 + kGeomTol) {
        throw InputError("GeoGrid: latitude span exceeds 180 degrees");
    }
    if (static_cast<double>(n_lon) * d_lon > 360.0 + kGeomTol) {
        throw InputError("GeoGrid: longitude span exceeds 360 degrees");
    }
    if (lat0 > 90.0 + kGeomTol ||
        lat0 - static_cast<double>(n_lat) * d_lat < -90.0 - kGeomTol) {
        throw InputError("GeoGrid: latitude edges extend beyond the poles");
    }
    if (values.size() != n_lat * n_lon) {
        throw InputError("GeoGrid: values length != n_lat * n_lon");
    }
}

std::vector<double> cell_areas_by_row(const GeoGrid& grid) {
    grid.validate();
    std::vector<double> areas(grid.n_lat);
    const double dlon_rad = grid.d_lon * kDegToRad;
    for (std::size_t r = 0; r < grid.n_lat; ++r) {
        const double top = (grid.lat0 - static_cast<double>(r) * grid.d_lat) * kDegToRad;
        const double bottom = top - grid.d_lat * kDegToRad;
        areas[r] = kEarthRadiusM * kEarthRadiusM * dlon_rad *
                   (std::sin(top) - std::sin(bottom));
    }
    return areas;
}

double total_area(const GeoGrid& grid) {
    const auto areas = cell_areas_by_row(grid);
    Kahan acc;
    for (std::size_t r = 0; r < grid.n_lat; ++r) {
        for (std::size_t c = 0; c < grid.n_lon; ++c) acc.add(areas[r]);
    }
    return acc.sum;
}

double global_total(const GeoGrid& grid, double n_days) {
    grid.validate();
    if (grid.units != kGppUnits) {
        throw InputError("global_total: grid units must be '" +
                         std::string(kGppUnits) + "', got '" + grid.units + "'");
    }
    const auto areas = cell_areas_by_row(grid);
    Kahan acc;
    for (std::size_t r = 0; r < grid.n_lat; ++r) {
        for (std::size_t c = 0; c < grid.n_lon; ++c) {
            if (grid.is_missing(r, c)) continue;
            acc.add(grid.at(r, c) * areas[r]);
        }
    }
    return acc.sum * n_days * 1e-15;
}

std::vector<double> lat_profile(const GeoGrid& grid, double n_days) {
    grid.validate();
    const auto areas = cell_areas_by_row(grid);
    std::vector<double> profile(grid.n_lat, 0.0);
    for (std::size_t r = 0; r < grid.n_lat; ++r) {
        Kahan acc;
        for (std::size_t c = 0; c < grid.n_lon; ++c) {
            if (grid.is_missing(r, c)) continue;
            acc.add(grid.at(r, c) * areas[r]);
        }
        profile[r] = acc.sum * n_days * 1e-15;
    }
    return profile;
}

std::vector<double> lon_profile(const GeoGrid& grid, double n_days) {
    grid.validate();
    const auto areas = cell_areas_by_row(grid);
    std::vector<double> profile(grid.n_lon, 0.0);
    for (std::size_t c = 0; c < grid.n_lon; ++c) {
        Kahan acc;
        for (std::size_t r = 0; r < grid.n_lat; ++r) {
            if (grid.is_missing(r, c)) continue;
            acc.add(grid.at(r, c) * areas[r]);
        }
        profile[c] = acc.sum * n_days * 1e-15;
    }
    return profile;
}

GeoGrid percent_diff(const GeoGrid& a, const GeoGrid& b) {
    a.validate();
    b.validate();
    if (!a.same_geometry(b)) {
        throw InputError("percent_diff: grid geometries differ");
    }
    GeoGrid out = GeoGrid::make(a.n_lat, a.n_lon, a.lat0, a.lon0, a.d_lat,
                                a.d_lon, "%");
    for (std::size_t r = 0; r < a.n_lat; ++r) {
        for (std::size_t c = 0; c < a.n_lon; ++c) {
            if (a.is_missing(r, c) || b.is_missing(r, c)) continue;
            const double va = a.at(r, c);
            if (std::fabs(va) < 1e-9) continue;
            out.set(r, c, (va - b.at(r, c)) / va * 100.0);
        }
    }
    return out;
}

std::string to_fluxgrid(const GeoGrid& grid) {
    grid.validate();
    std::string out;
    out += "#fluxgrid 1\n";
    out += "#nlat " + std::to_string(grid.n_lat) + "\n";
    out += "#nlon " + std::to_string(grid.n_lon) + "\n";
    out += "#lat0 " + format_double(grid.lat0) + "\n";
    out += "#lon0 " + format_double(grid.lon0) + "\n";
    out += "#dlat " + format_double(grid.d_lat) + "\n";
    out += "#dlon " + format_double(grid.d_lon) + "\n";
    out += "#units " + grid.units + "\n";
    out += "#missing NA\n";
    for (std::size_t r = 0; r < grid.n_lat; ++r) {
        for (std::size_t c = 0; c < grid.n_lon; ++c) {
            if (c) out += ',';
            out += grid.is_missing(r, c) ? "NA" : format_double(grid.at(r, c));
        }
        out += '\n';
    }
    return out;
}

GeoGrid from_fluxgrid(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) {
            throw InputError(std::string("fluxgrid: truncated before ") + what);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto header_value = [&](const std::string& key) {
        next_line(key.c_str());
        const std::string prefix = "#" + key + " ";
        if (line.rfind(prefix, 0) != 0) {
            throw InputError("fluxgrid: expected header '" + prefix +
                             "...', got '" + line + "'");
        }
        return line.substr(prefix.size());
    };

    if (next_line("#fluxgrid") != "#fluxgrid 1") {
        throw InputError("fluxgrid: unsupported format line '" + line + "'");
    }
    GeoGrid g;
    g.n_lat = static_cast<std::size_t>(parse_int(header_value("nlat"), "nlat"));
    g.n_lon = static_cast<std::size_t>(parse_int(header_value("nlon"), "nlon"));
    g.lat0 = parse_double(header_value("lat0"), "lat0");
    g.lon0 = parse_double(header_value("lon0"), "lon0");
    g.d_lat = parse_double(header_value("dlat"), "dlat");
    g.d_lon = parse_double(header_value("dlon"), "dlon");
    g.units = header_value("units");
    if (header_value("missing") != "NA") {
        throw InputError("fluxgrid: missing sentinel must be NA");
    }
    g.values.assign(g.n_lat * g.n_lon, kMissing);
    g.validate();
    for (std::size_t r = 0; r < g.n_lat; ++r) {
        next_line("data row");
        const auto cells = split_csv_line(line);
        if (cells.size() != g.n_lon) {
            throw InputError("fluxgrid: data row " + std::to_string(r + 1) +
                             " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(g.n_lon));
        }
        for (std::size_t c = 0; c < g.n_lon; ++c) {
            if (cells[c] == "NA") continue;
            g.set(r, c, parse_double(cells[c], "grid cell"));
        }
    }
    return g;
}

void save_fluxgrid(const GeoGrid& grid, const std::string& path) {
    write_text_file(path, to_fluxgrid(grid));
}

GeoGrid load_fluxgrid(const std::string& path) {
    try {
        return from_fluxgrid(read_text_file(path));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

namespace {

constexpr std::array<const char*, 12> kDriverGridFields = {
    "tc",   "tmin",  "tmax", "tdew",    "sw_in",   "precip",
    "theta", "patm", "red_ref", "nir_ref", "co2_ppm", "pft"};

} // namespace

DriverGridSet DriverGridSet::load_dir(const std::string& dir) {
    DriverGridSet set;
    bool first = true;
    for (const char* field : kDriverGridFields) {
        const std::string path =
            (std::filesystem::path(dir) / (std::string(field) + ".fluxgrid"))
                .string();
        if (!std::filesystem::exists(path)) {
            throw InputError("driver grid missing: " + path);
        }
        GeoGrid g = load_fluxgrid(path);
        if (first) {
            set.geometry_template = g;
            first = false;
        } else if (!g.same_geometry(set.geometry_template)) {
            throw InputError("driver grid geometry mismatch in " + path);
        }
        set.fields.emplace(field, std::move(g));
    }
    return set;
}

std::optional<DriverRecord> DriverGridSet::cell_record(
    std::size_t r, std::size_t c, const std::string& date) const {
    for (const char* field : kDriverGridFields) {
        if (fields.at(field).is_missing(r, c)) return std::nullopt;
    }
    const double pft_code = fields.at("pft").at(r, c);
    const int code = static_cast<int>(pft_code);
    if (pft_code != static_cast<double>(code) || code < 0 || code >= kNumPft) {
        throw InputError("pft grid cell is not an integer code in [0, 12): " +
                         format_double(pft_code));
    }
    DriverRecord rec;
    rec.site_id = "cell_r" + std::to_string(r) + "_c" + std::to_string(c);
    rec.date = date;
    rec.pft = static_cast<Pft>(code);
    rec.tc = fields.at("tc").at(r, c);
    rec.tmin = fields.at("tmin").at(r, c);
    rec.tmax = fields.at("tmax").at(r, c);
    rec.tdew = fields.at("tdew").at(r, c);
    rec.sw_in = fields.at("sw_in").at(r, c);
    rec.precip = fields.at("precip").at(r, c);
    rec.theta = fields.at("theta").at(r, c);
    rec.patm = fields.at("patm").at(r, c);
    rec.red_ref = fields.at("red_ref").at(r, c);
    rec.nir_ref = fields.at("nir_ref").at(r, c);
    rec.co2_ppm = fields.at("co2_ppm").at(r, c);
    validate_record(rec);
    return rec;
}

MapResult map_model(const DriverGridSet& drivers,
                    const std::function<double(const DriverRecord&)>& model,
                    const std::string& units, const std::string& date) {
    const GeoGrid& tmpl = drivers.geometry_template;
    MapResult result;
    result.grid = GeoGrid::make(tmpl.n_lat, tmpl.n_lon, tmpl.lat0, tmpl.lon0,
                                tmpl.d_lat, tmpl.d_lon, units);
    for (std::size_t r = 0; r < tmpl.n_lat; ++r) {
        for (std::size_t c = 0; c < tmpl.n_lon; ++c) {
            try {
                const auto rec = drivers.cell_record(r, c, date);
                if (!rec) continue;
                result.grid.set(r, c, model(*rec));
            } catch (const InputError& e) {
                result.issues.push_back(CellIssue{r, c, e.what()});
            }
        }
    }
    return result;
}

} // namespace fluxgpp
