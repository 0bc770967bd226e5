#include "fluxgpp/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fluxgpp/errors.hpp"
#include "fluxgpp/numio.hpp"

namespace fluxgpp {

namespace {

double magnus_es(double t) {
    return 610.8 * std::exp(17.27 * t / (t + 237.3));
}

void check_reflectance(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InputError(std::string(name) + " must lie in [0, 1], got " +
                         format_double(v));
    }
}

// The numeric fields a modelling-ready record must carry.
struct FieldSlot {
    const char* name;
    std::optional<double> DriverRecord::* member;
};

constexpr std::array<FieldSlot, 11> kRequiredFields = {{
    {"tc", &DriverRecord::tc},
    {"tmin", &DriverRecord::tmin},
    {"tmax", &DriverRecord::tmax},
    {"tdew", &DriverRecord::tdew},
    {"sw_in", &DriverRecord::sw_in},
    {"precip", &DriverRecord::precip},
    {"theta", &DriverRecord::theta},
    {"patm", &DriverRecord::patm},
    {"red_ref", &DriverRecord::red_ref},
    {"nir_ref", &DriverRecord::nir_ref},
    {"co2_ppm", &DriverRecord::co2_ppm},
}};

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

Pft pft_from_string(std::string_view s) {
    for (int i = 0; i < kNumPft; ++i) {
        if (kPftNames[static_cast<std::size_t>(i)] == s) return static_cast<Pft>(i);
    }
    throw InputError("unknown PFT code: '" + std::string(s) + "'");
}

std::string_view pft_name(Pft p) {
    return kPftNames[static_cast<std::size_t>(static_cast<int>(p))];
}

double ndvi(double nir_ref, double red_ref) {
    check_reflectance(nir_ref, "nir_ref");
    check_reflectance(red_ref, "red_ref");
    const double sum = nir_ref + red_ref;
    if (sum == 0.0) {
        throw InputError("ndvi undefined: nir_ref + red_ref = 0");
    }
    return (nir_ref - red_ref) / sum;
}

double nirv(double nir_ref, double red_ref) {
    return ndvi(nir_ref, red_ref) * nir_ref;
}

double vpd_from_dewpoint(double tc, double tdew) {
    if (!std::isfinite(tc) || !std::isfinite(tdew)) {
        throw InputError("vpd_from_dewpoint: non-finite temperature");
    }
    if (tdew > tc + 0.5) {
        throw InputError("inconsistent temperatures: tdew (" +
                         format_double(tdew) + ") exceeds tc (" +
                         format_double(tc) + ") by more than 0.5 degC");
    }
    const double vpd = magnus_es(tc) - magnus_es(tdew);
    return vpd > 0.0 ? vpd : 0.0;
}

double par_from_swin(double sw_in, double par_fraction, double umol_per_j) {
    if (!std::isfinite(sw_in) || sw_in < 0.0) {
        throw InputError("par_from_swin: sw_in must be >= 0");
    }
    return sw_in * par_fraction * umol_per_j * 86400.0 / 1e6;
}

double fapar_from_nirv(double nirv_value, double scale, double offset) {
    if (!(scale > 0.0)) throw InputError("fapar_from_nirv: scale must be > 0");
    const double v = scale * nirv_value + offset;
    return std::clamp(v, 0.0, 1.0);
}

ImputePolicy impute_policy_from_string(std::string_view s) {
    if (s == "reject") return ImputePolicy::Reject;
    if (s == "site-median") return ImputePolicy::SiteMedian;
    throw InputError("unknown imputation policy: '" + std::string(s) +
                     "' (expected 'reject' or 'site-median')");
}

std::vector<DriverRecord> impute_missing(std::vector<DriverRecord> records,
                                         ImputePolicy policy) {
    if (policy == ImputePolicy::Reject) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            for (const auto& slot : kRequiredFields) {
                if (!(records[i].*(slot.member)).has_value()) {
                    throw InputError("missing required field '" +
                                     std::string(slot.name) + "' at site " +
                                     records[i].site_id + ", date " +
                                     records[i].date + " (record " +
                                     std::to_string(i + 1) + ")");
                }
            }
        }
        return records;
    }

    // Site-median: one pass to collect per-site medians, one pass to fill.
    std::map<std::string, std::array<std::vector<double>, kRequiredFields.size()>>
        present;
    for (const auto& rec : records) {
        auto& slots = present[rec.site_id];
        for (std::size_t f = 0; f < kRequiredFields.size(); ++f) {
            const auto& value = rec.*(kRequiredFields[f].member);
            if (value.has_value()) slots[f].push_back(*value);
        }
    }
    std::map<std::string, std::array<std::optional<double>, kRequiredFields.size()>>
        medians;
    for (const auto& [site, slots] : present) {
        auto& med = medians[site];
        for (std::size_t f = 0; f < kRequiredFields.size(); ++f) {
            if (!slots[f].empty()) med[f] = median_of(slots[f]);
        }
    }
    for (auto& rec : records) {
        const auto& med = medians[rec.site_id];
        for (std::size_t f = 0; f < kRequiredFields.size(); ++f) {
            auto& value = rec.*(kRequiredFields[f].member);
            if (value.has_value()) continue;
            if (!med[f].has_value()) {
                throw InputError("site " + rec.site_id +
                                 " has no observed value for field '" +
                                 std::string(kRequiredFields[f].name) +
                                 "'; cannot impute");
            }
            value = *med[f];
            rec.imputed = true;
        }
    }
    return records;
}

void derive_record(DriverRecord& record, double fapar_scale,
                   double fapar_offset) {
    for (const auto& slot : kRequiredFields) {
        if (!(record.*(slot.member)).has_value()) {
            throw InputError("derive_record: missing field '" +
                             std::string(slot.name) + "' at site " +
                             record.site_id + ", date " + record.date);
        }
    }
    DerivedDrivers d;
    d.vpd = vpd_from_dewpoint(*record.tc, *record.tdew);
    d.ndvi = ndvi(*record.nir_ref, *record.red_ref);
    d.nirv = d.ndvi * *record.nir_ref;
    d.fapar = fapar_from_nirv(d.nirv, fapar_scale, fapar_offset);
    d.par = par_from_swin(*record.sw_in);
    record.derived = d;
}

void validate_record(const DriverRecord& record, std::size_t row) {
    const std::string where =
        row > 0 ? " (row " + std::to_string(row) + ")" : "";
    auto fail = [&](const std::string& msg) {
        throw InputError(msg + " at site " + record.site_id + ", date " +
                         record.date + where);
    };
    if (record.site_id.empty()) throw InputError("empty site_id" + where);
    if (!is_iso_date(record.date)) {
        throw InputError("date must be YYYY-MM-DD, got '" + record.date + "'" +
                         where);
    }
    auto finite = [&](const std::optional<double>& v, const char* name) {
        if (v && !std::isfinite(*v)) fail(std::string("non-finite ") + name);
    };
    finite(record.tc, "tc");
    finite(record.tmin, "tmin");
    finite(record.tmax, "tmax");
    finite(record.tdew, "tdew");
    finite(record.sw_in, "sw_in");
    finite(record.precip, "precip");
    finite(record.theta, "theta");
    finite(record.patm, "patm");
    finite(record.red_ref, "red_ref");
    finite(record.nir_ref, "nir_ref");
    finite(record.co2_ppm, "co2_ppm");
    finite(record.gpp_obs, "gpp_obs");
    finite(record.gpp_process, "gpp_process");

    if (record.red_ref && (*record.red_ref < 0.0 || *record.red_ref > 1.0)) {
        fail("red_ref outside [0, 1]");
    }
    if (record.nir_ref && (*record.nir_ref < 0.0 || *record.nir_ref > 1.0)) {
        fail("nir_ref outside [0, 1]");
    }
    if (record.tc && record.tmin && record.tmax &&
        !(*record.tmin <= *record.tc && *record.tc <= *record.tmax)) {
        fail("temperatures violate tmin <= tc <= tmax");
    }
    if (record.sw_in && *record.sw_in < 0.0) fail("sw_in must be >= 0");
    if (record.theta && (*record.theta < 0.0 || *record.theta > 1.0)) {
        fail("theta outside [0, 1]");
    }
    if (record.patm && !(*record.patm > 0.0)) fail("patm must be > 0");
    if (record.co2_ppm && !(*record.co2_ppm > 0.0)) fail("co2_ppm must be > 0");
}

namespace {

constexpr std::array<std::string_view, 5> kDerivedColumns = {
    "vpd", "ndvi", "nirv", "fapar", "par"};

std::optional<double> parse_optional(const std::string& cell,
                                     std::string_view what, std::size_t row) {
    if (cell.empty()) return std::nullopt;
    return parse_double(cell, std::string(what) + " (row " +
                                  std::to_string(row) + ")");
}

} // namespace

std::vector<DriverRecord> load_site_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty site CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    // Base columns must appear verbatim and in order; recognized optional
    // columns may follow.
    if (header.size() < kSiteCsvColumns.size()) {
        throw InputError(path + ": expected at least " +
                         std::to_string(kSiteCsvColumns.size()) +
                         " columns in header, got " +
                         std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < kSiteCsvColumns.size(); ++i) {
        if (header[i] != kSiteCsvColumns[i]) {
            throw InputError(path + ": header column " + std::to_string(i + 1) +
                             " must be '" + std::string(kSiteCsvColumns[i]) +
                             "', got '" + header[i] + "'");
        }
    }
    // Map any extra columns.
    int idx_vpd = -1, idx_ndvi = -1, idx_nirv = -1, idx_fapar = -1,
        idx_par = -1, idx_proc = -1;
    for (std::size_t i = kSiteCsvColumns.size(); i < header.size(); ++i) {
        const std::string& name = header[i];
        int col = static_cast<int>(i);
        if (name == "vpd") idx_vpd = col;
        else if (name == "ndvi") idx_ndvi = col;
        else if (name == "nirv") idx_nirv = col;
        else if (name == "fapar") idx_fapar = col;
        else if (name == "par") idx_par = col;
        else if (name == "gpp_process") idx_proc = col;
        else {
            throw InputError(path + ": unknown column '" + name + "'");
        }
    }
    const bool has_derived = idx_vpd >= 0 && idx_ndvi >= 0 && idx_nirv >= 0 &&
                             idx_fapar >= 0 && idx_par >= 0;
    if ((idx_vpd >= 0 || idx_ndvi >= 0 || idx_nirv >= 0 || idx_fapar >= 0 ||
         idx_par >= 0) &&
        !has_derived) {
        throw InputError(path +
                         ": derived columns must appear as a full group "
                         "vpd,ndvi,nirv,fapar,par");
    }

    std::vector<DriverRecord> records;
    std::size_t row = 1; // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw InputError(path + ": row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        }
        DriverRecord rec;
        rec.site_id = cells[0];
        rec.date = cells[1];
        try {
            rec.pft = pft_from_string(cells[2]);
            rec.tc = parse_optional(cells[3], "tc", row);
            rec.tmin = parse_optional(cells[4], "tmin", row);
            rec.tmax = parse_optional(cells[5], "tmax", row);
            rec.tdew = parse_optional(cells[6], "tdew", row);
            rec.sw_in = parse_optional(cells[7], "sw_in", row);
            rec.precip = parse_optional(cells[8], "precip", row);
            rec.theta = parse_optional(cells[9], "theta", row);
            rec.patm = parse_optional(cells[10], "patm", row);
            rec.red_ref = parse_optional(cells[11], "red_ref", row);
            rec.nir_ref = parse_optional(cells[12], "nir_ref", row);
            rec.co2_ppm = parse_optional(cells[13], "co2_ppm", row);
            rec.gpp_obs = parse_optional(cells[14], "gpp_obs", row);
            if (has_derived) {
                auto need = [&](int idx, std::string_view what) {
                    auto v = parse_optional(cells[static_cast<std::size_t>(idx)],
                                            what, row);
                    if (!v) {
                        throw InputError("missing derived value '" +
                                         std::string(what) + "' in row " +
                                         std::to_string(row));
                    }
                    return *v;
                };
                DerivedDrivers d;
                d.vpd = need(idx_vpd, "vpd");
                d.ndvi = need(idx_ndvi, "ndvi");
                d.nirv = need(idx_nirv, "nirv");
                d.fapar = need(idx_fapar, "fapar");
                d.par = need(idx_par, "par");
                rec.derived = d;
            }
            if (idx_proc >= 0) {
                rec.gpp_process = parse_optional(
                    cells[static_cast<std::size_t>(idx_proc)], "gpp_process", row);
            }
            validate_record(rec, row);
        } catch (const InputError& e) {
            throw InputError(path + ": " + e.what());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_site_csv(const std::string& path,
                    const std::vector<DriverRecord>& records) {
    const bool all_derived =
        !records.empty() &&
        std::all_of(records.begin(), records.end(),
                    [](const DriverRecord& r) { return r.derived.has_value(); });
    const bool all_proc =
        !records.empty() &&
        std::all_of(records.begin(), records.end(), [](const DriverRecord& r) {
            return r.gpp_process.has_value();
        });

    std::string out;
    for (std::size_t i = 0; i < kSiteCsvColumns.size(); ++i) {
        if (i) out += ',';
        out += kSiteCsvColumns[i];
    }
    if (all_derived) {
        for (auto col : kDerivedColumns) {
            out += ',';
            out += col;
        }
    }
    if (all_proc) out += ",gpp_process";
    out += '\n';

    auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& r : records) {
        out += r.site_id;
        out += ',';
        out += r.date;
        out += ',';
        out += pft_name(r.pft);
        for (const auto* v :
             {&r.tc, &r.tmin, &r.tmax, &r.tdew, &r.sw_in, &r.precip, &r.theta,
              &r.patm, &r.red_ref, &r.nir_ref, &r.co2_ppm, &r.gpp_obs}) {
            out += ',';
            out += cell(*v);
        }
        if (all_derived) {
            const auto& d = *r.derived;
            for (double v : {d.vpd, d.ndvi, d.nirv, d.fapar, d.par}) {
                out += ',';
                out += format_double(v);
            }
        }
        if (all_proc) {
            out += ',';
            out += format_double(*r.gpp_process);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

} // namespace fluxgpp
