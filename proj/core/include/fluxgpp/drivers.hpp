#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fluxgpp {

/// The 12 plant functional type codes, in alphabetical order.
enum class Pft : int {
    CRO, CSH, DBF, DNF, EBF, ENF, GRA, MF, OSH, SAV, WET, WSA
};

inline constexpr int kNumPft = 12;
inline constexpr std::array<std::string_view, kNumPft> kPftNames = {
    "CRO", "CSH", "DBF", "DNF", "EBF", "ENF",
    "GRA", "MF",  "OSH", "SAV", "WET", "WSA"};

/// Parses a PFT code; throws InputError on anything outside the 12 codes.
Pft pft_from_string(std::string_view s);
std::string_view pft_name(Pft p);

/// Quantities derived from the raw drivers; filled by derive_record.
struct DerivedDrivers {
    double vpd = 0.0;   // Pa
    double ndvi = 0.0;
    double nirv = 0.0;
    double fapar = 0.0;
    double par = 0.0;   // mol photons m-2 d-1
};

/// One site-day of drivers, as ingested from the site CSV. Missing cells
/// are empty optionals; imputation or the reject policy resolves them
/// before modelling.
struct DriverRecord {
    std::string site_id;
    std::string date; // YYYY-MM-DD
    Pft pft = Pft::CRO;

    std::optional<double> tc, tmin, tmax, tdew;   // degC
    std::optional<double> sw_in;                  // W m-2
    std::optional<double> precip;                 // mm d-1
    std::optional<double> theta;                  // m3 m-3
    std::optional<double> patm;                   // Pa
    std::optional<double> red_ref, nir_ref;       // reflectance [0,1]
    std::optional<double> co2_ppm;                // micromol/mol

    std::optional<double> gpp_obs;     // g C m-2 d-1, EC-derived when present
    std::optional<double> gpp_process; // filled by the process-model stage

    std::optional<DerivedDrivers> derived;
    bool imputed = false;
};

/// Normalized difference vegetation index from NIR and red reflectance.
/// Throws InputError when a reflectance is outside [0,1] or both are 0.
double ndvi(double nir_ref, double red_ref);

/// NIRv = NDVI * NIR reflectance.
double nirv(double nir_ref, double red_ref);

/// Vapour pressure deficit (Pa) from air and dewpoint temperature via the
/// Magnus form es(T) = 610.8 exp(17.27 T / (T + 237.3)), clamped at 0.
/// tdew more than 0.5 degC above tc is rejected as inconsistent.
double vpd_from_dewpoint(double tc, double tdew);

/// Daily PAR (mol photons m-2 d-1) from mean downward shortwave (W m-2),
/// using a 0.45 PAR fraction and 4.6 micromol per J.
double par_from_swin(double sw_in, double par_fraction = 0.45,
                     double umol_per_j = 4.6);

/// fAPAR proxy from NIRv: clamp(scale * nirv + offset, 0, 1).
double fapar_from_nirv(double nirv_value, double scale = 1.0,
                       double offset = 0.0);

/// Missing-value policy for impute_missing.
enum class ImputePolicy { Reject, SiteMedian };

ImputePolicy impute_policy_from_string(std::string_view s);

/// Resolves missing numeric driver fields. Reject: throws on the first
/// missing required field. SiteMedian: fills each gap with the per-site
/// median of that field and marks the record imputed; a site with no
/// present value at all for a required field is unimputable. gpp_obs is
/// never required and never imputed.
std::vector<DriverRecord> impute_missing(std::vector<DriverRecord> records,
                                         ImputePolicy policy);

/// Fills record.derived from the raw fields. All required raw fields must
/// be present (run impute_missing first).
void derive_record(DriverRecord& record, double fapar_scale = 1.0,
                   double fapar_offset = 0.0);

/// Structural check of one record against the documented invariants
/// (reflectance ranges, tmin <= tc <= tmax, theta in [0,1], ...).
/// `row` is used for error messages; pass 0 when unknown.
void validate_record(const DriverRecord& record, std::size_t row = 0);

// --- Site CSV schema -------------------------------------------------------
//
// UTF-8, header row, one row per site-day. Base columns, in order:
//   site_id,date,pft,tc,tmin,tmax,tdew,sw_in,precip,theta,patm,
//   red_ref,nir_ref,co2_ppm,gpp_obs
// Empty cells mean missing. Two optional column groups may follow when a
// pipeline stage has added them:
//   vpd,ndvi,nirv,fapar,par   (derive stage)
//   gpp_process               (process-model stage)

inline constexpr std::array<std::string_view, 15> kSiteCsvColumns = {
    "site_id", "date", "pft", "tc", "tmin", "tmax", "tdew", "sw_in",
    "precip", "theta", "patm", "red_ref", "nir_ref", "co2_ppm", "gpp_obs"};

/// Reads a site CSV. Schema violations are reported with 1-based row
/// numbers. Records are returned in file order.
std::vector<DriverRecord> load_site_csv(const std::string& path);

/// Writes records in the documented schema. Derived columns are written
/// when every record has them; gpp_process likewise.
void write_site_csv(const std::string& path,
                    const std::vector<DriverRecord>& records);

} // namespace fluxgpp
