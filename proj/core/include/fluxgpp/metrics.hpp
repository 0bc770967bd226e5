#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fluxgpp/drivers.hpp"

namespace fluxgpp {

/// Root-mean-square error. Throws InputError on empty or mismatched input.
double rmse(std::span<const double> pred, std::span<const double> obs);

/// Coefficient of determination, 1 - SSres/SStot; may be negative.
/// Throws InputError when obs has fewer than 2 values or zero variance.
double r2(std::span<const double> pred, std::span<const double> obs);

/// One evaluation row; r2 is absent when the group's observations are
/// constant (undefined variance).
struct EvalRow {
    std::string group; // PFT code or "ALL"
    std::size_t n = 0;
    std::optional<double> r2;
    double rmse = 0.0;
};

/// Per-PFT rows in alphabetical PFT order, then the ALL row.
struct EvalReport {
    std::vector<EvalRow> rows;
    std::string to_csv() const; // header group,n,r2,rmse; NA for missing r2
};

/// Groups (pft, obs, pred) triples by PFT. Every record needs gpp_obs.
EvalReport evaluate_by_pft(const std::vector<Pft>& pfts,
                           std::span<const double> obs,
                           std::span<const double> pred);

} // namespace fluxgpp
