#include "fluxgpp/metrics.hpp"

#include <cmath>
#include <map>

#include "fluxgpp/errors.hpp"
#include "fluxgpp/numio.hpp"

namespace fluxgpp {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> obs) {
    if (pred.size() != obs.size()) {
        throw InputError("metric: pred and obs lengths differ");
    }
    if (pred.empty()) throw InputError("metric: empty input");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i]) || !std::isfinite(obs[i])) {
            throw InputError("metric: non-finite value at index " +
                             std::to_string(i));
        }
    }
}

} // namespace

double rmse(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - obs[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

double r2(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    if (obs.size() < 2) throw InputError("r2: need at least 2 values");
    double mean = 0.0;
    for (double v : obs) mean += v;
    mean /= static_cast<double>(obs.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double dr = obs[i] - pred[i];
        const double dt = obs[i] - mean;
        ss_res += dr * dr;
        ss_tot += dt * dt;
    }
    if (ss_tot == 0.0) {
        throw InputError("r2 undefined: observations are constant");
    }
    return 1.0 - ss_res / ss_tot;
}

std::string EvalReport::to_csv() const {
    std::string out = "group,n,r2,rmse\n";
    for (const auto& row : rows) {
        out += row.group;
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += row.r2 ? format_double(*row.r2) : std::string("NA");
        out += ',';
        out += format_double(row.rmse);
        out += '\n';
    }
    return out;
}

EvalReport evaluate_by_pft(const std::vector<Pft>& pfts,
                           std::span<const double> obs,
                           std::span<const double> pred) {
    check_pair(pred, obs);
    if (pfts.size() != obs.size()) {
        throw InputError("evaluate_by_pft: pft list length mismatch");
    }
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (std::size_t i = 0; i < pfts.size(); ++i) {
        auto& g = groups[static_cast<int>(pfts[i])];
        g.first.push_back(obs[i]);
        g.second.push_back(pred[i]);
    }

    EvalReport report;
    auto make_row = [](std::string label, std::span<const double> o,
                       std::span<const double> p) {
        EvalRow row;
        row.group = std::move(label);
        row.n = o.size();
        row.rmse = rmse(p, o);
        bool constant = true;
        for (double v : o) {
            if (v != o[0]) {
                constant = false;
                break;
            }
        }
        if (!constant && o.size() >= 2) row.r2 = r2(p, o);
        return row;
    };
    for (const auto& [code, g] : groups) {
        report.rows.push_back(make_row(
            std::string(pft_name(static_cast<Pft>(code))), g.first, g.second));
    }
    report.rows.push_back(make_row("ALL", obs, pred));
    return report;
}

} // namespace fluxgpp
