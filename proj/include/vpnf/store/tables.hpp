#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "vpnf/errors.hpp"
#include "vpnf/metrics/metrics.hpp"
#include "vpnf/training/trainer.hpp"

namespace vpnf::store {

// Shortest text that parses back to the same double; NaN becomes an empty field.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    if (s.empty()) return std::nan("");
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw FormatError(what + ": bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError(what + ": bad number '" + s + "'");
    }
}

// Training log: one row per iteration.
inline std::string training_log_csv(const std::vector<training::LogRow>& rows) {
    std::ostringstream os;
    const std::size_t n_eps = rows.empty() ? 0 : rows.front().eps.size();
    os << "iteration,data_loss,penalty_loss";
    for (std::size_t k = 0; k < n_eps; ++k) os << ",eps_" << k;
    os << ",lr,wall_ms,validation_nmse_w_db\n";
    for (const auto& r : rows) {
        os << r.iteration << ',' << fmt(r.data_loss) << ',' << fmt(r.penalty_loss);
        for (double e : r.eps) os << ',' << fmt(e);
        os << ',' << fmt(r.lr) << ',' << fmt(r.wall_ms) << ',' << fmt(r.validation_nmse_w) << '\n';
    }
    return os.str();
}

inline constexpr const char* kReportHeader =
    "room_seed,mode,D,split_seed,model,evaluated,nmse_w,nmse_x,nmse_y,nmse_z,nmse_xyz,pcc_w,pcc_x,pcc_y,pcc_z,pcc_xyz,"
    "degenerate_positions";

inline std::string report_row(const metrics::Report& r) {
    std::ostringstream os;
    os << r.room_seed << ',' << r.mode << ',' << r.measurements << ',' << r.split_seed << ',' << r.model << ','
       << r.evaluated;
    os << ',' << fmt(r.nmse[0]) << ',' << fmt(r.nmse[1]) << ',' << fmt(r.nmse[2]) << ',' << fmt(r.nmse[3]) << ','
       << fmt(r.nmse_xyz()) << ',' << fmt(r.pcc_ch[0]) << ',' << fmt(r.pcc_ch[1]) << ',' << fmt(r.pcc_ch[2]) << ','
       << fmt(r.pcc_ch[3]) << ',' << fmt(r.pcc_xyz()) << ',' << r.degenerate_positions;
    return os.str();
}

inline std::string reports_csv(const std::vector<metrics::Report>& reports) {
    std::string s = std::string(kReportHeader) + "\n";
    for (const auto& r : reports) s += report_row(r) + "\n";
    return s;
}

inline std::vector<metrics::Report> parse_reports_csv(const std::string& text, const std::string& what) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kReportHeader) throw FormatError(what + ": not a report CSV");
    std::vector<metrics::Report> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 17) throw FormatError(what + ": expected 17 fields, got " + std::to_string(f.size()));
        metrics::Report r;
        try {
            r.room_seed = std::stoull(f[0]);
            r.mode = f[1];
            r.measurements = std::stoull(f[2]);
            r.split_seed = std::stoull(f[3]);
            r.model = f[4];
            r.evaluated = std::stoull(f[5]);
            r.degenerate_positions = std::stoull(f[16]);
        } catch (const std::logic_error&) {
            throw FormatError(what + ": bad integer field");
        }
        for (int c = 0; c < 4; ++c) {
            r.nmse[c] = parse_double(f[6 + c], what);
            r.pcc_ch[c] = parse_double(f[11 + c], what);
        }
        out.push_back(r);
    }
    return out;
}

// Mean over rooms of one (mode, D, model) condition. NMSE is averaged in dB.
struct ConditionSummary {
    std::string mode;
    std::size_t measurements = 0;
    std::string model;
    std::size_t rooms = 0;
    double nmse_w = 0.0, nmse_xyz = 0.0, pcc_w = 0.0, pcc_xyz = 0.0;
};

inline std::vector<ConditionSummary> aggregate_reports(const std::vector<metrics::Report>& reports) {
    if (reports.empty()) throw UsageError("report: no reports to aggregate");
    using Key = std::tuple<std::string, std::size_t, std::string>;
    std::map<Key, std::vector<const metrics::Report*>> groups;
    for (const auto& r : reports) groups[{r.mode, r.measurements, r.model}].push_back(&r);
    std::vector<ConditionSummary> out;
    for (const auto& [key, members] : groups) {
        std::set<std::uint64_t> rooms;
        for (const auto* r : members) {
            if (!rooms.insert(r->room_seed).second)
                throw ConfigurationError("report: room " + std::to_string(r->room_seed) + " appears twice for " +
                                         std::get<2>(key) + " " + std::get<0>(key) + " D=" +
                                         std::to_string(std::get<1>(key)));
            if (r->evaluated != members.front()->evaluated)
                throw ConfigurationError("report: mixed evaluation sets within " + std::get<2>(key) + " " +
                                         std::get<0>(key) + " D=" + std::to_string(std::get<1>(key)));
        }
        ConditionSummary s{std::get<0>(key), std::get<1>(key), std::get<2>(key), members.size()};
        for (const auto* r : members) {
            s.nmse_w += r->nmse_w();
            s.nmse_xyz += r->nmse_xyz();
            s.pcc_w += r->pcc_w();
            s.pcc_xyz += r->pcc_xyz();
        }
        const double n = static_cast<double>(members.size());
        s.nmse_w /= n;
        s.nmse_xyz /= n;
        s.pcc_w /= n;
        s.pcc_xyz /= n;
        out.push_back(s);
    }
    return out;
}

// One row per (mode, D, model, metric) for external plotting.
inline std::string long_format_csv(const std::vector<ConditionSummary>& rows) {
    std::ostringstream os;
    os << "mode,D,model,metric,value,rooms\n";
    for (const auto& s : rows) {
        const std::pair<const char*, double> metrics[] = {
            {"nmse_w", s.nmse_w}, {"nmse_xyz", s.nmse_xyz}, {"pcc_w", s.pcc_w}, {"pcc_xyz", s.pcc_xyz}};
        for (const auto& [name, v] : metrics)
            os << s.mode << ',' << s.measurements << ',' << s.model << ',' << name << ',' << fmt(v) << ',' << s.rooms
               << '\n';
    }
    return os.str();
}

// Models as rows; for each (mode, D) the four columns NMSE W, NMSE XYZ, PCC W, PCC XYZ.
inline std::string summary_table_csv(const std::vector<ConditionSummary>& rows) {
    std::vector<std::pair<std::string, std::size_t>> conditions;
    std::vector<std::string> models;
    for (const auto& s : rows) {
        std::pair<std::string, std::size_t> c{s.mode, s.measurements};
        if (std::find(conditions.begin(), conditions.end(), c) == conditions.end()) conditions.push_back(c);
        if (std::find(models.begin(), models.end(), s.model) == models.end()) models.push_back(s.model);
    }
    std::ostringstream os;
    os << "model";
    for (const auto& [mode, d] : conditions)
        for (const char* m : {"nmse_w", "nmse_xyz", "pcc_w", "pcc_xyz"}) os << ',' << mode << "_D" << d << '_' << m;
    os << '\n';
    for (const auto& model : models) {
        os << model;
        for (const auto& [mode, d] : conditions) {
            const ConditionSummary* hit = nullptr;
            for (const auto& s : rows)
                if (s.model == model && s.mode == mode && s.measurements == d) hit = &s;
            if (hit)
                os << ',' << fmt(hit->nmse_w) << ',' << fmt(hit->nmse_xyz) << ',' << fmt(hit->pcc_w) << ','
                   << fmt(hit->pcc_xyz);
            else
                os << ",,,,";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace vpnf::store
