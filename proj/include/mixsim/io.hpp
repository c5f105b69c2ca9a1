#pragma once
// Panel CSV, effect series CSV and JSON exports, plus content hashes for run
// manifests. Numbers are written with %.17g so they round-trip exactly.

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mixsim/estimator.hpp"

namespace mixsim::io {

using nlohmann::json;

inline std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view s) {
    if (s == "NA" || s == "nan") return kUndefined;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("not a number: '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot write " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw OutputError("write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir)) throw OutputError("output directory not writable: " + dir.string());
    const auto probe = dir / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw OutputError("output directory not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);
}

// Git-style blob id: sha1("blob <len>\0" + content).
inline std::string blob_sha1(std::string_view content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw OutputError("hash context allocation failed");
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Panels
// ---------------------------------------------------------------------------

inline constexpr std::string_view kPanelHeader = "scenario,seed,unit_id,t,w,y,q";

// Long format, one row per (unit, round), ordered by unit then round.
inline void write_panel_csv(std::ostream& os, const Panel& p, bool header = true) {
    if (header) os << kPanelHeader << '\n';
    const auto scen = to_string(p.scenario);
    for (std::size_t i = 0; i < p.n_units(); ++i)
        for (std::size_t t = 0; t < p.y.cols(); ++t)
            os << scen << ',' << p.seed << ',' << i << ',' << t << ',' << static_cast<int>(p.w(i, t)) << ','
               << fmt(p.y(i, t)) << ',' << fmt(p.q[i]) << '\n';
}

inline std::string panel_csv(const Panel& p) {
    std::ostringstream os;
    write_panel_csv(os, p);
    return os.str();
}

// Reads every scenario found in the file. t_warmup is taken as the number of
// leading rounds (after round 0) without any treated unit.
inline std::map<std::string, Panel> read_panels_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("panel CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kPanelHeader) throw ConfigError("panel CSV header must be '" + std::string(kPanelHeader) + "'");

    struct Row {
        std::size_t i;
        std::size_t t;
        int w;
        double y;
        double q;
    };
    std::map<std::string, std::vector<Row>> rows;
    std::map<std::string, std::uint64_t> seeds;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 7) throw ConfigError("panel CSV line " + std::to_string(lineno) + ": expected 7 fields");
        const std::string scen(f[0]);
        scenario_from_string(scen);
        const auto i = parse_int(f[2]);
        const auto t = parse_int(f[3]);
        const auto w = parse_int(f[4]);
        if (i < 0 || t < 0) throw ConfigError("panel CSV line " + std::to_string(lineno) + ": negative index");
        if (w != 0 && w != 1) throw ConfigError("panel CSV line " + std::to_string(lineno) + ": w must be 0 or 1");
        seeds[scen] = static_cast<std::uint64_t>(parse_int(f[1]));
        rows[scen].push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(t), static_cast<int>(w),
                              parse_double(f[5]), parse_double(f[6])});
    }
    if (rows.empty()) throw ConfigError("panel CSV has no data rows");

    std::map<std::string, Panel> out;
    for (auto& [scen, rs] : rows) {
        std::size_t n = 0, cols = 0;
        for (const auto& r : rs) {
            n = std::max(n, r.i + 1);
            cols = std::max(cols, r.t + 1);
        }
        if (rs.size() != n * cols) throw ConfigError("panel CSV for '" + scen + "' is not a complete unit x round table");
        Panel p(n, static_cast<int>(cols) - 1);
        p.scenario = scenario_from_string(scen);
        p.seed = seeds[scen];
        std::vector<std::uint8_t> seen(n * cols, 0);
        for (const auto& r : rs) {
            if (seen[r.t * n + r.i]++) throw ConfigError("panel CSV for '" + scen + "' repeats a (unit, round) pair");
            p.y(r.i, r.t) = r.y;
            p.w(r.i, r.t) = static_cast<std::uint8_t>(r.w);
            p.q[r.i] = r.q;
        }
        int warm = 0;
        for (std::size_t t = 1; t < cols; ++t) {
            const auto c = p.w.col(t);
            if (std::any_of(c.begin(), c.end(), [](std::uint8_t v) { return v != 0; })) break;
            ++warm;
        }
        p.t_warmup = warm;
        p.validate();
        out.emplace(scen, std::move(p));
    }
    return out;
}

// Picks `scenario` if present, otherwise the only panel in the file.
inline Panel read_panel_csv(std::istream& is, std::string_view scenario = "experiment") {
    auto panels = read_panels_csv(is);
    if (auto it = panels.find(std::string(scenario)); it != panels.end()) return std::move(it->second);
    if (panels.size() == 1) return std::move(panels.begin()->second);
    throw ConfigError("panel CSV has no '" + std::string(scenario) + "' scenario");
}

// ---------------------------------------------------------------------------
// Effect series
// ---------------------------------------------------------------------------

using NamedSeries = std::vector<std::pair<std::string, EffectSeries>>;

// Wide format: t, then one column per series.
inline std::string effects_csv(const NamedSeries& series) {
    std::ostringstream os;
    os << 't';
    int horizon = 0;
    for (const auto& [name, s] : series) {
        os << ',' << name;
        horizon = std::max(horizon, s.horizon());
    }
    os << '\n';
    for (int t = 0; t <= horizon; ++t) {
        os << t;
        for (const auto& [name, s] : series) os << ',' << (t <= s.horizon() ? fmt(s[t]) : "NA");
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON exports
// ---------------------------------------------------------------------------

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json batches_json(const std::vector<Subpopulation>& batches, const Panel* panel = nullptr) {
    json arr = json::array();
    for (std::size_t k = 0; k < batches.size(); ++k) {
        const auto& b = batches[k];
        json o = {{"batch", k},
                  {"stratum_id", b.stratum_id},
                  {"anchor_rank", b.anchor_rank},
                  {"size", b.indices.size()},
                  {"indices", b.indices}};
        if (panel) {
            const auto s = summarize_batch(*panel, b);
            o["q_k"] = s.q_k;
            o["pi_path"] = s.pi_path;
        }
        arr.push_back(std::move(o));
    }
    return arr;
}

inline json identifiability_json(const IdentifiabilityReport& r) {
    json o = {{"cross_variation", r.cross_variation},
              {"temporal_ok", r.temporal_ok},
              {"temporal_rank", r.temporal_rank},
              {"temporal_singular_values", r.temporal_singular_values},
              {"pass", r.pass()}};
    if (r.witness) {
        const auto& w = *r.witness;
        json obs = json::array();
        for (const auto& [k, t] : w.obs) obs.push_back({{"batch", k}, {"t", t}});
        o["witness"] = {{"observations", obs}, {"q_low", w.q_low},   {"q_high", w.q_high},
                        {"p_low", w.p_low},    {"p_high", w.p_high}, {"z4_det", w.z4_det}};
    } else {
        o["witness"] = nullptr;
    }
    return o;
}

inline json theta_json(const ThetaReduced& th) {
    return {{"delta_h", num(th.delta_h)},   {"delta_a", num(th.delta_a)},   {"tau_h", num(th.tau_h)},
            {"tau_a", num(th.tau_a)},       {"alpha_bar", num(th.alpha_bar)}, {"beta_bar", num(th.beta_bar)},
            {"gamma_bar", num(th.gamma_bar)}};
}

inline json fit_json(const FitReport& f) {
    json o = {{"theta_hat", theta_json(f.theta_hat)},
              {"residual_sum_squares", num(f.residual_sum_squares)},
              {"design_rank", f.design_rank},
              {"rank_deficient", f.rank_deficient},
              {"condition_estimate", num(f.condition_estimate)},
              {"singular_values", f.singular_values},
              {"n_rows", f.n_rows}};
    o["identifiability"] = f.identifiability ? identifiability_json(*f.identifiability) : json(nullptr);
    return o;
}

inline json series_json(const EffectSeries& s) {
    json arr = json::array();
    for (double v : s.values) arr.push_back(num(v));
    return arr;
}

}  // namespace mixsim::io
