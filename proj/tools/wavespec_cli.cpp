// Command-line front end: archivable JSON run configurations in; plot-ready
// CSV curve data or machine-readable JSON reports out.  Identical configs
// produce byte-identical files: numbers are printed with 17 significant
// digits (round-trip exact for doubles), sample orders are fixed, and every
// file header carries a hash of the effective configuration.
//
// Exit codes: 0 success, 2 config/model error, 3 zero on the contour,
// 4 branch-point proximity.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wavespec/evans.hpp"
#include "wavespec/fkpp.hpp"
#include "wavespec/keller_segel.hpp"
#include "wavespec/spectrum.hpp"

namespace ws = wavespec;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Formatting helpers.

std::string num17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string jesc(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char b[8];
                    std::snprintf(b, sizeof b, "\\u%04x", static_cast<unsigned>(ch));
                    out += b;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double dget(const json& j, const char* key) { return j.at(key).get<double>(); }
int iget(const json& j, const char* key) { return j.at(key).get<int>(); }
bool bget(const json& j, const char* key) { return j.at(key).get<bool>(); }

ws::Complex cget(const json& a, const char* what) {
    if (!a.is_array() || a.size() != 2)
        throw ws::ConfigError(std::string(what) + " must be a [re, im] pair");
    return {a[0].get<double>(), a[1].get<double>()};
}

// ---------------------------------------------------------------------------
// Configuration: defaults, embedded presets, merging, key validation.

json default_config() {
    json j;
    j["command"] = "";
    j["model"] = "fkpp";
    j["params"] = {{"delta", 1.0}, {"c", 2.0}, {"alpha", 1.0}, {"beta", 2.0}};
    j["tolerances"] = {{"rel", 1e-10},
                       {"abs", 1e-12},
                       {"tail", 1e-10},
                       {"hyperbolicity", 1e-9},
                       {"theta_max", ws::kPi / 3.0}};
    j["evans"] = {{"truncation_cap", 60.0}, {"domain", -1.0},
                  {"span_factor", 100.0},   {"adaptive_span", true},
                  {"at_branch_ok", false},  {"allow_restricted", false},
                  {"switch_threshold", 10.0}};
    j["contour"] = {{"kind", ""},   {"center", {0.0, 0.0}},    {"radius", 1.0},
                    {"r_in", 1.0},  {"r_out", 10.0},           {"shift", 0.0},
                    {"indent", 0.0}, {"corner_a", {0.0, 0.0}}, {"corner_b", {1.0, 1.0}}};
    j["winding"] = {{"samples_per_segment", 64}, {"max_depth", 24},   {"workers", 0},
                    {"closure_tol", 0.05},       {"zero_factor", 1e-12}, {"branch_tol", 1e-3}};
    j["wave"] = {{"half_length", 0.0}, {"samples", 801}};
    j["eval"] = {{"points", json::array()},
                 {"line", {{"from", {0.0, 0.0}}, {"to", {0.0, 0.0}}, {"samples", 0}}}};
    j["spectrum"] = {{"k_max", 0.0},  {"k_samples", 401}, {"window", {-1.0, 1.0, -1.0, 1.0}},
                     {"nre", 21},     {"nim", 21},        {"refine_tol", 1e-3},
                     {"nu_min", -10.0}, {"nu_max", 10.0}, {"nu_samples", 401}};
    j["crossings"] = {{"lambdas", json::array()}};
    return j;
}

/// One ready-to-run configuration per shipped study.
const std::map<std::string, const char*>& presets() {
    static const std::map<std::string, const char*> table = {
        {"fkpp-wave", R"({
            "command": "wave", "model": "fkpp",
            "params": {"delta": 1.0, "c": 3.0},
            "wave": {"half_length": 0.0, "samples": 801}
        })"},
        {"ks-wave", R"({
            "command": "wave", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "wave": {"half_length": 0.0, "samples": 801}
        })"},
        {"fkpp-continuous", R"({
            "command": "spectrum continuous", "model": "fkpp",
            "params": {"delta": 1.0, "c": 2.041241452319315},
            "spectrum": {"k_max": 3.0, "k_samples": 601}
        })"},
        {"ks-continuous", R"({
            "command": "spectrum continuous", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "spectrum": {"k_max": 6.0, "k_samples": 1201}
        })"},
        {"fkpp-regions", R"({
            "command": "spectrum regions", "model": "fkpp",
            "params": {"delta": 1.0, "c": 2.4},
            "spectrum": {"window": [-3.0, 2.0, -2.0, 2.0], "nre": 51, "nim": 41}
        })"},
        {"ks-absolute", R"({
            "command": "spectrum absolute", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "spectrum": {"window": [-0.1, 0.5, -5.0, 5.0], "nre": 13, "nim": 41,
                         "refine_tol": 0.001}
        })"},
        {"fkpp-weighted", R"({
            "command": "spectrum weighted", "model": "fkpp",
            "params": {"delta": 1.0, "c": 3.0},
            "spectrum": {"nu_min": -3.0, "nu_max": 0.5, "nu_samples": 351}
        })"},
        {"ks-weighted", R"({
            "command": "spectrum weighted", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "spectrum": {"nu_min": -10.0, "nu_max": 10.0, "nu_samples": 401}
        })"},
        {"fkpp-evans-real-axis", R"({
            "command": "evans eval", "model": "fkpp",
            "params": {"delta": 1.0, "c": 2.4},
            "eval": {"line": {"from": [-0.4, 0.0], "to": [1.0, 0.0], "samples": 141}}
        })"},
        {"fkpp-evans-at-branch", R"({
            "command": "evans eval", "model": "fkpp",
            "params": {"delta": 1.0, "c": 2.4},
            "evans": {"at_branch_ok": true},
            "eval": {"points": [[-0.44, 0.0]]}
        })"},
        {"fkpp-evans-winding", R"({
            "command": "evans wind", "model": "fkpp",
            "params": {"delta": 1.0, "c": 2.4},
            "contour": {"kind": "right_half_disc", "radius": 1e6, "indent": 0.5}
        })"},
        {"ks-evans-annulus", R"({
            "command": "evans wind", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "evans": {"allow_restricted": true},
            "contour": {"kind": "right_half_annulus", "r_in": 4.0, "r_out": 1e7}
        })"},
        {"ks-evans-half-disc", R"({
            "command": "evans wind", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "evans": {"allow_restricted": true},
            "contour": {"kind": "shifted_half_disc", "radius": 4.0, "shift": 0.3}
        })"},
        {"ks-evans-origin", R"({
            "command": "evans wind", "model": "ks",
            "params": {"alpha": 1.0, "beta": 2.0, "c": 2.0, "delta": 1.0},
            "evans": {"allow_restricted": true},
            "contour": {"kind": "circle", "center": [0.0, 0.0], "radius": 0.01}
        })"},
        {"fkpp-crossings", R"({
            "command": "crossings", "model": "fkpp",
            "params": {"delta": 1.0, "c": 3.0},
            "crossings": {"lambdas": [0.0, 0.5, 1.0, 5.0, 25.0]}
        })"},
    };
    return table;
}

std::string preset_names() {
    std::string out;
    for (const auto& [name, text] : presets()) {
        (void)text;
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

/// Reject unknown keys so that a typo in an archived config fails loudly
/// instead of silently falling back to a default.
void check_keys(const json& j, const std::string& path) {
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"", {"command", "model", "params", "tolerances", "evans", "contour", "winding",
              "wave", "eval", "spectrum", "crossings"}},
        {"params", {"delta", "c", "alpha", "beta"}},
        {"tolerances", {"rel", "abs", "tail", "hyperbolicity", "theta_max"}},
        {"evans", {"truncation_cap", "domain", "span_factor", "adaptive_span", "at_branch_ok",
                   "allow_restricted", "switch_threshold"}},
        {"contour", {"kind", "center", "radius", "r_in", "r_out", "shift", "indent",
                     "corner_a", "corner_b"}},
        {"winding", {"samples_per_segment", "max_depth", "workers", "closure_tol",
                     "zero_factor", "branch_tol"}},
        {"wave", {"half_length", "samples"}},
        {"eval", {"points", "line"}},
        {"eval.line", {"from", "to", "samples"}},
        {"spectrum", {"k_max", "k_samples", "window", "nre", "nim", "refine_tol", "nu_min",
                      "nu_max", "nu_samples"}},
        {"crossings", {"lambdas"}},
    };
    const auto it = allowed.find(path);
    if (it == allowed.end()) return;
    if (!j.is_object())
        throw ws::ConfigError("config section '" + path + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!it->second.count(key))
            throw ws::ConfigError("unknown config key '" + key + "'" +
                                  (path.empty() ? "" : " in section '" + path + "'"));
        if (value.is_object()) check_keys(value, path.empty() ? key : path + "." + key);
    }
}

// ---------------------------------------------------------------------------
// Run context and model adapters.

struct Setup {
    json cfg;
    std::string command;   // "wave", "spectrum absolute", "evans wind", "crossings"
    bool is_ks = false;
    std::string format;    // resolved to "csv" or "json"
    std::string out_path;  // empty means standard output
    std::string hash;
    std::optional<int> stdout_integer;  // winding result echoed on stdout
};

ws::Tolerances integrator_tol(const json& cfg) {
    const json& t = cfg.at("tolerances");
    return {dget(t, "rel"), dget(t, "abs")};
}

ws::fkpp::Params fkpp_params(const json& cfg) {
    const json& p = cfg.at("params");
    ws::fkpp::Params out;
    out.delta = dget(p, "delta");
    out.c = dget(p, "c");
    out.validate();
    return out;
}

ws::ks::Params ks_params(const json& cfg) {
    const json& p = cfg.at("params");
    ws::ks::Params out;
    out.alpha = dget(p, "alpha");
    out.beta = dget(p, "beta");
    out.c = dget(p, "c");
    out.delta = dget(p, "delta");
    out.validate();
    return out;
}

ws::fkpp::EvansOptions fkpp_evans_options(const json& cfg) {
    const json& e = cfg.at("evans");
    ws::fkpp::EvansOptions o;
    o.tol = integrator_tol(cfg);
    o.switch_threshold = dget(e, "switch_threshold");
    o.truncation_cap = dget(e, "truncation_cap");
    o.span_factor = dget(e, "span_factor");
    o.adaptive_span = bget(e, "adaptive_span");
    o.at_branch_ok = bget(e, "at_branch_ok");
    return o;
}

ws::ks::EvansOptions ks_evans_options(const json& cfg) {
    const json& e = cfg.at("evans");
    ws::ks::EvansOptions o;
    o.tol = integrator_tol(cfg);
    o.switch_threshold = dget(e, "switch_threshold");
    o.domain = dget(e, "domain");
    o.span_factor = dget(e, "span_factor");
    o.adaptive_span = bget(e, "adaptive_span");
    o.allow_restricted = bget(e, "allow_restricted");
    return o;
}

ws::evans::WindingOptions winding_options(const json& cfg) {
    const json& w = cfg.at("winding");
    ws::evans::WindingOptions o;
    o.theta_max = dget(cfg.at("tolerances"), "theta_max");
    o.max_depth = iget(w, "max_depth");
    o.samples_per_segment = iget(w, "samples_per_segment");
    o.closure_tol = dget(w, "closure_tol");
    o.zero_factor = dget(w, "zero_factor");
    o.branch_tol = dget(w, "branch_tol");
    o.workers = iget(w, "workers");
    return o;
}

ws::evans::Contour contour_from(const json& cfg) {
    const json& c = cfg.at("contour");
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "circle") return ws::evans::circle(cget(c.at("center"), "contour.center"), dget(c, "radius"));
    if (kind == "right_half_annulus") return ws::evans::right_half_annulus(dget(c, "r_in"), dget(c, "r_out"));
    if (kind == "shifted_half_disc") return ws::evans::shifted_half_disc(dget(c, "radius"), dget(c, "shift"));
    if (kind == "right_half_disc") return ws::evans::right_half_disc(dget(c, "radius"), dget(c, "indent"));
    if (kind == "rectangle")
        return ws::evans::rectangle(cget(c.at("corner_a"), "contour.corner_a"),
                             cget(c.at("corner_b"), "contour.corner_b"));
    throw ws::ConfigError("contour.kind must be one of circle, right_half_annulus, "
                          "shifted_half_disc, right_half_disc, rectangle");
}

// ---------------------------------------------------------------------------
// Output assembly: tables rendered as CSV (curve data) or JSON (reports).

struct Table {
    std::vector<std::string> cols;
    std::vector<std::string> csv_rows;
    std::vector<std::string> json_rows;
};

struct Row {
    std::string csv, js;
    void sep() {
        if (!csv.empty()) {
            csv += ',';
            js += ',';
        }
    }
    void num(double x) {
        sep();
        csv += num17(x);
        js += std::isfinite(x) ? num17(x) : std::string("null");
    }
    void integer(long long v) {
        sep();
        char b[32];
        std::snprintf(b, sizeof b, "%lld", v);
        csv += b;
        js += b;
    }
    void boolean(bool v) {
        sep();
        csv += v ? "1" : "0";
        js += v ? "1" : "0";
    }
    void str(const std::string& s) {
        sep();
        csv += s;
        js += '"' + jesc(s) + '"';
    }
};

void push(Table& t, Row&& r) {
    t.csv_rows.push_back(std::move(r.csv));
    t.json_rows.push_back("[" + std::move(r.js) + "]");
}

struct Output {
    std::vector<std::pair<std::string, Table>> tables;
    std::vector<std::string> notes;             // behavioural notes and warnings
    std::vector<std::string> csv_extra;         // extra "key: value" header lines
    std::vector<std::string> json_extra;        // preformatted top-level fields
};

std::string params_echo_csv(const Setup& s) {
    const json& p = s.cfg.at("params");
    if (s.is_ks)
        return "alpha=" + num17(dget(p, "alpha")) + " beta=" + num17(dget(p, "beta")) +
               " c=" + num17(dget(p, "c")) + " delta=" + num17(dget(p, "delta"));
    return "delta=" + num17(dget(p, "delta")) + " c=" + num17(dget(p, "c"));
}

std::string params_echo_json(const Setup& s) {
    const json& p = s.cfg.at("params");
    if (s.is_ks)
        return "{\"alpha\": " + num17(dget(p, "alpha")) + ", \"beta\": " + num17(dget(p, "beta")) +
               ", \"c\": " + num17(dget(p, "c")) + ", \"delta\": " + num17(dget(p, "delta")) + "}";
    return "{\"delta\": " + num17(dget(p, "delta")) + ", \"c\": " + num17(dget(p, "c")) + "}";
}

std::string tolerances_echo(const Setup& s, bool as_json) {
    const json& t = s.cfg.at("tolerances");
    const char* keys[] = {"rel", "abs", "tail", "hyperbolicity", "theta_max"};
    std::string out = as_json ? "{" : "";
    for (const char* k : keys) {
        if (as_json) {
            if (out.size() > 1) out += ", ";
            out += "\"" + std::string(k) + "\": " + num17(dget(t, k));
        } else {
            if (!out.empty()) out += ' ';
            out += std::string(k) + "=" + num17(dget(t, k));
        }
    }
    if (as_json) out += "}";
    return out;
}

std::string render_csv(const Setup& s, const Output& o) {
    std::string r;
    r += "# wavespec " + s.command + "\n";
    r += "# config-hash: " + s.hash + "\n";
    r += "# model: " + std::string(s.is_ks ? "ks" : "fkpp") + "\n";
    r += "# params: " + params_echo_csv(s) + "\n";
    r += "# tolerances: " + tolerances_echo(s, false) + "\n";
    for (const std::string& line : o.csv_extra) r += "# " + line + "\n";
    for (const std::string& note : o.notes) r += "# note: " + note + "\n";
    bool first = true;
    for (const auto& [name, t] : o.tables) {
        if (!first) r += "# table: " + name + "\n";
        first = false;
        std::string head;
        for (const std::string& c : t.cols) {
            if (!head.empty()) head += ',';
            head += c;
        }
        r += head + "\n";
        for (const std::string& row : t.csv_rows) r += row + "\n";
    }
    return r;
}

std::string render_json(const Setup& s, const Output& o) {
    std::vector<std::string> fields;
    fields.push_back("\"meta\": {\n    \"command\": \"wavespec " + jesc(s.command) +
                     "\",\n    \"config_hash\": \"" + s.hash + "\",\n    \"model\": \"" +
                     std::string(s.is_ks ? "ks" : "fkpp") + "\",\n    \"params\": " +
                     params_echo_json(s) + ",\n    \"tolerances\": " + tolerances_echo(s, true) +
                     "\n  }");
    {
        std::string notes = "\"notes\": [";
        for (std::size_t i = 0; i < o.notes.size(); ++i)
            notes += (i ? ", " : "") + ("\"" + jesc(o.notes[i]) + "\"");
        notes += "]";
        fields.push_back(notes);
    }
    for (const std::string& f : o.json_extra) fields.push_back(f);
    for (const auto& [name, t] : o.tables) {
        std::string tbl = "\"" + jesc(name) + "\": {\n    \"columns\": [";
        for (std::size_t i = 0; i < t.cols.size(); ++i)
            tbl += (i ? ", " : "") + ("\"" + jesc(t.cols[i]) + "\"");
        tbl += "],\n    \"rows\": [";
        for (std::size_t i = 0; i < t.json_rows.size(); ++i)
            tbl += (i ? ",\n      " : "\n      ") + t.json_rows[i];
        tbl += t.json_rows.empty() ? "]\n  }" : "\n    ]\n  }";
        fields.push_back(tbl);
    }
    std::string r = "{\n";
    for (std::size_t i = 0; i < fields.size(); ++i)
        r += "  " + fields[i] + (i + 1 < fields.size() ? ",\n" : "\n");
    r += "}\n";
    return r;
}

void write_output(const Setup& s, const Output& o) {
    const std::string text = s.format == "json" ? render_json(s, o) : render_csv(s, o);
    if (s.out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream f(s.out_path, std::ios::binary);
        if (!f) throw ws::ConfigError("cannot open output file '" + s.out_path + "'");
        f << text;
        if (!f.good()) throw ws::ConfigError("failed writing output file '" + s.out_path + "'");
    }
}

// ---------------------------------------------------------------------------
// Commands.

void run_wave(Setup& s) {
    Table t;
    const json& wv = s.cfg.at("wave");
    const int n = iget(wv, "samples");
    if (n < 2) throw ws::ConfigError("wave.samples must be at least 2");
    double L = dget(wv, "half_length");

    if (s.is_ks) {
        const ws::ks::Params p = ks_params(s.cfg);
        if (L <= 0.0) L = p.default_domain();
        t.cols = {"z", "u", "w", "du", "dw"};
        for (int i = 0; i < n; ++i) {
            const double z = -L + 2.0 * L * i / double(n - 1);
            const ws::ks::WaveEval e = ws::ks::wave_eval(p, z);
            Row r;
            r.num(z);
            r.num(e.u);
            r.num(e.w);
            r.num(e.up);
            r.num(e.wp);
            push(t, std::move(r));
        }
    } else {
        const ws::fkpp::Params p = fkpp_params(s.cfg);
        const double tail = dget(s.cfg.at("tolerances"), "tail");
        const ws::fkpp::Wave w = ws::fkpp::shoot_wave(p, tail, integrator_tol(s.cfg));
        const double span = std::min(w.L_minus, w.L_plus);
        if (L <= 0.0) L = span;
        if (L > span + 1e-9)
            throw ws::ConfigError("wave.half_length exceeds the computed profile span " +
                                  num17(span));
        t.cols = {"z", "u", "du"};
        for (int i = 0; i < n; ++i) {
            const double z = -L + 2.0 * L * i / double(n - 1);
            Row r;
            r.num(z);
            r.num(w.u(z));
            r.num(w.v(z));
            push(t, std::move(r));
        }
    }
    Output o;
    o.tables.emplace_back("data", std::move(t));
    write_output(s, o);
}

void run_spectrum_continuous(Setup& s) {
    const json& sp = s.cfg.at("spectrum");
    double k_max = dget(sp, "k_max");
    if (k_max <= 0.0) k_max = 10.0;
    const int n = iget(sp, "k_samples");
    if (n < 2) throw ws::ConfigError("spectrum.k_samples must be at least 2");

    Table t;
    t.cols = {"k", "re_lambda", "im_lambda", "branch"};
    auto add = [&t](double k, ws::Complex lam, int branch) {
        Row r;
        r.num(k);
        r.num(lam.real());
        r.num(lam.imag());
        r.integer(branch);
        push(t, std::move(r));
    };
    if (s.is_ks) {
        const ws::ks::Params p = ks_params(s.cfg);
        for (int i = 0; i < n; ++i) {
            const double k = -k_max + 2.0 * k_max * i / double(n - 1);
            const auto branches = ws::ks::dispersion(p, k);
            for (int b = 0; b < 4; ++b) add(k, branches[static_cast<std::size_t>(b)], b);
        }
    } else {
        const ws::fkpp::Params p = fkpp_params(s.cfg);
        for (int i = 0; i < n; ++i) {
            const double k = -k_max + 2.0 * k_max * i / double(n - 1);
            const auto branches = ws::fkpp::dispersion(p, k);
            for (int b = 0; b < 2; ++b) add(k, branches[static_cast<std::size_t>(b)], b);
        }
    }
    Output o;
    o.tables.emplace_back("data", std::move(t));
    write_output(s, o);
}

std::array<double, 4> window_from(const json& sp) {
    const json& w = sp.at("window");
    if (!w.is_array() || w.size() != 4)
        throw ws::ConfigError("spectrum.window must be [re0, re1, im0, im1]");
    return {w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()};
}

void run_spectrum_regions(Setup& s) {
    const json& sp = s.cfg.at("spectrum");
    const auto win = window_from(sp);
    const int nre = iget(sp, "nre"), nim = iget(sp, "nim");
    if (nre < 2 || nim < 2) throw ws::ConfigError("spectrum.nre and spectrum.nim must be >= 2");
    const double tol = dget(s.cfg.at("tolerances"), "hyperbolicity");
    const ws::SpectralProblem prob = s.is_ks ? ws::ks::make_problem(ks_params(s.cfg))
                                             : ws::fkpp::make_problem(fkpp_params(s.cfg));
    const ws::RegionMap map =
        ws::build_region_map(prob, win[0], win[1], win[2], win[3], nre, nim, tol);

    Table t;
    t.cols = {"re_lambda", "im_lambda", "kind", "region_id"};
    for (int j = 0; j < nim; ++j)
        for (int i = 0; i < nre; ++i) {
            const ws::Complex lam = map.node(i, j);
            const auto& [sm, spg] = map.node_sigs[static_cast<std::size_t>(map.idx(i, j))];
            const char* kind = (sm.n_zero > 0 || spg.n_zero > 0) ? "boundary"
                               : (sm == spg)                     ? "region"
                                                                 : "continuous";
            Row r;
            r.num(lam.real());
            r.num(lam.imag());
            r.str(kind);
            r.integer(map.component[static_cast<std::size_t>(map.idx(i, j))]);
            push(t, std::move(r));
        }
    Output o;
    o.tables.emplace_back("data", std::move(t));
    write_output(s, o);
}

void run_spectrum_absolute(Setup& s) {
    const json& sp = s.cfg.at("spectrum");
    const auto win = window_from(sp);
    const int nre = iget(sp, "nre"), nim = iget(sp, "nim");
    if (nre < 2 || nim < 2) throw ws::ConfigError("spectrum.nre and spectrum.nim must be >= 2");
    const double refine = dget(sp, "refine_tol");
    const ws::SpectralProblem prob = s.is_ks ? ws::ks::make_problem(ks_params(s.cfg))
                                             : ws::fkpp::make_problem(fkpp_params(s.cfg));
    const auto pts =
        ws::absolute_spectrum_scan(prob, win[0], win[1], win[2], win[3], nre, nim, refine);

    Table t;
    t.cols = {"re_lambda", "im_lambda", "end"};
    for (const ws::AbsPoint& pt : pts) {
        Row r;
        r.num(pt.lambda.real());
        r.num(pt.lambda.imag());
        r.str(pt.end == ws::End::Minus ? "minus" : "plus");
        push(t, std::move(r));
    }
    Output o;
    o.csv_extra.push_back("points: " + std::to_string(pts.size()));
    o.json_extra.push_back("\"points\": " + std::to_string(pts.size()));
    o.tables.emplace_back("data", std::move(t));
    write_output(s, o);
}

void run_spectrum_weighted(Setup& s) {
    const json& sp = s.cfg.at("spectrum");
    const double nu_min = dget(sp, "nu_min"), nu_max = dget(sp, "nu_max");
    const int n = iget(sp, "nu_samples");
    if (!(nu_max > nu_min) || n < 2)
        throw ws::ConfigError("spectrum.nu_min/nu_max/nu_samples do not define a sweep");
    double k_max = dget(sp, "k_max");
    if (k_max <= 0.0) k_max = s.is_ks ? 25.0 : 20.0;
    const int k_samples = iget(sp, "k_samples");

    Table t;
    t.cols = {"nu", "edge", "admissible"};
    for (int i = 0; i < n; ++i) {
        const double nu = nu_min + (nu_max - nu_min) * i / double(n - 1);
        const double edge =
            s.is_ks
                ? ws::ks::weighted_dispersion_max_re(ks_params(s.cfg), nu, k_max, k_samples)
                : ws::fkpp::weighted_dispersion_max_re(fkpp_params(s.cfg), nu, k_max, k_samples);
        Row r;
        r.num(nu);
        r.num(edge);
        r.boolean(edge < 0.0);
        push(t, std::move(r));
    }
    Output o;
    o.tables.emplace_back("data", std::move(t));
    write_output(s, o);
}

std::vector<ws::Complex> eval_points(const json& cfg) {
    const json& e = cfg.at("eval");
    std::vector<ws::Complex> pts;
    for (const json& q : e.at("points")) pts.push_back(cget(q, "eval.points entry"));
    const json& ln = e.at("line");
    const int n = iget(ln, "samples");
    if (n != 0) {
        if (n < 2) throw ws::ConfigError("eval.line.samples must be at least 2");
        const ws::Complex a = cget(ln.at("from"), "eval.line.from");
        const ws::Complex b = cget(ln.at("to"), "eval.line.to");
        for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * (double(i) / double(n - 1)));
    }
    if (pts.empty()) throw ws::ConfigError("evans eval needs eval.points or eval.line");
    return pts;
}

void run_evans_eval(Setup& s) {
    const std::vector<ws::Complex> pts = eval_points(s.cfg);
    Output o;
    Table t;
    t.cols = {"re_lambda", "im_lambda", "re_E", "im_E", "abs_E", "arg_cum",
              "chart_u", "chart_s", "canonical", "pole", "switches", "branch_distance"};
    if (!s.is_ks) {
        t.cols.push_back("structural");
        t.cols.push_back("far_defect");
    }

    // Accumulated argument continued through consecutive samples; undefined
    // (emitted as nan/null) at exact zeros.
    double cum = 0.0;
    bool have_prev = false;
    ws::Complex prev;
    auto arg_next = [&](ws::Complex E) -> double {
        if (std::abs(E) == 0.0) return std::numeric_limits<double>::quiet_NaN();
        cum = have_prev ? cum + std::arg(E / prev) : std::arg(E);
        prev = E;
        have_prev = true;
        return cum;
    };

    if (s.is_ks) {
        const ws::ks::Evans ev(ks_params(s.cfg), ks_evans_options(s.cfg));
        for (const ws::Complex lam : pts) {
            const ws::ks::EvansSample m = ev(lam);
            Row r;
            r.num(lam.real());
            r.num(lam.imag());
            r.num(m.E.real());
            r.num(m.E.imag());
            r.num(std::abs(m.E));
            r.num(arg_next(m.E));
            r.integer(m.chart_u);
            r.integer(m.chart_s);
            r.boolean(m.canonical);
            r.boolean(m.pole);
            r.integer(m.switches);
            r.num(m.branch_distance);
            push(t, std::move(r));
        }
    } else {
        const ws::fkpp::Params p = fkpp_params(s.cfg);
        const double tail = dget(s.cfg.at("tolerances"), "tail");
        const ws::fkpp::Evans ev(ws::fkpp::shoot_wave(p, tail, integrator_tol(s.cfg)),
                                 fkpp_evans_options(s.cfg));
        bool noted = false;
        for (const ws::Complex lam : pts) {
            const ws::fkpp::EvansSample m = ev(lam);
            Row r;
            r.num(lam.real());
            r.num(lam.imag());
            r.num(m.E.real());
            r.num(m.E.imag());
            r.num(std::abs(m.E));
            r.num(arg_next(m.E));
            r.integer(m.chart_u);
            r.integer(m.chart_s);
            r.boolean(m.canonical);
            r.boolean(m.pole);
            r.integer(m.switches);
            r.num(m.branch_distance);
            r.boolean(m.structural);
            r.num(m.far_defect);
            push(t, std::move(r));
            if (m.structural && !noted) {
                noted = true;
                o.notes.push_back(
                    "branch point at lambda=" + num17(lam.real()) +
                    ": the decay directions at the positive end merge; the connection onto "
                    "the merged direction is established (far-end defect " +
                    num17(m.far_defect) +
                    "), so this lambda is an eigenvalue in the extended, "
                    "essential-spectrum-edge sense");
            }
        }
    }
    o.tables.emplace_back("data", std::move(t));
    write_output(s, o);
}

void run_evans_wind(Setup& s) {
    const ws::evans::Contour contour = contour_from(s.cfg);
    const ws::evans::WindingOptions wopt = winding_options(s.cfg);
    ws::evans::WindingReport rep;
    if (s.is_ks) {
        const ws::ks::Evans ev(ks_params(s.cfg), ks_evans_options(s.cfg));
        rep = ws::evans::winding(ev, contour, wopt);
    } else {
        const ws::fkpp::Params p = fkpp_params(s.cfg);
        const double tail = dget(s.cfg.at("tolerances"), "tail");
        const ws::fkpp::Evans ev(ws::fkpp::shoot_wave(p, tail, integrator_tol(s.cfg)),
                                 fkpp_evans_options(s.cfg));
        rep = ws::evans::winding(ev, contour, wopt);
    }

    Output o;
    o.notes = rep.warnings;
    o.csv_extra.push_back("winding: " + std::to_string(rep.winding));
    o.csv_extra.push_back("total_arg: " + num17(rep.total_arg));
    o.csv_extra.push_back("refinements: " + std::to_string(rep.refinements));
    for (const ws::Complex& pe : rep.pole_events)
        o.csv_extra.push_back("pole-event: " + num17(pe.real()) + " " + num17(pe.imag()));
    o.json_extra.push_back("\"winding\": " + std::to_string(rep.winding));
    o.json_extra.push_back("\"total_arg\": " + num17(rep.total_arg));
    o.json_extra.push_back("\"refinements\": " + std::to_string(rep.refinements));
    {
        std::string pe = "\"pole_events\": [";
        for (std::size_t i = 0; i < rep.pole_events.size(); ++i)
            pe += (i ? ", " : "") +
                  ("[" + num17(rep.pole_events[i].real()) + ", " +
                   num17(rep.pole_events[i].imag()) + "]");
        pe += "]";
        o.json_extra.push_back(pe);
    }

    Table t;
    t.cols = {"seg", "t", "re_lambda", "im_lambda", "re_E", "im_E", "arg_cum",
              "chart_u", "chart_s", "canonical", "pole", "switches", "depth"};
    for (const ws::evans::Sample& m : rep.samples) {
        Row r;
        r.integer(m.seg);
        r.num(m.t);
        r.num(m.lambda.real());
        r.num(m.lambda.imag());
        r.num(m.E.real());
        r.num(m.E.imag());
        r.num(m.arg_cum);
        r.integer(m.chart_u);
        r.integer(m.chart_s);
        r.boolean(m.canonical);
        r.boolean(m.pole);
        r.integer(m.switches);
        r.integer(m.depth);
        push(t, std::move(r));
    }
    o.tables.emplace_back("samples", std::move(t));
    write_output(s, o);
    s.stdout_integer = rep.winding;
}

void run_crossings(Setup& s) {
    if (s.is_ks)
        throw ws::ConfigError("crossings requires the fkpp model (sign-definite crossing field)");
    const json& lam_list = s.cfg.at("crossings").at("lambdas");
    if (!lam_list.is_array() || lam_list.empty())
        throw ws::ConfigError("crossings.lambdas must be a non-empty array of real values");

    const ws::fkpp::Params p = fkpp_params(s.cfg);
    const double tail = dget(s.cfg.at("tolerances"), "tail");
    const ws::fkpp::Wave wave = ws::fkpp::shoot_wave(p, tail, integrator_tol(s.cfg));
    const ws::fkpp::EvansOptions opts = fkpp_evans_options(s.cfg);

    std::vector<double> lambdas;
    for (const json& v : lam_list) lambdas.push_back(v.get<double>());
    std::vector<int> counts;

    Table t;
    t.cols = {"lambda", "crossings", "degenerate"};
    for (const double lam : lambdas) {
        const ws::fkpp::CrossingCount cc = ws::fkpp::crossing_count(wave, lam, opts);
        counts.push_back(cc.count);
        Row r;
        r.num(lam);
        r.integer(cc.count);
        r.boolean(cc.degenerate);
        push(t, std::move(r));
    }

    // Eigenvalue counts between parameter pairs: |N_i - N_j|.
    Table pairs;
    pairs.cols = {"lambda_a", "lambda_b", "eigenvalues_between"};
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        for (std::size_t j = i + 1; j < lambdas.size(); ++j) {
            Row r;
            r.num(lambdas[i]);
            r.num(lambdas[j]);
            r.integer(std::abs(counts[i] - counts[j]));
            push(pairs, std::move(r));
        }

    Output o;
    o.tables.emplace_back("data", std::move(t));
    o.tables.emplace_back("pairs", std::move(pairs));
    write_output(s, o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Travelling-wave spectral studies: wave profiles, dispersion curves, "
                 "absolute spectra, exponential weights, Evans-function samples and "
                 "adaptive contour winding."};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, preset, out_path, format;
    app.add_option("--config", config_path,
                   "JSON run configuration file (merged over --preset when both given)");
    app.add_option("--preset", preset, "built-in configuration: " + preset_names());
    app.add_option("--out", out_path, "output file path (default: standard output)");
    app.add_option("--format", format,
                   "output format (default: csv for curve data, json for winding reports)")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* wave = app.add_subcommand("wave", "Emit the travelling-wave profile on a uniform grid");
    CLI::App* spectrum =
        app.add_subcommand("spectrum", "Continuous/absolute spectra, region maps, weights");
    spectrum->require_subcommand(1);
    CLI::App* sc_continuous =
        spectrum->add_subcommand("continuous", "Dispersion-curve samples (k, lambda, branch)");
    CLI::App* sc_absolute =
        spectrum->add_subcommand("absolute", "Refined absolute-spectrum points in a window");
    CLI::App* sc_regions =
        spectrum->add_subcommand("regions", "Grid classification by hyperbolic signature pair");
    CLI::App* sc_weighted =
        spectrum->add_subcommand("weighted", "Weighted spectral edge over a weight sweep");
    CLI::App* evans = app.add_subcommand("evans", "Evans-function evaluation and winding");
    evans->require_subcommand(1);
    CLI::App* ev_eval = evans->add_subcommand("eval", "Per-sample Evans values along points/lines");
    CLI::App* ev_wind = evans->add_subcommand("wind", "Adaptive winding around a closed contour");
    CLI::App* crossings =
        app.add_subcommand("crossings", "Real-axis crossing counts and pairwise eigenvalue counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Setup s;
    s.out_path = out_path;
    if (wave->parsed()) s.command = "wave";
    if (spectrum->parsed()) {
        if (sc_continuous->parsed()) s.command = "spectrum continuous";
        if (sc_absolute->parsed()) s.command = "spectrum absolute";
        if (sc_regions->parsed()) s.command = "spectrum regions";
        if (sc_weighted->parsed()) s.command = "spectrum weighted";
    }
    if (evans->parsed()) {
        if (ev_eval->parsed()) s.command = "evans eval";
        if (ev_wind->parsed()) s.command = "evans wind";
    }
    if (crossings->parsed()) s.command = "crossings";

    try {
        if (preset.empty() && config_path.empty())
            throw ws::ConfigError("provide --preset or --config; presets: " + preset_names());

        s.cfg = default_config();
        if (!preset.empty()) {
            const auto& table = presets();
            const auto it = table.find(preset);
            if (it == table.end())
                throw ws::ConfigError("unknown preset '" + preset + "'; presets: " +
                                      preset_names());
            s.cfg.update(json::parse(it->second), true);
        }
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ws::ConfigError("cannot read config file '" + config_path + "'");
            const json user = json::parse(f);
            check_keys(user, "");
            s.cfg.update(user, true);
        }
        check_keys(s.cfg, "");

        const std::string model = s.cfg.at("model").get<std::string>();
        if (model != "fkpp" && model != "ks")
            throw ws::ConfigError("model must be 'fkpp' or 'ks'");
        s.is_ks = model == "ks";
        s.hash = fnv1a_hex(s.cfg.dump());
        s.format = !format.empty() ? format : (s.command == "evans wind" ? "json" : "csv");

        const std::string hint = s.cfg.at("command").get<std::string>();
        if (!hint.empty() && hint != s.command)
            std::fprintf(stderr, "warning: configuration is tuned for 'wavespec %s'\n",
                         hint.c_str());

        if (s.command == "wave") run_wave(s);
        else if (s.command == "spectrum continuous") run_spectrum_continuous(s);
        else if (s.command == "spectrum absolute") run_spectrum_absolute(s);
        else if (s.command == "spectrum regions") run_spectrum_regions(s);
        else if (s.command == "spectrum weighted") run_spectrum_weighted(s);
        else if (s.command == "evans eval") run_evans_eval(s);
        else if (s.command == "evans wind") run_evans_wind(s);
        else if (s.command == "crossings") run_crossings(s);

        if (s.stdout_integer) std::printf("%d\n", *s.stdout_integer);
        return 0;
    } catch (const ws::ZeroOnContourError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ws::BranchPointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ws::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
