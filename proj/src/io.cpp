#include "wiredelay/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace wiredelay {

namespace {

/// Joined list of the admissible keys, for error messages.
std::string key_list(const std::vector<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

void reject_unknown_keys(const Json& obj, const std::string& where,
                         const std::vector<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const auto& k : allowed)
            if (item.key() == k) known = true;
        if (!known)
            throw ConfigError("config: unknown field \"" + item.key() + "\" in " + where +
                              " (expected one of: " + key_list(allowed) + ")");
    }
}

const Json& require_object(const Json& doc, const std::string& where) {
    if (!doc.is_object()) throw ConfigError("config: " + where + " must be a JSON object");
    return doc;
}

double get_number(const Json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("config: " + where + "." + key + " must be finite");
    return x;
}

std::int64_t get_integer(const Json& obj, const std::string& where, const char* key,
                         std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("config: " + where + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t get_unsigned(const Json& obj, const std::string& where, const char* key,
                           std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                   !v.is_number_unsigned()))
        throw ConfigError("config: " + where + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string CsvTable::to_string() const {
    std::ostringstream out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("CsvTable: row width " + std::to_string(row.size()) +
                                        " does not match header width " +
                                        std::to_string(header.size()));
        emit(row);
    }
    return out.str();
}

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

void write_json_file(const std::string& path, const Json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
}

CsvTable moment_csv(const MomentReport& report) {
    CsvTable t;
    t.header = {"n_channels", "beta", "L_over_xi", "quantity", "closed", "ode", "mc",
                "mc_std_error"};
    for (const MomentRow& r : report)
        t.rows.push_back({cell(r.n_channels), cell(r.beta), cell(r.L_over_xi), r.quantity,
                          cell(r.closed), cell(r.ode), cell(r.mc), cell(r.mc_std_error)});
    return t;
}

CsvTable density_csv(const DensityCurve& curve) {
    CsvTable t;
    t.header = {"lambda", "rho", "rho_std_error"};
    for (std::size_t i = 0; i < curve.lambda_grid.size(); ++i) {
        const double se = i < curve.rho_std_error.size() ? curve.rho_std_error[i] : 0.0;
        t.rows.push_back({cell(curve.lambda_grid[i]), cell(curve.rho[i]), cell(se)});
    }
    return t;
}

CsvTable resolvent_csv(const ResolventField& field, double s) {
    const auto j = static_cast<std::size_t>(field.snapshot_index(s));
    const DensityCurve rho = density_from_resolvent(field, s);
    CsvTable t;
    t.header = {"lambda", "re_g", "im_g", "re_g_half", "im_g_half", "rho"};
    for (std::size_t i = 0; i < field.lambda_grid.size(); ++i)
        t.rows.push_back({cell(field.lambda_grid[i]), cell(field.g[j][i].real()),
                          cell(field.g[j][i].imag()), cell(field.g_half[j][i].real()),
                          cell(field.g_half[j][i].imag()), cell(rho.rho[i])});
    return t;
}

CsvTable spectra_csv(const std::vector<std::vector<double>>& draws) {
    CsvTable t;
    if (draws.empty()) throw std::invalid_argument("spectra_csv: no draws");
    const std::size_t n = draws.front().size();
    for (std::size_t i = 0; i < n; ++i) t.header.push_back("eig_" + std::to_string(i));
    for (const auto& d : draws) {
        if (d.size() != n) throw std::invalid_argument("spectra_csv: ragged draw list");
        std::vector<std::string> row;
        row.reserve(n);
        for (double e : d) row.push_back(cell(e));
        t.rows.push_back(std::move(row));
    }
    return t;
}

const char* experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::NoiseCheck: return "noise-check";
        case ExperimentKind::Moments: return "moments";
        case ExperimentKind::Dufresne: return "dufresne";
        case ExperimentKind::CoupledVsDecoupled: return "coupled-vs-decoupled";
        case ExperimentKind::RiderValko: return "rider-valko";
        case ExperimentKind::Lyapunov: return "lyapunov";
        case ExperimentKind::MicroscopicCheck: return "microscopic-check";
        case ExperimentKind::Resolvent: return "resolvent";
    }
    throw std::logic_error("experiment_name: bad enum value");
}

ExperimentKind experiment_from_name(const std::string& name) {
    for (ExperimentKind k : all_experiments())
        if (name == experiment_name(k)) return k;
    std::string names;
    for (ExperimentKind k : all_experiments()) {
        if (!names.empty()) names += ", ";
        names += experiment_name(k);
    }
    throw ConfigError("config: unknown experiment \"" + name + "\" (expected one of: " + names +
                      ")");
}

std::vector<ExperimentKind> all_experiments() {
    return {ExperimentKind::NoiseCheck,     ExperimentKind::Moments,
            ExperimentKind::Dufresne,       ExperimentKind::CoupledVsDecoupled,
            ExperimentKind::RiderValko,     ExperimentKind::Lyapunov,
            ExperimentKind::MicroscopicCheck, ExperimentKind::Resolvent};
}

ExperimentConfig parse_experiment_config(const Json& doc) {
    require_object(doc, "document");
    reject_unknown_keys(doc, "the top level", {"experiment", "model", "sim", "output"});
    if (!doc.contains("experiment") || !doc.at("experiment").is_string())
        throw ConfigError("config: required string field \"experiment\" is missing");

    ExperimentConfig cfg;
    cfg.experiment = experiment_from_name(doc.at("experiment").get<std::string>());

    if (doc.contains("model")) {
        const Json& m = require_object(doc.at("model"), "model");
        reject_unknown_keys(m, "model", {"n_channels", "beta", "k", "sigma"});
        const auto n = get_integer(m, "model", "n_channels", cfg.model.n_channels);
        const auto beta = get_integer(m, "model", "beta", cfg.model.beta.beta);
        const double k = get_number(m, "model", "k", cfg.model.k);
        const double sigma = get_number(m, "model", "sigma", cfg.model.sigma);
        try {
            cfg.model = ModelParams(static_cast<int>(n), SymmetryClass(static_cast<int>(beta)),
                                    k, sigma);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: model: ") + e.what());
        }
    }

    if (doc.contains("sim")) {
        const Json& s = require_object(doc.at("sim"), "sim");
        reject_unknown_keys(
            s, "sim", {"dx", "scheme", "renorm_every", "noise_scale", "n_traj", "master_seed"});
        cfg.sim.dx = get_number(s, "sim", "dx", cfg.sim.dx);
        cfg.sim.noise_scale = get_number(s, "sim", "noise_scale", cfg.sim.noise_scale);
        cfg.sim.renorm_every =
            static_cast<int>(get_integer(s, "sim", "renorm_every", cfg.sim.renorm_every));
        if (s.contains("scheme")) {
            if (!s.at("scheme").is_string())
                throw ConfigError("config: sim.scheme must be a string");
            const std::string name = s.at("scheme").get<std::string>();
            if (name == "ito-euler")
                cfg.sim.scheme = SdeScheme::ItoEuler;
            else if (name == "stratonovich-heun")
                cfg.sim.scheme = SdeScheme::StratonovichHeun;
            else
                throw ConfigError("config: sim.scheme must be \"ito-euler\" or "
                                  "\"stratonovich-heun\", got \"" + name + "\"");
        }
        cfg.n_traj = get_unsigned(s, "sim", "n_traj", cfg.n_traj);
        cfg.master_seed = get_unsigned(s, "sim", "master_seed", cfg.master_seed);
        if (cfg.n_traj == 0) throw ConfigError("config: sim.n_traj must be >= 1");
        try {
            cfg.sim.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: sim: ") + e.what());
        }
    }

    if (doc.contains("output")) {
        const Json& o = require_object(doc.at("output"), "output");
        reject_unknown_keys(o, "output", {"directory", "formats"});
        if (o.contains("directory")) {
            if (!o.at("directory").is_string() || o.at("directory").get<std::string>().empty())
                throw ConfigError("config: output.directory must be a non-empty string");
            cfg.output.directory = o.at("directory").get<std::string>();
        }
        if (o.contains("formats")) {
            const Json& f = o.at("formats");
            if (!f.is_array() || f.empty())
                throw ConfigError("config: output.formats must be a non-empty array");
            cfg.output.write_csv = false;
            cfg.output.write_json = false;
            for (const Json& item : f) {
                if (!item.is_string())
                    throw ConfigError("config: output.formats entries must be strings");
                const std::string fmt = item.get<std::string>();
                if (fmt == "csv")
                    cfg.output.write_csv = true;
                else if (fmt == "json")
                    cfg.output.write_json = true;
                else
                    throw ConfigError("config: output.formats entries must be \"csv\" or "
                                      "\"json\", got \"" + fmt + "\"");
            }
        }
    }
    return cfg;
}

Json config_to_json(const ExperimentConfig& config) {
    Json doc;
    doc["experiment"] = experiment_name(config.experiment);
    doc["model"] = {{"n_channels", config.model.n_channels},
                    {"beta", config.model.beta.beta},
                    {"k", config.model.k},
                    {"sigma", config.model.sigma}};
    doc["sim"] = {
        {"dx", config.sim.dx},
        {"scheme",
         config.sim.scheme == SdeScheme::ItoEuler ? "ito-euler" : "stratonovich-heun"},
        {"renorm_every", config.sim.renorm_every},
        {"noise_scale", config.sim.noise_scale},
        {"n_traj", config.n_traj},
        {"master_seed", config.master_seed},
    };
    Json formats = Json::array();
    if (config.output.write_csv) formats.push_back("csv");
    if (config.output.write_json) formats.push_back("json");
    doc["output"] = {{"directory", config.output.directory}, {"formats", formats}};
    return doc;
}

}  // namespace wiredelay
