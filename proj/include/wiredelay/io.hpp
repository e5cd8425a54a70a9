#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wiredelay/model.hpp"
#include "wiredelay/moments.hpp"
#include "wiredelay/resolvent.hpp"

namespace wiredelay {

/// Library identity written into every run manifest.
inline constexpr const char* kLibraryVersion = "wiredelay 1.0.0";

/// Insertion-ordered JSON so emitted documents are stable and readable.
using Json = nlohmann::ordered_json;

/// Raised for anything wrong with user-supplied configuration: unreadable
/// file, malformed JSON, unknown or ill-typed fields, out-of-range values.
/// The command-line driver maps it to its own exit class, distinct from
/// numerical failures.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest decimal form that parses back to exactly the same double
/// ("0.1", "1e+300", "nan"); integers get no decimal point.
[[nodiscard]] std::string format_double(double v);

/// Simple rectangular CSV document. Cells are written verbatim; use the
/// cell() helpers for numbers so output is locale-free and round-trip exact.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::string to_string() const;  ///< throws on ragged rows
};

[[nodiscard]] std::string cell(double v);
[[nodiscard]] std::string cell(int v);
[[nodiscard]] std::string cell(std::uint64_t v);
[[nodiscard]] inline std::string cell(std::string v) { return v; }

/// Write `content` to `path`, creating parent directories; throws
/// std::runtime_error when the file cannot be created.
void write_text_file(const std::string& path, const std::string& content);

/// Serialize with two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const Json& doc);

/// Parse a JSON document from disk; unreadable or malformed input raises
/// ConfigError carrying the parser's diagnostic.
[[nodiscard]] Json load_json_file(const std::string& path);

// ---------------------------------------------------------------------------
// Fixed CSV layouts (versioned with the library; columns never reorder)
// ---------------------------------------------------------------------------

/// Columns: n_channels, beta, L_over_xi, quantity, closed, ode, mc,
/// mc_std_error -- one row per compared moment.
[[nodiscard]] CsvTable moment_csv(const MomentReport& report);

/// Columns: lambda, rho, rho_std_error (std-error column written as 0 for
/// deterministic curves).
[[nodiscard]] CsvTable density_csv(const DensityCurve& curve);

/// One stored resolvent snapshot. Columns: lambda, re_g, im_g, re_g_half,
/// im_g_half, rho -- rho is the extrapolated, floored readout density.
[[nodiscard]] CsvTable resolvent_csv(const ResolventField& field, double s);

/// One row per draw, ascending eigenvalues; all rows must share one length.
[[nodiscard]] CsvTable spectra_csv(const std::vector<std::vector<double>>& draws);

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class ExperimentKind {
    NoiseCheck,          ///< increment correlator self-test
    Moments,             ///< delay-matrix moments: closed form vs ODE vs Monte Carlo
    Dufresne,            ///< long-wire inverse-delay ensemble vs spectral sampler
    CoupledVsDecoupled,  ///< full coupled flow vs reduced delay-matrix flow
    RiderValko,          ///< Hermitian-noise vs independent-entry-noise functionals
    Lyapunov,            ///< flow Lyapunov spectrum vs closed-form rates
    MicroscopicCheck,    ///< wave-equation solver vs effective description
    Resolvent,           ///< spectral-density flow and histogram comparison
};

/// Canonical config-file names ("noise-check", "moments", ...).
[[nodiscard]] const char* experiment_name(ExperimentKind kind);
[[nodiscard]] ExperimentKind experiment_from_name(const std::string& name);  ///< ConfigError if unknown
[[nodiscard]] std::vector<ExperimentKind> all_experiments();

struct OutputConfig {
    std::string directory = "out";
    bool write_csv = true;
    bool write_json = true;
};

/// Fully resolved run configuration. The file schema is strict: the
/// top-level keys are {experiment, model, sim, output}, each section admits
/// exactly the fields below, and anything unknown is rejected.
///
///   experiment : one of the names above (required)
///   model      : n_channels (int), beta (1|2), k (>0), sigma (>=0)
///   sim        : dx, scheme ("ito-euler"|"stratonovich-heun"),
///                renorm_every, noise_scale, n_traj, master_seed
///   output     : directory (string), formats (non-empty array of
///                "csv"/"json")
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::NoiseCheck;
    ModelParams model{2, SymmetryClass(2), 1.0, 1e-3};
    SdeConfig sim;
    std::uint64_t n_traj = 1000;
    std::uint64_t master_seed = 1;
    OutputConfig output;
};

/// Strict parse of a config document; every violation raises ConfigError
/// with the offending key in the message.
[[nodiscard]] ExperimentConfig parse_experiment_config(const Json& doc);

/// Full resolved echo (defaults filled in); parses back to an equal config.
[[nodiscard]] Json config_to_json(const ExperimentConfig& config);

}  // namespace wiredelay
