#pragma once

#include "qmaxwell/qforms.hpp"
#include "qmaxwell/solve.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qmax {

inline constexpr const char* kArtifactName = "qmaxwell";
inline constexpr const char* kArtifactVersion = "0.1.0";

/// JSON value for a double; non-finite values map to null (JSON has no NaN).
nlohmann::json json_number(double x);

void write_json_file(const std::string& path, const nlohmann::json& j);

/// RFC-4180 CSV (CRLF line endings); numbers are written with %.17g so
/// re-reading reproduces the doubles exactly.
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows);

/// spectrum.csv: p, rho_p, -log rho_p.
void write_spectrum_csv(const std::string& path, const Equilibrium& eq);

/// fields.csv: x, n, n_rho, k, s_loc, A_dual, A_moment, V_star, omega.
void write_fields_csv(const std::string& path, const Equilibrium& eq, const QFormContext& ctx);

nlohmann::json equilibrium_summary(const Equilibrium& eq);

} // namespace qmax
