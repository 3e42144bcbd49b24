#include "qmaxwell/report.hpp"

#include "qmaxwell/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace qmax {

nlohmann::json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw config_error("cannot write '" + path + "'");
    }
    out << j.dump(2) << "\n";
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw config_error("cannot write '" + path + "'");
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << header[c];
        if (c + 1 < header.size()) out << ",";
    }
    out << "\r\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
            out << buf;
            if (c + 1 < row.size()) out << ",";
        }
        out << "\r\n";
    }
}

void write_spectrum_csv(const std::string& path, const Equilibrium& eq) {
    std::vector<std::vector<double>> rows;
    rows.reserve(eq.rho.num_modes());
    for (int p = 0; p < eq.rho.num_modes(); ++p) {
        const double rho_p = eq.rho.eigenvalues()[p];
        rows.push_back({static_cast<double>(p), rho_p, -std::log(std::max(rho_p, 1e-300))});
    }
    write_csv_file(path, {"p", "rho_p", "minus_log_rho_p"}, rows);
}

void write_fields_csv(const std::string& path, const Equilibrium& eq, const QFormContext& ctx) {
    const Grid& grid = *eq.problem.grid;
    const Eigen::VectorXd a_moment = chemical_potential(eq);
    const Eigen::VectorXd n_rho = eq.moments.n;
    std::vector<std::vector<double>> rows;
    rows.reserve(grid.num_points());
    for (int i = 0; i < grid.num_points(); ++i) {
        rows.push_back({grid.nodes()[i], eq.problem.target.n()[i], n_rho[i], eq.moments.k[i],
                        eq.moments.s_loc[i], eq.dual_potential[i], a_moment[i], ctx.v_star[i],
                        ctx.omega[i]});
    }
    write_csv_file(path, {"x", "n", "n_rho", "k", "s_loc", "A_dual", "A_moment", "V_star", "omega"},
                   rows);
}

nlohmann::json equilibrium_summary(const Equilibrium& eq) {
    const FreeEnergy f = free_energy(eq.rho, eq.problem.entropy);
    nlohmann::json spectrum = nlohmann::json::array();
    const int head = std::min(10, eq.rho.num_modes());
    for (int p = 0; p < head; ++p) {
        spectrum.push_back(json_number(eq.rho.eigenvalues()[p]));
    }
    const char* solver = "dual";
    if (eq.diagnostics.solver == SolverKind::primal_gradient) solver = "primal";
    if (eq.diagnostics.solver == SolverKind::oracle_scan) solver = "oracle";
    return nlohmann::json{
        {"free_energy", json_number(f.value)},
        {"energy", json_number(f.energy)},
        {"entropy", json_number(f.entropy)},
        {"trace", json_number(eq.rho.trace())},
        {"spectrum_head", spectrum},
        {"min_eigenvalue", json_number(eq.rho.eigenvalues().minCoeff())},
        {"solver", solver},
        {"iterations", eq.diagnostics.iterations},
        {"constraint_residual", json_number(eq.diagnostics.constraint_residual)},
        {"gradient_norm", json_number(eq.diagnostics.gradient_norm)},
        {"converged", eq.diagnostics.converged},
        {"line_search_warning", eq.diagnostics.line_search_warning},
    };
}

} // namespace qmax
