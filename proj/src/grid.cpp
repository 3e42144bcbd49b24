#include "qmaxwell/grid.hpp"

#include "qmaxwell/errors.hpp"

#include <string>

namespace qmax {

Grid Grid::make(int num_points, double length, Boundary boundary) {
    if (num_points < 2) {
        throw config_error("grid: num_points must be >= 2, got " + std::to_string(num_points));
    }
    if (!(length > 0.0)) {
        throw config_error("grid: length must be positive, got " + std::to_string(length));
    }

    Grid g;
    g.num_points_ = num_points;
    g.length_ = length;
    g.boundary_ = boundary;

    const int n = num_points;
    if (boundary == Boundary::periodic) {
        g.spacing_ = length / n;
        g.nodes_.resize(n);
        for (int i = 0; i < n; ++i) g.nodes_[i] = i * g.spacing_;

        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        const double inv_h = 1.0 / g.spacing_;
        for (int e = 0; e < n; ++e) {
            d(e, e) = -inv_h;
            d(e, (e + 1) % n) = inv_h;
        }
        g.gradient_ = {d, OperatorShape::nodes_to_edges};
    } else {
        g.spacing_ = length / (n + 1);
        g.nodes_.resize(n);
        for (int i = 0; i < n; ++i) g.nodes_[i] = (i + 1) * g.spacing_;

        // n+1 edges; edge e connects node e-1 to node e, walls carry value 0.
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 1, n);
        const double inv_h = 1.0 / g.spacing_;
        d(0, 0) = inv_h;
        for (int e = 1; e < n; ++e) {
            d(e, e - 1) = -inv_h;
            d(e, e) = inv_h;
        }
        d(n, n - 1) = -inv_h;
        g.gradient_ = {d, OperatorShape::nodes_to_edges};
    }

    // L is defined by the factorization, never assembled from a stencil, so
    // <Du,Dv> = <u,Lv> is exact.
    g.laplacian_ = {g.gradient_.matrix.transpose() * g.gradient_.matrix,
                    OperatorShape::nodes_to_nodes};
    return g;
}

double Grid::integrate(const Eigen::VectorXd& f) const {
    if (f.size() != num_points() && f.size() != num_edges()) {
        throw config_error("integrate: vector length " + std::to_string(f.size()) +
                           " matches neither nodes (" + std::to_string(num_points()) +
                           ") nor edges (" + std::to_string(num_edges()) + ")");
    }
    return spacing_ * f.sum();
}

double Grid::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    if (u.size() != v.size() || (u.size() != num_points() && u.size() != num_edges())) {
        throw config_error("inner: vector lengths do not match the grid");
    }
    return spacing_ * u.dot(v);
}

Eigen::VectorXd Grid::edge_to_node_average(const Eigen::VectorXd& edge_field) const {
    if (edge_field.size() != num_edges()) {
        throw config_error("edge_to_node_average: expected an edge vector");
    }
    const int n = num_points();
    Eigen::VectorXd out(n);
    if (boundary_ == Boundary::periodic) {
        for (int i = 0; i < n; ++i) {
            const int prev = (i + n - 1) % n;
            out[i] = 0.5 * (edge_field[prev] + edge_field[i]);
        }
    } else {
        // Node i touches edges i and i+1; wall edges 0 and n belong entirely
        // to their unique node.
        for (int i = 0; i < n; ++i) {
            const double wl = (i == 0) ? 1.0 : 0.5;
            const double wr = (i == n - 1) ? 1.0 : 0.5;
            out[i] = wl * edge_field[i] + wr * edge_field[i + 1];
        }
    }
    return out;
}

GridPtr make_grid(int num_points, double length, Boundary boundary) {
    return std::make_shared<const Grid>(Grid::make(num_points, length, boundary));
}

} // namespace qmax
