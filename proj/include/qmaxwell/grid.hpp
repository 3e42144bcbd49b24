#pragma once

#include <Eigen/Dense>
#include <memory>

namespace qmax {

enum class Boundary { periodic, dirichlet };

enum class OperatorShape { nodes_to_nodes, nodes_to_edges };

/// Dense matrix acting on grid vectors, tagged with its domain/range.
struct DiscreteOperator {
    Eigen::MatrixXd matrix;
    OperatorShape shape{OperatorShape::nodes_to_nodes};
};

/// Uniform 1-D grid with forward-difference gradient D (nodes -> edges) and
/// Laplacian L = D^T D, so that discrete integration by parts
///   <Du, Dv>_edges = <u, Lv>_nodes
/// holds at machine precision in the h-weighted inner products.
///
/// Periodic: h = length/N, nodes at i*h, N wrap-around edges.
/// Dirichlet: h = length/(N+1), interior nodes at (i+1)*h, N+1 edges with
/// zero wall values.
class Grid {
public:
    static Grid make(int num_points, double length, Boundary boundary);

    int num_points() const { return num_points_; }
    int num_edges() const { return static_cast<int>(gradient_.matrix.rows()); }
    double length() const { return length_; }
    double spacing() const { return spacing_; }
    Boundary boundary() const { return boundary_; }
    const Eigen::VectorXd& nodes() const { return nodes_; }

    const DiscreteOperator& gradient() const { return gradient_; }
    const DiscreteOperator& laplacian() const { return laplacian_; }

    /// h * sum(f); f must be a node vector or an edge vector.
    double integrate(const Eigen::VectorXd& f) const;

    /// h-weighted inner product of two vectors living on the same index set.
    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

    /// Map an edge field to nodes. Interior edges split half/half between
    /// their endpoints; Dirichlet wall edges give full weight to their single
    /// node, so sums over edges and over nodes agree exactly.
    Eigen::VectorXd edge_to_node_average(const Eigen::VectorXd& edge_field) const;

private:
    Grid() = default;

    int num_points_{0};
    double length_{0.0};
    double spacing_{0.0};
    Boundary boundary_{Boundary::periodic};
    Eigen::VectorXd nodes_;
    DiscreteOperator gradient_;
    DiscreteOperator laplacian_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int num_points, double length, Boundary boundary = Boundary::periodic);

} // namespace qmax
