#include "qmaxwell/kernels.hpp"

#include <atomic>
#include <cassert>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmax::kernels {

namespace {
std::atomic<Exec> g_default_exec{Exec::parallel};

// Shared element routines: both variants call these so the per-element
// summation order is identical by construction.

inline double square_sum_at(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                            Eigen::Index i) {
    const Eigen::Index m = V.cols();
    double acc = 0.0;
    for (Eigen::Index p = 0; p < m; ++p) {
        const double v = V(i, p);
        acc += w[p] * v * v;
    }
    return acc;
}

inline double outer_sum_at(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                           Eigen::Index i, Eigen::Index j) {
    const Eigen::Index m = V.cols();
    double acc = 0.0;
    for (Eigen::Index p = 0; p < m; ++p) {
        acc += w[p] * V(i, p) * V(j, p);
    }
    return acc;
}

// z_p = V(i,p) V(j,p); returns z^T G z with q over columns (contiguous in p).
inline double response_at(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                          Eigen::Index i, Eigen::Index j, Eigen::VectorXd& z) {
    const Eigen::Index m = V.cols();
    for (Eigen::Index p = 0; p < m; ++p) {
        z[p] = V(i, p) * V(j, p);
    }
    double acc = 0.0;
    for (Eigen::Index q = 0; q < m; ++q) {
        const double zq = z[q];
        if (zq == 0.0) continue;
        double col = 0.0;
        for (Eigen::Index p = 0; p < m; ++p) {
            col += G(p, q) * z[p];
        }
        acc += zq * col;
    }
    return acc;
}
} // namespace

Exec default_exec() { return g_default_exec.load(std::memory_order_relaxed); }
void set_default_exec(Exec e) { g_default_exec.store(e, std::memory_order_relaxed); }

void weighted_square_sum_serial(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                                Eigen::VectorXd& out) {
    assert(V.cols() == w.size());
    out.resize(V.rows());
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
        out[i] = square_sum_at(V, w, i);
    }
}

void weighted_square_sum_parallel(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                                  Eigen::VectorXd& out) {
    assert(V.cols() == w.size());
    out.resize(V.rows());
    const Eigen::Index n = V.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        out[i] = square_sum_at(V, w, i);
    }
}

void weighted_square_sum(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                         Eigen::VectorXd& out, Exec exec) {
    if (exec == Exec::parallel) {
        weighted_square_sum_parallel(V, w, out);
    } else {
        weighted_square_sum_serial(V, w, out);
    }
}

void weighted_outer_sum_serial(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                               Eigen::MatrixXd& out) {
    assert(V.cols() == w.size());
    const Eigen::Index n = V.rows();
    out.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = outer_sum_at(V, w, i, j);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
}

void weighted_outer_sum_parallel(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                                 Eigen::MatrixXd& out) {
    assert(V.cols() == w.size());
    const Eigen::Index n = V.rows();
    out.resize(n, n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = outer_sum_at(V, w, i, j);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
}

void weighted_outer_sum(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                        Eigen::MatrixXd& out, Exec exec) {
    if (exec == Exec::parallel) {
        weighted_outer_sum_parallel(V, w, out);
    } else {
        weighted_outer_sum_serial(V, w, out);
    }
}

void divided_difference_response_serial(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                        Eigen::MatrixXd& out) {
    assert(V.cols() == G.rows() && G.rows() == G.cols());
    const Eigen::Index n = V.rows();
    out.resize(n, n);
    Eigen::VectorXd z(V.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = response_at(V, G, i, j, z);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
}

void divided_difference_response_parallel(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                          Eigen::MatrixXd& out) {
    assert(V.cols() == G.rows() && G.rows() == G.cols());
    const Eigen::Index n = V.rows();
    out.resize(n, n);
#pragma omp parallel
    {
        Eigen::VectorXd z(V.cols());
#pragma omp for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const double v = response_at(V, G, i, j, z);
                out(i, j) = v;
                out(j, i) = v;
            }
        }
    }
}

void divided_difference_response(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                 Eigen::MatrixXd& out, Exec exec) {
    if (exec == Exec::parallel) {
        divided_difference_response_parallel(V, G, out);
    } else {
        divided_difference_response_serial(V, G, out);
    }
}

} // namespace qmax::kernels
