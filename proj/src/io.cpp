#include "masmodal/io.hpp"

#include <cstdio>
#include <stdexcept>

namespace masmodal {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

void write_matrix_market(const std::string& path, const SpMat& a) {
    std::ofstream out = open_output(path);
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    std::vector<std::string> lines;
    long nnz = 0;
    for (int col = 0; col < a.outerSize(); ++col)
        for (SpMat::InnerIterator it(a, col); it; ++it)
            if (it.row() >= it.col()) ++nnz;
    out << a.rows() << " " << a.cols() << " " << nnz << "\n";
    for (int col = 0; col < a.outerSize(); ++col)
        for (SpMat::InnerIterator it(a, col); it; ++it)
            if (it.row() >= it.col())
                out << (it.row() + 1) << " " << (it.col() + 1) << " " << fmt17(it.value())
                    << "\n";
}

void write_run_log(const std::string& path, const std::vector<IncrementReport>& reports) {
    std::ofstream out = open_output(path);
    for (const auto& r : reports) {
        out << "step=" << r.step << " increment=" << r.increment
            << " iterations=" << r.iterations << " converged=" << (r.converged ? 1 : 0)
            << " regularized=" << (r.regularized ? 1 : 0) << " load_norm=" << fmt6(r.load_norm)
            << " residual=" << fmt6(r.residual) << " history=";
        for (size_t i = 0; i < r.residual_history.size(); ++i) {
            if (i) out << ",";
            out << fmt6(r.residual_history[i]);
        }
        out << "\n";
    }
}

} // namespace masmodal
