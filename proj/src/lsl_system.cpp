#include "lsl/lsl_system.hpp"

#include "lsl/parallel.hpp"
#include "lsl/simd.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace lsl {

std::vector<RowTag> row_layout(const SpectralDataset& d) {
    std::vector<RowTag> tags;
    tags.reserve(static_cast<std::size_t>(2 * d.independent_entry_count()));
    for (RowKind kind : {RowKind::Value, RowKind::Derivative}) {
        for (int j = 0; j < d.m(); ++j) {
            for (int i = 0; i < d.K(); ++i) {
                for (int r = i; r < d.L(); ++r) {
                    if (d.measured(j, i, r)) tags.push_back({j, i, r, kind});
                }
            }
        }
    }
    return tags;
}

namespace {

void check_compatible(const SpectralDataset& d, const SpectralDataset& d0,
                      std::span<const FieldSet> background, std::span<const InternalFieldSet> internal,
                      const Vector& weights) {
    const char* stage = "lsl_system";
    if (d.m() != d0.m() || d.K() != d0.K() || d.L() != d0.L()) {
        throw InvalidArgument(stage, "measured and background datasets differ in shape");
    }
    if (d.lambdas() != d0.lambdas()) throw InvalidArgument(stage, "shift mismatch between datasets");
    if (static_cast<int>(background.size()) != d.m() || static_cast<int>(internal.size()) != d.m()) {
        throw InvalidArgument(stage, "need background and internal fields at every shift");
    }
    const Eigen::Index n = weights.size();
    for (int j = 0; j < d.m(); ++j) {
        const auto& bg = background[static_cast<std::size_t>(j)];
        const auto& in = internal[static_cast<std::size_t>(j)];
        if (bg.lambda != d.point(j).lambda || in.lambda != d.point(j).lambda) {
            throw InvalidArgument(stage, "shift mismatch in fields at point " + std::to_string(j));
        }
        if (bg.fields.rows() != n || bg.dfields.rows() != n || in.fields.rows() != n ||
            in.dfields.rows() != n) {
            throw InvalidArgument(stage, "grid mismatch between fields and quadrature weights");
        }
        if (bg.fields.cols() < d.L() || in.fields.cols() < d.K()) {
            throw InvalidArgument(stage, "too few field columns for K sources / L receivers");
        }
    }
}

std::span<const double> col(const Matrix& x, Eigen::Index c) {
    return {x.col(c).data(), static_cast<std::size_t>(x.rows())};
}

}  // namespace

LslSystem assemble(const SpectralDataset& d, const SpectralDataset& d0,
                   std::span<const FieldSet> background, std::span<const InternalFieldSet> internal,
                   const Vector& weights) {
    check_compatible(d, d0, background, internal, weights);
    LslSystem sys;
    sys.row_index = row_layout(d);
    const auto count = static_cast<Eigen::Index>(sys.row_index.size());
    const Eigen::Index n = weights.size();
    // Row-major scratch so each row is contiguous for the kernels.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(count, n);
    sys.rhs.resize(count);
    const std::span<const double> w(weights.data(), static_cast<std::size_t>(n));

    parallel_for(static_cast<std::size_t>(count), [&](std::size_t k) {
        const RowTag& tag = sys.row_index[k];
        const auto& bg = background[static_cast<std::size_t>(tag.shift)];
        const auto& in = internal[static_cast<std::size_t>(tag.shift)];
        const auto& p = d.point(tag.shift);
        const auto& p0 = d0.point(tag.shift);
        std::span<double> out(rows.row(static_cast<Eigen::Index>(k)).data(), static_cast<std::size_t>(n));
        if (tag.kind == RowKind::Value) {
            simd::triple_product(col(bg.fields, tag.receiver), col(in.fields, tag.source), w, out);
            sys.rhs(static_cast<Eigen::Index>(k)) = p0.F(tag.source, tag.receiver) - p.F(tag.source, tag.receiver);
        } else {
            simd::product_rule(col(bg.fields, tag.receiver), col(bg.dfields, tag.receiver),
                               col(in.fields, tag.source), col(in.dfields, tag.source), w, out);
            sys.rhs(static_cast<Eigen::Index>(k)) = p0.dF(tag.source, tag.receiver) - p.dF(tag.source, tag.receiver);
        }
    });
    sys.rows = rows;
    return sys;
}

LslSystem assemble_born(const SpectralDataset& d, const SpectralDataset& d0,
                        std::span<const FieldSet> background, const Vector& weights) {
    std::vector<InternalFieldSet> fields;
    fields.reserve(background.size());
    for (const auto& fs : background) {
        fields.push_back({fs.lambda, fs.fields.leftCols(d.K()), fs.dfields.leftCols(d.K())});
    }
    return assemble(d, d0, background, fields, weights);
}

LslSystem restrict_basis(const LslSystem& sys, const Matrix& basis) {
    if (basis.rows() != sys.rows.cols()) {
        throw InvalidArgument("lsl_system", "basis rows must match the system's unknowns");
    }
    LslSystem out;
    out.rows = sys.rows * basis;
    out.rhs = sys.rhs;
    out.row_index = sys.row_index;
    out.basis = sys.basis.size() == 0 ? basis : Matrix(sys.basis * basis);
    return out;
}

namespace {

Eigen::BDCSVD<Matrix> decompose(const LslSystem& sys) {
    if (sys.rows.rows() == 0 || sys.rows.cols() == 0) throw InvalidArgument("lsl_system", "empty system");
    if (sys.rhs.size() != sys.rows.rows()) throw InvalidArgument("lsl_system", "rhs size mismatch");
    return Eigen::BDCSVD<Matrix>(sys.rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace

LslSystem equilibrate_rows(const LslSystem& sys) {
    LslSystem out = sys;
    for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
        const double norm = out.rows.row(i).norm();
        if (norm == 0.0) continue;
        out.rows.row(i) /= norm;
        out.rhs(i) /= norm;
    }
    return out;
}

ReconstructionResult solve_truncated(const LslSystem& sys, const Truncation& truncation) {
    const auto svd = decompose(sys);
    const Vector& sigma = svd.singularValues();
    const int available = static_cast<int>(sigma.size());

    int rank = 0;
    if (truncation.rank) {
        rank = *truncation.rank;
        if (rank < 0 || rank > available) {
            throw InvalidArgument("lsl_system", "rank must lie in [0, min(rows, cols)]");
        }
    } else {
        const double t = truncation.rel_threshold;
        if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("lsl_system", "rel_threshold must lie in (0, 1)");
        const double cutoff = t * (available > 0 ? sigma(0) : 0.0);
        while (rank < available && sigma(rank) > 0.0 && sigma(rank) >= cutoff) ++rank;
    }
    // Zero singular values carry no information.
    while (rank > 0 && !(sigma(rank - 1) > 0.0)) --rank;

    ReconstructionResult result;
    result.singular_values = sigma;
    result.rank_used = rank;
    const Vector projected = svd.matrixU().leftCols(rank).transpose() * sys.rhs;
    result.coefficients = svd.matrixV().leftCols(rank) * projected.cwiseQuotient(sigma.head(rank));
    result.residual_norm = (sys.rows * result.coefficients - sys.rhs).norm();
    result.p_hat = sys.basis.size() == 0 ? result.coefficients : Vector(sys.basis * result.coefficients);
    return result;
}

std::vector<double> residual_profile(const LslSystem& sys) {
    const auto svd = decompose(sys);
    const Vector projected = svd.matrixU().transpose() * sys.rhs;
    // Part of rhs outside range(U) never gets fitted.
    const double outside = std::max(0.0, sys.rhs.squaredNorm() - projected.squaredNorm());
    std::vector<double> out(static_cast<std::size_t>(projected.size()) + 1);
    double remaining = projected.squaredNorm();
    out[0] = std::sqrt(remaining + outside);
    for (Eigen::Index k = 0; k < projected.size(); ++k) {
        remaining = std::max(0.0, remaining - projected(k) * projected(k));
        out[static_cast<std::size_t>(k) + 1] = std::sqrt(remaining + outside);
    }
    return out;
}

}  // namespace lsl
