#pragma once

#include "lsl/grid.hpp"
#include "lsl/types.hpp"

#include <filesystem>
#include <vector>

namespace lsl {

// One spectral shift: K x L transfer matrix and its lambda-derivative.
struct SpectralPoint {
    double lambda = 0.0;
    Matrix F;
    Matrix dF;
};

// Relative tolerance for the reciprocity check on the collocated K x K block.
inline constexpr double kReciprocityTolerance = 1e-12;

// Measured transfer data at m distinct shifts for K transmitters and L >= K
// receivers. The first K receivers coincide with the transmitters; their K x K
// block is symmetrized on construction and always fully measured. Entries in
// columns K..L-1 may be flagged unmeasured per point.
class SpectralDataset {
public:
    // Validates every invariant; throws InvalidArgument naming the offending
    // point. Masks default to all-true.
    SpectralDataset(std::vector<SpectralPoint> points, int K, int L,
                    std::vector<Mask> masks = {});

    int K() const noexcept { return K_; }
    int L() const noexcept { return L_; }
    int m() const noexcept { return static_cast<int>(points_.size()); }

    const std::vector<SpectralPoint>& points() const noexcept { return points_; }
    const SpectralPoint& point(int j) const { return points_.at(static_cast<std::size_t>(j)); }
    const std::vector<Mask>& masks() const noexcept { return masks_; }
    const Mask& mask(int j) const { return masks_.at(static_cast<std::size_t>(j)); }
    std::vector<double> lambdas() const;

    bool measured(int j, int source, int receiver) const { return mask(j)(source, receiver); }

    // Number of (i, r) entries entering the Lippmann-Schwinger system at shift
    // j: the upper triangle of the K x K block plus measured extended entries.
    int independent_entry_count(int j) const;
    int independent_entry_count() const;

    bool operator==(const SpectralDataset& other) const;

private:
    std::vector<SpectralPoint> points_;
    int K_;
    int L_;
    std::vector<Mask> masks_;
};

// K x K collocated block, symmetrized, fully measured.
SpectralDataset symmetric_part(const SpectralDataset& d);

// Flags entries unmeasured wherever the per-point mask is false. A single mask
// is broadcast to all points. Values are never modified. Rejects masks hiding
// any entry of the K x K block.
SpectralDataset apply_mask(const SpectralDataset& d, const std::vector<Mask>& masks);

// Positions of the K transmitters (first K entries) and all L receivers, plus
// the support radius of each source/receiver distribution. A radius <= 0 means
// one grid cell per axis, i.e. a scaled nodal delta when the position sits on
// a node.
struct ArrayLayout {
    std::vector<Point> receivers;
    int K = 1;
    double mollifier_radius = 0.0;

    int L() const noexcept { return static_cast<int>(receivers.size()); }
    std::vector<Point> sources() const { return {receivers.begin(), receivers.begin() + K}; }

    void validate(const Grid& grid) const;

    // n x L matrix; column r is the hat distribution g^(r), normalized so that
    // its quadrature integral is one.
    Matrix distributions(const Grid& grid) const;

    // Same layout keeping the first `L` receivers.
    ArrayLayout truncated(int L) const;
};

// Text format: header with m, K, L and the shift list, then per point the F
// and dF matrices (row-major, 17 significant digits) and a 0/1 mask grid.
void save_dataset(const SpectralDataset& d, const std::filesystem::path& path);
SpectralDataset load_dataset(const std::filesystem::path& path);

// Standalone per-point mask file, same 0/1 grid layout as in the dataset file.
void save_masks(const std::vector<Mask>& masks, int K, int L, const std::filesystem::path& path);
std::vector<Mask> load_masks(const std::filesystem::path& path);

}  // namespace lsl
