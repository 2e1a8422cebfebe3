#include "lsl/spectral_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lsl {

namespace {

std::string point_label(int j) { return "point " + std::to_string(j); }

// Relative asymmetry of the leading K x K block.
double block_asymmetry(const Matrix& x, int K) {
    const Matrix block = x.topLeftCorner(K, K);
    const double scale = block.norm();
    const double skew = (block - block.transpose()).norm();
    return scale > 0.0 ? skew / scale : skew;
}

void symmetrize_block(Matrix& x, int K) {
    const Matrix block = x.topLeftCorner(K, K);
    x.topLeftCorner(K, K) = 0.5 * (block + block.transpose());
}

Mask full_mask(int K, int L) { return Mask::Constant(K, L, true); }

bool mask_covers_block(const Mask& mask, int K) { return mask.topLeftCorner(K, K).all(); }

}  // namespace

SpectralDataset::SpectralDataset(std::vector<SpectralPoint> points, int K, int L,
                                 std::vector<Mask> masks)
    : points_(std::move(points)), K_(K), L_(L), masks_(std::move(masks)) {
    const char* stage = "spectral_data";
    if (points_.empty()) throw InvalidArgument(stage, "dataset needs at least one spectral point");
    if (K_ < 1 || L_ < K_) throw InvalidArgument(stage, "require 1 <= K <= L");

    for (std::size_t j = 0; j < points_.size(); ++j) {
        auto& p = points_[j];
        const std::string label = point_label(static_cast<int>(j));
        if (!std::isfinite(p.lambda)) throw InvalidArgument(stage, label + ": non-finite lambda");
        if (p.F.rows() != K_ || p.F.cols() != L_ || p.dF.rows() != K_ || p.dF.cols() != L_) {
            throw InvalidArgument(stage, label + ": F and dF must be K x L");
        }
        if (!p.F.allFinite() || !p.dF.allFinite()) {
            throw InvalidArgument(stage, label + ": non-finite transfer value");
        }
        if (block_asymmetry(p.F, K_) > kReciprocityTolerance) {
            throw InvalidArgument(stage, label + ": K x K block of F is not symmetric");
        }
        if (block_asymmetry(p.dF, K_) > kReciprocityTolerance) {
            throw InvalidArgument(stage, label + ": K x K block of dF is not symmetric");
        }
        symmetrize_block(p.F, K_);
        symmetrize_block(p.dF, K_);
        for (std::size_t i = 0; i < j; ++i) {
            if (points_[i].lambda == p.lambda) {
                throw InvalidArgument(stage, label + ": duplicate lambda (also at " +
                                                 point_label(static_cast<int>(i)) + ")");
            }
        }
    }

    if (masks_.empty()) masks_.assign(points_.size(), full_mask(K_, L_));
    if (masks_.size() != points_.size()) throw InvalidArgument(stage, "need one mask per point");
    for (std::size_t j = 0; j < masks_.size(); ++j) {
        const auto& mask = masks_[j];
        if (mask.rows() != K_ || mask.cols() != L_) {
            throw InvalidArgument(stage, point_label(static_cast<int>(j)) + ": mask must be K x L");
        }
        if (!mask_covers_block(mask, K_)) {
            throw InvalidArgument(stage, point_label(static_cast<int>(j)) +
                                             ": mask hides an entry of the K x K block");
        }
    }
}

std::vector<double> SpectralDataset::lambdas() const {
    std::vector<double> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(p.lambda);
    return out;
}

int SpectralDataset::independent_entry_count(int j) const {
    const Mask& mask = this->mask(j);
    const int extended = L_ > K_ ? static_cast<int>(mask.rightCols(L_ - K_).count()) : 0;
    return K_ * (K_ + 1) / 2 + extended;
}

int SpectralDataset::independent_entry_count() const {
    int total = 0;
    for (int j = 0; j < m(); ++j) total += independent_entry_count(j);
    return total;
}

bool SpectralDataset::operator==(const SpectralDataset& other) const {
    if (K_ != other.K_ || L_ != other.L_ || m() != other.m()) return false;
    for (int j = 0; j < m(); ++j) {
        const auto& a = points_[j];
        const auto& b = other.points_[j];
        if (a.lambda != b.lambda || a.F != b.F || a.dF != b.dF) return false;
        if ((masks_[j] != other.masks_[j]).any()) return false;
    }
    return true;
}

SpectralDataset symmetric_part(const SpectralDataset& d) {
    const int K = d.K();
    std::vector<SpectralPoint> points;
    points.reserve(d.points().size());
    for (const auto& p : d.points()) {
        SpectralPoint q{p.lambda, p.F.topLeftCorner(K, K), p.dF.topLeftCorner(K, K)};
        symmetrize_block(q.F, K);
        symmetrize_block(q.dF, K);
        points.push_back(std::move(q));
    }
    return SpectralDataset(std::move(points), K, K);
}

SpectralDataset apply_mask(const SpectralDataset& d, const std::vector<Mask>& masks) {
    std::vector<Mask> per_point;
    if (masks.size() == 1) {
        per_point.assign(static_cast<std::size_t>(d.m()), masks.front());
    } else if (static_cast<int>(masks.size()) == d.m()) {
        per_point = masks;
    } else {
        throw InvalidArgument("spectral_data", "apply_mask: need one mask or one per point");
    }
    for (int j = 0; j < d.m(); ++j) {
        auto& mask = per_point[static_cast<std::size_t>(j)];
        if (mask.rows() != d.K() || mask.cols() != d.L()) {
            throw InvalidArgument("spectral_data", point_label(j) + ": mask must be K x L");
        }
        if (!mask_covers_block(mask, d.K())) {
            throw InvalidArgument("spectral_data",
                                  point_label(j) + ": mask hides an entry of the K x K block");
        }
        mask = mask && d.mask(j);
    }
    return SpectralDataset(d.points(), d.K(), d.L(), std::move(per_point));
}

void ArrayLayout::validate(const Grid& grid) const {
    if (K < 1 || K > L()) throw InvalidArgument("layout", "require 1 <= K <= L");
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        if (!grid.contains(receivers[r])) {
            throw InvalidArgument("layout", "receiver " + std::to_string(r) + " outside the domain");
        }
    }
}

Matrix ArrayLayout::distributions(const Grid& grid) const {
    validate(grid);
    const Eigen::Index n = grid.size();
    Matrix g = Matrix::Zero(n, L());
    std::array<double, 2> radius{};
    for (int a = 0; a < grid.dimension(); ++a) {
        radius[a] = mollifier_radius > 0.0 ? mollifier_radius : grid.spacing(a);
        if (!(radius[a] > 0.0)) radius[a] = 1.0;
    }
    for (int r = 0; r < L(); ++r) {
        const Point& c = receivers[static_cast<std::size_t>(r)];
        for (Eigen::Index i = 0; i < n; ++i) {
            const Point x = grid.coordinate(i);
            double value = 1.0;
            for (int a = 0; a < grid.dimension(); ++a) {
                value *= std::max(0.0, 1.0 - std::abs(x[a] - c[a]) / radius[a]);
            }
            g(i, r) = value;
        }
        const double mass = g.col(r).dot(grid.weights());
        if (!(mass > 0.0)) {
            throw InvalidArgument("layout", "receiver " + std::to_string(r) + " has empty support");
        }
        g.col(r) /= mass;
    }
    return g;
}

ArrayLayout ArrayLayout::truncated(int new_L) const {
    if (new_L < K || new_L > L()) throw InvalidArgument("layout", "truncated: need K <= L' <= L");
    ArrayLayout out = *this;
    out.receivers.resize(static_cast<std::size_t>(new_L));
    return out;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace {

constexpr const char* kDatasetMagic = "lsl-dataset";
constexpr const char* kMaskMagic = "lsl-mask";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix(std::ostream& os, const Matrix& x) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            if (k) os << ' ';
            os << format_double(x(i, k));
        }
        os << '\n';
    }
}

void write_mask(std::ostream& os, const Mask& mask) {
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        for (Eigen::Index k = 0; k < mask.cols(); ++k) {
            if (k) os << ' ';
            os << (mask(i, k) ? '1' : '0');
        }
        os << '\n';
    }
}

// Line-oriented tokenizer that remembers where it is for error messages.
class Reader {
public:
    Reader(std::istream& in, std::string file) : in_(in), file_(std::move(file)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ParseError(file_, line_, field, what);
    }

    std::vector<std::string> next_line(const std::string& field) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            std::istringstream ss(raw);
            std::vector<std::string> tokens;
            for (std::string t; ss >> t;) tokens.push_back(t);
            if (!tokens.empty()) return tokens;
        }
        ++line_;
        fail(field, "unexpected end of file");
    }

    std::vector<std::string> expect_key(const std::string& key, std::size_t values) {
        auto tokens = next_line(key);
        if (tokens.front() != key) fail(key, "expected '" + key + "', found '" + tokens.front() + "'");
        if (values != static_cast<std::size_t>(-1) && tokens.size() != values + 1) {
            fail(key, "expected " + std::to_string(values) + " value(s)");
        }
        tokens.erase(tokens.begin());
        return tokens;
    }

    double to_double(const std::string& token, const std::string& field) const {
        double v = 0.0;
        const char* first = token.data();
        const char* last = first + token.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) fail(field, "not a number: '" + token + "'");
        if (!std::isfinite(v)) fail(field, "non-finite value");
        return v;
    }

    int to_int(const std::string& token, const std::string& field) const {
        int v = 0;
        const char* first = token.data();
        const char* last = first + token.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) fail(field, "not an integer: '" + token + "'");
        return v;
    }

    Matrix read_matrix(int rows, int cols, const std::string& field) {
        Matrix x(rows, cols);
        for (int i = 0; i < rows; ++i) {
            auto tokens = next_line(field);
            if (static_cast<int>(tokens.size()) != cols) {
                fail(field, "row " + std::to_string(i) + ": expected " + std::to_string(cols) +
                                " values, found " + std::to_string(tokens.size()));
            }
            for (int k = 0; k < cols; ++k) x(i, k) = to_double(tokens[static_cast<std::size_t>(k)], field);
        }
        return x;
    }

    Mask read_mask(int rows, int cols, const std::string& field) {
        Mask mask(rows, cols);
        for (int i = 0; i < rows; ++i) {
            auto tokens = next_line(field);
            if (static_cast<int>(tokens.size()) != cols) {
                fail(field, "row " + std::to_string(i) + ": expected " + std::to_string(cols) + " flags");
            }
            for (int k = 0; k < cols; ++k) {
                const auto& t = tokens[static_cast<std::size_t>(k)];
                if (t != "0" && t != "1") fail(field, "mask flag must be 0 or 1, found '" + t + "'");
                mask(i, k) = t == "1";
            }
        }
        return mask;
    }

    void expect_end() {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            if (raw.find_first_not_of(" \t\r") != std::string::npos) fail("", "trailing content");
        }
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    std::string file_;
    std::size_t line_ = 0;
};

struct Dimensions {
    int m, K, L;
};

Dimensions read_dimensions(Reader& reader) {
    Dimensions d{};
    d.m = reader.to_int(reader.expect_key("m", 1).front(), "m");
    d.K = reader.to_int(reader.expect_key("K", 1).front(), "K");
    d.L = reader.to_int(reader.expect_key("L", 1).front(), "L");
    if (d.m < 1) reader.fail("m", "m must be at least 1");
    if (d.K < 1 || d.L < d.K) reader.fail("L", "require 1 <= K <= L");
    return d;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("io", "cannot write " + path.string());
    return os;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read " + path.string());
    return in;
}

}  // namespace

void save_dataset(const SpectralDataset& d, const std::filesystem::path& path) {
    auto os = open_output(path);
    os << "format " << kDatasetMagic << " 1\n";
    os << "m " << d.m() << "\nK " << d.K() << "\nL " << d.L() << "\nlambdas";
    for (const auto& p : d.points()) os << ' ' << format_double(p.lambda);
    os << '\n';
    for (int j = 0; j < d.m(); ++j) {
        const auto& p = d.point(j);
        os << "point " << j << "\nF\n";
        write_matrix(os, p.F);
        os << "dF\n";
        write_matrix(os, p.dF);
        os << "mask\n";
        write_mask(os, d.mask(j));
    }
    if (!os) throw Error("io", "write failed for " + path.string());
}

SpectralDataset load_dataset(const std::filesystem::path& path) {
    auto in = open_input(path);
    Reader reader(in, path.string());
    const auto magic = reader.expect_key("format", 2);
    if (magic[0] != kDatasetMagic || magic[1] != "1") reader.fail("format", "unsupported format");
    const Dimensions dim = read_dimensions(reader);
    const auto lambda_tokens = reader.expect_key("lambdas", static_cast<std::size_t>(dim.m));
    const std::size_t lambda_line = reader.line();

    std::vector<SpectralPoint> points;
    std::vector<Mask> masks;
    for (int j = 0; j < dim.m; ++j) {
        const double lambda = reader.to_double(lambda_tokens[static_cast<std::size_t>(j)], "lambdas");
        for (int i = 0; i < j; ++i) {
            if (points[static_cast<std::size_t>(i)].lambda == lambda) {
                throw ParseError(path.string(), lambda_line, "lambdas",
                                 "duplicate lambda at point " + std::to_string(j));
            }
        }
        const auto header = reader.expect_key("point", 1);
        if (reader.to_int(header.front(), "point") != j) reader.fail("point", "points out of order");
        const std::size_t point_line = reader.line();
        reader.expect_key("F", 0);
        Matrix F = reader.read_matrix(dim.K, dim.L, "F");
        reader.expect_key("dF", 0);
        Matrix dF = reader.read_matrix(dim.K, dim.L, "dF");
        reader.expect_key("mask", 0);
        Mask mask = reader.read_mask(dim.K, dim.L, "mask");
        if (!mask_covers_block(mask, dim.K)) {
            reader.fail("mask", point_label(j) + ": mask hides an entry of the K x K block");
        }
        for (const auto& [name, x] : {std::pair<const char*, const Matrix*>{"F", &F}, {"dF", &dF}}) {
            if (block_asymmetry(*x, dim.K) > kReciprocityTolerance) {
                throw ParseError(path.string(), point_line, name,
                                 point_label(j) + ": K x K block is not symmetric");
            }
        }
        points.push_back({lambda, std::move(F), std::move(dF)});
        masks.push_back(std::move(mask));
    }
    reader.expect_end();
    return SpectralDataset(std::move(points), dim.K, dim.L, std::move(masks));
}

void save_masks(const std::vector<Mask>& masks, int K, int L, const std::filesystem::path& path) {
    auto os = open_output(path);
    os << "format " << kMaskMagic << " 1\n";
    os << "m " << masks.size() << "\nK " << K << "\nL " << L << '\n';
    for (std::size_t j = 0; j < masks.size(); ++j) {
        if (masks[j].rows() != K || masks[j].cols() != L) {
            throw InvalidArgument("spectral_data", "save_masks: mask must be K x L");
        }
        os << "point " << j << '\n';
        write_mask(os, masks[j]);
    }
}

std::vector<Mask> load_masks(const std::filesystem::path& path) {
    auto in = open_input(path);
    Reader reader(in, path.string());
    const auto magic = reader.expect_key("format", 2);
    if (magic[0] != kMaskMagic || magic[1] != "1") reader.fail("format", "unsupported format");
    const Dimensions dim = read_dimensions(reader);
    std::vector<Mask> masks;
    for (int j = 0; j < dim.m; ++j) {
        const auto header = reader.expect_key("point", 1);
        if (reader.to_int(header.front(), "point") != j) reader.fail("point", "points out of order");
        masks.push_back(reader.read_mask(dim.K, dim.L, "mask"));
    }
    reader.expect_end();
    return masks;
}

}  // namespace lsl
