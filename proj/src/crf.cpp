#include "blurforge/crf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace blurforge {

namespace {

// Debevec hat weight with z_min = 0, z_max = 255: saturated codes carry no
// weight.
double hat_weight(int z) {
    return z <= 127 ? static_cast<double>(z) : static_cast<double>(255 - z);
}

// Pool-adjacent-violators projection onto non-decreasing sequences.
void isotonic_non_decreasing(std::vector<double>& g) {
    const std::size_t n = g.size();
    std::vector<double> value(n);
    std::vector<std::size_t> count(n);
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < n; ++i) {
        value[blocks] = g[i];
        count[blocks] = 1;
        ++blocks;
        while (blocks > 1 && value[blocks - 2] >= value[blocks - 1]) {
            const double merged = (value[blocks - 2] * count[blocks - 2] +
                                   value[blocks - 1] * count[blocks - 1]) /
                                  static_cast<double>(count[blocks - 2] + count[blocks - 1]);
            count[blocks - 2] += count[blocks - 1];
            value[blocks - 2] = merged;
            --blocks;
        }
    }
    std::size_t k = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t i = 0; i < count[b]; ++i) g[k++] = value[b];
}

// Breaks flat runs left by the isotonic projection by spreading a minimal
// epsilon (1e-7 in the log domain, capped at half the gap to the next
// distinct value) across each run.
void break_flat_runs(std::vector<double>& g) {
    constexpr double kEps = 1e-7;
    const std::size_t n = g.size();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && g[j + 1] == g[i]) ++j;
        if (j > i) {
            const std::size_t len = j - i + 1;
            double eps = kEps;
            if (j + 1 < n) eps = std::min(eps, (g[j + 1] - g[i]) / 2.0);
            const double step = eps / static_cast<double>(len);
            for (std::size_t k = 0; k < len; ++k) g[i + k] = g[i] + static_cast<double>(k) * step;
        }
        i = j + 1;
    }
}

}  // namespace

void ExposureStack::validate() const {
    if (images.size() < 2) throw InputError("exposure stack needs at least 2 images");
    if (exposure_times.size() != images.size())
        throw InputError("exposure stack: one exposure time per image required");
    for (std::size_t i = 1; i < images.size(); ++i)
        if (!images[i].same_shape(images[0]))
            throw InputError("exposure stack: image dimensions differ");
    for (std::size_t i = 0; i < exposure_times.size(); ++i) {
        if (!(exposure_times[i] > 0.0))
            throw CalibrationDegenerateError("exposure times must be positive");
        if (i > 0 && !(exposure_times[i] > exposure_times[i - 1]))
            throw CalibrationDegenerateError("exposure times must be strictly increasing");
    }
}

void CrfCurve::validate() const {
    for (const auto& ch : g) {
        if (ch.size() != 256) throw InputError("CrfCurve: 256 entries per channel required");
        for (std::size_t z = 1; z < 256; ++z)
            if (ch[z] < ch[z - 1]) throw InvalidCurveError("CrfCurve: response not non-decreasing");
        for (std::size_t z = 1; z < 254; ++z)
            if (!(ch[z + 1] > ch[z]))
                throw InvalidCurveError("CrfCurve: response not strictly increasing on [1,254]");
    }
    if (anchor_code < 0 || anchor_code > 255) throw InputError("CrfCurve: anchor code out of range");
}

void InverseCrf::validate() const {
    for (int c = 0; c < 3; ++c) {
        const auto& t = table[c];
        if (!(t[0] >= 0.0)) throw InvalidCurveError("InverseCrf: table[0] < 0");
        if (t[255] != 1.0) throw InvalidCurveError("InverseCrf: table[255] != 1");
        for (int p = 1; p < 256; ++p)
            if (!(t[p] > t[p - 1]))
                throw InvalidCurveError("InverseCrf: table not strictly increasing");
        if (!(slope[c] > 0.0)) throw InvalidCurveError("InverseCrf: non-positive extension slope");
    }
}

CrfCurve calibrate_crf(const ExposureStack& stack, double lambda_smooth, int sample_grid) {
    stack.validate();
    if (lambda_smooth < 0.0) throw InputError("lambda_smooth must be non-negative");
    if (sample_grid < 4) throw InputError("sample_grid must be at least 4");

    const int height = stack.images[0].height();
    const int width = stack.images[0].width();
    const int grid_y = std::min(sample_grid, height);
    const int grid_x = std::min(sample_grid, width);
    const int n_samples = grid_y * grid_x;
    const int n_images = static_cast<int>(stack.images.size());

    // samples x images >= 256 + samples keeps the system overdetermined.
    if (static_cast<long>(n_samples) * n_images < 256 + n_samples)
        throw InputError("not enough samples for an overdetermined system; "
                         "increase sample_grid or add exposures");

    // Uniform spatial grid shared across exposures.
    std::vector<int> ys(grid_y), xs(grid_x);
    for (int i = 0; i < grid_y; ++i) ys[i] = static_cast<int>((i + 0.5) * height / grid_y);
    for (int j = 0; j < grid_x; ++j) xs[j] = static_cast<int>((j + 0.5) * width / grid_x);

    std::vector<double> log_times(n_images);
    for (int j = 0; j < n_images; ++j) log_times[j] = std::log(stack.exposure_times[j]);

    CrfCurve curve;
    curve.anchor_code = 128;
    for (auto& ch : curve.g) ch.assign(256, 0.0);

    bool degenerate = false;
    std::string degenerate_msg;

#pragma omp parallel for schedule(static)
    for (int c = 0; c < 3; ++c) {
        const int cols = 256 + n_samples;
        const int rows = n_samples * n_images + 1 + 254;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);

        int r = 0;
        for (int s = 0; s < n_samples; ++s) {
            const int y = ys[s / grid_x];
            const int x = xs[s % grid_x];
            for (int j = 0; j < n_images; ++j) {
                const int z = stack.images[j].at(y, x, c);
                const double sw = std::sqrt(hat_weight(z));
                if (sw > 0.0) {
                    A(r, z) = sw;
                    A(r, 256 + s) = -sw;
                    b(r) = sw * log_times[j];
                }
                ++r;
            }
        }
        // Anchor row pins the additive gauge numerically; the exact anchor is
        // re-applied after the solve.
        A(r, 128) = 1.0;
        ++r;
        for (int z = 1; z <= 254; ++z) {
            const double sl = std::sqrt(lambda_smooth * hat_weight(z));
            A(r, z - 1) = sl;
            A(r, z) = -2.0 * sl;
            A(r, z + 1) = sl;
            ++r;
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        qr.setThreshold(1e-10);
        if (qr.rank() < cols) {
#pragma omp critical
            {
                degenerate = true;
                degenerate_msg = "calibration system is singular (channel " +
                                 std::to_string(c) + "); no exposure variation?";
            }
            continue;
        }
        const Eigen::VectorXd x = qr.solve(b);

        std::vector<double> g(256);
        for (int z = 0; z < 256; ++z) g[z] = x(z);

        isotonic_non_decreasing(g);
        break_flat_runs(g);

        // g is determined up to an additive constant; pin g(128) = 0 exactly.
        const double shift = g[128];
        for (double& v : g) v -= shift;
        g[128] = 0.0;

        curve.g[c] = std::move(g);
    }

    if (degenerate) throw CalibrationDegenerateError(degenerate_msg);
    curve.validate();
    return curve;
}

std::array<double, 256> extend_channel(const std::array<double, 256>& gamma, double& m_out) {
    std::array<double, 256> ext = gamma;
    const double m = (gamma[251] - gamma[249]) / 2.0;
    for (int p = 251; p < 256; ++p) ext[p] = m * static_cast<double>(p - 250) + gamma[250];
    m_out = m;
    return ext;
}

InverseCrf extend_linear(const CrfCurve& curve) {
    curve.validate();
    InverseCrf inv;
    for (int c = 0; c < 3; ++c) {
        std::array<double, 256> gamma{};
        for (int p = 0; p < 256; ++p) gamma[p] = std::exp(curve.g[c][p]);
        double m = 0.0;
        const std::array<double, 256> ext = extend_channel(gamma, m);
        const double norm = ext[255];
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw InvalidCurveError("extended curve has non-positive range");
        for (int p = 0; p < 256; ++p) inv.table[c][p] = ext[p] / norm;
        inv.slope[c] = m / norm;
        for (int p = 1; p < 256; ++p)
            if (!(inv.table[c][p] > inv.table[c][p - 1]))
                throw InvalidCurveError("non-monotonic segment survived isotonic enforcement");
    }
    inv.validate();
    return inv;
}

double linearize_value(std::uint8_t code, const InverseCrf& inv, int channel) {
    return inv.table[channel][code];
}

std::uint8_t encode_value(double v, const InverseCrf& inv, int channel, std::uint64_t& saturated) {
    if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
        ++saturated;
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    }
    const auto& t = inv.table[channel];
    const auto it = std::lower_bound(t.begin(), t.end(), v);
    if (it == t.begin()) return 0;
    if (it == t.end()) return 255;
    const int hi = static_cast<int>(it - t.begin());
    const int lo = hi - 1;
    // Ties break toward the lower code.
    return (v - t[lo] <= t[hi] - v) ? static_cast<std::uint8_t>(lo) : static_cast<std::uint8_t>(hi);
}

LinearImage linearize(const Image8& frame, const InverseCrf& inv) {
    LinearImage out(frame.height(), frame.width());
    const std::uint8_t* src = frame.data();
    double* dst = out.data();
    const std::int64_t n = static_cast<std::int64_t>(frame.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        dst[3 * i + 0] = inv.table[0][src[3 * i + 0]];
        dst[3 * i + 1] = inv.table[1][src[3 * i + 1]];
        dst[3 * i + 2] = inv.table[2][src[3 * i + 2]];
    }
    return out;
}

EncodeResult encode(const LinearImage& frame, const InverseCrf& inv) {
    EncodeResult res{Image8(frame.height(), frame.width()), 0};
    const double* src = frame.data();
    std::uint8_t* dst = res.image.data();
    const std::int64_t n = static_cast<std::int64_t>(frame.pixel_count());
    std::uint64_t saturated = 0;
#pragma omp parallel for schedule(static) reduction(+ : saturated)
    for (std::int64_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) dst[3 * i + c] = encode_value(src[3 * i + c], inv, c, saturated);
    }
    res.saturated = saturated;
    return res;
}

namespace {

void dump_array(std::string& out, const double* v, std::size_t n) {
    char buf[40];
    out += '[';
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        out += buf;
        if (i + 1 < n) out += ',';
    }
    out += ']';
}

}  // namespace

void save_crf_json(const std::string& path, const CrfCurve& curve, const InverseCrf& inv) {
    // Hand-rolled writer: fixed field order, full-precision decimals.
    std::string out;
    out += "{\n  \"schema\": 1,\n";
    out += "  \"anchor_code\": " + std::to_string(curve.anchor_code) + ",\n";
    out += "  \"channels\": [\n";
    char buf[40];
    for (int c = 0; c < 3; ++c) {
        out += "    {\"g\": ";
        dump_array(out, curve.g[c].data(), curve.g[c].size());
        out += ",\n     \"gamma_ext\": ";
        dump_array(out, inv.table[c].data(), inv.table[c].size());
        std::snprintf(buf, sizeof(buf), "%.17g", inv.slope[c]);
        out += ",\n     \"m\": ";
        out += buf;
        out += "}";
        if (c < 2) out += ',';
        out += '\n';
    }
    out += "  ]\n}\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << out;
}

void load_crf_json(const std::string& path, CrfCurve& curve, InverseCrf& inv) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    for (const auto& [key, _] : j.items())
        if (key != "schema" && key != "anchor_code" && key != "channels")
            throw InputError(path + ": unknown field '" + key + "'");
    if (j.value("schema", 0) != 1) throw InputError(path + ": unsupported schema");
    curve.anchor_code = j.at("anchor_code").get<int>();
    const auto& channels = j.at("channels");
    if (!channels.is_array() || channels.size() != 3) throw InputError(path + ": 3 channels required");
    for (int c = 0; c < 3; ++c) {
        const auto& ch = channels[c];
        for (const auto& [key, _] : ch.items())
            if (key != "g" && key != "gamma_ext" && key != "m")
                throw InputError(path + ": unknown channel field '" + key + "'");
        curve.g[c] = ch.at("g").get<std::vector<double>>();
        const auto ext = ch.at("gamma_ext").get<std::vector<double>>();
        if (curve.g[c].size() != 256 || ext.size() != 256)
            throw InputError(path + ": arrays must have 256 entries");
        std::copy(ext.begin(), ext.end(), inv.table[c].begin());
        inv.slope[c] = ch.at("m").get<double>();
    }
    curve.validate();
    inv.validate();
}

}  // namespace blurforge
