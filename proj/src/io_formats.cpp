#include "csplat/io_formats.hpp"

#include "csplat/core.hpp"
#include "csplat/error.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace csplat {

namespace {

constexpr int kShRestCount = 45; // 15 coefficients per channel, channel-major
constexpr int kFullRecordFloats = 62;
constexpr int kDcRecordFloats = 17;

std::vector<std::string> full_property_list() {
    std::vector<std::string> props = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    for (int i = 0; i < kShRestCount; ++i) props.push_back("f_rest_" + std::to_string(i));
    props.insert(props.end(), {"opacity", "scale_0", "scale_1", "scale_2",
                               "rot_0", "rot_1", "rot_2", "rot_3"});
    return props;
}

std::string offset_msg(const std::string& what, size_t offset) {
    return what + " at byte offset " + std::to_string(offset);
}

float read_f32(const std::uint8_t* p) {
    float v;
    std::memcpy(&v, p, 4);
    return v;
}

void append_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint8_t raw[4];
    std::memcpy(raw, &v, 4);
    out.insert(out.end(), raw, raw + 4);
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::vector<Gaussian3D> read_ply(const std::vector<std::uint8_t>& bytes) {
    // Header: line-oriented ASCII until "end_header".
    size_t pos = 0;
    auto next_line = [&]() -> std::string {
        size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        if (pos >= bytes.size()) {
            throw Error(ErrorKind::ParseError, offset_msg("unterminated header line", start));
        }
        std::string line(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
        ++pos;
        return line;
    };

    if (next_line() != "ply") {
        throw Error(ErrorKind::ParseError, offset_msg("missing ply magic", 0));
    }
    size_t vertex_count = 0;
    bool saw_format = false;
    bool saw_vertex = false;
    std::vector<std::string> props;
    while (true) {
        size_t line_offset = pos;
        std::string line = next_line();
        if (line == "end_header") break;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        if (token == "comment") continue;
        if (token == "format") {
            std::string fmt, version;
            ss >> fmt >> version;
            if (fmt != "binary_little_endian" || version != "1.0") {
                throw Error(ErrorKind::ParseError, offset_msg("unsupported format '" + line + "'", line_offset));
            }
            saw_format = true;
        } else if (token == "element") {
            std::string name;
            long long count = -1;
            ss >> name >> count;
            if (name != "vertex" || count < 0) {
                throw Error(ErrorKind::ParseError, offset_msg("unsupported element '" + line + "'", line_offset));
            }
            vertex_count = static_cast<size_t>(count);
            saw_vertex = true;
        } else if (token == "property") {
            std::string type, name;
            ss >> type >> name;
            if (type != "float") {
                throw Error(ErrorKind::ParseError, offset_msg("unsupported property type '" + type + "'", line_offset));
            }
            props.push_back(name);
        } else {
            throw Error(ErrorKind::ParseError, offset_msg("unexpected header line '" + line + "'", line_offset));
        }
    }
    if (!saw_format || !saw_vertex) {
        throw Error(ErrorKind::ParseError, offset_msg("header missing format or vertex element", pos));
    }

    const std::vector<std::string> full = full_property_list();
    bool has_rest;
    if (props.size() == kFullRecordFloats &&
        std::equal(props.begin(), props.end(), full.begin())) {
        has_rest = true;
    } else {
        std::vector<std::string> dc_only(full.begin(), full.begin() + 9);
        dc_only.insert(dc_only.end(), full.begin() + 9 + kShRestCount, full.end());
        if (props.size() == kDcRecordFloats &&
            std::equal(props.begin(), props.end(), dc_only.begin())) {
            has_rest = false;
        } else {
            throw Error(ErrorKind::ParseError, offset_msg("unexpected property order", pos));
        }
    }

    const size_t record_floats = has_rest ? kFullRecordFloats : kDcRecordFloats;
    // vertex_count is attacker-controlled; bound it before multiplying
    if (vertex_count > bytes.size()) {
        throw Error(ErrorKind::ParseError, offset_msg("truncated payload", bytes.size()));
    }
    const size_t need = vertex_count * record_floats * 4;
    if (bytes.size() - pos < need) {
        throw Error(ErrorKind::ParseError, offset_msg("truncated payload", bytes.size()));
    }

    std::vector<Gaussian3D> out(vertex_count);
    const std::uint8_t* p = bytes.data() + pos;
    for (size_t i = 0; i < vertex_count; ++i, p += record_floats * 4) {
        Gaussian3D& g = out[i];
        auto f = [&](int k) { return static_cast<double>(read_f32(p + 4 * k)); };
        g.position = {f(0), f(1), f(2)};
        // normals at 3..5 ignored
        const int coeff_count = has_rest ? kMaxShCoeffs : 1;
        g.sh_coeffs.assign(coeff_count, Eigen::Vector3d::Zero());
        g.sh_coeffs[0] = {f(6), f(7), f(8)};
        int at = 9;
        if (has_rest) {
            for (int ch = 0; ch < 3; ++ch) {
                for (int c = 1; c < kMaxShCoeffs; ++c) {
                    g.sh_coeffs[c][ch] = f(at + ch * 15 + (c - 1));
                }
            }
            at += kShRestCount;
        }
        g.opacity_logit = f(at++);
        g.log_scales = {f(at), f(at + 1), f(at + 2)};
        at += 3;
        g.rotation = {f(at), f(at + 1), f(at + 2), f(at + 3)};
    }
    return out;
}

std::vector<std::uint8_t> write_ply(const std::vector<Gaussian3D>& gaussians) {
    std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                         std::to_string(gaussians.size()) + "\n";
    for (const std::string& name : full_property_list()) {
        header += "property float " + name + "\n";
    }
    header += "end_header\n";

    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + gaussians.size() * kFullRecordFloats * 4);
    for (const Gaussian3D& g : gaussians) {
        auto f = [&](double v) { append_f32(out, static_cast<float>(v)); };
        f(g.position.x());
        f(g.position.y());
        f(g.position.z());
        f(0.0);
        f(0.0);
        f(0.0);
        f(g.sh_coeffs[0].x());
        f(g.sh_coeffs[0].y());
        f(g.sh_coeffs[0].z());
        for (int ch = 0; ch < 3; ++ch) {
            for (int c = 1; c < kMaxShCoeffs; ++c) {
                double v = c < static_cast<int>(g.sh_coeffs.size()) ? g.sh_coeffs[c][ch] : 0.0;
                f(v);
            }
        }
        f(g.opacity_logit);
        f(g.log_scales.x());
        f(g.log_scales.y());
        f(g.log_scales.z());
        for (int k = 0; k < 4; ++k) f(g.rotation[k]);
    }
    return out;
}

std::vector<Camera> read_cameras(const std::string& text) {
    std::vector<Camera> cameras;
    std::istringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::vector<double> tokens;
        double v;
        while (ss >> v) tokens.push_back(v);
        if (tokens.empty()) continue;
        if (tokens.size() != 17) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_number) + ": expected 17 tokens, got " +
                                                   std::to_string(tokens.size()));
        }
        Camera cam;
        cam.width = static_cast<int>(tokens[1]);
        cam.height = static_cast<int>(tokens[2]);
        cam.fx = tokens[3];
        cam.fy = tokens[4];
        cam.rotation << tokens[5], tokens[6], tokens[7],
                        tokens[9], tokens[10], tokens[11],
                        tokens[13], tokens[14], tokens[15];
        cam.translation = {tokens[8], tokens[12], tokens[16]};
        if (!(cam.fx > 0.0 && cam.fy > 0.0) || cam.width < 1 || cam.height < 1) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_number) + ": invalid intrinsics");
        }
        Eigen::Matrix3d gram = cam.rotation.transpose() * cam.rotation;
        if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
            cam.rotation.determinant() < 0.0) {
            throw Error(ErrorKind::ParseError,
                        "line " + std::to_string(line_number) + ": rotation block not orthonormal");
        }
        cameras.push_back(cam);
    }
    return cameras;
}

std::string write_cameras(const std::vector<Camera>& cameras) {
    std::string out = "# id width height fx fy r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz\n";
    for (size_t i = 0; i < cameras.size(); ++i) {
        const Camera& c = cameras[i];
        out += std::to_string(i) + " " + std::to_string(c.width) + " " + std::to_string(c.height);
        out += " " + format_g17(c.fx) + " " + format_g17(c.fy);
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) out += " " + format_g17(c.rotation(r, k));
            out += " " + format_g17(c.translation[r]);
        }
        out += "\n";
    }
    return out;
}

std::vector<std::uint8_t> write_ppm(const Image& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
        double clamped = std::min(1.0, std::max(0.0, v));
        out.push_back(static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5)));
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::IoError, "short write to " + path);
}

void write_file(const std::string& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

} // namespace csplat
