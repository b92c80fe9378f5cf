#include "ptmps/pt_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ptmps {

namespace {

constexpr char kMagic[6] = {'P', 'T', 'M', 'P', '1', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    is.read(buf, sizeof(T));
    if (!is) throw io_error("load_pt: truncated stream");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void write_tensor(std::ostream& os, const DenseTensor& t) {
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(e));
    for (const cd& v : t.data()) {
        write_raw<double>(os, v.real());
        write_raw<double>(os, v.imag());
    }
}

DenseTensor read_tensor(std::istream& is) {
    const std::uint32_t rank = read_raw<std::uint32_t>(is);
    if (rank > 64) throw io_error("load_pt: implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (std::uint32_t a = 0; a < rank; ++a) {
        const std::uint32_t e = read_raw<std::uint32_t>(is);
        if (e == 0) throw io_error("load_pt: zero tensor extent");
        shape[a] = e;
        if (n > (std::size_t(1) << 40) / e) throw io_error("load_pt: implausible tensor size");
        n *= e;
    }
    std::vector<cd> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = read_raw<double>(is);
        const double im = read_raw<double>(is);
        data[i] = cd(re, im);
    }
    return DenseTensor(std::move(shape), std::move(data));
}

} // namespace

void save_pt(const ProcessTensorMPS& pt, std::ostream& os) {
    os.write(kMagic, sizeof(kMagic));
    write_raw<std::uint32_t>(os, kVersion);
    write_raw<std::uint8_t>(os, pt.mode == ProcessTensorMPS::Mode::tti ? 1 : 0);
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(pt.d));
    write_raw<double>(os, pt.dt);
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(pt.n_mem));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(pt.sites.size()));
    const std::uint32_t count = static_cast<std::uint32_t>(
        pt.sites.size() + (pt.mode == ProcessTensorMPS::Mode::tti ? 2 : 0));
    write_raw<std::uint32_t>(os, count);
    for (const auto& t : pt.sites) write_tensor(os, t);
    if (pt.mode == ProcessTensorMPS::Mode::tti) {
        write_tensor(os, pt.bulk);
        write_tensor(os, pt.cap);
    }
    if (!os) throw io_error("save_pt: write failed");
}

void save_pt(const ProcessTensorMPS& pt, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("save_pt: cannot open '" + path + "' for writing");
    save_pt(pt, os);
    os.flush();
    if (!os) throw io_error("save_pt: write to '" + path + "' failed");
}

ProcessTensorMPS load_pt(std::istream& is) {
    char magic[sizeof(kMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw io_error("load_pt: bad magic (not a PTMP1 stream)");
    const std::uint32_t version = read_raw<std::uint32_t>(is);
    if (version != kVersion) throw io_error("load_pt: unsupported version");
    const std::uint8_t mode = read_raw<std::uint8_t>(is);
    if (mode > 1) throw io_error("load_pt: bad mode byte");

    ProcessTensorMPS pt;
    pt.mode = mode == 1 ? ProcessTensorMPS::Mode::tti : ProcessTensorMPS::Mode::finite;
    pt.d = read_raw<std::uint32_t>(is);
    pt.dt = read_raw<double>(is);
    pt.n_mem = read_raw<std::uint32_t>(is);
    const std::uint32_t ramp = read_raw<std::uint32_t>(is);
    const std::uint32_t count = read_raw<std::uint32_t>(is);
    const std::uint32_t expected = ramp + (mode == 1 ? 2 : 0);
    if (count != expected) throw io_error("load_pt: tensor count mismatch");

    for (std::uint32_t i = 0; i < ramp; ++i) pt.sites.push_back(read_tensor(is));
    if (mode == 1) {
        pt.bulk = read_tensor(is);
        pt.cap = read_tensor(is);
    }
    if (pt.d < 2) throw io_error("load_pt: bad system dimension");
    const std::size_t D = pt.d * pt.d;
    for (const auto& t : pt.sites)
        if (t.rank() != 3 || t.extent(1) != D)
            throw io_error("load_pt: site tensor shape inconsistent with d");
    if (mode == 1 && (pt.bulk.rank() != 3 || pt.bulk.extent(1) != D || pt.cap.rank() != 1))
        throw io_error("load_pt: bulk/cap tensor shape inconsistent");
    return pt;
}

ProcessTensorMPS load_pt(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("load_pt: cannot open '" + path + "'");
    return load_pt(is);
}

} // namespace ptmps
