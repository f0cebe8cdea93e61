#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

// Little-endian binary artifact writer. Artifacts are platform-stable
// byte-for-byte on one platform, which the reproducibility checks rely on.
class BinWriter {
public:
    explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path);
    }
    void magic(const char tag[8]) { out_.write(tag, 8); }
    void u64(uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void i64(int64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void f64(double v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void str(const std::string& s) {
        u64(s.size());
        out_.write(s.data(), std::streamsize(s.size()));
    }
    void vec(const std::vector<double>& v) {
        u64(v.size());
        out_.write(reinterpret_cast<const char*>(v.data()),
                   std::streamsize(v.size() * sizeof(double)));
    }
    void close() { out_.close(); }

private:
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot read " + path);
    }
    void expect_magic(const char tag[8]) {
        char buf[8];
        in_.read(buf, 8);
        if (!in_ || std::string(buf, 8) != std::string(tag, 8)) {
            throw std::runtime_error("bad artifact magic");
        }
    }
    uint64_t u64() {
        uint64_t v;
        read(&v, 8);
        return v;
    }
    int64_t i64() {
        int64_t v;
        read(&v, 8);
        return v;
    }
    double f64() {
        double v;
        read(&v, 8);
        return v;
    }
    std::string str() {
        const uint64_t n = u64();
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }
    std::vector<double> vec() {
        const uint64_t n = u64();
        std::vector<double> v(n);
        read(v.data(), n * sizeof(double));
        return v;
    }

private:
    void read(void* dst, size_t n) {
        in_.read(reinterpret_cast<char*>(dst), std::streamsize(n));
        if (!in_) throw std::runtime_error("truncated artifact");
    }
    std::ifstream in_;
};

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

}  // namespace cadence
