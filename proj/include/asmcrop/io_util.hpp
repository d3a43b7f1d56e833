#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace asmcrop {

// Little-endian binary cursor helpers shared by the ASM1/ASMW codecs.
struct ByteWriter {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void f32(float v);
    void f64(double v);
    void raw(const void* data, std::size_t n);
};

struct ByteReader {
    const std::uint8_t* data = nullptr;
    std::size_t size = 0;
    std::size_t pos = 0;

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    float f32();
    double f64();
    void raw(void* out, std::size_t n);
    std::size_t remaining() const { return size - pos; }

private:
    void need(std::size_t n);
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// All output files go through a temp-file + rename so a failed run never
// leaves a partially written artifact behind.
void atomic_write_file(const std::filesystem::path& path, const void* data, std::size_t size);
void atomic_write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void atomic_write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace asmcrop
