#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <stdexcept>

namespace tock {

// Append-only storage with stable addresses and lock-free reads. Appends are
// serialized externally (each interning table already holds a mutex while
// inserting); readers may access any index they obtained through a
// synchronized handoff. Elements never move, so concurrent reads during an
// append are safe, unlike std::vector which reallocates.
template <typename T, size_t ChunkBits = 16> class chunked_vector {
    static constexpr size_t chunk_size = size_t(1) << ChunkBits;
    static constexpr size_t chunk_mask = chunk_size - 1;
    static constexpr size_t max_chunks = 1 << 14; // ~1.07e9 elements

  public:
    chunked_vector() {
        for (auto& c : chunks_) c.store(nullptr, std::memory_order_relaxed);
    }
    ~chunked_vector() {
        for (auto& c : chunks_) delete[] c.load(std::memory_order_relaxed);
    }
    chunked_vector(const chunked_vector&) = delete;
    chunked_vector& operator=(const chunked_vector&) = delete;

    size_t size() const { return size_.load(std::memory_order_acquire); }

    // Caller must serialize appends (hold the owning table's mutex).
    size_t push_back(const T& v) {
        size_t i = size_.load(std::memory_order_relaxed);
        T* chunk = ensure_chunk(i >> ChunkBits);
        chunk[i & chunk_mask] = v;
        size_.store(i + 1, std::memory_order_release);
        return i;
    }

    const T& operator[](size_t i) const {
        return chunks_[i >> ChunkBits].load(std::memory_order_acquire)[i & chunk_mask];
    }
    T& operator[](size_t i) {
        return chunks_[i >> ChunkBits].load(std::memory_order_acquire)[i & chunk_mask];
    }

  private:
    T* ensure_chunk(size_t ci) {
        if (ci >= max_chunks) throw std::length_error("chunked_vector capacity exceeded");
        T* p = chunks_[ci].load(std::memory_order_acquire);
        if (!p) {
            p = new T[chunk_size];
            chunks_[ci].store(p, std::memory_order_release);
        }
        return p;
    }

    std::array<std::atomic<T*>, max_chunks> chunks_;
    std::atomic<size_t> size_{0};
};

} // namespace tock
