#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace tock {

// Open-addressing index over externally stored nodes: maps content hashes to
// node ids without storing either one. The owner supplies an equality test
// for probe hits and recomputes hashes when the table grows, so a slot costs
// four bytes where an unordered_map node costs around a hundred. Callers are
// responsible for locking.
class intern_index {
  public:
    // Returns the id of the stored node equal to the candidate, or records
    // and returns `fresh_id`. `eq(id)` compares stored node `id` against the
    // candidate; `hash_of(id)` recomputes a stored node's content hash (used
    // only while growing, so it never sees `fresh_id`).
    template <class Eq, class HashOf>
    uint32_t find_or_insert(uint64_t h, uint32_t fresh_id, Eq&& eq, HashOf&& hash_of) {
        if (slots_.empty()) slots_.assign(1u << 12, 0);
        if ((count_ + 1) * 10 > slots_.size() * 7) grow(hash_of);
        size_t mask = slots_.size() - 1;
        size_t i = size_t(finalize(h)) & mask;
        for (;;) {
            uint32_t s = slots_[i];
            if (s == 0) {
                slots_[i] = fresh_id + 1;
                ++count_;
                return fresh_id;
            }
            if (eq(s - 1)) return s - 1;
            i = (i + 1) & mask;
        }
    }

    size_t size() const { return count_; }

  private:
    template <class HashOf> void grow(HashOf&& hash_of) {
        std::vector<uint32_t> old = std::move(slots_);
        slots_.assign(old.size() * 2, 0);
        size_t mask = slots_.size() - 1;
        for (uint32_t s : old) {
            if (s == 0) continue;
            size_t i = size_t(finalize(hash_of(s - 1))) & mask;
            while (slots_[i] != 0) i = (i + 1) & mask;
            slots_[i] = s;
        }
    }

    // splitmix64 finalizer: the table must not rely on the caller's hash
    // having avalanche behaviour.
    static uint64_t finalize(uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::vector<uint32_t> slots_;
    size_t count_ = 0;
};

// Open-addressing map from 32-bit keys to 32-bit values for dense id spaces
// (state indexing during exploration). Eight bytes per slot.
class flat_u32_map {
  public:
    // Inserts key -> val if the key is absent. Returns {stored value, fresh}.
    std::pair<uint32_t, bool> emplace(uint32_t key, uint32_t val) {
        if (slots_.empty()) slots_.assign(1u << 12, {0, 0});
        if ((count_ + 1) * 10 > slots_.size() * 7) grow();
        size_t mask = slots_.size() - 1;
        size_t i = size_t(finalize(key)) & mask;
        for (;;) {
            auto& s = slots_[i];
            if (s.first == 0) {
                s = {key + 1, val};
                ++count_;
                return {val, true};
            }
            if (s.first == key + 1) return {s.second, false};
            i = (i + 1) & mask;
        }
    }

    size_t size() const { return count_; }

  private:
    void grow() {
        std::vector<std::pair<uint32_t, uint32_t>> old = std::move(slots_);
        slots_.assign(old.size() * 2, {0, 0});
        size_t mask = slots_.size() - 1;
        for (const auto& s : old) {
            if (s.first == 0) continue;
            size_t i = size_t(finalize(s.first - 1)) & mask;
            while (slots_[i].first != 0) i = (i + 1) & mask;
            slots_[i] = s;
        }
    }

    static uint64_t finalize(uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::vector<std::pair<uint32_t, uint32_t>> slots_;
    size_t count_ = 0;
};

} // namespace tock
