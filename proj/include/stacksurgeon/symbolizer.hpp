/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "stacksurgeon/sample.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stacksurgeon {

/// Immutable after construction; lookups are pure and thread-safe.
/// Addresses not covered by any range fall back to "0x<hex>".
class SymbolIndex {
  public:
    struct Range {
        std::uint64_t start;
        std::uint64_t size;
        std::string name;
    };

    /// Registers [start, start+size) as `name`. Used by the ELF loaders and
    /// directly by tests and replay-table conversion.
    void add_range(std::uint64_t start, std::uint64_t size, std::string name);

    /// Sorts and deduplicates ranges; add_range calls after this are invalid.
    /// Called by the factory functions; idempotent.
    void seal();

    FrameName lookup(std::uint64_t addr) const;

    bool has_symbols() const { return !ranges_.empty(); }
    std::size_t size() const { return ranges_.size(); }
    std::span<const Range> entries() const { return ranges_; }

  private:
    std::vector<Range> ranges_;
    bool sealed_ = false;
};

/// Reads the symbol tables of a live process: every executable mapping in
/// /proc/<pid>/maps is parsed as ELF, its function symbols rebased to
/// runtime addresses. A target without usable symbols yields an empty but
/// usable index (all lookups fall back to hex). Throws TargetNotFound,
/// PermissionDenied.
SymbolIndex build_symbol_index(int pid);

/// Reads the symbol table of one executable/shared object at its link-time
/// addresses. A file that is not ELF or carries no symbols yields an empty
/// usable index. Throws TargetNotFound when the file does not exist.
SymbolIndex build_symbol_index(const std::filesystem::path& executable);

/// Index over a replay session's interned name table: names[i] covers
/// [base + i*stride, base + (i+1)*stride).
SymbolIndex index_from_names(std::span<const std::string> names, std::uint64_t base,
                             std::uint64_t stride);

/// Maps every frame address to a name; output order and length always equal
/// the input's. Never fails.
std::vector<FrameName> resolve(const SymbolIndex& index, const RawSample& sample);

/// Demangles a linkage name and trims the parameter list (everything from
/// the first '('). Non-mangled input passes through, trimmed the same way.
std::string demangle_function_name(const char* linkage_name);

}  // namespace stacksurgeon
