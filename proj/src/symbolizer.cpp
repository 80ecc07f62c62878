/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/symbolizer.hpp"

#include "stacksurgeon/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <cxxabi.h>
#include <elf.h>

namespace stacksurgeon {

std::string demangle_function_name(const char* linkage_name) {
    if (!linkage_name || !*linkage_name) {
        return {};
    }
    int status = 0;
    char* demangled = abi::__cxa_demangle(linkage_name, nullptr, nullptr, &status);
    std::string name = (status == 0 && demangled) ? demangled : linkage_name;
    std::free(demangled);
    // Keep the qualified name, drop the parameter list.
    std::size_t paren = name.find('(');
    if (paren != std::string::npos) {
        name.resize(paren);
    }
    while (!name.empty() && name.back() == ' ') {
        name.pop_back();
    }
    return name;
}

void SymbolIndex::add_range(std::uint64_t start, std::uint64_t size, std::string name) {
    if (size == 0 || name.empty()) {
        return;
    }
    ranges_.push_back({start, size, std::move(name)});
    sealed_ = false;
}

void SymbolIndex::seal() {
    if (sealed_) {
        return;
    }
    std::sort(ranges_.begin(), ranges_.end(), [](const Range& a, const Range& b) {
        if (a.start != b.start) {
            return a.start < b.start;
        }
        if (a.size != b.size) {
            return a.size > b.size;  // wider symbol wins a shared start
        }
        return a.name < b.name;
    });
    ranges_.erase(std::unique(ranges_.begin(), ranges_.end(),
                              [](const Range& a, const Range& b) { return a.start == b.start; }),
                  ranges_.end());
    sealed_ = true;
}

FrameName SymbolIndex::lookup(std::uint64_t addr) const {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), addr,
                               [](std::uint64_t a, const Range& r) { return a < r.start; });
    if (it != ranges_.begin()) {
        const Range& range = *std::prev(it);
        if (addr < range.start + range.size) {
            return {range.name, true};
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(addr));
    return {buf, false};
}

std::vector<FrameName> resolve(const SymbolIndex& index, const RawSample& sample) {
    std::vector<FrameName> chain;
    chain.reserve(sample.frames.size());
    for (std::uint64_t addr : sample.frames) {
        chain.push_back(index.lookup(addr));
    }
    return chain;
}

SymbolIndex index_from_names(std::span<const std::string> names, std::uint64_t base,
                             std::uint64_t stride) {
    SymbolIndex index;
    for (std::size_t i = 0; i < names.size(); ++i) {
        index.add_range(base + i * stride, stride, names[i]);
    }
    index.seal();
    return index;
}

namespace {

struct LoadSegment {
    std::uint64_t vaddr;
    std::uint64_t offset;
    std::uint64_t filesz;
    std::uint64_t memsz;
};

struct FunctionSym {
    std::uint64_t value;
    std::uint64_t size;
    std::string name;
    bool from_symtab;
};

struct ElfImage {
    std::vector<LoadSegment> loads;
    std::vector<FunctionSym> functions;  // sorted by value, zero sizes filled
};

bool in_bounds(const std::string& file, std::size_t offset, std::size_t size) {
    return offset <= file.size() && size <= file.size() - offset;
}

void read_symbols(const std::string& file, const Elf64_Shdr& symtab, const Elf64_Shdr& strtab,
                  bool from_symtab, std::vector<FunctionSym>& out) {
    if (!in_bounds(file, symtab.sh_offset, symtab.sh_size) ||
        !in_bounds(file, strtab.sh_offset, strtab.sh_size)) {
        return;
    }
    std::size_t count = symtab.sh_size / sizeof(Elf64_Sym);
    for (std::size_t i = 0; i < count; ++i) {
        Elf64_Sym sym{};
        std::memcpy(&sym, file.data() + symtab.sh_offset + i * sizeof(Elf64_Sym), sizeof(sym));
        unsigned type = ELF64_ST_TYPE(sym.st_info);
        if ((type != STT_FUNC && type != STT_GNU_IFUNC) || sym.st_shndx == SHN_UNDEF ||
            sym.st_value == 0) {
            continue;
        }
        if (sym.st_name == 0 || sym.st_name >= strtab.sh_size) {
            continue;
        }
        const char* raw = file.data() + strtab.sh_offset + sym.st_name;
        std::size_t max_len = strtab.sh_size - sym.st_name;
        if (strnlen(raw, max_len) == max_len) {
            continue;  // unterminated name
        }
        std::string name = demangle_function_name(raw);
        if (name.empty()) {
            continue;
        }
        out.push_back({sym.st_value, sym.st_size, std::move(name), from_symtab});
    }
}

// Parses the ELF64 pieces the symbolizer needs: PT_LOAD segments for bias
// computation plus the function symbols of .symtab/.dynsym. Anything that
// is not a valid ELF64 image yields nullopt.
std::optional<ElfImage> parse_elf(const std::string& file) {
    Elf64_Ehdr header{};
    if (file.size() < sizeof(header)) {
        return std::nullopt;
    }
    std::memcpy(&header, file.data(), sizeof(header));
    if (std::memcmp(header.e_ident, ELFMAG, SELFMAG) != 0 ||
        header.e_ident[EI_CLASS] != ELFCLASS64 || header.e_ident[EI_DATA] != ELFDATA2LSB) {
        return std::nullopt;
    }

    ElfImage image;
    for (std::size_t i = 0; i < header.e_phnum; ++i) {
        std::size_t offset = header.e_phoff + i * header.e_phentsize;
        if (header.e_phentsize < sizeof(Elf64_Phdr) || !in_bounds(file, offset, sizeof(Elf64_Phdr))) {
            break;
        }
        Elf64_Phdr phdr{};
        std::memcpy(&phdr, file.data() + offset, sizeof(phdr));
        if (phdr.p_type == PT_LOAD) {
            image.loads.push_back({phdr.p_vaddr, phdr.p_offset, phdr.p_filesz, phdr.p_memsz});
        }
    }

    std::vector<Elf64_Shdr> sections(header.e_shnum);
    for (std::size_t i = 0; i < header.e_shnum; ++i) {
        std::size_t offset = header.e_shoff + i * header.e_shentsize;
        if (header.e_shentsize < sizeof(Elf64_Shdr) || !in_bounds(file, offset, sizeof(Elf64_Shdr))) {
            if (image.loads.empty()) {
                return std::nullopt;
            }
            return image;  // stripped of section data; loads still usable
        }
        std::memcpy(&sections[i], file.data() + offset, sizeof(Elf64_Shdr));
    }
    for (const Elf64_Shdr& section : sections) {
        if ((section.sh_type != SHT_SYMTAB && section.sh_type != SHT_DYNSYM) ||
            section.sh_link >= sections.size()) {
            continue;
        }
        read_symbols(file, section, sections[section.sh_link], section.sh_type == SHT_SYMTAB,
                     image.functions);
    }

    std::sort(image.functions.begin(), image.functions.end(),
              [](const FunctionSym& a, const FunctionSym& b) {
                  if (a.value != b.value) {
                      return a.value < b.value;
                  }
                  return a.from_symtab > b.from_symtab;  // prefer .symtab at shared addresses
              });
    image.functions.erase(
        std::unique(image.functions.begin(), image.functions.end(),
                    [](const FunctionSym& a, const FunctionSym& b) { return a.value == b.value; }),
        image.functions.end());
    // Assembly entry points often carry size 0; extend them to the next
    // symbol so leaf samples inside still resolve.
    for (std::size_t i = 0; i < image.functions.size(); ++i) {
        if (image.functions[i].size == 0) {
            std::uint64_t next = i + 1 < image.functions.size() ? image.functions[i + 1].value
                                                                : image.functions[i].value + 0x1000;
            image.functions[i].size = next - image.functions[i].value;
        }
    }
    return image;
}

std::optional<std::string> read_whole_file(const std::filesystem::path& path) {
    std::ifstream file{path, std::ios::binary};
    if (!file) {
        return std::nullopt;
    }
    std::ostringstream content;
    content << file.rdbuf();
    return std::move(content).str();
}

struct Mapping {
    std::uint64_t start;
    std::uint64_t end;
    std::uint64_t file_offset;
    std::string path;
};

std::vector<Mapping> read_exec_mappings(int pid) {
    std::string maps_path = "/proc/" + std::to_string(pid) + "/maps";
    std::ifstream maps{maps_path};
    if (!maps) {
        if (errno == EACCES || errno == EPERM) {
            throw Error(ErrorCode::PermissionDenied, "cannot read " + maps_path);
        }
        throw Error(ErrorCode::TargetNotFound, "no such process: " + std::to_string(pid));
    }
    std::vector<Mapping> mappings;
    std::string line;
    while (std::getline(maps, line)) {
        unsigned long long start = 0;
        unsigned long long end = 0;
        unsigned long long offset = 0;
        char perms[5] = {};
        if (std::sscanf(line.c_str(), "%llx-%llx %4s %llx", &start, &end, perms, &offset) != 4) {
            continue;
        }
        if (perms[2] != 'x') {
            continue;
        }
        std::size_t path_pos = line.find('/');
        if (path_pos == std::string::npos) {
            continue;  // anonymous or [vdso]-style mapping
        }
        std::string path = line.substr(path_pos);
        constexpr std::string_view kDeleted = " (deleted)";
        if (path.ends_with(kDeleted)) {
            path.resize(path.size() - kDeleted.size());
        }
        mappings.push_back({start, end, offset, std::move(path)});
    }
    return mappings;
}

}  // namespace

SymbolIndex build_symbol_index(const std::filesystem::path& executable) {
    std::optional<std::string> file = read_whole_file(executable);
    if (!file) {
        throw Error(ErrorCode::TargetNotFound, "cannot read executable: " + executable.string());
    }
    SymbolIndex index;
    if (std::optional<ElfImage> image = parse_elf(*file)) {
        for (const FunctionSym& fn : image->functions) {
            index.add_range(fn.value, fn.size, fn.name);
        }
    }
    index.seal();
    return index;
}

SymbolIndex build_symbol_index(int pid) {
    std::vector<Mapping> mappings = read_exec_mappings(pid);
    std::map<std::string, std::optional<ElfImage>> images;
    SymbolIndex index;
    for (const Mapping& mapping : mappings) {
        auto it = images.find(mapping.path);
        if (it == images.end()) {
            std::optional<ElfImage> image;
            if (std::optional<std::string> file = read_whole_file(mapping.path)) {
                image = parse_elf(*file);
            }
            it = images.emplace(mapping.path, std::move(image)).first;
        }
        if (!it->second) {
            continue;
        }
        const ElfImage& image = *it->second;
        std::uint64_t mapping_len = mapping.end - mapping.start;
        for (const LoadSegment& load : image.loads) {
            // Segment file range must overlap the mapping's file window;
            // p_offset may sit above the page-floored mapping offset.
            if (load.offset + load.filesz <= mapping.file_offset ||
                load.offset >= mapping.file_offset + mapping_len) {
                continue;
            }
            // runtime(v) = map_start + (segment file position of v) - map_offset
            std::uint64_t bias =
                mapping.start - mapping.file_offset + load.offset - load.vaddr;
            for (const FunctionSym& fn : image.functions) {
                if (fn.value >= load.vaddr && fn.value < load.vaddr + load.memsz) {
                    index.add_range(fn.value + bias, fn.size, fn.name);
                }
            }
        }
    }
    index.seal();
    return index;
}

}  // namespace stacksurgeon
