#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snlab/graphs.hpp"

namespace snlab {

// Compact handle for a window vertex inside a SiteSpace.
using Site = std::uint32_t;
inline constexpr Site kNoSite = ~Site{0};

// Position that may sit below the materialized part of a lazy tree: `excess`
// levels under `anchor` along children that were never created.
struct Cursor {
    Site anchor = 0;
    int excess = 0;
    bool operator==(const Cursor&) const = default;
};

// Indexable view of a Window. Two backends:
//   explicit  every window vertex gets a dense site with a neighbor table;
//   lazy      tree only, sites are created on demand, so windows whose ball
//             does not fit in memory (or in 64-bit codes) are still usable.
// Slot order matches Window::neighbors: on trees slot 0 is the parent and the
// remaining slots are children in index order (the root has children only).
class SiteSpace {
public:
    static SiteSpace explicit_window(const Window& w, std::uint64_t limit = 20'000'000);
    static SiteSpace lazy_tree(const Window& w);

    const Window& window() const { return window_; }
    bool lazy() const { return lazy_; }
    int degree() const { return degree_; }
    Site root() const { return 0; }
    std::size_t size() const;

    // Neighbor through `slot`, or kNoSite if it lies outside the window.
    // Lazy spaces create the site if needed.
    Site neighbor(Site s, int slot);
    // Advances a cursor without creating sites. Returns false if the move
    // leaves the window (cursor unchanged).
    bool step(Cursor& c, int slot) const;
    // Number of in-window slots at s, written in slot order to `out`.
    int admissible_slots(Site s, std::span<int> out) const;

    int depth(Site s) const;
    int depth(const Cursor& c) const { return depth(c.anchor) + c.excess; }
    bool on_boundary(Site s) const;
    // Stable 64-bit key used to address randomness attached to a site.
    std::uint64_t key(Site s) const;
    bool has_vertex(Site s) const;
    VertexId vertex(Site s) const;
    // Site for a window vertex (lazy spaces create the path to it).
    Site site_of(VertexId v);
    // Site reached from the root along a child-index path (trees).
    Site descend(std::span<const int> path);
    Site parent(Site s) const;

private:
    struct Node {
        Site parent = kNoSite;
        std::int32_t depth = 0;
        std::int32_t child_index = -1;
        std::uint32_t children = kNoSite;  // offset into pool_, allocated on first use
        std::uint64_t key = 0;
        std::uint64_t code = kNoCode;
    };
    static constexpr std::uint64_t kNoCode = ~std::uint64_t{0};

    explicit SiteSpace(const Window& w) : window_(w), degree_(w.degree()) {}
    Site child(Site s, int j);
    int child_count(Site s) const { return s == 0 ? degree_ : degree_ - 1; }

    Window window_;
    bool lazy_ = false;
    int degree_ = 2;

    // explicit backend
    std::vector<VertexId> vertices_;
    std::vector<Site> table_;
    std::vector<std::int32_t> depth_;
    std::vector<std::uint8_t> boundary_;
    bool identity_ = false;  // site == vertex id

    // lazy backend
    std::vector<Node> nodes_;
    std::vector<Site> pool_;
};

}  // namespace snlab
