#include "snlab/site_space.hpp"

#include <algorithm>
#include <stdexcept>

#include "snlab/rng.hpp"

namespace snlab {

SiteSpace SiteSpace::explicit_window(const Window& w, std::uint64_t limit) {
    SiteSpace sp(w);
    sp.vertices_ = w.vertices(limit);
    const std::size_t n = sp.vertices_.size();
    if (n >= kNoSite) throw std::length_error("window too large for 32-bit sites");
    sp.identity_ = w.family().is_tree() || w.covers_graph();
    const int d = w.degree();
    sp.table_.assign(n * static_cast<std::size_t>(d), kNoSite);
    sp.depth_.resize(n);
    sp.boundary_.resize(n);
    auto index_of = [&](VertexId v) -> Site {
        if (sp.identity_) return static_cast<Site>(v);
        auto it = std::lower_bound(sp.vertices_.begin(), sp.vertices_.end(), v);
        return static_cast<Site>(it - sp.vertices_.begin());
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto nb = w.neighbors(sp.vertices_[i]);
        bool edge = false;
        for (int j = 0; j < d; ++j) {
            const auto& x = nb[static_cast<std::size_t>(j)];
            if (x.in_window)
                sp.table_[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] = index_of(x.id);
            else
                edge = true;
        }
        sp.depth_[i] = w.depth(sp.vertices_[i]);
        sp.boundary_[i] = edge ? 1 : 0;
    }
    return sp;
}

SiteSpace SiteSpace::lazy_tree(const Window& w) {
    if (!w.family().is_tree()) throw std::domain_error("lazy site space requires a tree window");
    SiteSpace sp(w);
    sp.lazy_ = true;
    Node root;
    root.key = rng::mix64(0x5EEDB0DEULL ^ static_cast<std::uint64_t>(w.degree()));
    root.code = 0;
    sp.nodes_.push_back(root);
    return sp;
}

std::size_t SiteSpace::size() const { return lazy_ ? nodes_.size() : vertices_.size(); }

Site SiteSpace::child(Site s, int j) {
    Node& n = nodes_[s];
    if (n.depth + 1 > window_.radius()) return kNoSite;
    if (n.children == kNoSite) {
        n.children = static_cast<std::uint32_t>(pool_.size());
        pool_.resize(pool_.size() + static_cast<std::size_t>(child_count(s)), kNoSite);
    }
    std::size_t idx = nodes_[s].children + static_cast<std::size_t>(j);
    if (pool_[idx] != kNoSite) return pool_[idx];
    if (nodes_.size() >= kNoSite - 1) throw std::length_error("lazy tree exhausted 32-bit sites");
    const Node& parent = nodes_[s];
    Node c;
    c.parent = s;
    c.depth = parent.depth + 1;
    c.child_index = j;
    c.key = rng::mix64(parent.key + (static_cast<std::uint64_t>(j) + 1) * rng::kGolden);
    if (parent.code != kNoCode && c.depth <= window_.encodable_depth()) c.code = window_.child(parent.code, j);
    Site id = static_cast<Site>(nodes_.size());
    nodes_.push_back(c);
    pool_[idx] = id;
    return id;
}

Site SiteSpace::neighbor(Site s, int slot) {
    if (!lazy_) return table_[static_cast<std::size_t>(s) * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(slot)];
    if (s == 0) return child(s, slot);
    if (slot == 0) return nodes_[s].parent;
    return child(s, slot - 1);
}

bool SiteSpace::step(Cursor& c, int slot) const {
    if (!lazy_) {
        Site n = table_[static_cast<std::size_t>(c.anchor) * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(slot)];
        if (n == kNoSite) return false;
        c.anchor = n;
        return true;
    }
    const Node& a = nodes_[c.anchor];
    if (c.excess > 0) {
        if (slot == 0) {
            --c.excess;
            return true;
        }
        if (a.depth + c.excess + 1 > window_.radius()) return false;
        ++c.excess;
        return true;
    }
    if (c.anchor != 0 && slot == 0) {
        c.anchor = a.parent;
        return true;
    }
    if (a.depth + 1 > window_.radius()) return false;
    int j = c.anchor == 0 ? slot : slot - 1;
    if (a.children != kNoSite) {
        Site n = pool_[a.children + static_cast<std::size_t>(j)];
        if (n != kNoSite) {
            c.anchor = n;
            return true;
        }
    }
    c.excess = 1;
    return true;
}

int SiteSpace::admissible_slots(Site s, std::span<int> out) const {
    int k = 0;
    for (int j = 0; j < degree_; ++j) {
        bool ok;
        if (lazy_) {
            ok = (s != 0 && j == 0) || nodes_[s].depth + 1 <= window_.radius();
        } else {
            ok = table_[static_cast<std::size_t>(s) * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(j)] != kNoSite;
        }
        if (ok) out[static_cast<std::size_t>(k++)] = j;
    }
    return k;
}

int SiteSpace::depth(Site s) const { return lazy_ ? nodes_[s].depth : depth_[s]; }

bool SiteSpace::on_boundary(Site s) const {
    return lazy_ ? nodes_[s].depth == window_.radius() : boundary_[s] != 0;
}

std::uint64_t SiteSpace::key(Site s) const {
    if (lazy_) return nodes_[s].key;
    return rng::mix64(vertices_[s] + 0x7F4A7C159E3779B9ULL);
}

bool SiteSpace::has_vertex(Site s) const { return !lazy_ || nodes_[s].code != kNoCode; }

VertexId SiteSpace::vertex(Site s) const {
    if (!lazy_) return vertices_[s];
    if (nodes_[s].code == kNoCode) throw std::overflow_error("site has no 64-bit vertex code");
    return nodes_[s].code;
}

Site SiteSpace::parent(Site s) const {
    if (!window_.family().is_tree()) throw std::domain_error("parent() on a non-tree space");
    if (s == 0) return kNoSite;
    if (lazy_) return nodes_[s].parent;
    return table_[static_cast<std::size_t>(s) * static_cast<std::size_t>(degree_)];
}

Site SiteSpace::descend(std::span<const int> path) {
    if (!window_.family().is_tree()) throw std::domain_error("descend() on a non-tree space");
    Site s = 0;
    for (int j : path) {
        s = neighbor(s, s == 0 ? j : j + 1);
        if (s == kNoSite) throw std::domain_error("path leaves the window");
    }
    return s;
}

Site SiteSpace::site_of(VertexId v) {
    if (!window_.contains(v)) throw std::domain_error("vertex outside the window");
    if (window_.family().is_tree()) {
        if (lazy_) return descend(tree_code::decode(window_.degree(), v));
        return static_cast<Site>(v);
    }
    if (identity_) return static_cast<Site>(v);
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
    return static_cast<Site>(it - vertices_.begin());
}

}  // namespace snlab
