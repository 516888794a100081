#include "snlab/graphs.hpp"

#include <algorithm>
#include <stdexcept>

namespace snlab {

namespace {

using u128 = unsigned __int128;
constexpr u128 kU64Max = static_cast<u128>(~std::uint64_t{0});

}  // namespace

GraphFamily GraphFamily::regular_tree(int d) {
    if (d < 3) throw std::invalid_argument("regular tree requires d >= 3");
    return {FamilyKind::RegularTree, d, 0, 0};
}

GraphFamily GraphFamily::cycle(std::uint64_t n) {
    if (n < 3) throw std::invalid_argument("cycle requires n >= 3");
    return {FamilyKind::Cycle, 2, 1, n};
}

GraphFamily GraphFamily::torus(int dim, std::uint64_t side) {
    if (dim < 1) throw std::invalid_argument("torus requires dim >= 1");
    if (side < 3) throw std::invalid_argument("torus requires side >= 3");
    u128 n = 1;
    for (int i = 0; i < dim; ++i) {
        n *= side;
        if (n > kU64Max) throw std::overflow_error("torus too large");
    }
    return {FamilyKind::Torus, 2 * dim, dim, side};
}

std::uint64_t GraphFamily::order() const {
    if (is_tree()) throw std::domain_error("tree is infinite");
    std::uint64_t n = 1;
    for (int i = 0; i < dim; ++i) n *= side;
    return n;
}

std::string GraphFamily::name() const {
    switch (kind) {
        case FamilyKind::RegularTree: return "tree";
        case FamilyKind::Cycle: return "cycle";
        case FamilyKind::Torus: return "torus";
    }
    return "?";
}

std::string to_string(BoundaryPolicy p) { return p == BoundaryPolicy::Absorb ? "absorb" : "reject"; }

BoundaryPolicy boundary_policy_from_string(const std::string& s) {
    if (s == "absorb") return BoundaryPolicy::Absorb;
    if (s == "reject") return BoundaryPolicy::Reject;
    throw std::invalid_argument("unknown boundary policy: " + s);
}

namespace tree_code {

std::optional<std::uint64_t> level_start(int d, int k) {
    if (k == 0) return 0;
    // 1 + d * ((d-1)^(k-1) - 1) / (d-2), accumulated level by level.
    u128 start = 1, width = static_cast<u128>(d);
    for (int j = 1; j < k; ++j) {
        start += width;
        width *= static_cast<u128>(d - 1);
        if (start > kU64Max) return std::nullopt;
    }
    if (start > kU64Max) return std::nullopt;
    return static_cast<std::uint64_t>(start);
}

int max_encodable_depth(int d) {
    int k = 0;
    while (level_start(d, k + 2)) ++k;
    return k;
}

VertexId encode(int d, std::span<const int> path) {
    int k = static_cast<int>(path.size());
    auto start = level_start(d, k);
    auto next = level_start(d, k + 1);
    if (!start || !next) throw std::overflow_error("tree path too deep to encode");
    u128 offset = 0;
    for (int i = 0; i < k; ++i) {
        int radix = i == 0 ? d : d - 1;
        if (path[i] < 0 || path[i] >= radix) throw std::out_of_range("child index out of range");
        offset = offset * static_cast<u128>(radix) + static_cast<u128>(path[i]);
    }
    return static_cast<VertexId>(static_cast<u128>(*start) + offset);
}

std::vector<int> decode(int d, VertexId v) {
    int k = 0;
    while (true) {
        auto next = level_start(d, k + 1);
        if (!next || v < *next) break;
        ++k;
    }
    std::uint64_t offset = v - *level_start(d, k);
    std::vector<int> path(static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
        std::uint64_t radix = i == 0 ? static_cast<std::uint64_t>(d) : static_cast<std::uint64_t>(d - 1);
        path[static_cast<std::size_t>(i)] = static_cast<int>(offset % radix);
        offset /= radix;
    }
    return path;
}

}  // namespace tree_code

Window::Window(GraphFamily family, int radius, BoundaryPolicy policy)
    : family_(family), radius_(radius), policy_(policy) {
    if (radius < 0) throw std::invalid_argument("window radius must be nonnegative");
    if (family_.is_tree()) {
        for (int k = 0;; ++k) {
            auto s = tree_code::level_start(family_.degree, k);
            if (!s) break;
            level_starts_.push_back(*s);
        }
    }
}

int Window::tree_depth(VertexId v) const {
    auto it = std::upper_bound(level_starts_.begin(), level_starts_.end(), v);
    int k = static_cast<int>(it - level_starts_.begin()) - 1;
    if (it == level_starts_.end()) return -1;  // beyond the last complete level
    return k;
}

bool Window::covers_graph() const {
    if (family_.is_tree()) return false;
    int diameter = family_.dim * static_cast<int>(family_.side / 2);
    return radius_ >= diameter;
}

bool Window::contains(VertexId v) const {
    if (family_.is_tree()) {
        int k = tree_depth(v);
        return k >= 0 && k <= radius_;
    }
    if (v >= family_.order()) return false;
    return covers_graph() || torus_distance(0, v) <= radius_;
}

void Window::require(VertexId v) const {
    if (!contains(v)) throw std::domain_error("vertex " + std::to_string(v) + " is outside the window");
}

int Window::depth(VertexId v) const {
    require(v);
    return family_.is_tree() ? tree_depth(v) : torus_distance(0, v);
}

VertexId Window::parent(VertexId v) const {
    if (!family_.is_tree()) throw std::domain_error("parent() on a non-tree family");
    int k = tree_depth(v);
    if (k <= 0) throw std::domain_error("root has no parent");
    std::uint64_t offset = v - level_starts_[static_cast<std::size_t>(k)];
    if (k == 1) return 0;
    return level_starts_[static_cast<std::size_t>(k - 1)] + offset / static_cast<std::uint64_t>(family_.degree - 1);
}

VertexId Window::child(VertexId v, int j) const {
    if (!family_.is_tree()) throw std::domain_error("child() on a non-tree family");
    int d = family_.degree;
    int k = tree_depth(v);
    if (k < 0) throw std::domain_error("vertex not encodable");
    if (k + 2 >= static_cast<int>(level_starts_.size())) throw std::overflow_error("child not encodable");
    if (k == 0) {
        if (j < 0 || j >= d) throw std::out_of_range("child index");
        return 1 + static_cast<std::uint64_t>(j);
    }
    if (j < 0 || j >= d - 1) throw std::out_of_range("child index");
    std::uint64_t offset = v - level_starts_[static_cast<std::size_t>(k)];
    return level_starts_[static_cast<std::size_t>(k + 1)] + offset * static_cast<std::uint64_t>(d - 1) +
           static_cast<std::uint64_t>(j);
}

std::vector<VertexId> Window::children(VertexId v) const {
    int n = v == 0 ? family_.degree : family_.degree - 1;
    std::vector<VertexId> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out.push_back(child(v, j));
    return out;
}

std::vector<std::int64_t> Window::coords(VertexId v) const {
    std::vector<std::int64_t> c(static_cast<std::size_t>(family_.dim));
    for (auto& x : c) {
        x = static_cast<std::int64_t>(v % family_.side);
        v /= family_.side;
    }
    return c;
}

VertexId Window::from_coords(std::span<const std::int64_t> c) const {
    auto side = static_cast<std::int64_t>(family_.side);
    VertexId v = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
        std::int64_t x = ((c[i] % side) + side) % side;
        v = v * family_.side + static_cast<VertexId>(x);
    }
    return v;
}

VertexId Window::shift(VertexId v, int axis, int sign) const {
    std::uint64_t stride = 1;
    for (int i = 0; i < axis; ++i) stride *= family_.side;
    std::uint64_t x = (v / stride) % family_.side;
    std::uint64_t nx = sign > 0 ? (x + 1 == family_.side ? 0 : x + 1) : (x == 0 ? family_.side - 1 : x - 1);
    return v - x * stride + nx * stride;
}

int Window::torus_distance(VertexId u, VertexId v) const {
    int total = 0;
    for (int i = 0; i < family_.dim; ++i) {
        std::uint64_t a = u % family_.side, b = v % family_.side;
        u /= family_.side;
        v /= family_.side;
        std::uint64_t diff = a > b ? a - b : b - a;
        total += static_cast<int>(std::min(diff, family_.side - diff));
    }
    return total;
}

std::vector<Neighbor> Window::neighbors(VertexId v) const {
    require(v);
    std::vector<Neighbor> out;
    out.reserve(static_cast<std::size_t>(family_.degree));
    if (family_.is_tree()) {
        int k = tree_depth(v);
        // Children beyond the encodable range are necessarily outside the window.
        auto child_or_out = [&](int j) -> Neighbor {
            if (k + 1 > radius_) {
                if (k + 2 < static_cast<int>(level_starts_.size())) return {child(v, j), false};
                return {0, false};
            }
            return {child(v, j), true};
        };
        if (k == 0) {
            for (int j = 0; j < family_.degree; ++j) out.push_back(child_or_out(j));
        } else {
            out.push_back({parent(v), true});
            for (int j = 0; j < family_.degree - 1; ++j) out.push_back(child_or_out(j));
        }
        return out;
    }
    for (int axis = 0; axis < family_.dim; ++axis) {
        for (int sign : {+1, -1}) {
            VertexId n = shift(v, axis, sign);
            out.push_back({n, contains(n)});
        }
    }
    return out;
}

bool Window::on_boundary(VertexId v) const {
    for (const auto& n : neighbors(v))
        if (!n.in_window) return true;
    return false;
}

int Window::distance(VertexId u, VertexId v) const {
    require(u);
    require(v);
    if (!family_.is_tree()) return torus_distance(u, v);
    int du = tree_depth(u), dv = tree_depth(v), dist = 0;
    while (du > dv) {
        u = parent(u);
        --du;
        ++dist;
    }
    while (dv > du) {
        v = parent(v);
        --dv;
        ++dist;
    }
    while (u != v) {
        u = parent(u);
        v = parent(v);
        dist += 2;
    }
    return dist;
}

std::uint64_t Window::ball_size() const {
    if (family_.is_tree()) {
        auto s = tree_code::level_start(family_.degree, radius_ + 1);
        if (!s) throw std::overflow_error("tree ball size exceeds 64 bits");
        return *s;
    }
    // Per-axis distance histogram, convolved across axes.
    std::uint64_t side = family_.side;
    std::vector<std::uint64_t> axis(side / 2 + 1, 0);
    for (std::uint64_t x = 0; x < side; ++x) axis[std::min(x, side - x)] += 1;
    std::vector<std::uint64_t> hist{1};
    for (int i = 0; i < family_.dim; ++i) {
        std::vector<std::uint64_t> next(hist.size() + axis.size() - 1, 0);
        for (std::size_t a = 0; a < hist.size(); ++a)
            for (std::size_t b = 0; b < axis.size(); ++b) next[a + b] += hist[a] * axis[b];
        hist.swap(next);
    }
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < hist.size() && static_cast<int>(k) <= radius_; ++k) total += hist[k];
    return total;
}

std::vector<VertexId> Window::vertices(std::uint64_t limit) const {
    std::uint64_t n = ball_size();
    if (n > limit) throw std::length_error("window too large to enumerate");
    std::vector<VertexId> out;
    out.reserve(n);
    if (family_.is_tree()) {
        for (VertexId v = 0; v < n; ++v) out.push_back(v);
        return out;
    }
    std::uint64_t order = family_.order();
    for (VertexId v = 0; v < order; ++v)
        if (covers_graph() || torus_distance(0, v) <= radius_) out.push_back(v);
    return out;
}

int left_count(int d) { return (d - 1) / 2; }

std::pair<std::vector<VertexId>, std::vector<VertexId>> left_right_split(const Window& w, VertexId a) {
    if (!w.family().is_tree()) throw std::domain_error("left_right_split requires a tree family");
    if (!w.contains(a)) throw std::domain_error("vertex outside the window");
    int d = w.degree();
    int l = left_count(d);
    int n = a == w.root() ? d : d - 1;
    std::pair<std::vector<VertexId>, std::vector<VertexId>> out;
    for (int j = 0; j < n; ++j) (j < l ? out.first : out.second).push_back(w.child(a, j));
    return out;
}

}  // namespace snlab
