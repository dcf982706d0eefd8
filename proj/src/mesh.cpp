#include "surfpf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "surfpf/errors.hpp"

namespace surfpf {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_volume_of(const std::vector<Vec3>& x, const Tet& t) {
  const Vec3 a = x[t[1]] - x[t[0]];
  const Vec3 b = x[t[2]] - x[t[0]];
  const Vec3 c = x[t[3]] - x[t[0]];
  return a.dot(b.cross(c)) / 6.0;
}

Tet oriented(const std::vector<Vec3>& x, Tet t) {
  if (signed_volume_of(x, t) < 0) std::swap(t[2], t[3]);
  return t;
}

double diameter_of(const std::vector<Vec3>& x, const Tet& t) {
  double d = 0;
  for (const auto& e : kTetEdges) d = std::max(d, (x[t[e[0]]] - x[t[e[1]]]).norm());
  return d;
}

/// Mutable state of the bisection refinement.
class Bisector {
 public:
  Bisector(const BackgroundMesh& mesh, const ImplicitSurface& surface, int target_generation)
      : surface_(surface),
        target_generation_(target_generation),
        vertices_(mesh.vertices),
        ordered_(mesh.ordered),
        tag_(mesh.tag),
        generation_(mesh.generation),
        alive_(mesh.ordered.size(), 1),
        vertex_tets_(mesh.vertices.size()) {
    for (int t = 0; t < static_cast<int>(ordered_.size()); ++t) register_tet(t);
    // Midpoints already present in an input mesh are not tracked; an input
    // mesh is assumed conforming.
  }

  void run(std::size_t max_tets) {
    std::vector<int> marked;
    for (int t = 0; t < static_cast<int>(ordered_.size()); ++t)
      if (needs_refinement(t)) marked.push_back(t);

    std::vector<char> flag;
    while (!marked.empty()) {
      if (n_alive_ + marked.size() > max_tets)
        throw ResourceLimit("refinement would exceed mesh.max_tets = " + std::to_string(max_tets));
      new_edges_.clear();
      std::vector<int> children;
      for (int t : marked) {
        if (!alive_[t]) continue;
        const auto [c1, c2] = bisect(t);
        children.push_back(c1);
        children.push_back(c2);
      }
      flag.assign(ordered_.size(), 0);
      std::vector<int> next;
      auto mark = [&](int t) {
        if (alive_[t] && !flag[t]) {
          flag[t] = 1;
          next.push_back(t);
        }
      };
      for (const auto& [a, b] : new_edges_) {
        for (int s : vertex_tets_[a])
          if (alive_[s] && contains(s, b)) mark(s);
      }
      for (int c : children)
        if (has_hanging_edge(c) || needs_refinement(c)) mark(c);
      std::sort(next.begin(), next.end());
      marked = std::move(next);
    }
  }

  BackgroundMesh finish(const BackgroundMesh& input) {
    BackgroundMesh out;
    out.box = input.box;
    out.cells = input.cells;
    out.vertices = std::move(vertices_);
    for (std::size_t t = 0; t < ordered_.size(); ++t) {
      if (!alive_[t]) continue;
      out.ordered.push_back(ordered_[t]);
      out.tag.push_back(tag_[t]);
      out.generation.push_back(generation_[t]);
      out.tets.push_back(oriented(out.vertices, ordered_[t]));
    }
    return out;
  }

 private:
  void register_tet(int t) {
    for (int v : ordered_[t]) vertex_tets_[v].push_back(t);
    ++n_alive_;
  }

  bool contains(int t, int v) const {
    const Tet& o = ordered_[t];
    return o[0] == v || o[1] == v || o[2] == v || o[3] == v;
  }

  bool has_hanging_edge(int t) const {
    const Tet& o = ordered_[t];
    for (const auto& e : kTetEdges)
      if (midpoints_.count(edge_key(o[e[0]], o[e[1]]))) return true;
    return false;
  }

  bool needs_refinement(int t) const {
    if (generation_[t] >= target_generation_) return false;
    const Tet& o = ordered_[t];
    bool neg = false, pos = false;
    auto classify = [&](const Vec3& x) {
      (is_negative(surface_.phi(x)) ? neg : pos) = true;
    };
    for (int v : o) classify(vertices_[v]);
    for (const auto& e : kTetEdges) classify(0.5 * (vertices_[o[e[0]]] + vertices_[o[e[1]]]));
    if (neg && pos) return true;
    const Vec3 c = 0.25 * (vertices_[o[0]] + vertices_[o[1]] + vertices_[o[2]] + vertices_[o[3]]);
    const double g = surface_.grad_phi(c).norm();
    return std::abs(surface_.phi(c)) <= g * diameter_of(vertices_, o);
  }

  int midpoint(int a, int b) {
    const auto key = edge_key(a, b);
    auto it = midpoints_.find(key);
    if (it != midpoints_.end()) return it->second;
    const int z = static_cast<int>(vertices_.size());
    vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
    vertex_tets_.emplace_back();
    midpoints_.emplace(key, z);
    new_edges_.emplace_back(a, b);
    return z;
  }

  std::pair<int, int> bisect(int t) {
    const Tet o = ordered_[t];
    const int g = tag_[t];
    const int z = midpoint(o[0], o[g]);
    Tet c1{}, c2{};
    int k = 0;
    for (int i = 0; i < g; ++i) c1[k++] = o[i];
    c1[k++] = z;
    for (int i = g + 1; i < 4; ++i) c1[k++] = o[i];
    k = 0;
    for (int i = g; i >= 1; --i) c2[k++] = o[i];
    c2[k++] = z;
    for (int i = g + 1; i < 4; ++i) c2[k++] = o[i];
    const auto child_tag = static_cast<std::uint8_t>(g > 1 ? g - 1 : 3);
    const int child_gen = generation_[t] + 1;

    alive_[t] = 0;
    --n_alive_;
    const int id1 = static_cast<int>(ordered_.size());
    for (const Tet& c : {c1, c2}) {
      ordered_.push_back(c);
      tag_.push_back(child_tag);
      generation_.push_back(child_gen);
      alive_.push_back(1);
      register_tet(static_cast<int>(ordered_.size()) - 1);
    }
    return {id1, id1 + 1};
  }

  const ImplicitSurface& surface_;
  int target_generation_;
  std::vector<Vec3> vertices_;
  std::vector<Tet> ordered_;
  std::vector<std::uint8_t> tag_;
  std::vector<int> generation_;
  std::vector<char> alive_;
  std::vector<std::vector<int>> vertex_tets_;
  std::unordered_map<std::uint64_t, int> midpoints_;
  std::vector<std::pair<int, int>> new_edges_;
  std::size_t n_alive_ = 0;
};

}  // namespace

double BackgroundMesh::signed_volume(int t) const { return signed_volume_of(vertices, tets[t]); }

double BackgroundMesh::volume(int t) const { return std::abs(signed_volume(t)); }

double BackgroundMesh::diameter(int t) const { return diameter_of(vertices, tets[t]); }

double BackgroundMesh::h_at_level(int level) const {
  double h = 0;
  for (int a = 0; a < 3; ++a) h = std::max(h, box.extent(a) / cells[a]);
  return std::ldexp(h, -level);
}

BackgroundMesh build_initial_mesh(const Box& box, std::array<int, 3> cells) {
  if (!box.valid()) throw ConfigError("invalid domain box");
  for (int n : cells)
    if (n < 1) throw ConfigError("cell counts must be positive");
  BackgroundMesh mesh;
  mesh.box = box;
  mesh.cells = cells;
  const int nx = cells[0], ny = cells[1], nz = cells[2];
  auto vid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.vertices.emplace_back(box.lo(0) + box.extent(0) * i / nx,
                                   box.lo(1) + box.extent(1) * j / ny,
                                   box.lo(2) + box.extent(2) * k / nz);

  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> idx{i, j, k};
          Tet o{};
          o[0] = vid(idx[0], idx[1], idx[2]);
          for (int s = 0; s < 3; ++s) {
            ++idx[p[s]];
            o[s + 1] = vid(idx[0], idx[1], idx[2]);
          }
          mesh.ordered.push_back(o);
          mesh.tag.push_back(3);
          mesh.generation.push_back(0);
          mesh.tets.push_back(oriented(mesh.vertices, o));
        }
  mesh.h_band = mesh.h_at_level(0);
  return mesh;
}

BackgroundMesh refine_toward_surface(const BackgroundMesh& mesh, const ImplicitSurface& surface,
                                     const RefinementOptions& options) {
  if (options.target_level < 0) throw ConfigError("mesh.level must be >= 0");
  Bisector bisector(mesh, surface, 3 * options.target_level);
  bisector.run(options.max_tets);
  BackgroundMesh out = bisector.finish(mesh);
  out.target_level = options.target_level;
  out.h_band = out.h_at_level(options.target_level);
  return out;
}

int conformity_violations(const BackgroundMesh& mesh) {
  std::map<std::array<int, 3>, int> faces;
  for (const Tet& t : mesh.tets) {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> f{};
      int k = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) f[k++] = t[i];
      std::sort(f.begin(), f.end());
      ++faces[f];
    }
  }
  const double tol = 1e-12 * std::max({mesh.box.extent(0), mesh.box.extent(1), mesh.box.extent(2)});
  auto on_boundary = [&](const std::array<int, 3>& f) {
    for (int a = 0; a < 3; ++a)
      for (double plane : {mesh.box.lo(a), mesh.box.hi(a)}) {
        bool all = true;
        for (int v : f) all = all && std::abs(mesh.vertices[v][a] - plane) <= tol;
        if (all) return true;
      }
    return false;
  };
  int violations = 0;
  for (const auto& [f, count] : faces) {
    if (count > 2) ++violations;
    else if (count == 1 && !on_boundary(f)) ++violations;
  }
  return violations;
}

LevelsetInterpolant::LevelsetInterpolant(const BackgroundMesh& mesh, const ImplicitSurface& surface)
    : mesh_(&mesh), surface_(&surface), vertex_phi_(mesh.vertices.size()) {
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) vertex_phi_[v] = surface.phi(mesh.vertices[v]);
}

std::array<double, 10> LevelsetInterpolant::tet_values(int t) const {
  const Tet& tet = mesh_->tets[t];
  std::array<double, 10> values{};
  for (int i = 0; i < 4; ++i) values[i] = vertex_phi_[tet[i]];
  for (int e = 0; e < 6; ++e) {
    const Vec3 m = 0.5 * (mesh_->vertices[tet[kTetEdges[e][0]]] + mesh_->vertices[tet[kTetEdges[e][1]]]);
    values[4 + e] = surface_->phi(m);
  }
  return values;
}

Band select_band(const BackgroundMesh& mesh, const LevelsetInterpolant& phi_h) {
  Band band;
  int coarsest = -1;
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto values = phi_h.tet_values(t);
    bool neg = false, pos = false;
    for (double v : values) (is_negative(v) ? neg : pos) = true;
    if (!(neg && pos)) continue;
    band.tet_ids.push_back(t);
    coarsest = coarsest < 0 ? mesh.level_of(t) : std::min(coarsest, mesh.level_of(t));
    for (int v : mesh.tets[t]) band.vertex_ids.push_back(v);
  }
  if (band.tet_ids.empty()) throw EmptyBand("the surface does not cut any tetrahedron");
  std::sort(band.vertex_ids.begin(), band.vertex_ids.end());
  band.vertex_ids.erase(std::unique(band.vertex_ids.begin(), band.vertex_ids.end()), band.vertex_ids.end());
  band.h = mesh.h_at_level(coarsest);
  return band;
}

}  // namespace surfpf
