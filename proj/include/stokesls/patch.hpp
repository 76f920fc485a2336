// Element patches S(K): recursive face-neighbour growth followed by a
// distance sort of the collocation points, keeping the #S nearest. Ties at
// equal distance break by ascending element index so the construction is
// deterministic. Optionally checks the unisolvence condition (full column
// rank of the P_m Vandermonde on the patch collocation points) and enlarges
// the patch by whole growth rounds when it fails.

#ifndef STOKESLS_PATCH_HPP
#define STOKESLS_PATCH_HPP

#include <optional>

#include "stokesls/mesh.hpp"
#include "stokesls/monomials.hpp"
#include "stokesls/parallel.hpp"

namespace stokesls {

template <int Dim>
struct ElementPatch {
  int owner = -1;
  std::vector<int> members;             // owner first, then by (distance, index)
  std::vector<VecD<Dim>> collocation_points;  // barycenters of members
};

struct PatchConfig {
  int patch_size = 0;               // #S
  std::optional<int> order;         // enables the unisolvence check when set
  int max_enlargements = 3;
};

/// #S used in the published experiments per dimension and order.
inline int default_patch_size(int dim, int m) {
  check(dim == 2 || dim == 3, errc::config, "dimension must be 2 or 3");
  check(m >= 1 && m <= 3, errc::unsupported,
        "no tabulated patch size for order " + std::to_string(m) +
            " (pass an explicit patch size)");
  static const int table[2][3] = {{5, 10, 15}, {8, 18, 36}};
  return table[dim - 2][m - 1];
}

namespace detail {

// One growth round: add all face-neighbours of the current set.
template <int Dim>
bool grow_once(const Mesh<Dim>& mesh, std::vector<char>& in_set, std::vector<int>& set) {
  const std::size_t before = set.size();
  for (std::size_t i = 0; i < before; ++i)
    for (int nb : mesh.neighbors(set[i]))
      if (!in_set[nb]) {
        in_set[nb] = 1;
        set.push_back(nb);
      }
  return set.size() > before;
}

template <int Dim>
void sort_by_distance(const Mesh<Dim>& mesh, int owner, std::vector<int>& set) {
  const VecD<Dim> xk = mesh.elements[owner].barycenter;
  std::sort(set.begin(), set.end(), [&](int a, int b) {
    const double da = (mesh.elements[a].barycenter - xk).squaredNorm();
    const double db = (mesh.elements[b].barycenter - xk).squaredNorm();
    return da < db || (da == db && a < b);
  });
}

template <int Dim>
bool unisolvent(const Mesh<Dim>& mesh, int owner, const std::vector<int>& members, int m) {
  const int nm = Monomials<Dim>::count(m);
  if (static_cast<int>(members.size()) < nm) return false;
  Eigen::Matrix<double, Eigen::Dynamic, Dim> pts(members.size(), Dim);
  const VecD<Dim> c = mesh.elements[owner].barycenter;
  const double h = mesh.elements[owner].diameter;
  for (std::size_t i = 0; i < members.size(); ++i)
    pts.row(i) = ((mesh.elements[members[i]].barycenter - c) / h).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Monomials<Dim>::values(pts, m));
  return qr.rank() == nm;
}

}  // namespace detail

template <int Dim>
std::vector<ElementPatch<Dim>> build_patches(const Mesh<Dim>& mesh, const PatchConfig& config) {
  const int ne = mesh.element_count();
  check(config.patch_size >= 1, errc::config, "patch size must be positive");
  check(config.patch_size <= ne, errc::config,
        "patch size " + std::to_string(config.patch_size) + " exceeds element count " +
            std::to_string(ne));
  if (config.order)
    check(config.patch_size >= Monomials<Dim>::count(*config.order), errc::config,
          "patch size below dim P_m; the local problems cannot be unisolvent");

  std::vector<ElementPatch<Dim>> patches(ne);
  std::vector<std::string> failures(ne);
  parallel_for(ne, [&](std::size_t k) {
    const int owner = static_cast<int>(k);
    std::vector<char> in_set(ne, 0);
    std::vector<int> set = {owner};
    in_set[owner] = 1;
    while (static_cast<int>(set.size()) < config.patch_size) {
      if (!detail::grow_once(mesh, in_set, set)) {
        failures[k] = "patch growth stalled at element " + std::to_string(owner) +
                      " (disconnected component smaller than the patch size)";
        return;
      }
    }
    detail::sort_by_distance(mesh, owner, set);
    std::vector<int> members(set.begin(), set.begin() + config.patch_size);

    if (config.order) {
      int enlargements = 0;
      while (!detail::unisolvent(mesh, owner, members, *config.order)) {
        if (enlargements >= config.max_enlargements) {
          failures[k] = "patch of element " + std::to_string(owner) +
                        " violates the unisolvence assumption after " +
                        std::to_string(enlargements) + " enlargements";
          return;
        }
        // Re-truncating a bigger candidate set reproduces the same nearest
        // members, so enlargement keeps a full extra growth round.
        detail::grow_once(mesh, in_set, set);
        detail::sort_by_distance(mesh, owner, set);
        members = set;
        ++enlargements;
      }
    }

    ElementPatch<Dim>& p = patches[k];
    p.owner = owner;
    p.members = std::move(members);
    p.collocation_points.reserve(p.members.size());
    for (int j : p.members) p.collocation_points.push_back(mesh.elements[j].barycenter);
  });
  for (const auto& f : failures)
    if (!f.empty()) fail(errc::config, f);
  return patches;
}

}  // namespace stokesls

#endif
