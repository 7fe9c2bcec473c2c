#include "qmarkov/types.hpp"

#include <algorithm>

namespace qmarkov {

Region::Region(std::initializer_list<int> s) : Region(std::vector<int>(s)) {}

Region::Region(std::vector<int> s) : sites(std::move(s)) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
}

bool Region::contains(int s) const { return std::binary_search(sites.begin(), sites.end(), s); }

bool Region::intersects(const std::vector<int>& other) const {
  for (int s : other)
    if (contains(s)) return true;
  return false;
}

Region region_union(const Region& a, const Region& b) {
  std::vector<int> s = a.sites;
  s.insert(s.end(), b.sites.begin(), b.sites.end());
  return Region(std::move(s));
}

Region complement(const Region& a, int n) {
  std::vector<int> s;
  for (int i = 0; i < n; ++i)
    if (!a.contains(i)) s.push_back(i);
  return Region(std::move(s));
}

}  // namespace qmarkov
