#include "hsca/poly.hpp"

#include <mutex>

namespace hsca::poly {

namespace {

void enumerate(int m, int k, int pos, Exponent& cur, std::vector<Exponent>& out) {
    if (pos == m - 1) {
        cur[std::size_t(pos)] = k;
        out.push_back(cur);
        return;
    }
    for (int v = k; v >= 0; --v) {
        cur[std::size_t(pos)] = v;
        enumerate(m, k - v, pos + 1, cur, out);
    }
}

}  // namespace

MonomialTable::MonomialTable(int m, int k) : m_(m), k_(k) {
    clifford::check_dim(m);
    if (k < 0) throw std::invalid_argument("poly: negative degree");
    Exponent cur(std::size_t(m), 0);
    enumerate(m, k, 0, cur, exps_);
    for (int i = 0; i < int(exps_.size()); ++i) lookup_[exps_[std::size_t(i)]] = i;
}

int MonomialTable::index(const Exponent& a) const {
    auto it = lookup_.find(a);
    return it == lookup_.end() ? -1 : it->second;
}

std::shared_ptr<const MonomialTable> MonomialTable::get(int m, int k) {
    static std::map<std::pair<int, int>, std::shared_ptr<const MonomialTable>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{m, k}];
    if (!slot) slot = std::make_shared<const MonomialTable>(m, k);
    return slot;
}

}  // namespace hsca::poly
