#include "hsca/clifford.hpp"

#include <array>
#include <mutex>

namespace hsca::clifford {

Algebra::Algebra(int m) : m_(m), dim_(1 << (m - 1)) {
    check_dim(m);
    sign_.resize(std::size_t(dim_) * dim_);
    for (uint32_t a = 0; a < uint32_t(dim_); ++a)
        for (uint32_t b = 0; b < uint32_t(dim_); ++b) {
            // swaps needed to sort e_A e_B, then one -1 per repeated generator
            int swaps = 0;
            for (uint32_t bb = b; bb; bb &= bb - 1) {
                uint32_t low = bb & (~bb + 1);
                swaps += std::popcount(a & ~(low | (low - 1)));
            }
            swaps += std::popcount(a & b);
            sign_[std::size_t(a) * dim_ + b] = (swaps & 1) ? -1 : 1;
        }
}

const Algebra& Algebra::get(int m) {
    check_dim(m);
    static std::array<std::unique_ptr<Algebra>, kMaxDim + 1> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (!cache[std::size_t(m)]) cache[std::size_t(m)] = std::make_unique<Algebra>(m);
    return *cache[std::size_t(m)];
}

}  // namespace hsca::clifford
