#include <cstdint>
#include <iostream>
#include <unordered_map>

std::uint64_t fib(int n, std::unordered_map<int, std::uint64_t> &memo) {
    if (n < 2) return n;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    auto value = fib(n - 1, memo) + fib(n - 2, memo);
    memo[n] = value;
    return value;
}

int main() {
    std::unordered_map<int, std::uint64_t> memo;
    for (int i = 0; i <= 50; i += 10)
        std::cout << "fib(" << i << ") = " << fib(i, memo) << "\n";
}
