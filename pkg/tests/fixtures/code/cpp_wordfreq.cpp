#include <algorithm>
#include <iostream>
#include <map>
#include <string>
#include <vector>

int main() {
    std::map<std::string, int> counts;
    std::string word;
    while (std::cin >> word) {
        std::transform(word.begin(), word.end(), word.begin(), ::tolower);
        ++counts[word];
    }
    std::vector<std::pair<std::string, int>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto &a, const auto &b) {
        return a.second > b.second;
    });
    for (const auto &[w, c] : items)
        std::cout << c << "\t" << w << "\n";
    return 0;
}
