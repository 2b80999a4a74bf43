#include <cstdio>
#include <stdexcept>

class File {
public:
    File(const char *path, const char *mode) : f_(std::fopen(path, mode)) {
        if (!f_) throw std::runtime_error("cannot open file");
    }
    ~File() { std::fclose(f_); }
    File(const File &) = delete;
    File &operator=(const File &) = delete;
    std::FILE *get() const { return f_; }

private:
    std::FILE *f_;
};

int main() {
    File out("/tmp/raii.txt", "w");
    std::fputs("written through RAII\n", out.get());
    return 0;
}
