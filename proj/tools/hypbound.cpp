#include <cstdio>
int main() { std::puts("hypbound"); return 0; }
