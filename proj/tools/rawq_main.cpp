#include <cstdio>

int main() {
  std::fprintf(stderr, "rawq: command-line interface not wired up yet\n");
  return 4;
}
