#include <cstdio>

int main() {
  std::puts("specdyn: not wired up yet");
  return 2;
}
