#include <cstdio>

int main() {
  std::puts("qpulse: CLI not wired up yet");
  return 1;
}
