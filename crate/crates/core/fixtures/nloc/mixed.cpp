#define MAX(a, b) ((a) > (b) ? (a) : (b))

namespace demo {

// A comment line
  /* indented block */

int f(int n) {
  int total = 0;
  for (int i = 0; i < n; ++i) {
    total += MAX(i, 3); /* clamp */
  }
  return total;
}

}  // namespace demo
