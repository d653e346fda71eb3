/* header
 * spanning lines
 */
#include <cstdio>
int main() { /* inline */ int x = 1;
  /* only comment */
  x++; /* start
  still comment */ x--;
  return x; // done
}
