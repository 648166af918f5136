/* top of file */
#include <stdio.h>

// line one
// line two
int main(void) {
    int x = 1; /* inline
    spans lines */
    return x; // tail
}
