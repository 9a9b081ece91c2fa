/* The public header must compile as C and the library must link without C++ glue. */
#include <math.h>
#include <stdio.h>

#include "splitree/splitree.h"

int main(void) {
  splitree_model* m = NULL;
  splitree_law* law = NULL;
  double p = 0.0;
  if (splitree_model_create("exp:1", 0.8, &m) != SPLITREE_OK) return 1;
  if (splitree_law_create(m, 0.3, 0.0, 0.0, &law) != SPLITREE_OK) return 2;
  if (splitree_law_p(law, &p) != SPLITREE_OK || fabs(p - 0.375) > 1e-12) return 3;
  if (splitree_model_create("nope", 1.0, NULL) != SPLITREE_E_ARGUMENT) return 4;
  printf("splitree %s: p = %.6f\n", splitree_version(), p);
  splitree_law_free(law);
  splitree_model_free(m);
  return 0;
}
